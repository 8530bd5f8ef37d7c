use thiserror::Error;

/// Everything that can go wrong while building grids, kernels or operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma ratio is infinite: numerator Γ({arg}) sits on a pole")]
    Pole { arg: f64 },

    #[error("grid has no interior points (length 0)")]
    EmptyGrid,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("invalid order {value} for {context}")]
    InvalidOrder { context: String, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("non-finite result: {0}")]
    NonFinite(String),

    #[error("Mittag-Leffler series did not converge at t = {t} within {terms} terms")]
    NoConvergence { t: usize, terms: usize },

    #[error("kernel `{kernel}` is not defined at offset {offset}")]
    KernelOutOfRange { kernel: String, offset: usize },

    #[error("kernel pair is not in the unit nabla class (max deviation {max_error:e}, tolerance {tolerance:e})")]
    ClassPreconditionFailed { max_error: f64, tolerance: f64 },
}

impl Error {
    pub(crate) fn order(context: impl Into<String>, value: f64) -> Self {
        Error::InvalidOrder {
            context: context.into(),
            value,
        }
    }

    /// Whether the error is numeric in nature (as opposed to malformed input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Pole { .. }
                | Error::InvalidOrder { .. }
                | Error::NoConvergence { .. }
                | Error::KernelOutOfRange { .. }
                | Error::ClassPreconditionFailed { .. }
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
