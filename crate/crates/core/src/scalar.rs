//! The scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// A real floating-point scalar: `f32` or `f64`.
///
/// On top of `num_traits::Float` this adds the signed log-gamma primitive the
/// factorial functions are built on.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// `(ln|Γ(x)|, sign Γ(x))`; the result at a pole is unspecified.
    fn ln_gamma_signed(self) -> (Self, i32);

    /// Lossy conversion from an `f64` constant.
    fn lit(v: f64) -> Self;

    /// Conversion from an offset or count.
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn ln_gamma_signed(self) -> (Self, i32) {
        libm::lgamma_r(self)
    }

    fn lit(v: f64) -> Self {
        v
    }
}

impl Real for f32 {
    fn ln_gamma_signed(self) -> (Self, i32) {
        libm::lgammaf_r(self)
    }

    fn lit(v: f64) -> Self {
        v as f32
    }
}
