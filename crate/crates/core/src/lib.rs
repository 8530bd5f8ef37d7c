//! Discrete fractional calculus on shifted integer grids.
//!
//! Generalized nabla and delta fractional sums and differences driven by
//! arbitrary convolution kernels, the classical Riemann-Liouville and Caputo
//! operators, Atangana-Baleanu and Caputo-Fabrizio type operators, and a
//! verification engine for the identities that connect them.
//!
//! Everything below [`verify`] is generic over the scalar type ([`Real`],
//! implemented for `f32` and `f64`); the `*64` aliases fix it to `f64`.
//!
//! ```
//! use discrete_frac::{Kernel64, GridFunction64, gen_sum, Mode};
//!
//! let y = GridFunction64::constant(0.0, 3, 1.0).unwrap();
//! let s = gen_sum(&Kernel64::rl_sum(0.5).unwrap(), &y, Mode::Nabla).unwrap();
//! assert!((s.at(2) - 1.5).abs() < 1e-15);
//! ```

pub mod convolution;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod numerics;
pub mod operators;
pub mod scalar;
pub mod verify;

pub use convolution::{delta_convolution, nabla_convolution, nabla_of_convolution};
pub use error::{Error, Result};
pub use grid::{
    backward_difference, forward_difference, BivariateGridFunction, Grid, GridFunction,
};
pub use kernels::{
    builtin_kernel, kernel_from_spec, ml_eval, ml_series, ml_values, parse_kernel_spec, Kernel,
    KernelParams, MlParams,
};
pub use numerics::{falling_factorial, gamma, gamma_ratio, log_abs_gamma, rising_factorial};
pub use operators::{
    classical_frac_diff, classical_frac_sum, g_sum, gc_diff, gen_caputo_diff, gen_rl_diff, gen_sum,
    gr_diff, named_operator, parse_operator_spec, Flavor, Mode, Normalization, OperatorSpec,
};
pub use scalar::Real;
pub use verify::{Verdict, VerifyReport};

pub type Grid64 = Grid<f64>;
pub type GridFunction64 = GridFunction<f64>;
pub type BivariateGridFunction64 = BivariateGridFunction<f64>;
pub type Kernel64 = Kernel<f64>;
pub type MlParams64 = MlParams<f64>;
pub type Normalization64 = Normalization<f64>;
pub type OperatorSpec64 = OperatorSpec<f64>;
