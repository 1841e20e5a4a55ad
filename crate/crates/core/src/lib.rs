//! Kernel cubature in the flat limit.
//!
//! Worst-case optimal weights for kernel cubature rules, their polynomial
//! limits as the kernel length-scale grows, Gauss rules built from moments and
//! jointly optimised nodes. Every solver runs either in `f64` or in
//! multiprecision binary floating point ([`BigReal`]).

pub mod cubature;
pub mod error;
pub mod experiments;
pub mod functionals;
pub mod gauss_optimal;
pub mod kernels;
pub mod linalg;
pub mod multi_index;
pub mod points;
pub mod precision;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{BigReal, Precision, Scalar};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
