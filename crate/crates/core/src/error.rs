use thiserror::Error;

use crate::scalar::Precision;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("points {first} and {second} coincide")]
    DuplicatePoints { first: usize, second: usize },

    #[error("Szego kernel pole: |x*y| = {product} >= length_scale^2 = {limit}")]
    SzegoPole { product: f64, limit: f64 },

    #[error("damped power series did not converge to tolerance {tolerance} (ratio bound {ratio})")]
    SeriesNotConvergent { tolerance: f64, ratio: f64 },

    #[error("quadrature did not reach tolerance {tolerance} within {budget} evaluations (error estimate {estimate})")]
    QuadratureBudget { tolerance: f64, budget: usize, estimate: f64 },

    #[error("matrix is numerically indefinite at {precision} (pivot {pivot} at step {step}); increase the working precision")]
    NumericallyIndefinite { precision: Precision, step: usize, pivot: f64 },

    #[error("matrix is singular at {precision} (zero pivot at step {step})")]
    Singular { precision: Precision, step: usize },

    #[error("point set is not unisolvent for polynomials of degree {degree}")]
    NotUnisolvent { degree: usize },

    #[error("worst-case error radicand {radicand} is negative beyond the roundoff budget {budget}")]
    InconsistentWorstCase { radicand: f64, budget: f64 },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("scalar type cannot represent {0}")]
    PrecisionMismatch(Precision),

    #[error("Hankel moment matrix is numerically indefinite at {precision}; increase the working precision")]
    HankelIndefinite { precision: Precision },

    #[error("no optimizer restart converged after {restarts} restarts; best wce {best_wce:e} at {points:?}")]
    NotConverged {
        restarts: usize,
        best_wce: f64,
        points: Vec<f64>,
        weights: Vec<f64>,
    },

    #[error("internal check failed: {0}")]
    Internal(String),
}
