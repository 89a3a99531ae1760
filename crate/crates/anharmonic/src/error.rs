use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid trial function: {0}")]
    InvalidTrial(String),

    #[error("integrand returned a non-finite value at x = {x:e}")]
    NonFiniteIntegrand { x: f64 },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {value:e} with error {err_estimate:e})"
    )]
    QuadratureDidNotConverge {
        value: f64,
        err_estimate: f64,
        subdivisions: usize,
    },

    #[error("grid build: function is non-finite at node x = {x:e}")]
    NonFiniteNode { x: f64 },

    #[error("objective is not finite at the initial point")]
    BadInitialPoint,

    #[error("orthogonality constraints infeasible: {0}")]
    Orthogonality(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no eigenvalue bracket found in the scanned window [{lo}, {hi}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("root is not bracketed by [{lo}, {hi}]")]
    RootNotBracketed { lo: f64, hi: f64 },

    #[error("eigenvalue shifts by {shift:e} when the box is doubled; box size unreliable")]
    BoxSensitivity { shift: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
