use thiserror::Error;

/// Errors raised across the channel, precoder, analytic, Monte Carlo and
/// power-allocation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("null space is empty (numerical rank equals the column count)")]
    EmptyNullSpace,

    #[error("degenerate channel draw: {0}")]
    DegenerateChannel(String),

    #[error("SINR of {link} is infinite (zero interference with noise excluded)")]
    InfiniteSinr { link: String },

    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("quadrature did not reach the requested accuracy (estimate {estimate:e}, error {error:e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("power allocation problem is infeasible: {0}")]
    Infeasible(String),

    #[error("inner power allocation infeasible for MUE {k}: B_k < 0 at the current MBS power")]
    InfeasibleInner { k: usize },

    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("config parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
