use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("basis size {n} cannot represent an operator of bandwidth {bandwidth}")]
    BasisTooSmall { n: usize, bandwidth: usize },

    #[error("eigenvalues not converged at basis size {basis_size}: drift {drift:.3e} > tol {tol:.1e}")]
    NotConverged { basis_size: usize, drift: f64, tol: f64, last: Vec<f64>, previous: Vec<f64> },

    #[error("threshold {lambda} lies within {margin:.3e} of eigenvalue {eigenvalue}; choose a safer threshold")]
    AmbiguousThreshold { lambda: f64, eigenvalue: f64, margin: f64 },

    #[error("spectral subspace is empty")]
    EmptySubspace,

    #[error("threshold {lambda} exceeds the converged spectral range (largest converged eigenvalue {max})")]
    OutOfConvergedRange { lambda: f64, max: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("weight overflow: log-weight {log_weight:.1} at box edge {radius:.2}; enlarge the box or lower t")]
    WeightOverflow { log_weight: f64, radius: f64 },

    #[error("restricted Gram matrix is numerically singular (smallest eigenvalue {min_eig:.3e}); refine quadrature")]
    DegenerateGram { min_eig: f64 },

    #[error("controllability Gramian is numerically singular (smallest eigenvalue {min_eig:.3e})")]
    GramianSingular { min_eig: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("tabulated profile does not cover {0}")]
    TableRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
