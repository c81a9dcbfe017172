use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A quantity that must be real (or nonnegative) came out with a residue
    /// larger than round-off can explain.
    #[error("numerical consistency: {0}")]
    NumericalConsistency(String),

    /// The state is (numerically) an instantaneous eigenstate of the
    /// Hamiltonian: zero speed, curvature undefined.
    #[error("singularity: {0}")]
    Singularity(String),

    #[error("integration unstable at step {step} (norm drift {drift:.3e}); reduce the time step")]
    Instability { step: usize, drift: f64 },

    #[error("efficiency undefined: {0}")]
    UndefinedEfficiency(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
