use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gram matrix is singular or numerically degenerate ({0})")]
    SingularGram(String),

    #[error("symplectic structures need an even dimension, got {0}")]
    OddSymplecticDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("non-finite value encountered: {0}")]
    NonFiniteValue(String),

    #[error("adaptive quadrature did not converge within depth {0}")]
    QuadratureNonconvergence(usize),

    #[error("polynomial has a nonzero constant term; the ray integral is undefined")]
    NonzeroConstantTerm,

    #[error("total degree {0} exceeds the supported maximum of 64")]
    DegreeOverflow(u32),

    #[error("operation requires an exact rational Gram matrix")]
    NotRational,

    #[error("trajectory left the ball of radius {bound:e} at t = {time}")]
    BlowUp { time: f64, bound: f64 },

    #[error("maximum number of steps ({0}) exceeded")]
    MaxStepsExceeded(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
