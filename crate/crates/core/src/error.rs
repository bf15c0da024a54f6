use thiserror::Error;

/// Validation and numerical failures raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kappa must be a finite number > 1 (got {0})")]
    Kappa(f64),
    #[error("n must be a power of 2 (got {0}); for other horizons run the next power of 2 (doubling trick)")]
    NotPowerOfTwo(usize),
    #[error("kappa=2 unsupported; use kappa=2±ε")]
    KappaTwo,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
