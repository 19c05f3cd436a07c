use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("not a contraction: induced norm {norm} exceeds 1 + tolerance")]
    NotAContraction { norm: f64 },

    #[error("unsupported operator shape: {0}")]
    UnsupportedShape(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("outside the domain of the formula: {0}")]
    OutOfDomain(String),

    #[error("numerical range exceeded: {0}")]
    Range(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
