use thiserror::Error;

/// Errors raised when an operation's inputs violate its domain.
///
/// Protocol aborts (eavesdropping detected, too few Case-8 particles) are
/// not errors; they are reported through [`crate::protocol::RunStatus`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is even; private digits are bounded by h = (d-1)/2, which needs odd d")]
    EvenDimension(usize),
    #[error("dimension {0} is too small; need d >= 3")]
    DimensionTooSmall(usize),
    #[error("index {index} out of range for dimension {d}")]
    IndexOutOfRange { index: usize, d: usize },
    #[error("private digit {value} exceeds h = {h}")]
    PrivateDigitOutOfRange { value: usize, h: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operator is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("operator shape {rows}x{cols} does not match joint dimension {expected}")]
    OperatorShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("need at least two users, got {0}")]
    TooFewUsers(usize),
    #[error("missing announcement for position {position} of user {user}")]
    MissingAnnouncement { user: usize, position: usize },
    #[error("transcript did not complete; resources are only counted for completed runs")]
    IncompleteTranscript,
    #[error("efficiency is undefined when sigma + mu = 0")]
    ZeroDenominator,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid attack label: {0}")]
    InvalidAttack(String),
}

pub type Result<T> = std::result::Result<T, Error>;
