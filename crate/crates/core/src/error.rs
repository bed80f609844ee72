use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),

    #[error("field order {0} is outside the supported range 2..=256")]
    UnsupportedSize(u32),

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("enumeration of {count} objects exceeds the cap of {cap}")]
    SizeOverflow { count: String, cap: u64 },

    #[error("{pairs} quorum pairs exceed the brute-force budget of {budget}")]
    BudgetExceeded { pairs: u64, budget: u64 },

    #[error("unknown ground element {0}")]
    UnknownElement(usize),

    #[error("could not draw {wanted} distinct subspaces through point {point} at level {level} within {draws} draws")]
    SamplingExhausted {
        level: usize,
        point: usize,
        wanted: u64,
        draws: u64,
    },

    #[error("invalid arguments: {0}")]
    InvalidArgs(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgs(msg.into())
    }
}
