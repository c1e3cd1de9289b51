use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degree mismatch: {left} vs {right}")]
    DegreeMismatch { left: usize, right: usize },

    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("point {point} out of range 1..={n}")]
    PointOutOfRange { point: usize, n: usize },

    #[error("variable x{index} out of range for rank {rank}")]
    VariableOutOfRange { index: usize, rank: usize },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("{what} needs {required} evaluations, budget is {limit}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("word is not reduced")]
    NotReduced,

    #[error("word is not regular")]
    NotRegular,

    #[error("word contains constants")]
    HasConstants,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
