use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A caller broke an operation's precondition, e.g. acknowledging a packet
    /// the receiver already holds.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("graph has {vertices} vertices, exceeding the enumeration bound of {bound}")]
    ResourceLimit { vertices: usize, bound: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
