use thiserror::Error;

use crate::trace::{ActionId, ProcessId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("unknown action `{letter}` at position {position}")]
    UnknownLetter { position: usize, letter: ActionId },

    #[error("unknown action `{0}`")]
    UnknownAction(ActionId),

    #[error("unknown process `{0}`")]
    UnknownProcess(ProcessId),

    #[error("event id {id} out of range (trace has {len} events)")]
    EventOutOfRange { id: usize, len: usize },

    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),

    #[error("malformed execution at event {position}: {reason}")]
    MalformedExecution { position: usize, reason: String },

    #[error("global state budget of {budget} states exceeded")]
    BudgetExceeded { budget: usize },

    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("enumeration limit must be at least 1")]
    InvalidLimit,

    #[error("event id {eid} is not greater than the previous event id {previous}")]
    NonMonotoneEvent { eid: usize, previous: usize },

    #[error("process tree does not match alphabet: {0}")]
    TreeMismatch(String),

    #[error("alphabet is not tree-like: domain of `{action}` is disconnected between `{from}` and `{to}`")]
    NotTreeLike {
        action: ActionId,
        from: ProcessId,
        to: ProcessId,
    },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    /// True for errors that stem from a resource bound rather than bad input.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
