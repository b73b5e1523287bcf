use thiserror::Error;

use crate::diagram::{EntityId, ValidationReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error("no such entity {0}")]
    NoSuchEntity(EntityId),

    #[error("invalid diagram: {0}")]
    Invalid(ValidationReport),

    #[error("stale match")]
    StaleMatch,

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dangling ref {0}")]
    DanglingRef(String),

    #[error("unsupported element <{0}>")]
    UnsupportedElement(String),

    #[error("duplicate name {0:?}")]
    DuplicateName(String),

    #[error("cannot decide on partial exploration")]
    IncompleteExploration,

    #[error("normalizer requires deterministic tie handling")]
    NondeterministicPolicy,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
