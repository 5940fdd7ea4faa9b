use std::fmt;

use thiserror::Error;

/// Player in a Choquet game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Empty,
    Nonempty,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Empty => f.write_str("Empty"),
            Side::Nonempty => f.write_str("Nonempty"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("presentation mismatch: {0}")]
    PresentationMismatch(String),
    #[error("unsupported comparison between {0} and {1}")]
    UnsupportedComparison(&'static str, &'static str),
    #[error("capability error: {0}")]
    Capability(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("illegal move by {side} in round {round}: {reason}")]
    IllegalMove {
        round: usize,
        side: Side,
        reason: String,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("open map invariant violated: {0}")]
    MapInvariant(String),
    #[error("refinement oracle contract violated: {0}")]
    OracleContract(String),
    #[error("construction bug: {0}")]
    Construction(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
