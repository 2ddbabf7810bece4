use thiserror::Error;

use crate::shift::Cover;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A documented precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A shift, function or configuration file is malformed.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    /// The presentation trims to nothing.
    #[error("empty shift: the presentation has no infinite path")]
    EmptyShift,
    /// The shift is not transitive; the strongly connected parts are attached.
    #[error("shift is not transitive ({} strongly connected components)", .0.len())]
    NotTransitive(Vec<Cover>),
    /// The Fischer cover is not k-regular with k >= 2.
    #[error("cover must be k-regular with k >= 2")]
    Irregular,
    /// A bounded search ran out of room.
    #[error("search bound exceeded: {0}")]
    Bound(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
