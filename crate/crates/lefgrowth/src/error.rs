use crate::perm::Point;
use thiserror::Error;

/// Crate-wide error type. Structured variants are used where callers are
/// expected to branch on the failure; free-form variants carry context for
/// precondition violations that should simply be reported.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown generator index {0}")]
    UnknownGenerator(usize),

    #[error("point set exceeds limit: {points} points, limit {limit}")]
    PointLimitExceeded { points: usize, limit: usize },

    /// The action is only stored on a truncated window and the requested
    /// step leaves it.
    #[error("action escapes the truncated window at {point} under {gen}")]
    BoundaryEscape { point: Point, gen: String },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("ring mismatch: {left} vs {right}")]
    RingMismatch { left: String, right: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("edge set is not a tree: {0}")]
    NotATree(String),

    #[error("range mismatch: {0}")]
    RangeMismatch(String),

    #[error("no admissible split for {word} within radius {radius}")]
    NoSplit { word: String, radius: usize },

    #[error("cap {cap} exceeded while {what}")]
    CapExceeded { what: String, cap: usize },

    #[error("serialization: {0}")]
    Serde(String),

    /// A structural invariant failed after an operation that should have
    /// established it. Indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
