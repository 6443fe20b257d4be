use thiserror::Error;

/// Crate-wide error type.
///
/// Every fallible operation reports the first violation it encounters with
/// enough context to locate the offending datum; nothing is silently
/// truncated or repaired.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A signature or structure invariant is broken (bad arity, out-of-range
    /// element, duplicate tuple, name clash, ...).
    #[error("invalid structure: {0}")]
    InvalidStructure(String),

    /// A pebble sequence or indexed play is malformed (empty sequence,
    /// pebble out of range, index out of range, over-long sequence).
    #[error("invalid play: {0}")]
    InvalidPlay(String),

    /// A requested materialization would exceed the size budget.
    /// The message records the would-be size and the budget.
    #[error("size budget exceeded: {0}")]
    BudgetExceeded(String),

    /// A path decomposition, linear forest cover, or coalgebra fails its
    /// defining conditions.
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    /// A formula is malformed or outside the accepted fragment.
    #[error("invalid formula: {0}")]
    InvalidFormula(String),

    /// A text document (structure file, formula file, certificate, play
    /// encoding) could not be parsed.
    #[error("parse error: {0}")]
    ParseError(String),

    /// An operation's precondition does not hold (e.g. asking for a
    /// Duplicator strategy out of a Spoiler verdict).
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
