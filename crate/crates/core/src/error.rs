use thiserror::Error;

/// Errors shared across evaluation, tree checking, and the exact solvers.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("atom {0} is not in the carrier")]
    AtomNotInCarrier(String),
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("attribute pool is empty")]
    EmptyPool,
    #[error("pool too coarse: class {class} holds inputs with disjoint answer sets")]
    InsufficientPool { class: usize },
    #[error("exact optimization requires F = \u{2205}, found function symbol `{0}`")]
    NotAttributeStructure(String),
    #[error("enumeration space too large for budget {budget} over {pool} attributes")]
    BudgetTooLargeForEnumeration { budget: u64, pool: usize },
    #[error("family `{family}` does not cover parameter costs up to {requested} (covers {covered})")]
    FamilyNotCostClosed {
        family: String,
        requested: u64,
        covered: u64,
    },
    #[error("contradictory hints: {0}")]
    ContradictoryHints(String),
    #[error("bad truncation: {0}")]
    BadTruncation(String),
    #[error("direct sum blocks must have pairwise distinct levels (duplicate {0})")]
    DuplicateLevels(usize),
    #[error("structure has no predicate named `{0}`")]
    MissingPredicate(String),
    #[error("invalid tau sequence: {0}")]
    InvalidTau(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
