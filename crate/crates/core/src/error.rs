use thiserror::Error;

/// Why a poset failed to qualify as an 8-stack before admissibility was even considered.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StackDefect {
    #[error("poset is not ranked")]
    NotRanked,
    #[error("poset has rank 0; an 8-stack needs rank at least 1")]
    RankZero,
    #[error("level {rank} has {size} elements, expected 4")]
    WrongLevelSize { rank: usize, size: usize },
    #[error("levels {rank} and {} do not induce a catalogued 4+4 layer", rank + 1)]
    NonCatalogLayer { rank: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("cycle detected: `{0}` and `{1}` are mutually comparable")]
    Cycle(String, String),
    #[error("operation requires a nonempty poset")]
    EmptyPoset,
    #[error("input has {size} elements; the limit is {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("search budget of {limit} nodes exhausted")]
    BudgetExhausted { limit: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("poset is not a section")]
    NotASection,
    #[error("not an 8-stack: {0}")]
    NotAnEightStack(StackDefect),
    #[error("8-stack summand is not admissible")]
    InadmissibleStack,
    #[error("irreducible element `{element}` has an orbit-mate `{mate}` that is not irreducible")]
    OrbitNotIrreducible { element: String, mate: String },
}

pub type Result<T> = std::result::Result<T, Error>;
