use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid root system {family}{rank}: {constraint}")]
    InvalidRootSystem {
        family: char,
        rank: usize,
        constraint: String,
    },

    #[error("node set {0} is not a proper subset of the extended nodes")]
    NotProperSubset(String),

    #[error("invalid node index {node} for rank {rank}")]
    InvalidNode { node: usize, rank: usize },

    #[error("malformed permutation: {0}")]
    MalformedPermutation(String),

    #[error("Weyl group closure exceeded cap {cap} (reached {partial} elements)")]
    WeylCapExceeded { cap: usize, partial: usize },

    #[error("internal consistency failure: {0}")]
    InternalConsistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("point is singular: {0}")]
    SingularPoint(String),

    #[error("{requested} quadrature nodes exceed the budget of {budget}; {suggestion}")]
    Budget {
        requested: u128,
        budget: u128,
        suggestion: String,
    },

    #[error("integration region is empty: {0}")]
    EmptyRegion(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("norm evaluation failed at N = {failed_at} after {} successful points: {source}", partial.len())]
    Scan {
        failed_at: u32,
        partial: Vec<(u32, f64)>,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
