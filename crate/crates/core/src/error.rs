use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("graph with {requested} vertices exceeds the vertex budget of {budget}")]
    BudgetExceeded { requested: u128, budget: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("invalid group specification: {0}")]
    InvalidGroup(String),

    #[error("rejection sampling gave up after {attempts} attempts: {what}")]
    RejectionBudget { attempts: usize, what: &'static str },

    #[error("{never} of {total} sweeps never reached the target size (more than 1%)")]
    NeverCrossed { never: usize, total: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("graph has {edges} edges; exhaustive enumeration is limited to {limit}")]
    TooManyEdges { edges: usize, limit: usize },

    #[error("operation requires a {expected} graph")]
    WrongFamily { expected: &'static str },

    #[error("pair ({u}, {v}): {source}")]
    AtPair {
        u: usize,
        v: usize,
        source: Box<Error>,
    },

    #[error("graph file line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
