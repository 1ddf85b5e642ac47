use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("instance has no chores")]
    NoChores,
    #[error("agent {agent} has zero disutility for chore {chore}")]
    ZeroDisutility { agent: usize, chore: usize },
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("support enumeration exhausted without an equilibrium")]
    NotFound,
    #[error("equilibrium solver hit its round cap of {0}")]
    BudgetExhausted(usize),
    #[error("chore {0} lost its last payment-graph edge")]
    IsolatedChore(usize),
    #[error("redistribution of edge ({agent}, {chore}) has no other neighbor")]
    DivisionByZeroGuard { agent: usize, chore: usize },
    #[error("agent {agent} would receive a second copy of parent chore {chore}")]
    CopyOfOwnChore { agent: usize, chore: usize },
    #[error("certificate failure: {0}")]
    CertificateFailure(String),
    #[error("expected 3 agents, got {0}")]
    WrongAgentCount(usize),
    #[error("invariant violation at iteration {iteration}: {detail}")]
    InvariantViolation { iteration: usize, detail: String },
    #[error("three-agent loop exceeded {0} iterations")]
    NonTermination(usize),
}

impl Error {
    pub(crate) fn agent(index: usize, limit: usize) -> Self {
        Error::IndexOutOfRange {
            what: "agent",
            index,
            limit,
        }
    }

    pub(crate) fn chore(index: usize, limit: usize) -> Self {
        Error::IndexOutOfRange {
            what: "chore",
            index,
            limit,
        }
    }
}
