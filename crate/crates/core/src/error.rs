use std::fmt;

use crate::resource::ResourceVector;

/// A single failed check in a config or model description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

impl Issue {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| format!("  - {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration:\n{}", join_issues(.0))]
    InvalidConfig(Vec<Issue>),

    #[error("cannot subtract {bundle} from pool {pool}: a component would go negative")]
    InfeasibleSubtraction {
        pool: ResourceVector,
        bundle: ResourceVector,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("bundle {0} is not offered in the catalog")]
    UnknownBundle(ResourceVector),

    #[error("no catalog entry for bundle {bundle} with period {period}")]
    UnknownEntry { bundle: ResourceVector, period: u32 },

    #[error("request for {bundle} does not fit the idle pool {pool}")]
    InfeasibleRequest {
        pool: ResourceVector,
        bundle: ResourceVector,
    },

    #[error("{what} needs {needed} but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("unsupported schema version {found:?} (this reader understands {supported:?})")]
    SchemaVersion { found: String, supported: String },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig(vec![Issue::new(field, message)])
    }

    /// Process exit status for this error: 1 validation, 2 I/O, 3 budget.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            Error::BudgetExceeded { .. } => 3,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
