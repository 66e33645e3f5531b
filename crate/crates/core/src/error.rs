use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("generator sets differ: {0} vs {1}")]
    MixedGeneratorSets(String, String),
    #[error("arithmetic overflow while {0}")]
    Overflow(&'static str),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("rule `{rule}` does not apply at {path:?}: {reason}")]
    RuleMismatch {
        rule: String,
        path: Vec<usize>,
        reason: String,
    },
    #[error("invalid position {0:?}")]
    BadPosition(Vec<usize>),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
