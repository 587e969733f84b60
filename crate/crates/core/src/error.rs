use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityDomain(f64),

    #[error("posterior is undefined: prior*tpr + (1-prior)*fpr = 0")]
    UndefinedPosterior,

    #[error("invalid token name {0:?}: names must be non-empty and contain no whitespace")]
    InvalidTokenName(String),

    #[error("unknown token id {0}")]
    UnknownTokenId(u32),

    #[error("empty sequence")]
    EmptySequence,

    #[error("clock went backwards: now={now}, last event={last}")]
    ClockRegression { now: u64, last: u64 },

    #[error("context of length {len} exceeds the limit {limit} of rank {rank}")]
    ContextTooLong { rank: usize, len: usize, limit: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("path {0:?} is not part of the multiset")]
    PathNotInMultiset(String),

    #[error("snapshot load error: {0}")]
    Snapshot(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
