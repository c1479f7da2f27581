use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{what}: size {size} exceeds the exhaustive limit {limit}")]
    SizeLimitExceeded {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("unknown vertex {0}")]
    UnknownVertex(usize),
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex id {0} was retired and cannot be reused")]
    RetiredVertex(usize),
    #[error("unknown qubit {0}")]
    UnknownQubit(usize),
    #[error("forced outcome {forced} is impossible: the measurement is deterministic")]
    ForcedOutcomeImpossible { forced: bool },
    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("unsupported graph class: {0}")]
    UnsupportedClass(String),
    #[error("companion qubit for vertex {0} is no longer live")]
    DeadCompanion(usize),
    #[error("protocol order violation: {0}")]
    ProtocolOrderViolation(String),
    #[error("target mismatch: {0}")]
    TargetMismatch(String),
    #[error("system does not reproduce the target graph: {0}")]
    SystemMismatch(String),
    #[error("insufficient targets: need {needed}, have {available}")]
    InsufficientTargets { needed: usize, available: usize },
    #[error("insufficient auxiliary qubits: need at least {needed}, have {available}")]
    InsufficientAux { needed: usize, available: usize },
    #[error("exact search exhausted at d = {0} without a system")]
    SearchExhausted(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
