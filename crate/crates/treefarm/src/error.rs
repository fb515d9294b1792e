use std::path::PathBuf;

/// Errors produced by schema/data loading, tree construction and the farm.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema line {line}: {msg}")]
    Schema { line: usize, msg: String },

    #[error("data row {row}: {msg}")]
    Data { row: usize, msg: String },

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("entropy of an empty distribution is undefined")]
    EmptyDistribution,

    #[error("attribute {attr} is not considered at this node")]
    AttributeNotConsidered { attr: usize },

    #[error("gain slot for attribute {attr} written twice")]
    GainSlotRewritten { attr: usize },

    #[error("node processed out of order: {0}")]
    NodeState(&'static str),

    #[error("attribute-task counter underflow")]
    AttTaskUnderflow,

    #[error("farm worker panicked")]
    WorkerPanicked,

    #[error("farm emitter panicked")]
    EmitterPanicked,

    #[error("farm protocol violation: {0}")]
    Protocol(&'static str),

    #[error("{0}")]
    InvalidConfig(String),

    #[error("tree mismatch between configurations: {0}")]
    TreeMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
