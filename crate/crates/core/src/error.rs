use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("document has no word tokens")]
    EmptyDocument,
    #[error("degenerate profile: {words} words, {sentences} sentences")]
    DegenerateProfile { words: usize, sentences: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}:{line}: invariant violated: {message}")]
    Invariant {
        path: String,
        line: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate record id {0:?}")]
    DuplicateId(String),
    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("lemma {0:?} not in lexicon")]
    UnknownLemma(String),
    #[error("emotion space needs at least {needed} documents, got {got}")]
    InsufficientCorpus { got: usize, needed: usize },
    #[error("emotion {0:?} has no in-vocabulary seed words")]
    EmotionWithoutSeeds(String),
    #[error("emotion {0:?} centroid has zero norm")]
    DegenerateCentroid(String),
    #[error("document has no in-vocabulary words")]
    OutOfVocabularyDocument,
    #[error("emotion space file: {0}")]
    SpaceFormat(String),

    #[error("need at least {needed} rows, got {got}")]
    InsufficientRows { got: usize, needed: usize },
    #[error("dataset has fewer than two classes")]
    SingleClassDataset,
    #[error("class {class:?} has {have} instances, need at least {need}")]
    TooFewInstances {
        class: String,
        have: usize,
        need: usize,
    },
    #[error("non-finite feature at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("expected {expected} features, got {got}")]
    SchemaMismatch { expected: usize, got: usize },
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("zero variance in sample")]
    ZeroVariance,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label {0:?} has no documents")]
    EmptyGroup(String),
    #[error("invalid synthetic corpus spec: {0}")]
    InvalidSpec(String),

    #[error("missing resource for feature group {0}")]
    MissingResource(&'static str),
    #[error("config error at {field}: {message}")]
    Config { field: String, message: String },
    #[error("document {id:?}: {source}")]
    InDocument {
        id: String,
        #[source]
        source: Box<Error>,
    },
    #[error("internal invariant failed: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
