use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("loss must be a scalar, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("empty input sequence")]
    EmptySequence,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path} (line {line}): {source}")]
    Io {
        path: PathBuf,
        line: usize,
        #[source]
        source: std::io::Error,
    },

    #[error("vocabulary is empty after applying min_count={min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("class {class} does not occur in the training labels")]
    AbsentClass { class: usize },

    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },

    #[error("need at least two classes, found only {0}")]
    SingleClass(usize),

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("embedding dimension {found} does not match configured dimension {expected}")]
    EmbeddingDim { found: usize, expected: usize },

    #[error("vocabulary hash mismatch: checkpoint {checkpoint}, supplied {supplied}")]
    VocabHash { checkpoint: String, supplied: String },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, line: usize, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            line,
            source,
        }
    }
}
