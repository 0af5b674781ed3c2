//! Error type shared across the crate.

use std::fmt;
use std::io;
use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A text input line does not match its expected grammar.
    MalformedLine { line_no: usize, reason: String },
    /// The same intent name appears under two different domains.
    IntentInMultipleDomains {
        intent: String,
        first: String,
        second: String,
    },
    /// No utterances were provided.
    EmptyCorpus,
    /// A word-vector line carries the wrong number of components.
    DimensionMismatch {
        line_no: usize,
        expected: usize,
        found: usize,
    },
    /// A file could not be opened or read.
    UnreadableFile { path: PathBuf, source: io::Error },
    /// An intent name is not present in the hierarchy.
    UnknownIntent(String),
    /// Tensor shapes are incompatible for the requested operation.
    ShapeMismatch(String),
    /// backward() was asked to differentiate a non-scalar node.
    NotScalarLoss { rows: usize, cols: usize },
    /// An encoder was handed an empty sequence.
    EmptySequence,
    /// A domain aggregation was handed an empty intent set.
    EmptyIntentSet,
    /// A label index lies outside the probability vector.
    IndexOutOfRange { index: usize, len: usize },
    /// Training produced a NaN or infinite loss.
    NonFiniteLoss { iteration: usize, loss: f64 },
    /// More negative samples requested than non-target labels exist.
    InsufficientLabels { requested: usize, available: usize },
    /// A snapshot is missing an entry the evaluation needs.
    MissingEmbedding(String),
    /// A query names an entry not present in the snapshot.
    UnknownEntry(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MalformedLine { line_no, reason } => {
                write!(f, "malformed line {}: {}", line_no, reason)
            }
            Error::IntentInMultipleDomains {
                intent,
                first,
                second,
            } => write!(
                f,
                "intent '{}' appears under both '{}' and '{}'",
                intent, first, second
            ),
            Error::EmptyCorpus => write!(f, "corpus contains no utterances"),
            Error::DimensionMismatch {
                line_no,
                expected,
                found,
            } => write!(
                f,
                "line {}: expected {} vector components, found {}",
                line_no, expected, found
            ),
            Error::UnreadableFile { path, source } => {
                write!(f, "cannot read '{}': {}", path.display(), source)
            }
            Error::UnknownIntent(name) => write!(f, "unknown intent '{}'", name),
            Error::ShapeMismatch(what) => write!(f, "shape mismatch: {}", what),
            Error::NotScalarLoss { rows, cols } => {
                write!(f, "loss node must be scalar, got {}x{}", rows, cols)
            }
            Error::EmptySequence => write!(f, "cannot encode an empty sequence"),
            Error::EmptyIntentSet => write!(f, "cannot aggregate an empty intent set"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "label index {} out of range for {} classes", index, len)
            }
            Error::NonFiniteLoss { iteration, loss } => {
                write!(f, "non-finite loss {} at iteration {}", loss, iteration)
            }
            Error::InsufficientLabels {
                requested,
                available,
            } => write!(
                f,
                "{} negative samples requested but only {} non-target labels exist",
                requested, available
            ),
            Error::MissingEmbedding(name) => write!(f, "snapshot missing entry '{}'", name),
            Error::UnknownEntry(name) => write!(f, "no snapshot entry named '{}'", name),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::UnreadableFile { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl Error {
    /// Exit code the command-line surface maps this error to:
    /// 2 for data/format problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonFiniteLoss { .. } => 3,
            _ => 2,
        }
    }
}
