//! Error type shared by every module in the crate.

use thiserror::Error;

use crate::model::EntityLabel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid TOML: {0}")]
    Toml(String),

    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("unknown label {label:?}")]
    UnknownLabel { label: String },

    #[error("duplicate id {id}")]
    DuplicateId { id: String },

    #[error("doc {doc_id}: span out of range ({start}..{end} over {len} chars)")]
    SpanOutOfRange {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },

    #[error("doc_id mismatch: annotations are for {found}, document is {expected}")]
    DocIdMismatch { expected: String, found: String },

    #[error("doc {doc_id}: overlapping spans; run resolve_overlaps before redacting")]
    OverlappingSpans { doc_id: String },

    #[error("record {id}: answer text mismatch")]
    AnswerMismatch { id: String },

    #[error("offset {offset} falls inside a {label} redaction")]
    InsideRedaction { offset: usize, label: EntityLabel },

    #[error("offset {offset} out of range (document has {len} chars)")]
    OffsetOutOfRange { offset: usize, len: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid recognizer config: {0}")]
    InvalidConfig(String),

    #[error("threshold {0} not in (0, 1]")]
    InvalidThreshold(f64),

    #[error("fraction {0} not in [0, 1]")]
    InvalidFraction(f64),

    #[error("luhn input must be decimal digits, found {found:?}")]
    NonDigit { found: char },

    #[error("luhn input is empty")]
    EmptyDigits,

    #[error("record {id}: score is not a finite number")]
    NonFiniteScore { id: String },

    #[error("no prediction for gold id {id}")]
    MissingPrediction { id: String },

    #[error("duplicate prediction for id {id}")]
    DuplicatePrediction { id: String },

    #[error("prediction id {id} does not appear in the gold set")]
    UnmatchedPrediction { id: String },

    #[error("gold set is empty")]
    EmptyGolds,

    #[error("no impact values to classify")]
    EmptyImpacts,

    #[error("baseline score must be positive, got {0}")]
    NonPositiveBaseline(f64),

    #[error("pairing report requires a None/None baseline entry")]
    MissingBaseline,
}

impl Error {
    /// Wraps a serde_json error with the 1-based line it came from.
    pub fn json_at(line: usize, source: serde_json::Error) -> Self {
        Error::Json { line, source }
    }
}
