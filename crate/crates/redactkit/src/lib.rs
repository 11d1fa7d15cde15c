//! Span-exact PII redaction for text corpora.
//!
//! The crate covers the full pipeline around a redaction experiment:
//!
//! * [`model`]: documents, QA records, entity spans over char offsets, and
//!   redaction policies with placeholder tokens.
//! * [`corpus`]: JSONL corpora, annotation files, prediction files, and
//!   per-record score maps.
//! * [`recognize`]: pattern recognizers for emails, SSNs, credit cards,
//!   dates, times, and percentages, plus overlap resolution for merged
//!   tagger output.
//! * [`redact`]: placeholder substitution with an offset map that remaps
//!   positions between the original and redacted texts, and QA answer
//!   adjustment on top of it.
//! * [`stats`]: redaction rates, entity histograms, PII-content scores,
//!   and dataset inclusion checks.
//! * [`sample`]: deterministic progressive-redaction and repair plans.
//! * [`eval`]: accuracy / token-F1 scoring, relative impact, severity
//!   classification, and pairing reports.
//!
//! All span arithmetic uses 0-based, end-exclusive offsets counted in
//! Unicode scalar values, never bytes.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod recognize;
pub mod redact;
pub mod sample;
pub mod stats;
pub(crate) mod text;

pub use error::{Error, Result};
pub use model::{
    AnnotatedDocument, Answer, Document, EntityLabel, EntitySpan, QARecord, Record,
    RedactionPolicy,
};
pub use recognize::{
    recognize_patterns, resolve_overlaps, LabelPriority, PatternClass, RecognizerConfig,
};
pub use redact::{
    adjust_qa_record, build_policy, redact_document, OffsetMap, PolicyMode, QaAdjustment,
    RedactedDocument, RemapMode,
};
pub use sample::{progressive_plan, repair_subsample, Plan, ProgressiveStrategy, RepairStrategy};
pub use stats::{compute_corpus_stats, CorpusStats, PiiContentScore, ScoreKind, StatsAccumulator};
