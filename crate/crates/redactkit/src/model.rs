//! Core data model: entity labels, character spans, documents, QA records,
//! redaction policies, and corpus validation.
//!
//! All offsets are 0-based Unicode scalar value ("char") indices with
//! exclusive ends. Byte offsets never cross a module boundary.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{char_len, slice_chars};

/// The closed set of entity labels the toolkit understands.
///
/// Annotations carrying any other label are rejected at ingestion rather
/// than silently dropped; silent loss would skew every downstream count.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityLabel {
    Person,
    Gpe,
    Loc,
    Org,
    Date,
    Time,
    Percent,
    Quantity,
    WorkOfArt,
    Email,
    Ssn,
    CreditCard,
}

impl EntityLabel {
    /// Every label, in canonical declaration order.
    pub const ALL: [EntityLabel; 12] = [
        EntityLabel::Person,
        EntityLabel::Gpe,
        EntityLabel::Loc,
        EntityLabel::Org,
        EntityLabel::Date,
        EntityLabel::Time,
        EntityLabel::Percent,
        EntityLabel::Quantity,
        EntityLabel::WorkOfArt,
        EntityLabel::Email,
        EntityLabel::Ssn,
        EntityLabel::CreditCard,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityLabel::Person => "PERSON",
            EntityLabel::Gpe => "GPE",
            EntityLabel::Loc => "LOC",
            EntityLabel::Org => "ORG",
            EntityLabel::Date => "DATE",
            EntityLabel::Time => "TIME",
            EntityLabel::Percent => "PERCENT",
            EntityLabel::Quantity => "QUANTITY",
            EntityLabel::WorkOfArt => "WORK_OF_ART",
            EntityLabel::Email => "EMAIL",
            EntityLabel::Ssn => "SSN",
            EntityLabel::CreditCard => "CREDIT_CARD",
        }
    }
}

impl fmt::Display for EntityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntityLabel::ALL
            .iter()
            .find(|l| l.as_str() == s)
            .copied()
            .ok_or_else(|| Error::UnknownLabel {
                label: s.to_string(),
            })
    }
}

/// A labelled, half-open character interval over one document, carrying the
/// surface text it covers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
    pub surface: String,
}

impl EntitySpan {
    /// Builds a span over `text`, checking bounds and capturing the surface.
    pub fn over(doc_id: &str, text: &str, start: usize, end: usize, label: EntityLabel) -> Result<Self> {
        let len = char_len(text);
        if start >= end || end > len {
            return Err(Error::SpanOutOfRange {
                doc_id: doc_id.to_string(),
                start,
                end,
                len,
            });
        }
        let surface = slice_chars(text, start, end)
            .expect("bounds checked above")
            .to_string();
        Ok(EntitySpan {
            start,
            end,
            label,
            surface,
        })
    }

    /// Char length of the interval; always positive, since construction
    /// requires `start < end`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// One unit of text with a stable id and optional metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            meta: BTreeMap::new(),
        }
    }

    pub fn char_len(&self) -> usize {
        char_len(&self.text)
    }
}

/// A document plus the entity spans annotated on it.
///
/// Spans are validated against the text and kept sorted by position.
/// Overlaps are allowed here; they must be resolved before redaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedDocument {
    pub doc: Document,
    pub spans: Vec<EntitySpan>,
}

impl AnnotatedDocument {
    pub fn new(doc: Document, mut spans: Vec<EntitySpan>) -> Result<Self> {
        let len = doc.char_len();
        for s in &spans {
            if s.start >= s.end || s.end > len {
                return Err(Error::SpanOutOfRange {
                    doc_id: doc.id.clone(),
                    start: s.start,
                    end: s.end,
                    len,
                });
            }
        }
        spans.sort();
        Ok(AnnotatedDocument { doc, spans })
    }

    /// True when any two spans overlap. Such documents can be inspected but
    /// not redacted until the overlaps are resolved.
    pub fn has_overlaps(&self) -> bool {
        self.spans
            .windows(2)
            .any(|w| w[1].start < w[0].end)
    }
}

/// One gold answer for an extractive QA record. `answer_start` is a char
/// offset into the record's context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    pub answer_start: usize,
}

/// An extractive QA record. Context and question are separate documents so
/// each can carry its own annotations and offset map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QARecord {
    pub id: String,
    pub context: Document,
    pub question: Document,
    pub answers: Vec<Answer>,
    pub is_answerable: bool,
}

/// Annotation key for a QA record's context. The bare record id is accepted
/// as an alias, since taggers usually emit spans for the context only.
pub fn context_doc_id(record_id: &str) -> String {
    format!("{record_id}#context")
}

/// Annotation key for a QA record's question.
pub fn question_doc_id(record_id: &str) -> String {
    format!("{record_id}#question")
}

impl QARecord {
    pub fn new(
        id: impl Into<String>,
        context: impl Into<String>,
        question: impl Into<String>,
        answers: Vec<Answer>,
        is_answerable: bool,
    ) -> Self {
        let id = id.into();
        QARecord {
            context: Document::new(context_doc_id(&id), context),
            question: Document::new(question_doc_id(&id), question),
            id,
            answers,
            is_answerable,
        }
    }
}

/// A corpus record in either supported shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Record {
    Plain(Document),
    Qa(QARecord),
}

impl Record {
    pub fn id(&self) -> &str {
        match self {
            Record::Plain(d) => &d.id,
            Record::Qa(q) => &q.id,
        }
    }
}

/// Outcome of validating one record: `violation` holds the first broken
/// invariant, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecordCheck {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<RecordCheck>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.violation.is_none())
    }

    pub fn n_invalid(&self) -> usize {
        self.checks.iter().filter(|c| c.violation.is_some()).count()
    }

    pub fn violations(&self) -> impl Iterator<Item = &RecordCheck> {
        self.checks.iter().filter(|c| c.violation.is_some())
    }
}

/// Checks structural invariants record by record, reporting the first
/// violated invariant for each. Valid corpora pass through untouched.
pub fn validate_corpus(records: &[Record]) -> ValidationReport {
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut checks = Vec::with_capacity(records.len());
    for rec in records {
        let violation = check_record(rec, &mut seen);
        checks.push(RecordCheck {
            id: rec.id().to_string(),
            violation,
        });
    }
    ValidationReport { checks }
}

fn check_record<'a>(rec: &'a Record, seen: &mut BTreeSet<&'a str>) -> Option<String> {
    let id = rec.id();
    if id.is_empty() {
        return Some("empty id".to_string());
    }
    if !seen.insert(id) {
        return Some(format!("duplicate id {id}"));
    }
    if let Record::Qa(q) = rec {
        let ctx_len = q.context.char_len();
        for ans in &q.answers {
            let alen = char_len(&ans.text);
            let end = ans.answer_start.checked_add(alen);
            match end {
                Some(end) if end <= ctx_len => {
                    let found = slice_chars(&q.context.text, ans.answer_start, end)
                        .expect("bounds checked above");
                    if found != ans.text {
                        return Some("answer text mismatch".to_string());
                    }
                }
                _ => return Some("answer span out of range".to_string()),
            }
        }
    }
    None
}

/// Which labels to replace and what to replace them with.
///
/// Tokens must be non-empty, start with `<`, end with `>`, and contain no
/// whitespace, so a redacted document can always be told apart from source
/// text and recognizers can skip placeholder regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactionPolicy {
    pub labels: BTreeSet<EntityLabel>,
    pub token_map: BTreeMap<EntityLabel, String>,
}

impl RedactionPolicy {
    pub fn validate(&self) -> Result<()> {
        for label in &self.labels {
            let token = self
                .token_map
                .get(label)
                .ok_or_else(|| Error::InvalidPolicy(format!("no token for {label}")))?;
            if !token.starts_with('<')
                || !token.ends_with('>')
                || token.len() < 2
                || token.chars().any(char::is_whitespace)
            {
                return Err(Error::InvalidPolicy(format!(
                    "token {token:?} for {label} must look like <...> with no whitespace"
                )));
            }
        }
        Ok(())
    }

    pub fn applies_to(&self, label: EntityLabel) -> bool {
        self.labels.contains(&label)
    }

    pub fn token_for(&self, label: EntityLabel) -> Option<&str> {
        self.token_map.get(&label).map(String::as_str)
    }

    pub fn is_subset_of(&self, other: &RedactionPolicy) -> bool {
        self.labels.is_subset(&other.labels)
    }
}
