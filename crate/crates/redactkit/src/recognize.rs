//! Pattern recognizers for machine-detectable PII, label priorities, and
//! overlap resolution.
//!
//! Recognizers are deliberately mechanical: fixed grammars over the text,
//! no statistical models. The grammar for each class is documented on its
//! pattern below and in the project README; changing one is a breaking
//! change for downstream span fixtures.

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::RawSpan;
use crate::error::{Error, Result};
use crate::model::{AnnotatedDocument, Document, EntityLabel, EntitySpan};

/// Pattern classes the recognizer can scan for.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternClass {
    Email,
    Ssn,
    CreditCard,
    Date,
    Time,
    Percent,
}

impl PatternClass {
    pub const ALL: [PatternClass; 6] = [
        PatternClass::Email,
        PatternClass::Ssn,
        PatternClass::CreditCard,
        PatternClass::Date,
        PatternClass::Time,
        PatternClass::Percent,
    ];

    pub fn label(&self) -> EntityLabel {
        match self {
            PatternClass::Email => EntityLabel::Email,
            PatternClass::Ssn => EntityLabel::Ssn,
            PatternClass::CreditCard => EntityLabel::CreditCard,
            PatternClass::Date => EntityLabel::Date,
            PatternClass::Time => EntityLabel::Time,
            PatternClass::Percent => EntityLabel::Percent,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PatternClass::Email => "EMAIL",
            PatternClass::Ssn => "SSN",
            PatternClass::CreditCard => "CREDIT_CARD",
            PatternClass::Date => "DATE",
            PatternClass::Time => "TIME",
            PatternClass::Percent => "PERCENT",
        }
    }
}

impl FromStr for PatternClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PatternClass::ALL
            .iter()
            .find(|p| p.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("unknown pattern class {s:?}")))
    }
}

/// A total order over entity labels; earlier means higher priority when
/// overlap resolution has to break an exact tie.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPriority {
    order: Vec<EntityLabel>,
}

impl LabelPriority {
    /// Builds a priority from an explicit order, which must list every
    /// label exactly once.
    pub fn new(order: Vec<EntityLabel>) -> Result<Self> {
        let unique: BTreeSet<_> = order.iter().copied().collect();
        if order.len() != EntityLabel::ALL.len() || unique.len() != EntityLabel::ALL.len() {
            return Err(Error::InvalidConfig(format!(
                "label_priority must list all {} labels exactly once, got {}",
                EntityLabel::ALL.len(),
                order.len()
            )));
        }
        Ok(LabelPriority { order })
    }

    pub fn rank(&self, label: EntityLabel) -> usize {
        self.order
            .iter()
            .position(|&l| l == label)
            .expect("priority covers every label")
    }

    pub fn as_slice(&self) -> &[EntityLabel] {
        &self.order
    }
}

impl Default for LabelPriority {
    fn default() -> Self {
        LabelPriority {
            order: vec![
                EntityLabel::Person,
                EntityLabel::Org,
                EntityLabel::Gpe,
                EntityLabel::Loc,
                EntityLabel::WorkOfArt,
                EntityLabel::Date,
                EntityLabel::Time,
                EntityLabel::Email,
                EntityLabel::Ssn,
                EntityLabel::CreditCard,
                EntityLabel::Percent,
                EntityLabel::Quantity,
            ],
        }
    }
}

/// Recognizer settings: which pattern classes run and how label ties break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecognizerConfig {
    pub enabled_patterns: BTreeSet<PatternClass>,
    pub label_priority: LabelPriority,
    /// Reject card candidates made of one repeated digit. Such strings pass
    /// the pure checksum (an all-zero string sums to zero) but are filler,
    /// not card numbers.
    pub reject_repeated_digit_cards: bool,
}

impl Default for RecognizerConfig {
    fn default() -> Self {
        RecognizerConfig {
            enabled_patterns: PatternClass::ALL.into_iter().collect(),
            label_priority: LabelPriority::default(),
            reject_repeated_digit_cards: true,
        }
    }
}

/// Config file formats for recognizer and policy files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigFormat {
    Json,
    Toml,
}

impl ConfigFormat {
    /// Picks a format from a file extension, defaulting to TOML.
    pub fn from_extension(ext: Option<&str>) -> ConfigFormat {
        match ext {
            Some("json") => ConfigFormat::Json,
            _ => ConfigFormat::Toml,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecognizerConfigWire {
    enabled_patterns: Option<Vec<String>>,
    label_priority: Option<Vec<String>>,
    reject_repeated_digit_cards: Option<bool>,
}

/// Parses a recognizer config from TOML or JSON. Absent keys keep their
/// defaults.
pub fn parse_recognizer_config(src: &str, format: ConfigFormat) -> Result<RecognizerConfig> {
    let wire: RecognizerConfigWire = match format {
        ConfigFormat::Json => serde_json::from_str(src).map_err(|e| Error::json_at(0, e))?,
        ConfigFormat::Toml => toml::from_str(src).map_err(|e| Error::Toml(e.to_string()))?,
    };
    let mut cfg = RecognizerConfig::default();
    if let Some(patterns) = wire.enabled_patterns {
        cfg.enabled_patterns = patterns
            .iter()
            .map(|p| p.parse())
            .collect::<Result<_>>()?;
    }
    if let Some(order) = wire.label_priority {
        let order = order
            .iter()
            .map(|l| l.parse())
            .collect::<Result<Vec<_>>>()?;
        cfg.label_priority = LabelPriority::new(order)?;
    }
    if let Some(flag) = wire.reject_repeated_digit_cards {
        cfg.reject_repeated_digit_cards = flag;
    }
    Ok(cfg)
}

/// Luhn checksum over a digit string: from the right, double every second
/// digit, subtract 9 when that overflows a single digit, and require the
/// total to be divisible by ten.
pub fn luhn_check(digits: &str) -> Result<bool> {
    if digits.is_empty() {
        return Err(Error::EmptyDigits);
    }
    let mut sum = 0u32;
    for (i, c) in digits.chars().rev().enumerate() {
        let d = c.to_digit(10).ok_or(Error::NonDigit { found: c })?;
        let d = if i % 2 == 1 {
            let doubled = d * 2;
            if doubled > 9 {
                doubled - 9
            } else {
                doubled
            }
        } else {
            d
        };
        sum += d;
    }
    Ok(sum.is_multiple_of(10))
}

// Grammar: local@domain where local is one or more of [A-Za-z0-9._%+-],
// domain is dot-separated [A-Za-z0-9-] labels, and the final label is
// alphabetic with length >= 2.
static EMAIL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[A-Za-z0-9._%+-]+@(?:[A-Za-z0-9-]+\.)+[A-Za-z]{2,}").expect("valid pattern")
});

// Grammar: three, two, and four digits joined by hyphens, on word boundaries.
static SSN_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b[0-9]{3}-[0-9]{2}-[0-9]{4}\b").expect("valid pattern"));

// Grammar: 2024-05-01 or 01/05/2024 style numeric dates, on word boundaries.
static DATE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b[0-9]{4}-[0-9]{2}-[0-9]{2}\b|\b[0-9]{1,2}/[0-9]{1,2}/[0-9]{2,4}\b")
        .expect("valid pattern")
});

// Grammar: hh:mm with optional :ss and optional AM/PM marker.
static TIME_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b[0-9]{1,2}:[0-9]{2}(?::[0-9]{2})?(?: ?[AaPp][Mm])?\b").expect("valid pattern")
});

// Grammar: digits with an optional decimal part, ending in a percent sign.
static PERCENT_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b[0-9]+(?:\.[0-9]+)?%").expect("valid pattern"));

// Placeholder tokens already substituted into a document: <...> with no
// whitespace. Recognizers must never match inside these regions, or a
// second pass over redacted text would shred its own output.
static PLACEHOLDER_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"<[^\s<>]+>").expect("valid pattern"));

fn in_class(c: char, class: &str) -> bool {
    c.is_ascii_alphanumeric() || class.contains(c)
}

/// Byte ranges of maximal email matches. The regex finds the candidate; the
/// guards reject candidates embedded in a longer token, so "a@b.co9" never
/// yields a match on its prefix.
fn email_ranges(text: &str) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for m in EMAIL_RE.find_iter(text) {
        let before = text[..m.start()].chars().next_back();
        if before.is_some_and(|c| in_class(c, "._%+-")) {
            continue;
        }
        let after = text[m.end()..].chars().next();
        if after.is_some_and(|c| in_class(c, "-")) {
            continue;
        }
        out.push((m.start(), m.end()));
    }
    out
}

/// Byte ranges of maximal card-number candidates: 12 to 19 digits, groups
/// joined by single spaces or hyphens, passing the Luhn checksum. A longer
/// digit run never yields a match on any sub-run.
fn credit_card_ranges(text: &str, reject_repeated: bool) -> Vec<(usize, usize)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_digit() {
            i += 1;
            continue;
        }
        let start = i;
        let mut digits = String::new();
        digits.push(bytes[i] as char);
        let mut end = i + 1;
        let mut j = i + 1;
        loop {
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                digits.push(bytes[j] as char);
                j += 1;
                end = j;
            } else if j + 1 < bytes.len()
                && (bytes[j] == b' ' || bytes[j] == b'-')
                && bytes[j + 1].is_ascii_digit()
                && end == j
            {
                j += 1;
            } else {
                break;
            }
        }
        let plausible = !reject_repeated || !digits.chars().all(|c| c == digits.as_bytes()[0] as char);
        if (12..=19).contains(&digits.len())
            && luhn_check(&digits).expect("scanner collects digits only")
            && plausible
        {
            out.push((start, end));
        }
        i = j.max(end);
    }
    out
}

/// Runs every enabled pattern class over the document and returns all
/// maximal matches as spans, sorted by position. Matches of different
/// classes may overlap; `resolve_overlaps` reduces them to a disjoint set.
/// Regions inside `<...>` placeholder tokens are never matched.
pub fn recognize_patterns(doc: &Document, cfg: &RecognizerConfig) -> Vec<EntitySpan> {
    let text = &doc.text;
    let masked: Vec<(usize, usize)> = PLACEHOLDER_RE
        .find_iter(text)
        .map(|m| (m.start(), m.end()))
        .collect();
    let overlaps_mask =
        |s: usize, e: usize| masked.iter().any(|&(ms, me)| s < me && ms < e);

    let mut ranges: Vec<(usize, usize, EntityLabel)> = Vec::new();
    for class in &cfg.enabled_patterns {
        let found: Vec<(usize, usize)> = match class {
            PatternClass::Email => email_ranges(text),
            PatternClass::CreditCard => {
                credit_card_ranges(text, cfg.reject_repeated_digit_cards)
            }
            PatternClass::Ssn => SSN_RE
                .find_iter(text)
                .map(|m| (m.start(), m.end()))
                .collect(),
            PatternClass::Date => DATE_RE
                .find_iter(text)
                .map(|m| (m.start(), m.end()))
                .collect(),
            PatternClass::Time => TIME_RE
                .find_iter(text)
                .map(|m| (m.start(), m.end()))
                .collect(),
            PatternClass::Percent => PERCENT_RE
                .find_iter(text)
                .map(|m| (m.start(), m.end()))
                .collect(),
        };
        for (s, e) in found {
            if !overlaps_mask(s, e) {
                ranges.push((s, e, class.label()));
            }
        }
    }

    let char_starts: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
    let to_char = |byte: usize| char_starts.partition_point(|&b| b < byte);
    let mut spans: Vec<EntitySpan> = ranges
        .into_iter()
        .map(|(s, e, label)| {
            EntitySpan::over(&doc.id, text, to_char(s), to_char(e), label)
                .expect("regex matches lie on char boundaries within the text")
        })
        .collect();
    spans.sort();
    spans
}

/// Validates raw tagger spans against a document and returns the annotated
/// document, spans sorted. Overlaps are permitted here and can be inspected
/// via [`AnnotatedDocument::has_overlaps`]; they must be resolved before
/// redaction.
pub fn ingest_annotations(doc: &Document, raw: &[RawSpan]) -> Result<AnnotatedDocument> {
    let mut spans = Vec::with_capacity(raw.len());
    for r in raw {
        spans.push(EntitySpan::over(&doc.id, &doc.text, r.start, r.end, r.label)?);
    }
    AnnotatedDocument::new(doc.clone(), spans)
}

/// Like [`ingest_annotations`], but checks that the spans were addressed to
/// this document in the first place.
pub fn ingest_annotations_for(
    doc: &Document,
    claimed_doc_id: &str,
    raw: &[RawSpan],
) -> Result<AnnotatedDocument> {
    if claimed_doc_id != doc.id {
        return Err(Error::DocIdMismatch {
            expected: doc.id.clone(),
            found: claimed_doc_id.to_string(),
        });
    }
    ingest_annotations(doc, raw)
}

/// Reduces overlapping spans to a pairwise-disjoint set: keep the longest
/// span of any overlapping group; on equal length the earlier start wins;
/// on equal start and length the higher-priority label wins. The result is
/// a subset of the input, and running the function again is a no-op.
pub fn resolve_overlaps(spans: &[EntitySpan], priority: &LabelPriority) -> Vec<EntitySpan> {
    let mut cand: Vec<EntitySpan> = spans.to_vec();
    cand.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then(priority.rank(a.label).cmp(&priority.rank(b.label)))
    });
    cand.dedup_by(|a, b| a.start == b.start && a.end == b.end && a.label == b.label);

    let mut kept: Vec<EntitySpan> = Vec::new();
    'candidates: for span in cand {
        for k in &kept {
            if span.overlaps(k) {
                continue 'candidates;
            }
        }
        kept.push(span);
    }
    kept.sort();
    kept
}

/// Per-document annotation pipeline: ingest external spans, optionally
/// merge recognizer matches, then resolve everything into a disjoint set.
pub fn merged_spans(
    doc: &Document,
    external: &[RawSpan],
    cfg: &RecognizerConfig,
    use_patterns: bool,
) -> Result<Vec<EntitySpan>> {
    let mut spans = ingest_annotations(doc, external)?.spans;
    if use_patterns {
        spans.extend(recognize_patterns(doc, cfg));
    }
    Ok(resolve_overlaps(&spans, &cfg.label_priority))
}
