//! Placeholder substitution with exact offset bookkeeping.
//!
//! Redacting replaces each policy-covered span with a placeholder token and
//! records an [`OffsetMap`]: an ordered list of segments that tiles both the
//! original and the redacted text, so any original offset can be remapped
//! (or reported as destroyed) without re-searching the text.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Answer, AnnotatedDocument, Document, EntityLabel, EntitySpan, QARecord, RedactionPolicy,
};
use crate::text::{char_len, slice_chars};

/// What happened to the characters a segment covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentKind {
    /// Characters copied through unchanged.
    Copy,
    /// A span replaced by its placeholder token.
    Replaced { label: EntityLabel },
}

/// One aligned piece of the original and redacted texts. `Copy` segments
/// have equal lengths on both sides; `Replaced` segments map an entity span
/// onto its token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub orig_start: usize,
    pub orig_end: usize,
    pub new_start: usize,
    pub new_end: usize,
    #[serde(flatten)]
    pub kind: SegmentKind,
}

/// Segments in order, tiling `[0, orig_len)` and `[0, new_len)` without
/// gaps or overlaps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetMap {
    pub segments: Vec<Segment>,
    pub orig_len: usize,
    pub new_len: usize,
}

/// How to treat an offset that falls strictly inside a replaced span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemapMode {
    /// Refuse: the position no longer exists.
    Strict,
    /// Snap to the start of the placeholder token.
    Clamp,
}

impl OffsetMap {
    /// Maps an original char offset into the redacted text. Offsets on
    /// segment boundaries (including `orig_len`) map to the corresponding
    /// boundary; offsets strictly inside a replaced span either error
    /// (`Strict`) or snap to the token start (`Clamp`).
    pub fn remap(&self, orig: usize, mode: RemapMode) -> Result<usize> {
        if orig > self.orig_len {
            return Err(Error::OffsetOutOfRange {
                offset: orig,
                len: self.orig_len,
            });
        }
        if orig == self.orig_len {
            return Ok(self.new_len);
        }
        let idx = self.segments.partition_point(|s| s.orig_end <= orig);
        let seg = &self.segments[idx];
        debug_assert!(seg.orig_start <= orig && orig < seg.orig_end);
        match seg.kind {
            SegmentKind::Copy => Ok(seg.new_start + (orig - seg.orig_start)),
            SegmentKind::Replaced { label } => {
                if orig == seg.orig_start {
                    Ok(seg.new_start)
                } else {
                    match mode {
                        RemapMode::Strict => Err(Error::InsideRedaction {
                            offset: orig,
                            label,
                        }),
                        RemapMode::Clamp => Ok(seg.new_start),
                    }
                }
            }
        }
    }

    /// Replaced segments intersecting `[start, end)`.
    pub fn replaced_within(&self, start: usize, end: usize) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(move |s| {
            matches!(s.kind, SegmentKind::Replaced { .. })
                && s.orig_start < end
                && start < s.orig_end
        })
    }
}

/// One applied replacement: the span that was removed and the token that
/// took its place. The surface lives only here, never in emitted output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedSpan {
    pub span: EntitySpan,
    pub token: String,
}

/// A redacted document with its offset map and the replacements applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedactedDocument {
    pub doc_id: String,
    pub text: String,
    pub map: OffsetMap,
    pub applied: Vec<AppliedSpan>,
}

/// Replaces every policy-covered span with its placeholder token.
///
/// Spans must be pairwise disjoint (run `resolve_overlaps` first); spans
/// whose label the policy does not cover are copied through untouched.
pub fn redact_document(
    ad: &AnnotatedDocument,
    policy: &RedactionPolicy,
) -> Result<RedactedDocument> {
    policy.validate()?;
    let len = ad.doc.char_len();
    for w in ad.spans.windows(2) {
        if w[1].start < w[0].end {
            return Err(Error::OverlappingSpans {
                doc_id: ad.doc.id.clone(),
            });
        }
    }
    for s in &ad.spans {
        if s.start >= s.end || s.end > len {
            return Err(Error::SpanOutOfRange {
                doc_id: ad.doc.id.clone(),
                start: s.start,
                end: s.end,
                len,
            });
        }
    }

    let chars: Vec<char> = ad.doc.text.chars().collect();
    let mut text = String::with_capacity(ad.doc.text.len());
    let mut segments = Vec::new();
    let mut applied = Vec::new();
    let mut cursor = 0usize; // char offset in the original
    let mut out_cursor = 0usize; // char offset in the redacted text

    let copy_up_to = |upto: usize,
                          cursor: &mut usize,
                          out_cursor: &mut usize,
                          text: &mut String,
                          segments: &mut Vec<Segment>| {
        if upto > *cursor {
            let n = upto - *cursor;
            text.extend(&chars[*cursor..upto]);
            segments.push(Segment {
                orig_start: *cursor,
                orig_end: upto,
                new_start: *out_cursor,
                new_end: *out_cursor + n,
                kind: SegmentKind::Copy,
            });
            *cursor = upto;
            *out_cursor += n;
        }
    };

    for span in &ad.spans {
        if !policy.applies_to(span.label) {
            continue;
        }
        let token = policy
            .token_for(span.label)
            .expect("policy validated above");
        copy_up_to(span.start, &mut cursor, &mut out_cursor, &mut text, &mut segments);
        let token_len = char_len(token);
        text.push_str(token);
        segments.push(Segment {
            orig_start: span.start,
            orig_end: span.end,
            new_start: out_cursor,
            new_end: out_cursor + token_len,
            kind: SegmentKind::Replaced { label: span.label },
        });
        applied.push(AppliedSpan {
            span: span.clone(),
            token: token.to_string(),
        });
        cursor = span.end;
        out_cursor += token_len;
    }
    copy_up_to(len, &mut cursor, &mut out_cursor, &mut text, &mut segments);
    if segments.is_empty() {
        // Empty document: keep the one-copy-segment shape.
        segments.push(Segment {
            orig_start: 0,
            orig_end: 0,
            new_start: 0,
            new_end: 0,
            kind: SegmentKind::Copy,
        });
    }

    debug_assert_eq!(out_cursor, char_len(&text));
    Ok(RedactedDocument {
        doc_id: ad.doc.id.clone(),
        text,
        map: OffsetMap {
            segments,
            orig_len: len,
            new_len: out_cursor,
        },
        applied,
    })
}

/// The canonical placeholder for each label.
pub fn default_token(label: EntityLabel) -> &'static str {
    match label {
        EntityLabel::Person => "<NAME>",
        EntityLabel::Gpe => "<LOC>",
        EntityLabel::Loc => "<LOC>",
        EntityLabel::Org => "<ORG>",
        EntityLabel::Date => "<DATE>",
        EntityLabel::Time => "<TIME>",
        EntityLabel::Percent => "<PERCENT>",
        EntityLabel::Quantity => "<QUANTITY>",
        EntityLabel::WorkOfArt => "<WORK_OF_ART>",
        EntityLabel::Email => "<EMAIL>",
        EntityLabel::Ssn => "<SSN>",
        EntityLabel::CreditCard => "<CC>",
    }
}

/// Which labels a run should redact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyMode {
    /// Every label.
    Full,
    /// Only the listed labels.
    Limited(BTreeSet<EntityLabel>),
    /// Nothing; documents pass through with identity maps.
    None,
}

/// Builds a policy for a mode with the canonical token table. Tokens can
/// then be overridden per label (see [`parse_policy_file`]).
pub fn build_policy(mode: &PolicyMode) -> RedactionPolicy {
    let labels = match mode {
        PolicyMode::Full => EntityLabel::ALL.into_iter().collect(),
        PolicyMode::Limited(labels) => labels.clone(),
        PolicyMode::None => BTreeSet::new(),
    };
    let token_map = EntityLabel::ALL
        .into_iter()
        .map(|l| (l, default_token(l).to_string()))
        .collect();
    RedactionPolicy { labels, token_map }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFileWire {
    mode: Option<String>,
    labels: Option<Vec<String>>,
    tokens: Option<BTreeMap<String, String>>,
}

use crate::recognize::ConfigFormat;

/// Parses a policy file (TOML or JSON): a mode, labels for `limited`, and
/// optional token overrides.
pub fn parse_policy_file(src: &str, format: ConfigFormat) -> Result<RedactionPolicy> {
    let wire: PolicyFileWire = match format {
        ConfigFormat::Json => serde_json::from_str(src).map_err(|e| Error::json_at(0, e))?,
        ConfigFormat::Toml => toml::from_str(src).map_err(|e| Error::Toml(e.to_string()))?,
    };
    let mode = match wire.mode.as_deref().unwrap_or("full") {
        "full" => PolicyMode::Full,
        "none" => PolicyMode::None,
        "limited" => {
            let labels = wire
                .labels
                .as_ref()
                .ok_or_else(|| Error::InvalidPolicy("limited policy requires labels".into()))?;
            let labels = labels
                .iter()
                .map(|l| l.parse())
                .collect::<Result<BTreeSet<EntityLabel>>>()?;
            PolicyMode::Limited(labels)
        }
        other => {
            return Err(Error::InvalidPolicy(format!(
                "unknown mode {other:?} (expected full, limited, or none)"
            )))
        }
    };
    if !matches!(mode, PolicyMode::Limited(_)) && wire.labels.is_some() {
        return Err(Error::InvalidPolicy(
            "labels are only meaningful with mode = \"limited\"".into(),
        ));
    }
    let mut policy = build_policy(&mode);
    if let Some(tokens) = wire.tokens {
        for (label, token) in tokens {
            policy.token_map.insert(label.parse()?, token);
        }
    }
    policy.validate()?;
    Ok(policy)
}

/// A QA record after redaction, when every answer survived.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjustedQa {
    pub record: QARecord,
    pub context: RedactedDocument,
    pub question: RedactedDocument,
}

/// Outcome of adjusting one QA record.
#[derive(Debug, Clone, PartialEq)]
pub enum QaAdjustment {
    /// All answers remapped cleanly onto the redacted context.
    Adjusted(AdjustedQa),
    /// Some answer overlapped a replaced span; the answer text no longer
    /// exists. The redacted documents are still available so callers can
    /// keep the record as unanswerable.
    AnswerRedacted {
        label: EntityLabel,
        context: RedactedDocument,
        question: RedactedDocument,
    },
}

/// Redacts a QA record's context and question independently and remaps the
/// answer offsets. Spans must already be disjoint per document.
///
/// Every answer is remapped strictly: if any answer interval intersects a
/// replaced span, the record comes back as [`QaAdjustment::AnswerRedacted`]
/// carrying the first offending label.
pub fn adjust_qa_record(
    rec: &QARecord,
    context_spans: &[EntitySpan],
    question_spans: &[EntitySpan],
    policy: &RedactionPolicy,
) -> Result<QaAdjustment> {
    let ctx = redact_document(
        &AnnotatedDocument::new(rec.context.clone(), context_spans.to_vec())?,
        policy,
    )?;
    let question = redact_document(
        &AnnotatedDocument::new(rec.question.clone(), question_spans.to_vec())?,
        policy,
    )?;

    let offending = rec.answers.iter().find_map(|ans| {
        let start = ans.answer_start;
        let end = start + char_len(&ans.text);
        ctx.map
            .replaced_within(start, end)
            .next()
            .map(|seg| match seg.kind {
                SegmentKind::Replaced { label } => label,
                SegmentKind::Copy => unreachable!("replaced_within yields replaced segments"),
            })
    });
    if let Some(label) = offending {
        return Ok(QaAdjustment::AnswerRedacted {
            label,
            context: ctx,
            question,
        });
    }

    let mut answers = Vec::with_capacity(rec.answers.len());
    for ans in &rec.answers {
        let start = ctx.map.remap(ans.answer_start, RemapMode::Strict)?;
        let end = ctx
            .map
            .remap(ans.answer_start + char_len(&ans.text), RemapMode::Strict)?;
        let text = slice_chars(&ctx.text, start, end)
            .ok_or_else(|| Error::AnswerMismatch { id: rec.id.clone() })?;
        if text != ans.text {
            return Err(Error::AnswerMismatch { id: rec.id.clone() });
        }
        answers.push(Answer {
            text: text.to_string(),
            answer_start: start,
        });
    }

    let record = QARecord {
        id: rec.id.clone(),
        context: Document {
            id: rec.context.id.clone(),
            text: ctx.text.clone(),
            meta: rec.context.meta.clone(),
        },
        question: Document {
            id: rec.question.id.clone(),
            text: question.text.clone(),
            meta: rec.question.meta.clone(),
        },
        answers,
        is_answerable: rec.is_answerable,
    };
    Ok(QaAdjustment::Adjusted(AdjustedQa {
        record,
        context: ctx,
        question,
    }))
}

#[derive(Serialize)]
struct AppliedWire<'a> {
    start: usize,
    end: usize,
    label: EntityLabel,
    token: &'a str,
}

fn applied_wire<'a>(applied: &'a [AppliedSpan]) -> Vec<AppliedWire<'a>> {
    applied
        .iter()
        .map(|a| AppliedWire {
            start: a.span.start,
            end: a.span.end,
            label: a.span.label,
            token: &a.token,
        })
        .collect()
}

fn ref_map_is_empty(m: &&BTreeMap<String, String>) -> bool {
    m.is_empty()
}

#[derive(Serialize)]
struct RedactedPlainWire<'a> {
    id: &'a str,
    text: &'a str,
    #[serde(skip_serializing_if = "ref_map_is_empty")]
    meta: &'a BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset_map: Option<&'a [Segment]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    applied: Option<Vec<AppliedWire<'a>>>,
}

/// Serializes a redacted plain record. The output mirrors the input schema;
/// `emit_map` adds the offset map and the applied replacements (offsets
/// only, never surfaces).
pub fn redacted_plain_to_line(orig: &Document, red: &RedactedDocument, emit_map: bool) -> String {
    let wire = RedactedPlainWire {
        id: &orig.id,
        text: &red.text,
        meta: &orig.meta,
        offset_map: emit_map.then_some(red.map.segments.as_slice()),
        applied: emit_map.then(|| applied_wire(&red.applied)),
    };
    serde_json::to_string(&wire).expect("record serialization cannot fail")
}

#[derive(Serialize)]
struct QaMapsWire<'a> {
    context: &'a [Segment],
    question: &'a [Segment],
}

#[derive(Serialize)]
struct QaAppliedWire<'a> {
    context: Vec<AppliedWire<'a>>,
    question: Vec<AppliedWire<'a>>,
}

#[derive(Serialize)]
struct RedactedQaWire<'a> {
    id: &'a str,
    context: &'a str,
    question: &'a str,
    answers: &'a [Answer],
    is_answerable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    answer_redacted: Option<EntityLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    offset_map: Option<QaMapsWire<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    applied: Option<QaAppliedWire<'a>>,
}

/// Serializes a QA adjustment outcome. Answer-redacted records keep the
/// redacted texts but lose their answers and become unanswerable, with the
/// offending label recorded in `answer_redacted`.
pub fn qa_outcome_to_line(orig: &QARecord, adj: &QaAdjustment, emit_map: bool) -> String {
    let (context, question, answers, is_answerable, answer_redacted) = match adj {
        QaAdjustment::Adjusted(a) => (
            &a.context,
            &a.question,
            a.record.answers.as_slice(),
            a.record.is_answerable,
            None,
        ),
        QaAdjustment::AnswerRedacted {
            label,
            context,
            question,
        } => (context, question, &[] as &[Answer], false, Some(*label)),
    };
    let wire = RedactedQaWire {
        id: &orig.id,
        context: &context.text,
        question: &question.text,
        answers,
        is_answerable,
        answer_redacted,
        offset_map: emit_map.then_some(QaMapsWire {
            context: &context.map.segments,
            question: &question.map.segments,
        }),
        applied: emit_map.then(|| QaAppliedWire {
            context: applied_wire(&context.applied),
            question: applied_wire(&question.applied),
        }),
    };
    serde_json::to_string(&wire).expect("record serialization cannot fail")
}
