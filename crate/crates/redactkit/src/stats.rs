//! Corpus-level redaction statistics and dataset inclusion checks.
//!
//! Everything here works on spans that have already been resolved to a
//! disjoint set; the policy filter is applied afterwards, so a narrower
//! policy only ever shrinks the numbers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::AnnotationSet;
use crate::error::{Error, Result};
use crate::model::{EntityLabel, EntitySpan, Record, RedactionPolicy};
use crate::recognize::{ingest_annotations, resolve_overlaps, LabelPriority};

/// Footer carried by every statistics report: inputs are treated as
/// monolingual and no language identification runs.
pub const LANGUAGE_CHECK_NOTE: &str = "UNKNOWN_LANGUAGE_NOT_CHECKED";

/// Which per-record number a report or sampling run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// Number of policy-covered spans.
    Count,
    /// Fraction of characters inside policy-covered spans.
    Coverage,
}

impl std::str::FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(ScoreKind::Count),
            "coverage" => Ok(ScoreKind::Coverage),
            other => Err(Error::InvalidConfig(format!(
                "unknown score kind {other:?} (expected count or coverage)"
            ))),
        }
    }
}

/// How much PII one record carries under the active policy. QA records sum
/// their context and question parts; coverage is measured over the combined
/// length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiiContentScore {
    pub count: usize,
    pub coverage: f64,
}

impl PiiContentScore {
    pub fn value(&self, kind: ScoreKind) -> f64 {
        match kind {
            ScoreKind::Count => self.count as f64,
            ScoreKind::Coverage => self.coverage,
        }
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Streaming statistics over a corpus: feed one record at a time, then
/// [`finish`](Self::finish).
#[derive(Debug, Clone, Default)]
pub struct StatsAccumulator {
    n_records: usize,
    n_redacted: usize,
    histogram: BTreeMap<EntityLabel, u64>,
    per_record: BTreeMap<String, PiiContentScore>,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one record given its parts as `(char_len, resolved_spans)`
    /// pairs: one part for plain records, context and question for QA.
    pub fn add_record(
        &mut self,
        id: &str,
        parts: &[(usize, &[EntitySpan])],
        policy: &RedactionPolicy,
    ) -> Result<PiiContentScore> {
        if self.per_record.contains_key(id) {
            return Err(Error::DuplicateId { id: id.to_string() });
        }
        let mut count = 0usize;
        let mut covered = 0usize;
        let mut total = 0usize;
        for &(len, spans) in parts {
            total += len;
            for span in spans {
                if policy.applies_to(span.label) {
                    count += 1;
                    covered += span.len();
                    *self.histogram.entry(span.label).or_insert(0) += 1;
                }
            }
        }
        let coverage = if total == 0 {
            0.0
        } else {
            covered as f64 / total as f64
        };
        let score = PiiContentScore { count, coverage };
        self.n_records += 1;
        if count > 0 {
            self.n_redacted += 1;
        }
        self.per_record.insert(id.to_string(), score);
        Ok(score)
    }

    pub fn add_plain(
        &mut self,
        id: &str,
        len: usize,
        spans: &[EntitySpan],
        policy: &RedactionPolicy,
    ) -> Result<PiiContentScore> {
        self.add_record(id, &[(len, spans)], policy)
    }

    pub fn add_qa(
        &mut self,
        id: &str,
        context: (usize, &[EntitySpan]),
        question: (usize, &[EntitySpan]),
        policy: &RedactionPolicy,
    ) -> Result<PiiContentScore> {
        self.add_record(id, &[context, question], policy)
    }

    pub fn n_records(&self) -> usize {
        self.n_records
    }

    pub fn finish(self) -> Result<CorpusStats> {
        if self.n_records == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut histogram: BTreeMap<EntityLabel, u64> =
            EntityLabel::ALL.into_iter().map(|l| (l, 0)).collect();
        histogram.extend(self.histogram);
        Ok(CorpusStats {
            n_records: self.n_records,
            redaction_rate_pct: round2(100.0 * self.n_redacted as f64 / self.n_records as f64),
            histogram,
            per_record: self.per_record,
        })
    }
}

/// Finished corpus statistics. The histogram always carries all twelve
/// labels, zeros included; the redaction rate is a percentage rounded to
/// two decimals, half away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusStats {
    pub n_records: usize,
    pub redaction_rate_pct: f64,
    pub histogram: BTreeMap<EntityLabel, u64>,
    pub per_record: BTreeMap<String, PiiContentScore>,
}

impl CorpusStats {
    pub fn per_record_values(&self, kind: ScoreKind) -> BTreeMap<String, f64> {
        self.per_record
            .iter()
            .map(|(id, s)| (id.clone(), s.value(kind)))
            .collect()
    }

    pub fn total_spans(&self) -> u64 {
        self.histogram.values().sum()
    }
}

type ResolvedParts = (String, Vec<(usize, Vec<EntitySpan>)>);

fn resolved_parts(
    record: &Record,
    ann: &AnnotationSet,
    priority: &LabelPriority,
) -> Result<ResolvedParts> {
    match record {
        Record::Plain(doc) => {
            let ad = ingest_annotations(doc, ann.spans_for(&doc.id))?;
            let spans = resolve_overlaps(&ad.spans, priority);
            Ok((doc.id.clone(), vec![(doc.char_len(), spans)]))
        }
        Record::Qa(rec) => {
            let ctx = ingest_annotations(&rec.context, &ann.for_context(&rec.id))?;
            let q = ingest_annotations(&rec.question, &ann.for_question(&rec.id))?;
            Ok((
                rec.id.clone(),
                vec![
                    (rec.context.char_len(), resolve_overlaps(&ctx.spans, priority)),
                    (rec.question.char_len(), resolve_overlaps(&q.spans, priority)),
                ],
            ))
        }
    }
}

/// Runs the whole pipeline for a corpus with external annotations only,
/// default label priority.
pub fn compute_corpus_stats(
    records: &[Record],
    ann: &AnnotationSet,
    policy: &RedactionPolicy,
) -> Result<CorpusStats> {
    let priority = LabelPriority::default();
    let mut acc = StatsAccumulator::new();
    for record in records {
        let (id, parts) = resolved_parts(record, ann, &priority)?;
        let borrowed: Vec<(usize, &[EntitySpan])> =
            parts.iter().map(|(n, s)| (*n, s.as_slice())).collect();
        acc.add_record(&id, &borrowed, policy)?;
    }
    acc.finish()
}

/// Percentage of records with at least one policy-covered span.
pub fn redaction_rate(
    records: &[Record],
    ann: &AnnotationSet,
    policy: &RedactionPolicy,
) -> Result<f64> {
    Ok(compute_corpus_stats(records, ann, policy)?.redaction_rate_pct)
}

/// Corpus-wide counts of policy-covered spans per label.
pub fn entity_histogram(
    records: &[Record],
    ann: &AnnotationSet,
    policy: &RedactionPolicy,
) -> Result<BTreeMap<EntityLabel, u64>> {
    Ok(compute_corpus_stats(records, ann, policy)?.histogram)
}

/// PII-content score of a single record.
pub fn pii_content_score(
    record: &Record,
    ann: &AnnotationSet,
    policy: &RedactionPolicy,
) -> Result<PiiContentScore> {
    let priority = LabelPriority::default();
    let (id, parts) = resolved_parts(record, ann, &priority)?;
    let borrowed: Vec<(usize, &[EntitySpan])> =
        parts.iter().map(|(n, s)| (*n, s.as_slice())).collect();
    let mut acc = StatsAccumulator::new();
    acc.add_record(&id, &borrowed, policy)
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// Finds the label holding at least `threshold` of all spans, if any. Ties
/// for the largest count go to the earlier label in canonical order.
pub fn dominant_entity_analysis(
    histogram: &BTreeMap<EntityLabel, u64>,
    threshold: f64,
) -> Result<Option<(EntityLabel, f64)>> {
    check_threshold(threshold)?;
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return Ok(None);
    }
    let count = *histogram.values().max().expect("non-empty histogram");
    // First label with the maximal count; BTreeMap iterates in canonical
    // label order, which settles ties.
    let (&label, _) = histogram
        .iter()
        .find(|(_, &c)| c == count)
        .expect("count came from this map");
    let share = count as f64 / total as f64;
    Ok((share >= threshold).then_some((label, share)))
}

/// Why a dataset is excluded from redaction experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ExclusionReason {
    /// No policy-covered spans anywhere.
    ZeroPii,
    /// One label accounts for at least the threshold share of all spans.
    DominantEntity { label: EntityLabel, share: f64 },
}

/// Whether a dataset is usable for redaction experiments.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum InclusionDecision {
    Include,
    Exclude {
        #[serde(flatten)]
        reason: ExclusionReason,
    },
}

/// Applies the inclusion rule: exclude zero-PII datasets and datasets
/// dominated by a single label.
pub fn dataset_inclusion(stats: &CorpusStats, threshold: f64) -> Result<InclusionDecision> {
    check_threshold(threshold)?;
    if stats.total_spans() == 0 {
        return Ok(InclusionDecision::Exclude {
            reason: ExclusionReason::ZeroPii,
        });
    }
    Ok(
        match dominant_entity_analysis(&stats.histogram, threshold)? {
            Some((label, share)) => InclusionDecision::Exclude {
                reason: ExclusionReason::DominantEntity { label, share },
            },
            None => InclusionDecision::Include,
        },
    )
}
