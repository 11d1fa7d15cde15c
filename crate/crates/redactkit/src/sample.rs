//! Sampling plans for progressive-redaction and repair experiments.
//!
//! Plans are pure functions of (scores, fraction, strategy): the random
//! strategies draw from ChaCha12 seeded explicitly, never from ambient
//! entropy, so a plan reproduces bit-for-bit anywhere.

use std::collections::{BTreeMap, BTreeSet};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How progressive redaction picks the records to redact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgressiveStrategy {
    /// Seeded uniform sample without replacement.
    Random { seed: u64 },
    /// The k lowest-score records, ties by ascending id.
    ContentLowFirst,
    /// The k highest-score records, ties by ascending id.
    ContentHighFirst,
}

impl ProgressiveStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            ProgressiveStrategy::Random { .. } => "random",
            ProgressiveStrategy::ContentLowFirst => "content-low",
            ProgressiveStrategy::ContentHighFirst => "content-high",
        }
    }
}

/// How repair picks the records to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairStrategy {
    /// Seeded uniform subset.
    Random { seed: u64 },
    /// Keep the k lowest-score records: high-content records go first.
    Content,
}

impl RepairStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            RepairStrategy::Random { .. } => "random",
            RepairStrategy::Content => "content",
        }
    }
}

/// Records picked by one sampling operation, in selection order. For
/// progressive plans these are the records to redact; for repair plans the
/// records to keep.
#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub selected: Vec<String>,
    pub fraction: f64,
}

/// Number of records a fraction selects: `fraction × n`, rounded half-up.
pub fn target_count(n: usize, fraction: f64) -> Result<usize> {
    if !fraction.is_finite() || !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidFraction(fraction));
    }
    Ok(((fraction * n as f64 + 0.5).floor() as usize).min(n))
}

fn checked_ids(scores: &BTreeMap<String, f64>) -> Result<Vec<&str>> {
    for (id, score) in scores {
        if !score.is_finite() {
            return Err(Error::NonFiniteScore { id: id.clone() });
        }
    }
    Ok(scores.keys().map(String::as_str).collect())
}

/// The seeded permutation behind the random strategies: every id gets one
/// ChaCha12 draw (ids visited in ascending order), then ids sort by
/// (draw, id). Prefixes of this order are uniform samples, and prefixes
/// nest across fractions.
pub fn permuted_ids(scores: &BTreeMap<String, f64>, seed: u64) -> Vec<String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut keyed: Vec<(u64, &str)> = scores
        .keys()
        .map(|id| (rng.next_u64(), id.as_str()))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    keyed.into_iter().map(|(_, id)| id.to_string()).collect()
}

fn by_score(scores: &BTreeMap<String, f64>, ascending: bool) -> Result<Vec<String>> {
    let mut ids = checked_ids(scores)?;
    ids.sort_by(|a, b| {
        let ord = scores[*a].total_cmp(&scores[*b]);
        let ord = if ascending { ord } else { ord.reverse() };
        ord.then_with(|| a.cmp(b))
    });
    Ok(ids.into_iter().map(str::to_string).collect())
}

/// Picks the records to redact at the given fraction.
pub fn progressive_plan(
    scores: &BTreeMap<String, f64>,
    fraction: f64,
    strategy: ProgressiveStrategy,
) -> Result<Plan> {
    let k = target_count(scores.len(), fraction)?;
    let ordered = match strategy {
        ProgressiveStrategy::Random { seed } => {
            checked_ids(scores)?;
            permuted_ids(scores, seed)
        }
        ProgressiveStrategy::ContentLowFirst => by_score(scores, true)?,
        ProgressiveStrategy::ContentHighFirst => by_score(scores, false)?,
    };
    Ok(Plan {
        selected: ordered[..k].to_vec(),
        fraction,
    })
}

/// Picks the records to keep when repairing a redacted dataset. The random
/// strategy keeps a suffix of the same permutation the progressive plan
/// consumes from the front, so keep-f and redact-(1−f) runs with one seed
/// split the corpus between them.
pub fn repair_subsample(
    scores: &BTreeMap<String, f64>,
    keep_fraction: f64,
    strategy: RepairStrategy,
) -> Result<Plan> {
    let n = scores.len();
    let k = target_count(n, keep_fraction)?;
    let selected = match strategy {
        RepairStrategy::Random { seed } => {
            checked_ids(scores)?;
            let perm = permuted_ids(scores, seed);
            perm[n - k..].to_vec()
        }
        RepairStrategy::Content => by_score(scores, true)?[..k].to_vec(),
    };
    Ok(Plan {
        selected,
        fraction: keep_fraction,
    })
}

/// One plan file line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub id: String,
    pub action: PlanAction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanAction {
    Redact,
    Keep,
}

/// Serializes a progressive plan: one line per corpus record in ascending
/// id order, selected records marked `redact`, the rest `keep`.
pub fn progressive_plan_jsonl<'a>(
    plan: &Plan,
    all_ids: impl Iterator<Item = &'a str>,
) -> String {
    let selected: BTreeSet<&str> = plan.selected.iter().map(String::as_str).collect();
    let mut out = String::new();
    for id in all_ids {
        let entry = PlanEntry {
            id: id.to_string(),
            action: if selected.contains(id) {
                PlanAction::Redact
            } else {
                PlanAction::Keep
            },
        };
        out.push_str(&serde_json::to_string(&entry).expect("plan entries always serialize"));
        out.push('\n');
    }
    out
}

/// Serializes a repair plan: only the kept records, ascending id order.
pub fn repair_plan_jsonl(plan: &Plan) -> String {
    let mut ids: Vec<&str> = plan.selected.iter().map(String::as_str).collect();
    ids.sort_unstable();
    let mut out = String::new();
    for id in ids {
        let entry = PlanEntry {
            id: id.to_string(),
            action: PlanAction::Keep,
        };
        out.push_str(&serde_json::to_string(&entry).expect("plan entries always serialize"));
        out.push('\n');
    }
    out
}

/// One point of a sampling curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fraction: f64,
    pub score: f64,
    pub strategy: String,
}

/// Merges curve points into CSV: header `fraction,score,strategy`, rows
/// sorted by (strategy, fraction, score), numbers with four decimals.
pub fn emit_curve(points: &[CurvePoint]) -> Result<String> {
    for p in points {
        if !p.fraction.is_finite() || !(0.0..=1.0).contains(&p.fraction) {
            return Err(Error::InvalidFraction(p.fraction));
        }
        if !p.score.is_finite() {
            return Err(Error::NonFiniteScore {
                id: p.strategy.clone(),
            });
        }
    }
    let mut sorted: Vec<&CurvePoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then_with(|| a.fraction.total_cmp(&b.fraction))
            .then_with(|| a.score.total_cmp(&b.score))
    });
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["fraction", "score", "strategy"])
        .expect("writing to memory cannot fail");
    for p in sorted {
        writer
            .write_record([
                format!("{:.4}", p.fraction),
                format!("{:.4}", p.score),
                p.strategy.clone(),
            ])
            .expect("writing to memory cannot fail");
    }
    Ok(
        String::from_utf8(writer.into_inner().expect("writing to memory cannot fail"))
            .expect("csv output is utf-8"),
    )
}
