//! Scoring predictions against gold data and quantifying what redaction
//! cost a model.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::corpus::{GoldLabel, PredictionRecord};
use crate::error::{Error, Result};
use crate::model::QARecord;

/// Canonical answer normalization: trim, collapse runs of whitespace to one
/// space, lowercase.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for (i, word) in s.split_whitespace().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&word.to_lowercase());
    }
    out
}

fn prediction_map<'a>(
    preds: &'a [PredictionRecord],
    gold_ids: &BTreeSet<&str>,
) -> Result<BTreeMap<&'a str, &'a str>> {
    let mut map = BTreeMap::new();
    for p in preds {
        if map.insert(p.id.as_str(), p.prediction.as_str()).is_some() {
            return Err(Error::DuplicatePrediction { id: p.id.clone() });
        }
        if !gold_ids.contains(p.id.as_str()) {
            return Err(Error::UnmatchedPrediction { id: p.id.clone() });
        }
    }
    Ok(map)
}

/// Exact-match accuracy as a percentage, after normalizing both sides.
/// Every gold id needs exactly one prediction.
pub fn score_accuracy(
    preds: &[PredictionRecord],
    golds: &[GoldLabel],
    normalizer: impl Fn(&str) -> String,
) -> Result<f64> {
    if golds.is_empty() {
        return Err(Error::EmptyGolds);
    }
    let gold_ids: BTreeSet<&str> = golds.iter().map(|g| g.id.as_str()).collect();
    let map = prediction_map(preds, &gold_ids)?;
    let mut correct = 0usize;
    for gold in golds {
        let pred = map
            .get(gold.id.as_str())
            .ok_or_else(|| Error::MissingPrediction { id: gold.id.clone() })?;
        if normalizer(pred) == normalizer(&gold.gold) {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / golds.len() as f64)
}

fn token_f1(pred: &str, gold: &str) -> f64 {
    let pred_tokens: Vec<&str> = pred.split_whitespace().collect();
    let gold_tokens: Vec<&str> = gold.split_whitespace().collect();
    if pred_tokens.is_empty() || gold_tokens.is_empty() {
        return if pred_tokens.is_empty() && gold_tokens.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    let mut gold_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in &gold_tokens {
        *gold_counts.entry(t).or_insert(0) += 1;
    }
    let mut common = 0usize;
    for t in &pred_tokens {
        if let Some(c) = gold_counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / pred_tokens.len() as f64;
    let recall = common as f64 / gold_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Extractive-QA token F1 as a percentage: bag-of-tokens overlap after
/// normalization, best gold answer per record, averaged over records.
/// Unanswerable records score 1 exactly when the prediction is empty.
pub fn score_token_f1(preds: &[PredictionRecord], golds: &[QARecord]) -> Result<f64> {
    if golds.is_empty() {
        return Err(Error::EmptyGolds);
    }
    let gold_ids: BTreeSet<&str> = golds.iter().map(|g| g.id.as_str()).collect();
    let map = prediction_map(preds, &gold_ids)?;
    let mut total = 0.0;
    for gold in golds {
        let pred = map
            .get(gold.id.as_str())
            .ok_or_else(|| Error::MissingPrediction { id: gold.id.clone() })?;
        let pred = normalize(pred);
        let best = if !gold.is_answerable || gold.answers.is_empty() {
            if pred.is_empty() {
                1.0
            } else {
                0.0
            }
        } else {
            gold.answers
                .iter()
                .map(|a| token_f1(&pred, &normalize(&a.text)))
                .fold(0.0, f64::max)
        };
        total += best;
    }
    Ok(100.0 * total / golds.len() as f64)
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Relative performance drop caused by redaction, in percent at one
/// decimal. Negative when redaction helped.
pub fn relative_impact(none_score: f64, redact_score: f64) -> Result<f64> {
    if none_score.is_nan() || none_score <= 0.0 {
        return Err(Error::NonPositiveBaseline(none_score));
    }
    Ok(round1(100.0 * (none_score - redact_score) / none_score))
}

/// Impact severity bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Low,
    Moderate,
    High,
}

impl Severity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Severity::Low => "LOW",
            Severity::Moderate => "MODERATE",
            Severity::High => "HIGH",
        }
    }
}

impl std::fmt::Display for Severity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Severity of a single impact value: below 10 is low, 10 through 25 is
/// moderate, above 25 is high.
pub fn classify_one(impact_pct: f64) -> Severity {
    if impact_pct < 10.0 {
        Severity::Low
    } else if impact_pct <= 25.0 {
        Severity::Moderate
    } else {
        Severity::High
    }
}

/// Dataset severity: majority vote over per-model severities, ordering
/// ties broken toward the higher severity.
pub fn classify_impact(impacts: &BTreeMap<String, f64>) -> Result<Severity> {
    if impacts.is_empty() {
        return Err(Error::EmptyImpacts);
    }
    let mut votes: BTreeMap<Severity, usize> = BTreeMap::new();
    for &impact in impacts.values() {
        *votes.entry(classify_one(impact)).or_insert(0) += 1;
    }
    let max = *votes.values().max().expect("non-empty votes");
    Ok(*votes
        .iter()
        .filter(|(_, &n)| n == max)
        .map(|(s, _)| s)
        .max()
        .expect("non-empty votes"))
}

/// One dataset × model impact measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactRecord {
    pub dataset: String,
    pub model: String,
    pub none_score: f64,
    pub redact_score: f64,
    pub impact_pct: f64,
    pub severity: Severity,
}

impl ImpactRecord {
    pub fn new(
        dataset: impl Into<String>,
        model: impl Into<String>,
        none_score: f64,
        redact_score: f64,
    ) -> Result<Self> {
        let impact_pct = relative_impact(none_score, redact_score)?;
        Ok(ImpactRecord {
            dataset: dataset.into(),
            model: model.into(),
            none_score,
            redact_score,
            impact_pct,
            severity: classify_one(impact_pct),
        })
    }
}

/// Train/eval redaction pairings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Pairing {
    /// Trained and evaluated on unredacted data.
    #[serde(rename = "None/None")]
    NoneNone,
    /// Trained and evaluated on redacted data.
    #[serde(rename = "Redact/Redact")]
    RedactRedact,
    /// Trained on unredacted, evaluated on redacted data.
    #[serde(rename = "None/Redact")]
    NoneRedact,
}

impl Pairing {
    pub const ALL: [Pairing; 3] = [Pairing::NoneNone, Pairing::RedactRedact, Pairing::NoneRedact];

    pub fn as_str(&self) -> &'static str {
        match self {
            Pairing::NoneNone => "None/None",
            Pairing::RedactRedact => "Redact/Redact",
            Pairing::NoneRedact => "None/Redact",
        }
    }
}

impl std::str::FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().replace('-', "/").as_str() {
            "none/none" => Ok(Pairing::NoneNone),
            "redact/redact" => Ok(Pairing::RedactRedact),
            "none/redact" => Ok(Pairing::NoneRedact),
            other => Err(Error::InvalidConfig(format!(
                "unknown pairing {other:?} (expected none/none, redact/redact, or none/redact)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingRow {
    pub pairing: Pairing,
    pub score: f64,
    pub delta: f64,
}

/// Scores per pairing with absolute deltas against the None/None baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub rows: Vec<PairingRow>,
}

impl PairingReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("pairing          score   delta\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<15}{:>7.1}{:>8.1}\n",
                row.pairing.as_str(),
                row.score,
                row.delta
            ));
        }
        out
    }
}

/// Builds the pairing report. The None/None score is required; rows come
/// out in pairing order with `delta = score − baseline`.
pub fn pairing_report(scores: &BTreeMap<Pairing, f64>) -> Result<PairingReport> {
    let baseline = *scores.get(&Pairing::NoneNone).ok_or(Error::MissingBaseline)?;
    let rows = Pairing::ALL
        .into_iter()
        .filter_map(|p| {
            scores.get(&p).map(|&score| PairingRow {
                pairing: p,
                score,
                delta: score - baseline,
            })
        })
        .collect();
    Ok(PairingReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Answer;

    fn preds(pairs: &[(&str, &str)]) -> Vec<PredictionRecord> {
        pairs
            .iter()
            .map(|(id, p)| PredictionRecord {
                id: id.to_string(),
                prediction: p.to_string(),
            })
            .collect()
    }

    fn golds(pairs: &[(&str, &str)]) -> Vec<GoldLabel> {
        pairs
            .iter()
            .map(|(id, g)| GoldLabel {
                id: id.to_string(),
                gold: g.to_string(),
            })
            .collect()
    }

    fn qa_gold(id: &str, answers: &[&str], answerable: bool) -> QARecord {
        QARecord::new(
            id,
            "context",
            "question",
            answers
                .iter()
                .map(|a| Answer {
                    text: a.to_string(),
                    answer_start: 0,
                })
                .collect(),
            answerable,
        )
    }

    #[test]
    fn normalization_trims_collapses_and_lowercases() {
        assert_eq!(normalize("  The   CAT\tsat "), "the cat sat");
        assert_eq!(normalize(""), "");
        assert_eq!(normalize(" \n "), "");
    }

    #[test]
    fn accuracy_counts_normalized_exact_matches() {
        let g = golds(&[("1", "Yes"), ("2", "no"), ("3", "Yes"), ("4", "no")]);
        let p = preds(&[("1", " yes "), ("2", "no"), ("3", "YES"), ("4", "yes")]);
        assert_eq!(score_accuracy(&p, &g, normalize).unwrap(), 75.0);

        let all = preds(&[("1", "Yes"), ("2", "no"), ("3", "Yes"), ("4", "no")]);
        assert_eq!(score_accuracy(&all, &g, normalize).unwrap(), 100.0);

        let none = preds(&[("1", "x"), ("2", "x"), ("3", "x"), ("4", "x")]);
        assert_eq!(score_accuracy(&none, &g, normalize).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_validates_prediction_ids() {
        let g = golds(&[("1", "a"), ("2", "b")]);
        let err = score_accuracy(&preds(&[("1", "a")]), &g, normalize).unwrap_err();
        assert!(matches!(err, Error::MissingPrediction { .. }), "{err}");
        let err =
            score_accuracy(&preds(&[("1", "a"), ("1", "b"), ("2", "b")]), &g, normalize)
                .unwrap_err();
        assert!(matches!(err, Error::DuplicatePrediction { .. }), "{err}");
        let err = score_accuracy(
            &preds(&[("1", "a"), ("2", "b"), ("9", "x")]),
            &g,
            normalize,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnmatchedPrediction { .. }), "{err}");
        assert!(matches!(
            score_accuracy(&[], &[], normalize).unwrap_err(),
            Error::EmptyGolds
        ));
    }

    #[test]
    fn token_f1_is_bag_overlap_with_best_gold() {
        let g = vec![qa_gold("1", &["cat sat down"], true)];
        let p = preds(&[("1", "the cat sat")]);
        let f1 = score_token_f1(&p, &g).unwrap();
        assert!((f1 - 200.0 / 3.0).abs() < 1e-9, "{f1}");

        let g = vec![qa_gold("1", &["completely different"], true)];
        assert_eq!(score_token_f1(&p, &g).unwrap(), 0.0);

        let g = vec![qa_gold("1", &["wrong one", "the cat sat"], true)];
        assert_eq!(score_token_f1(&p, &g).unwrap(), 100.0);

        // Repeated tokens count once per occurrence.
        let g = vec![qa_gold("1", &["go go go"], true)];
        let p = preds(&[("1", "go stop")]);
        let f1 = score_token_f1(&p, &g).unwrap();
        let expect = 100.0 * 2.0 * (1.0 / 2.0) * (1.0 / 3.0) / (1.0 / 2.0 + 1.0 / 3.0);
        assert!((f1 - expect).abs() < 1e-9, "{f1} vs {expect}");
    }

    #[test]
    fn unanswerable_gold_wants_an_empty_prediction() {
        let g = vec![qa_gold("1", &[], false)];
        assert_eq!(score_token_f1(&preds(&[("1", "  ")]), &g).unwrap(), 100.0);
        assert_eq!(score_token_f1(&preds(&[("1", "guess")]), &g).unwrap(), 0.0);
    }

    #[test]
    fn impact_reproduces_published_rows() {
        assert_eq!(relative_impact(65.8, 57.8).unwrap(), 12.2);
        assert_eq!(relative_impact(58.8, 60.4).unwrap(), -2.7);
        assert_eq!(relative_impact(44.4, 44.4).unwrap(), 0.0);
        assert_eq!(relative_impact(92.1, 54.2).unwrap(), 41.2);
        assert!(relative_impact(0.0, 5.0).is_err());
        assert!(relative_impact(-1.0, 5.0).is_err());
    }

    #[test]
    fn severity_bands_have_moderate_boundaries() {
        assert_eq!(classify_one(9.99), Severity::Low);
        assert_eq!(classify_one(10.0), Severity::Moderate);
        assert_eq!(classify_one(25.0), Severity::Moderate);
        assert_eq!(classify_one(25.01), Severity::High);
        assert_eq!(classify_one(-3.0), Severity::Low);
    }

    fn impact_map(vals: &[(&str, f64)]) -> BTreeMap<String, f64> {
        vals.iter().map(|(m, v)| (m.to_string(), *v)).collect()
    }

    #[test]
    fn dataset_severity_is_majority_vote_ties_high() {
        let m = impact_map(&[("a", 14.8), ("b", 4.7), ("c", 5.6)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::Low);
        let m = impact_map(&[("a", 41.1), ("b", 43.8), ("c", 46.2)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::High);
        let m = impact_map(&[("a", 7.6), ("b", 11.2), ("c", 9.6)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::Low);
        let m = impact_map(&[("a", 0.0)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::Low);
        // One vote each: the tie resolves upward.
        let m = impact_map(&[("a", 5.0), ("b", 15.0), ("c", 50.0)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::High);
        let m = impact_map(&[("a", 5.0), ("b", 15.0)]);
        assert_eq!(classify_impact(&m).unwrap(), Severity::Moderate);
        assert!(classify_impact(&BTreeMap::new()).is_err());
    }

    #[test]
    fn pairing_report_deltas_against_baseline() {
        let scores = BTreeMap::from([
            (Pairing::NoneNone, 74.9),
            (Pairing::RedactRedact, 57.7),
            (Pairing::NoneRedact, 60.2),
        ]);
        let report = pairing_report(&scores).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert_eq!(report.rows[0].pairing, Pairing::NoneNone);
        assert_eq!(report.rows[0].delta, 0.0);
        assert!((report.rows[1].delta - -17.2).abs() < 1e-9);
        assert!((report.rows[2].delta - -14.7).abs() < 1e-9);

        let text = report.to_text();
        assert!(text.contains("None/None"));
        assert!(text.contains("-17.2"));

        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains(r#""pairing":"Redact/Redact""#));

        let only = BTreeMap::from([(Pairing::NoneNone, 50.0)]);
        assert_eq!(pairing_report(&only).unwrap().rows.len(), 1);
        let missing = BTreeMap::from([(Pairing::NoneRedact, 50.0)]);
        assert!(matches!(
            pairing_report(&missing).unwrap_err(),
            Error::MissingBaseline
        ));
    }

    #[test]
    fn impact_records_carry_rounded_impact_and_severity() {
        let rec = ImpactRecord::new("squad", "claude", 65.8, 57.8).unwrap();
        assert_eq!(rec.impact_pct, 12.2);
        assert_eq!(rec.severity, Severity::Moderate);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains(r#""severity":"MODERATE""#));
    }
}
