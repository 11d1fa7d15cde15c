//! Wire formats: JSONL corpora and annotations, prediction and gold files,
//! and per-record score maps (JSON or CSV).
//!
//! Every `parse_*_line` function takes one JSONL line so callers can stream
//! files of any size; the `read_*` helpers collect whole files and attach
//! 1-based line numbers to errors.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Answer, Document, EntityLabel, QARecord, Record};

/// Corpus shapes accepted on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Plain,
    Qa,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(CorpusFormat::Plain),
            "qa" => Ok(CorpusFormat::Qa),
            other => Err(Error::Malformed {
                line: 0,
                msg: format!("unknown corpus format {other:?} (expected plain or qa)"),
            }),
        }
    }
}

pub fn parse_plain_line(line: &str) -> std::result::Result<Document, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn plain_to_line(doc: &Document) -> String {
    serde_json::to_string(doc).expect("document serialization cannot fail")
}

#[derive(Serialize, Deserialize)]
struct QaWire {
    id: String,
    context: String,
    question: String,
    #[serde(default)]
    answers: Vec<Answer>,
    #[serde(default)]
    is_answerable: Option<bool>,
}

pub fn parse_qa_line(line: &str) -> std::result::Result<QARecord, serde_json::Error> {
    let wire: QaWire = serde_json::from_str(line)?;
    let is_answerable = wire.is_answerable.unwrap_or(!wire.answers.is_empty());
    Ok(QARecord::new(
        wire.id,
        wire.context,
        wire.question,
        wire.answers,
        is_answerable,
    ))
}

pub fn qa_to_line(rec: &QARecord) -> String {
    let wire = QaWire {
        id: rec.id.clone(),
        context: rec.context.text.clone(),
        question: rec.question.text.clone(),
        answers: rec.answers.clone(),
        is_answerable: Some(rec.is_answerable),
    };
    serde_json::to_string(&wire).expect("record serialization cannot fail")
}

pub fn parse_record_line(line: &str, format: CorpusFormat) -> std::result::Result<Record, serde_json::Error> {
    match format {
        CorpusFormat::Plain => parse_plain_line(line).map(Record::Plain),
        CorpusFormat::Qa => parse_qa_line(line).map(Record::Qa),
    }
}

/// Collects a whole corpus, skipping blank lines.
pub fn read_corpus<R: BufRead>(reader: R, format: CorpusFormat) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_record_line(&line, format).map_err(|e| Error::json_at(idx + 1, e))?;
        records.push(rec);
    }
    Ok(records)
}

/// An annotation span as written by an external tagger: offsets only, no
/// surface text. Unknown labels fail the whole file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawSpan {
    pub start: usize,
    pub end: usize,
    pub label: EntityLabel,
}

#[derive(Deserialize)]
struct RawSpanWire {
    start: usize,
    end: usize,
    label: String,
}

#[derive(Deserialize)]
struct AnnotationWire {
    doc_id: String,
    spans: Vec<RawSpanWire>,
}

pub fn parse_annotation_line(line: &str) -> Result<(String, Vec<RawSpan>)> {
    let wire: AnnotationWire =
        serde_json::from_str(line).map_err(|e| Error::json_at(0, e))?;
    let mut spans = Vec::with_capacity(wire.spans.len());
    for s in wire.spans {
        spans.push(RawSpan {
            start: s.start,
            end: s.end,
            label: s.label.parse()?,
        });
    }
    Ok((wire.doc_id, spans))
}

/// All annotations of a run, keyed by document id. Repeated lines for one
/// document merge, so sharded tagger output loads unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationSet {
    by_doc: BTreeMap<String, Vec<RawSpan>>,
}

impl AnnotationSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, doc_id: String, spans: Vec<RawSpan>) {
        self.by_doc.entry(doc_id).or_default().extend(spans);
    }

    pub fn spans_for(&self, doc_id: &str) -> &[RawSpan] {
        self.by_doc.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Spans addressed to a QA record's context. Lines keyed by the bare
    /// record id count as context annotations too.
    pub fn for_context(&self, record_id: &str) -> Vec<RawSpan> {
        let mut spans = self.spans_for(record_id).to_vec();
        spans.extend_from_slice(self.spans_for(&crate::model::context_doc_id(record_id)));
        spans
    }

    /// Spans addressed to a QA record's question.
    pub fn for_question(&self, record_id: &str) -> Vec<RawSpan> {
        self.spans_for(&crate::model::question_doc_id(record_id))
            .to_vec()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.by_doc.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.by_doc.is_empty()
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = AnnotationSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (doc_id, spans) = parse_annotation_line(&line).map_err(|e| match e {
                Error::Json { source, .. } => Error::json_at(idx + 1, source),
                other => other,
            })?;
            set.insert(doc_id, spans);
        }
        Ok(set)
    }
}

/// One model output to score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub prediction: String,
}

pub fn parse_prediction_line(line: &str) -> std::result::Result<PredictionRecord, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn read_predictions<R: BufRead>(reader: R) -> Result<Vec<PredictionRecord>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_prediction_line(&line).map_err(|e| Error::json_at(idx + 1, e))?);
    }
    Ok(out)
}

/// A gold string label for exact-match scoring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldLabel {
    pub id: String,
    pub gold: String,
}

pub fn parse_gold_line(line: &str) -> std::result::Result<GoldLabel, serde_json::Error> {
    serde_json::from_str(line)
}

pub fn read_gold_labels<R: BufRead>(reader: R) -> Result<Vec<GoldLabel>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_gold_line(&line).map_err(|e| Error::json_at(idx + 1, e))?);
    }
    Ok(out)
}

fn check_score(id: &str, score: f64) -> Result<f64> {
    if score.is_finite() {
        Ok(score)
    } else {
        Err(Error::NonFiniteScore { id: id.to_string() })
    }
}

/// Parses a per-record score map from JSON. Three shapes are accepted: a
/// bare object (`{"id": score, ...}`), an array of `{"id", "score"}` rows,
/// or a full statistics report carrying a `per_record` array.
pub fn parse_score_map_json(src: &str) -> Result<BTreeMap<String, f64>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        score: f64,
    }
    #[derive(Deserialize)]
    struct Report {
        per_record: Vec<Row>,
    }

    let value: serde_json::Value =
        serde_json::from_str(src).map_err(|e| Error::json_at(0, e))?;
    let mut map = BTreeMap::new();
    let mut put = |id: String, score: f64| -> Result<()> {
        check_score(&id, score)?;
        if map.insert(id.clone(), score).is_some() {
            return Err(Error::DuplicateId { id });
        }
        Ok(())
    };
    match value {
        serde_json::Value::Array(_) => {
            let rows: Vec<Row> =
                serde_json::from_str(src).map_err(|e| Error::json_at(0, e))?;
            for row in rows {
                put(row.id, row.score)?;
            }
        }
        serde_json::Value::Object(ref obj) if obj.contains_key("per_record") => {
            let report: Report =
                serde_json::from_str(src).map_err(|e| Error::json_at(0, e))?;
            for row in report.per_record {
                put(row.id, row.score)?;
            }
        }
        serde_json::Value::Object(obj) => {
            for (id, v) in obj {
                let score = v.as_f64().ok_or_else(|| Error::Malformed {
                    line: 0,
                    msg: format!("score for {id:?} is not a number"),
                })?;
                put(id, score)?;
            }
        }
        _ => {
            return Err(Error::Malformed {
                line: 0,
                msg: "score file must be a JSON object, array, or report".to_string(),
            })
        }
    }
    Ok(map)
}

/// Parses a per-record score map from CSV with an `id,score` header.
pub fn parse_score_map_csv(src: &str) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::Reader::from_reader(src.as_bytes());
    let mut map = BTreeMap::new();
    for (idx, row) in reader.deserialize::<(String, f64)>().enumerate() {
        let (id, score) = row.map_err(|e| Error::Malformed {
            line: idx + 2, // header is line 1
            msg: e.to_string(),
        })?;
        check_score(&id, score)?;
        if map.insert(id.clone(), score).is_some() {
            return Err(Error::DuplicateId { id });
        }
    }
    Ok(map)
}

/// Renders a score map as CSV with an `id,score` header, rows in id order.
pub fn score_map_to_csv(map: &BTreeMap<String, f64>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["id", "score"])
        .expect("writing to memory cannot fail");
    for (id, score) in map {
        writer
            .write_record([id.as_str(), &format_score(*score)])
            .expect("writing to memory cannot fail");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory cannot fail"))
        .expect("csv output is utf-8")
}

/// Scores that carry an integral value print without a fraction so that
/// span counts stay readable as counts.
pub fn format_score(score: f64) -> String {
    if score.fract() == 0.0 && score.abs() < 1e15 {
        format!("{}", score as i64)
    } else {
        format!("{score}")
    }
}
