//! Subcommand implementations. Shared plumbing lives here too: the atomic
//! output sink, the streaming record driver, and the annotate step that
//! merges external spans with recognizer matches.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use redactkit::corpus::{
    parse_record_line, parse_score_map_csv, parse_score_map_json, read_corpus, read_gold_labels,
    read_predictions, score_map_to_csv, AnnotationSet, CorpusFormat,
};
use redactkit::eval::{
    classify_impact, classify_one, normalize, pairing_report, relative_impact, score_accuracy,
    score_token_f1,
};
use redactkit::model::{validate_corpus, AnnotatedDocument, EntitySpan, QARecord, Record};
use redactkit::recognize::{merged_spans, RecognizerConfig};
use redactkit::redact::{
    adjust_qa_record, qa_outcome_to_line, redact_document, redacted_plain_to_line, QaAdjustment,
};
use redactkit::sample::{
    emit_curve, progressive_plan, progressive_plan_jsonl, repair_plan_jsonl, repair_subsample,
    CurvePoint,
};
use redactkit::stats::{
    dataset_inclusion, ExclusionReason, InclusionDecision, ScoreKind, StatsAccumulator,
    LANGUAGE_CHECK_NOTE,
};

use crate::settings::{
    self, CorpusSettings, FileConfig, ImpactForm, PlanKind, RedactSettings, SampleSettings,
    StatsSettings,
};
use crate::{Cli, CliError, CliResult, Command, MetricArg, SplitArg};

pub fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Redact(args) => {
            let st = settings::resolve_redact(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_redact(&st)
        }
        Command::Stats(args) => {
            let st = settings::resolve_stats(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_stats(&st)
        }
        Command::Sample(args) => {
            let st = settings::resolve_sample(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_sample(&st)
        }
        Command::Curve(args) => {
            let st = settings::resolve_curve(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_curve(&st)
        }
        Command::Score(args) => {
            let st = settings::resolve_score(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_score(&st)
        }
        Command::Impact(args) => {
            let st = settings::resolve_impact(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_impact(&st)
        }
        Command::Validate(args) => {
            let st = settings::resolve_validate(args, &cfg)?;
            if cli.dry_run {
                return print_dry_run(&st.echo);
            }
            run_validate(&st)
        }
    }
}

fn print_dry_run<T: Serialize>(echo: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(echo).expect("echo structs always serialize");
    println!("{text}");
    Ok(())
}

/// Output sink that stages file writes in a sibling temp file and renames
/// it into place on success, so a failed run never leaves a torn file.
enum Sink {
    Stdout(io::BufWriter<io::Stdout>),
    File {
        tmp: io::BufWriter<tempfile::NamedTempFile>,
        target: PathBuf,
    },
}

impl Sink {
    fn create(target: Option<&Path>) -> anyhow::Result<Sink> {
        match target {
            None => Ok(Sink::Stdout(io::BufWriter::new(io::stdout()))),
            Some(path) => {
                let dir = match path.parent() {
                    Some(p) if !p.as_os_str().is_empty() => p,
                    _ => Path::new("."),
                };
                let tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| {
                    format!("cannot create a temporary file in {}", dir.display())
                })?;
                Ok(Sink::File {
                    tmp: io::BufWriter::new(tmp),
                    target: path.to_path_buf(),
                })
            }
        }
    }

    fn finish(self) -> anyhow::Result<()> {
        match self {
            Sink::Stdout(mut w) => Ok(w.flush()?),
            Sink::File { tmp, target } => {
                let tmp = tmp
                    .into_inner()
                    .map_err(|e| anyhow!("cannot flush {}: {}", target.display(), e.error()))?;
                tmp.persist(&target)
                    .map_err(|e| anyhow!("cannot write {}: {}", target.display(), e.error))?;
                Ok(())
            }
        }
    }
}

impl Write for Sink {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Sink::Stdout(w) => w.write(buf),
            Sink::File { tmp, .. } => tmp.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Sink::Stdout(w) => w.flush(),
            Sink::File { tmp, .. } => tmp.flush(),
        }
    }
}

fn write_atomic(path: &Path, content: &str) -> anyhow::Result<()> {
    let mut sink = Sink::create(Some(path))?;
    sink.write_all(content.as_bytes())?;
    sink.finish()
}

fn open_input(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| {
        format!("cannot open {}", path.display())
    })?))
}

fn load_annotations(path: Option<&Path>) -> anyhow::Result<AnnotationSet> {
    match path {
        None => Ok(AnnotationSet::new()),
        Some(path) => AnnotationSet::read_from(open_input(path)?)
            .with_context(|| format!("annotations {}", path.display())),
    }
}

const BATCH: usize = 512;

/// Streams a JSONL corpus through `work`, feeding results to `sink` in
/// input order. With `--jobs` above one, records are parsed and worked on
/// in parallel batches; the sink always runs on this thread.
fn process_records<T, F, S>(
    corpus: &CorpusSettings,
    work: F,
    mut sink: S,
) -> anyhow::Result<()>
where
    T: Send,
    F: Fn(&Record) -> anyhow::Result<T> + Sync,
    S: FnMut(T) -> anyhow::Result<()>,
{
    let pool = if corpus.jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(corpus.jobs)
                .build()
                .context("cannot start the worker pool")?,
        )
    } else {
        None
    };
    let handle = |(n, line): &(usize, String)| -> anyhow::Result<T> {
        let record =
            parse_record_line(line, corpus.format).map_err(|e| anyhow!("line {n}: {e}"))?;
        work(&record).with_context(|| format!("line {n}"))
    };
    let mut drain = |batch: &[(usize, String)]| -> anyhow::Result<()> {
        let results: Vec<anyhow::Result<T>> = match &pool {
            Some(pool) => pool.install(|| batch.par_iter().map(&handle).collect()),
            None => batch.iter().map(&handle).collect(),
        };
        for result in results {
            sink(result?)?;
        }
        Ok(())
    };

    let mut batch = Vec::with_capacity(BATCH);
    for (idx, line) in open_input(&corpus.input)?.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        batch.push((idx + 1, line));
        if batch.len() == BATCH {
            drain(&batch)?;
            batch.clear();
        }
    }
    drain(&batch)
}

/// The annotate step shared by redact and stats: external spans for the
/// record, recognizer matches unless disabled, resolved into one disjoint
/// set per document.
fn annotate_record(
    record: &Record,
    ann: &AnnotationSet,
    recognizer: &RecognizerConfig,
    use_patterns: bool,
) -> anyhow::Result<AnnotatedRecord> {
    match record {
        Record::Plain(doc) => {
            let spans = merged_spans(doc, ann.spans_for(&doc.id), recognizer, use_patterns)?;
            Ok(AnnotatedRecord::Plain(spans))
        }
        Record::Qa(rec) => {
            let context = merged_spans(
                &rec.context,
                &ann.for_context(&rec.id),
                recognizer,
                use_patterns,
            )?;
            let question = merged_spans(
                &rec.question,
                &ann.for_question(&rec.id),
                recognizer,
                use_patterns,
            )?;
            Ok(AnnotatedRecord::Qa { context, question })
        }
    }
}

enum AnnotatedRecord {
    Plain(Vec<EntitySpan>),
    Qa {
        context: Vec<EntitySpan>,
        question: Vec<EntitySpan>,
    },
}

fn run_redact(st: &RedactSettings) -> CliResult<()> {
    let corpus = &st.corpus;
    let ann = load_annotations(corpus.annotations.as_deref())?;
    let mut sink = Sink::create(st.output.as_deref())?;

    let work = |record: &Record| -> anyhow::Result<Option<String>> {
        let spans = annotate_record(record, &ann, &corpus.recognizer, corpus.use_patterns)?;
        match (record, spans) {
            (Record::Plain(doc), AnnotatedRecord::Plain(spans)) => {
                let ad = AnnotatedDocument::new(doc.clone(), spans)?;
                let red = redact_document(&ad, &corpus.policy)?;
                Ok(Some(redacted_plain_to_line(doc, &red, st.emit_map)))
            }
            (Record::Qa(rec), AnnotatedRecord::Qa { context, question }) => {
                let adj = adjust_qa_record(rec, &context, &question, &corpus.policy)?;
                if st.split == SplitArg::Train
                    && matches!(adj, QaAdjustment::AnswerRedacted { .. })
                {
                    return Ok(None);
                }
                Ok(Some(qa_outcome_to_line(rec, &adj, st.emit_map)))
            }
            _ => unreachable!("annotate_record keeps the record shape"),
        }
    };
    process_records(corpus, work, |line: Option<String>| {
        if let Some(line) = line {
            sink.write_all(line.as_bytes())?;
            sink.write_all(b"\n")?;
        }
        Ok(())
    })?;
    sink.finish()?;
    Ok(())
}

#[derive(Serialize)]
struct ScoreRow<'a> {
    id: &'a str,
    score: f64,
}

#[derive(Serialize)]
struct StatsReport<'a> {
    n_records: usize,
    redaction_rate_pct: f64,
    histogram: &'a BTreeMap<redactkit::model::EntityLabel, u64>,
    score_kind: &'static str,
    per_record: Vec<ScoreRow<'a>>,
    inclusion: &'a InclusionDecision,
    language_check: &'static str,
}

fn inclusion_text(decision: &InclusionDecision) -> String {
    match decision {
        InclusionDecision::Include => "include".to_string(),
        InclusionDecision::Exclude {
            reason: ExclusionReason::ZeroPii,
        } => "exclude (zero PII)".to_string(),
        InclusionDecision::Exclude {
            reason: ExclusionReason::DominantEntity { label, share },
        } => format!("exclude (dominant entity {label}, share {share:.4})"),
    }
}

struct ResolvedRecord {
    id: String,
    parts: Vec<(usize, Vec<EntitySpan>)>,
}

fn run_stats(st: &StatsSettings) -> CliResult<()> {
    let corpus = &st.corpus;
    let ann = load_annotations(corpus.annotations.as_deref())?;
    let policy = &corpus.policy;

    let work = |record: &Record| -> anyhow::Result<ResolvedRecord> {
        let spans = annotate_record(record, &ann, &corpus.recognizer, corpus.use_patterns)?;
        let parts = match (record, spans) {
            (Record::Plain(doc), AnnotatedRecord::Plain(spans)) => {
                vec![(doc.char_len(), spans)]
            }
            (Record::Qa(rec), AnnotatedRecord::Qa { context, question }) => vec![
                (rec.context.char_len(), context),
                (rec.question.char_len(), question),
            ],
            _ => unreachable!("annotate_record keeps the record shape"),
        };
        Ok(ResolvedRecord {
            id: record.id().to_string(),
            parts,
        })
    };
    let mut acc = StatsAccumulator::new();
    process_records(corpus, work, |rec: ResolvedRecord| {
        let parts: Vec<(usize, &[EntitySpan])> =
            rec.parts.iter().map(|(n, s)| (*n, s.as_slice())).collect();
        acc.add_record(&rec.id, &parts, policy)?;
        Ok(())
    })?;
    let stats = acc.finish().map_err(anyhow::Error::new)?;
    let inclusion = dataset_inclusion(&stats, st.threshold).map_err(anyhow::Error::new)?;
    let scores = stats.per_record_values(st.score);

    if let Some(path) = &st.scores_out {
        write_atomic(path, &score_map_to_csv(&scores))?;
    }

    let score_kind = match st.score {
        ScoreKind::Count => "count",
        ScoreKind::Coverage => "coverage",
    };
    let mut sink = Sink::create(st.output.as_deref())?;
    if st.json {
        let report = StatsReport {
            n_records: stats.n_records,
            redaction_rate_pct: stats.redaction_rate_pct,
            histogram: &stats.histogram,
            score_kind,
            per_record: scores
                .iter()
                .map(|(id, &score)| ScoreRow { id, score })
                .collect(),
            inclusion: &inclusion,
            language_check: LANGUAGE_CHECK_NOTE,
        };
        let text =
            serde_json::to_string_pretty(&report).expect("stats reports always serialize");
        writeln!(sink, "{text}").map_err(anyhow::Error::new)?;
    } else {
        writeln!(sink, "records: {}", stats.n_records).map_err(anyhow::Error::new)?;
        writeln!(sink, "redaction_rate_pct: {:.2}", stats.redaction_rate_pct)
            .map_err(anyhow::Error::new)?;
        writeln!(sink, "histogram:").map_err(anyhow::Error::new)?;
        for (label, count) in &stats.histogram {
            writeln!(sink, "  {label}: {count}").map_err(anyhow::Error::new)?;
        }
        writeln!(sink, "score: {score_kind}").map_err(anyhow::Error::new)?;
        writeln!(sink, "inclusion: {}", inclusion_text(&inclusion))
            .map_err(anyhow::Error::new)?;
        writeln!(sink, "language_check: {LANGUAGE_CHECK_NOTE}").map_err(anyhow::Error::new)?;
    }
    sink.finish()?;
    Ok(())
}

fn load_scores(path: &Path) -> anyhow::Result<BTreeMap<String, f64>> {
    let src =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let parsed = if path.extension().and_then(|e| e.to_str()) == Some("csv") {
        parse_score_map_csv(&src)
    } else {
        parse_score_map_json(&src)
    };
    parsed.with_context(|| format!("score file {}", path.display()))
}

fn run_sample(st: &SampleSettings) -> CliResult<()> {
    let scores = load_scores(&st.scores)?;
    let rendered = match &st.plan {
        PlanKind::Progressive(strategy) => {
            let plan = progressive_plan(&scores, st.fraction, *strategy)
                .map_err(anyhow::Error::new)?;
            progressive_plan_jsonl(&plan, scores.keys().map(String::as_str))
        }
        PlanKind::Repair(strategy) => {
            let plan = repair_subsample(&scores, st.fraction, *strategy)
                .map_err(anyhow::Error::new)?;
            repair_plan_jsonl(&plan)
        }
    };
    let mut sink = Sink::create(st.output.as_deref())?;
    sink.write_all(rendered.as_bytes())
        .map_err(anyhow::Error::new)?;
    sink.finish()?;
    Ok(())
}

fn parse_points(src: &str) -> anyhow::Result<Vec<CurvePoint>> {
    let value: serde_json::Value = serde_json::from_str(src)?;
    if value.is_array() {
        Ok(serde_json::from_value(value)?)
    } else {
        Ok(vec![serde_json::from_value(value)?])
    }
}

fn run_curve(st: &settings::CurveSettings) -> CliResult<()> {
    let mut points = Vec::new();
    for path in &st.points {
        let src =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let batch =
            parse_points(&src).with_context(|| format!("points file {}", path.display()))?;
        points.extend(batch);
    }
    let csv = emit_curve(&points).map_err(anyhow::Error::new)?;
    let mut sink = Sink::create(st.output.as_deref())?;
    sink.write_all(csv.as_bytes()).map_err(anyhow::Error::new)?;
    sink.finish()?;
    Ok(())
}

fn run_score(st: &settings::ScoreSettings) -> CliResult<()> {
    let preds = read_predictions(open_input(&st.predictions)?)
        .with_context(|| format!("predictions {}", st.predictions.display()))?;
    let (value, n, metric) = match st.metric {
        MetricArg::Accuracy => {
            let golds = read_gold_labels(open_input(&st.gold)?)
                .with_context(|| format!("gold {}", st.gold.display()))?;
            let value =
                score_accuracy(&preds, &golds, normalize).map_err(anyhow::Error::new)?;
            (value, golds.len(), "accuracy")
        }
        MetricArg::TokenF1 => {
            let records = read_corpus(open_input(&st.gold)?, CorpusFormat::Qa)
                .with_context(|| format!("gold {}", st.gold.display()))?;
            let golds: Vec<QARecord> = records
                .into_iter()
                .map(|r| match r {
                    Record::Qa(q) => q,
                    Record::Plain(_) => unreachable!("QA format yields QA records"),
                })
                .collect();
            let value = score_token_f1(&preds, &golds).map_err(anyhow::Error::new)?;
            (value, golds.len(), "token-f1")
        }
    };
    let mut sink = Sink::create(st.output.as_deref())?;
    if st.json {
        let line = json!({ "metric": metric, "value": value, "n": n });
        writeln!(sink, "{line}").map_err(anyhow::Error::new)?;
    } else {
        writeln!(sink, "{value:.1}").map_err(anyhow::Error::new)?;
    }
    sink.finish()?;
    Ok(())
}

fn run_impact(st: &settings::ImpactSettings) -> CliResult<()> {
    let mut sink = Sink::create(st.output.as_deref())?;
    match &st.form {
        ImpactForm::Relative { none, redact } => {
            let impact = relative_impact(*none, *redact).map_err(anyhow::Error::new)?;
            if st.json {
                let line = json!({
                    "none_score": none,
                    "redact_score": redact,
                    "impact_pct": impact,
                    "severity": classify_one(impact).as_str(),
                });
                writeln!(sink, "{line}").map_err(anyhow::Error::new)?;
            } else {
                writeln!(sink, "{impact:.1}").map_err(anyhow::Error::new)?;
            }
        }
        ImpactForm::Pairings(map) => {
            let report = pairing_report(map).map_err(anyhow::Error::new)?;
            if st.json {
                let text =
                    serde_json::to_string_pretty(&report).expect("reports always serialize");
                writeln!(sink, "{text}").map_err(anyhow::Error::new)?;
            } else {
                sink.write_all(report.to_text().as_bytes())
                    .map_err(anyhow::Error::new)?;
            }
        }
        ImpactForm::Severity(map) => {
            let severity = classify_impact(map).map_err(anyhow::Error::new)?;
            if st.json {
                let line = json!({ "impacts": map, "severity": severity.as_str() });
                writeln!(sink, "{line}").map_err(anyhow::Error::new)?;
            } else {
                writeln!(sink, "{}", severity.as_str()).map_err(anyhow::Error::new)?;
            }
        }
    }
    sink.finish()?;
    Ok(())
}

fn run_validate(st: &settings::ValidateSettings) -> CliResult<()> {
    let records = read_corpus(open_input(&st.input)?, st.format)
        .with_context(|| format!("{}", st.input.display()))?;
    let report = validate_corpus(&records);
    if st.json {
        let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
        println!("{text}");
    }
    if report.is_valid() {
        if !st.json {
            println!("ok: {} records", records.len());
        }
        Ok(())
    } else {
        for check in report.violations() {
            eprintln!(
                "record {}: {}",
                check.id,
                check.violation.as_deref().unwrap_or("invalid")
            );
        }
        Err(CliError::Failure(anyhow!(
            "{} invalid record(s)",
            report.n_invalid()
        )))
    }
}
