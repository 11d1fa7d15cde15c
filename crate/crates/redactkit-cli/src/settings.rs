//! Flag/config resolution. Every subcommand resolves its inputs through
//! here before touching any file, with command line flags winning over the
//! `[subcommand]` table of the config file, which wins over `[defaults]`,
//! which wins over built-in defaults. The resolved state doubles as the
//! `--dry-run` echo.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;

use redactkit::corpus::CorpusFormat;
use redactkit::eval::Pairing;
use redactkit::model::{EntityLabel, RedactionPolicy};
use redactkit::recognize::{parse_recognizer_config, ConfigFormat, RecognizerConfig};
use redactkit::redact::{build_policy, parse_policy_file, PolicyMode};
use redactkit::sample::{ProgressiveStrategy, RepairStrategy};
use redactkit::stats::ScoreKind;

use crate::{
    CliError, CliResult, CurveArgs, FormatArg, ImpactArgs, MetricArg, ModeArg, PolicyArg,
    RedactArgs, SampleArgs, ScoreArgs, ScoreKindArg, SplitArg, StatsArgs, ValidateArgs,
};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// The parsed `--config` file: a table of tables, looked up as
/// `[command].key` falling back to `[defaults].key`.
pub struct FileConfig {
    root: toml::value::Table,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(FileConfig {
                root: toml::value::Table::new(),
            });
        };
        let src = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let root = toml::from_str(&src)
            .map_err(|e| usage(format!("config {}: {e}", path.display())))?;
        Ok(FileConfig { root })
    }

    fn lookup(&self, cmd: &str, key: &str) -> Option<&toml::Value> {
        [cmd, "defaults"].iter().find_map(|table| {
            self.root
                .get(*table)
                .and_then(toml::Value::as_table)
                .and_then(|t| t.get(key))
        })
    }

    fn typed<T>(
        &self,
        cmd: &str,
        key: &str,
        want: &str,
        read: impl Fn(&toml::Value) -> Option<T>,
    ) -> CliResult<Option<T>> {
        match self.lookup(cmd, key) {
            None => Ok(None),
            Some(v) => read(v)
                .map(Some)
                .ok_or_else(|| usage(format!("config key {key:?} for {cmd} must be {want}"))),
        }
    }

    fn string(&self, cmd: &str, key: &str) -> CliResult<Option<String>> {
        self.typed(cmd, key, "a string", |v| v.as_str().map(str::to_string))
    }

    fn path(&self, cmd: &str, key: &str) -> CliResult<Option<PathBuf>> {
        Ok(self.string(cmd, key)?.map(PathBuf::from))
    }

    fn boolean(&self, cmd: &str, key: &str) -> CliResult<Option<bool>> {
        self.typed(cmd, key, "a boolean", toml::Value::as_bool)
    }

    fn float(&self, cmd: &str, key: &str) -> CliResult<Option<f64>> {
        self.typed(cmd, key, "a number", |v| {
            v.as_float().or_else(|| v.as_integer().map(|n| n as f64))
        })
    }

    fn unsigned(&self, cmd: &str, key: &str) -> CliResult<Option<u64>> {
        self.typed(cmd, key, "a non-negative integer", |v| {
            v.as_integer().and_then(|n| u64::try_from(n).ok())
        })
    }

    fn strings(&self, cmd: &str, key: &str) -> CliResult<Option<Vec<String>>> {
        self.typed(cmd, key, "an array of strings", |v| {
            v.as_array()?
                .iter()
                .map(|e| e.as_str().map(str::to_string))
                .collect()
        })
    }

    fn paths(&self, cmd: &str, key: &str) -> CliResult<Option<Vec<PathBuf>>> {
        Ok(self
            .strings(cmd, key)?
            .map(|v| v.into_iter().map(PathBuf::from).collect()))
    }

    fn string_table(&self, cmd: &str, key: &str) -> CliResult<Option<BTreeMap<String, String>>> {
        self.typed(cmd, key, "a table of strings", |v| {
            v.as_table()?
                .iter()
                .map(|(k, val)| Some((k.clone(), val.as_str()?.to_string())))
                .collect()
        })
    }

    fn float_table(&self, cmd: &str, key: &str) -> CliResult<Option<BTreeMap<String, f64>>> {
        self.typed(cmd, key, "a table of numbers", |v| {
            v.as_table()?
                .iter()
                .map(|(k, val)| {
                    let n = val
                        .as_float()
                        .or_else(|| val.as_integer().map(|n| n as f64))?;
                    Some((k.clone(), n))
                })
                .collect()
        })
    }
}

fn enum_from_config<T: ValueEnum>(cmd: &str, key: &str, s: &str) -> CliResult<T> {
    T::from_str(s, true).map_err(|_| usage(format!("config {cmd}.{key}: unknown value {s:?}")))
}

fn resolve_enum<T: ValueEnum>(
    flag: Option<T>,
    cfg: &FileConfig,
    cmd: &str,
    key: &str,
    default: T,
) -> CliResult<T> {
    match flag {
        Some(v) => Ok(v),
        None => match cfg.string(cmd, key)? {
            Some(s) => enum_from_config(cmd, key, &s),
            None => Ok(default),
        },
    }
}

fn parse_labels(raw: &[String]) -> CliResult<BTreeSet<EntityLabel>> {
    raw.iter()
        .map(|l| l.parse().map_err(|e| usage(format!("{e}"))))
        .collect()
}

fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(CliError::Failure)
}

fn format_of(path: &Path) -> ConfigFormat {
    ConfigFormat::from_extension(path.extension().and_then(|e| e.to_str()))
}

#[derive(Serialize)]
pub struct PolicyEcho {
    labels: Vec<&'static str>,
    tokens: BTreeMap<&'static str, String>,
}

fn echo_policy(policy: &RedactionPolicy) -> PolicyEcho {
    PolicyEcho {
        labels: policy.labels.iter().map(EntityLabel::as_str).collect(),
        tokens: policy
            .token_map
            .iter()
            .map(|(l, t)| (l.as_str(), t.clone()))
            .collect(),
    }
}

/// Flags shared by `redact` and `stats`.
pub struct CorpusFlags<'a> {
    pub input: &'a Option<PathBuf>,
    pub annotations: &'a Option<PathBuf>,
    pub format: Option<FormatArg>,
    pub policy: Option<PolicyArg>,
    pub labels: &'a [String],
    pub policy_file: &'a Option<PathBuf>,
    pub no_patterns: bool,
    pub recognizer_config: &'a Option<PathBuf>,
    pub jobs: Option<usize>,
}

pub struct CorpusSettings {
    pub input: PathBuf,
    pub annotations: Option<PathBuf>,
    pub format: CorpusFormat,
    pub policy: RedactionPolicy,
    pub use_patterns: bool,
    pub recognizer: RecognizerConfig,
    pub jobs: usize,
}

#[derive(Serialize)]
pub struct CorpusEcho {
    input: PathBuf,
    annotations: Option<PathBuf>,
    format: &'static str,
    policy: PolicyEcho,
    patterns: bool,
    recognizer_config: Option<PathBuf>,
    jobs: usize,
}

fn resolve_policy(cmd: &str, flags: &CorpusFlags, cfg: &FileConfig) -> CliResult<RedactionPolicy> {
    let file = match flags.policy_file {
        Some(p) => Some(p.clone()),
        None => cfg.path(cmd, "policy_file")?,
    };
    let mode = match flags.policy {
        Some(m) => Some(m),
        None => cfg
            .string(cmd, "policy")?
            .map(|s| enum_from_config(cmd, "policy", &s))
            .transpose()?,
    };
    let labels = if flags.labels.is_empty() {
        cfg.strings(cmd, "labels")?.unwrap_or_default()
    } else {
        flags.labels.to_vec()
    };

    if let Some(path) = file {
        if mode.is_some() || !labels.is_empty() {
            return Err(usage("policy_file and policy/labels are mutually exclusive"));
        }
        let src = read_to_string(&path)?;
        return parse_policy_file(&src, format_of(&path)).map_err(|e| {
            CliError::Failure(
                anyhow::Error::new(e).context(format!("policy file {}", path.display())),
            )
        });
    }

    let labels = parse_labels(&labels)?;
    let mode = match mode.unwrap_or(PolicyArg::Full) {
        PolicyArg::Limited => {
            if labels.is_empty() {
                return Err(usage("a limited policy requires --labels"));
            }
            PolicyMode::Limited(labels)
        }
        other => {
            if !labels.is_empty() {
                return Err(usage("--labels is only meaningful with --policy limited"));
            }
            match other {
                PolicyArg::Full => PolicyMode::Full,
                PolicyArg::None => PolicyMode::None,
                PolicyArg::Limited => unreachable!("handled above"),
            }
        }
    };
    let mut policy = build_policy(&mode);
    if let Some(tokens) = cfg.string_table(cmd, "tokens")? {
        for (label, token) in tokens {
            let label: EntityLabel = label.parse().map_err(|e| usage(format!("{e}")))?;
            policy.token_map.insert(label, token);
        }
        policy
            .validate()
            .map_err(|e| usage(format!("config {cmd}.tokens: {e}")))?;
    }
    Ok(policy)
}

fn resolve_corpus(
    cmd: &'static str,
    flags: &CorpusFlags,
    cfg: &FileConfig,
) -> CliResult<(CorpusSettings, CorpusEcho)> {
    let input = match flags.input {
        Some(p) => p.clone(),
        None => cfg
            .path(cmd, "input")?
            .ok_or_else(|| usage(format!("{cmd} requires --input")))?,
    };
    let annotations = match flags.annotations {
        Some(p) => Some(p.clone()),
        None => cfg.path(cmd, "annotations")?,
    };
    let format_arg = resolve_enum(flags.format, cfg, cmd, "format", FormatArg::Plain)?;
    let format = match format_arg {
        FormatArg::Plain => CorpusFormat::Plain,
        FormatArg::Qa => CorpusFormat::Qa,
    };
    let use_patterns = !flags.no_patterns && cfg.boolean(cmd, "patterns")?.unwrap_or(true);
    let recognizer_config = match flags.recognizer_config {
        Some(p) => Some(p.clone()),
        None => cfg.path(cmd, "recognizer_config")?,
    };
    let recognizer = match &recognizer_config {
        Some(path) => {
            let src = read_to_string(path)?;
            parse_recognizer_config(&src, format_of(path)).map_err(|e| {
                CliError::Failure(
                    anyhow::Error::new(e).context(format!("recognizer config {}", path.display())),
                )
            })?
        }
        None => RecognizerConfig::default(),
    };
    let policy = resolve_policy(cmd, flags, cfg)?;
    let jobs = match flags.jobs {
        Some(n) => n,
        None => cfg.unsigned(cmd, "jobs")?.unwrap_or(1) as usize,
    };
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let echo = CorpusEcho {
        input: input.clone(),
        annotations: annotations.clone(),
        format: match format_arg {
            FormatArg::Plain => "plain",
            FormatArg::Qa => "qa",
        },
        policy: echo_policy(&policy),
        patterns: use_patterns,
        recognizer_config,
        jobs,
    };
    Ok((
        CorpusSettings {
            input,
            annotations,
            format,
            policy,
            use_patterns,
            recognizer,
            jobs,
        },
        echo,
    ))
}

pub struct RedactSettings {
    pub corpus: CorpusSettings,
    pub split: SplitArg,
    pub emit_map: bool,
    pub output: Option<PathBuf>,
    pub echo: RedactEcho,
}

#[derive(Serialize)]
pub struct RedactEcho {
    command: &'static str,
    #[serde(flatten)]
    corpus: CorpusEcho,
    split: &'static str,
    emit_map: bool,
    output: Option<PathBuf>,
}

pub fn resolve_redact(args: &RedactArgs, cfg: &FileConfig) -> CliResult<RedactSettings> {
    let flags = CorpusFlags {
        input: &args.input,
        annotations: &args.annotations,
        format: args.format,
        policy: args.policy,
        labels: &args.labels,
        policy_file: &args.policy_file,
        no_patterns: args.no_patterns,
        recognizer_config: &args.recognizer_config,
        jobs: args.jobs,
    };
    let (corpus, corpus_echo) = resolve_corpus("redact", &flags, cfg)?;
    let split = resolve_enum(args.split, cfg, "redact", "split", SplitArg::Eval)?;
    let emit_map = args.emit_map || cfg.boolean("redact", "emit_map")?.unwrap_or(false);
    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("redact", "output")?,
    };
    let echo = RedactEcho {
        command: "redact",
        corpus: corpus_echo,
        split: match split {
            SplitArg::Train => "train",
            SplitArg::Eval => "eval",
        },
        emit_map,
        output: output.clone(),
    };
    Ok(RedactSettings {
        corpus,
        split,
        emit_map,
        output,
        echo,
    })
}

pub struct StatsSettings {
    pub corpus: CorpusSettings,
    pub score: ScoreKind,
    pub threshold: f64,
    pub scores_out: Option<PathBuf>,
    pub json: bool,
    pub output: Option<PathBuf>,
    pub echo: StatsEcho,
}

#[derive(Serialize)]
pub struct StatsEcho {
    command: &'static str,
    #[serde(flatten)]
    corpus: CorpusEcho,
    score: &'static str,
    threshold: f64,
    scores_out: Option<PathBuf>,
    json: bool,
    output: Option<PathBuf>,
}

pub fn resolve_stats(args: &StatsArgs, cfg: &FileConfig) -> CliResult<StatsSettings> {
    let flags = CorpusFlags {
        input: &args.input,
        annotations: &args.annotations,
        format: args.format,
        policy: args.policy,
        labels: &args.labels,
        policy_file: &args.policy_file,
        no_patterns: args.no_patterns,
        recognizer_config: &args.recognizer_config,
        jobs: args.jobs,
    };
    let (corpus, corpus_echo) = resolve_corpus("stats", &flags, cfg)?;
    let score_arg = resolve_enum(args.score, cfg, "stats", "score", ScoreKindArg::Count)?;
    let score = match score_arg {
        ScoreKindArg::Count => ScoreKind::Count,
        ScoreKindArg::Coverage => ScoreKind::Coverage,
    };
    let threshold = match args.threshold {
        Some(t) => t,
        None => cfg.float("stats", "threshold")?.unwrap_or(0.9),
    };
    if !(threshold.is_finite() && threshold > 0.0 && threshold <= 1.0) {
        return Err(usage(format!(
            "--threshold must be in (0, 1], got {threshold}"
        )));
    }
    let scores_out = match &args.scores_out {
        Some(p) => Some(p.clone()),
        None => cfg.path("stats", "scores_out")?,
    };
    let json = args.json || cfg.boolean("stats", "json")?.unwrap_or(false);
    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("stats", "output")?,
    };
    let echo = StatsEcho {
        command: "stats",
        corpus: corpus_echo,
        score: match score_arg {
            ScoreKindArg::Count => "count",
            ScoreKindArg::Coverage => "coverage",
        },
        threshold,
        scores_out: scores_out.clone(),
        json,
        output: output.clone(),
    };
    Ok(StatsSettings {
        corpus,
        score,
        threshold,
        scores_out,
        json,
        output,
        echo,
    })
}

pub enum PlanKind {
    Progressive(ProgressiveStrategy),
    Repair(RepairStrategy),
}

pub struct SampleSettings {
    pub scores: PathBuf,
    pub fraction: f64,
    pub plan: PlanKind,
    pub output: Option<PathBuf>,
    pub echo: SampleEcho,
}

#[derive(Serialize)]
pub struct SampleEcho {
    command: &'static str,
    scores: PathBuf,
    fraction: f64,
    mode: &'static str,
    strategy: String,
    seed: Option<u64>,
    output: Option<PathBuf>,
}

pub fn resolve_sample(args: &SampleArgs, cfg: &FileConfig) -> CliResult<SampleSettings> {
    let scores = match &args.scores {
        Some(p) => p.clone(),
        None => cfg
            .path("sample", "scores")?
            .ok_or_else(|| usage("sample requires --scores"))?,
    };
    let fraction = match args.fraction {
        Some(f) => f,
        None => cfg
            .float("sample", "fraction")?
            .ok_or_else(|| usage("sample requires --fraction"))?,
    };
    if !(fraction.is_finite() && (0.0..=1.0).contains(&fraction)) {
        return Err(usage(format!(
            "--fraction must be in [0, 1], got {fraction}"
        )));
    }
    let mode = resolve_enum(args.mode, cfg, "sample", "mode", ModeArg::Progressive)?;
    let strategy = match &args.strategy {
        Some(s) => s.clone(),
        None => cfg
            .string("sample", "strategy")?
            .ok_or_else(|| usage("sample requires --strategy"))?,
    };
    let seed = match args.seed {
        Some(s) => Some(s),
        None => cfg.unsigned("sample", "seed")?,
    };
    let random = strategy == "random";
    if args.seed.is_some() && !random {
        return Err(usage("--seed only applies to the random strategy"));
    }

    let need_seed = || seed.ok_or_else(|| usage("the random strategy requires --seed"));
    let plan = match (mode, strategy.as_str()) {
        (ModeArg::Progressive, "random") => {
            PlanKind::Progressive(ProgressiveStrategy::Random { seed: need_seed()? })
        }
        (ModeArg::Progressive, "content-low") => {
            PlanKind::Progressive(ProgressiveStrategy::ContentLowFirst)
        }
        (ModeArg::Progressive, "content-high") => {
            PlanKind::Progressive(ProgressiveStrategy::ContentHighFirst)
        }
        (ModeArg::Progressive, other) => {
            return Err(usage(format!(
                "unknown progressive strategy {other:?} (expected random, content-low, or content-high)"
            )))
        }
        (ModeArg::Repair, "random") => PlanKind::Repair(RepairStrategy::Random { seed: need_seed()? }),
        (ModeArg::Repair, "content") => PlanKind::Repair(RepairStrategy::Content),
        (ModeArg::Repair, other) => {
            return Err(usage(format!(
                "unknown repair strategy {other:?} (expected random or content)"
            )))
        }
    };

    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("sample", "output")?,
    };
    let echo = SampleEcho {
        command: "sample",
        scores: scores.clone(),
        fraction,
        mode: match mode {
            ModeArg::Progressive => "progressive",
            ModeArg::Repair => "repair",
        },
        strategy,
        seed: if random { seed } else { None },
        output: output.clone(),
    };
    Ok(SampleSettings {
        scores,
        fraction,
        plan,
        output,
        echo,
    })
}

pub struct CurveSettings {
    pub points: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub echo: CurveEcho,
}

#[derive(Serialize)]
pub struct CurveEcho {
    command: &'static str,
    points: Vec<PathBuf>,
    output: Option<PathBuf>,
}

pub fn resolve_curve(args: &CurveArgs, cfg: &FileConfig) -> CliResult<CurveSettings> {
    let points = if args.points.is_empty() {
        cfg.paths("curve", "points")?.unwrap_or_default()
    } else {
        args.points.clone()
    };
    if points.is_empty() {
        return Err(usage("curve requires at least one points file"));
    }
    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("curve", "output")?,
    };
    let echo = CurveEcho {
        command: "curve",
        points: points.clone(),
        output: output.clone(),
    };
    Ok(CurveSettings {
        points,
        output,
        echo,
    })
}

pub struct ScoreSettings {
    pub predictions: PathBuf,
    pub gold: PathBuf,
    pub metric: MetricArg,
    pub json: bool,
    pub output: Option<PathBuf>,
    pub echo: ScoreEcho,
}

#[derive(Serialize)]
pub struct ScoreEcho {
    command: &'static str,
    predictions: PathBuf,
    gold: PathBuf,
    metric: &'static str,
    json: bool,
    output: Option<PathBuf>,
}

pub fn resolve_score(args: &ScoreArgs, cfg: &FileConfig) -> CliResult<ScoreSettings> {
    let predictions = match &args.predictions {
        Some(p) => p.clone(),
        None => cfg
            .path("score", "predictions")?
            .ok_or_else(|| usage("score requires --predictions"))?,
    };
    let gold = match &args.gold {
        Some(p) => p.clone(),
        None => cfg
            .path("score", "gold")?
            .ok_or_else(|| usage("score requires --gold"))?,
    };
    let metric = resolve_enum(args.metric, cfg, "score", "metric", MetricArg::Accuracy)?;
    let json = args.json || cfg.boolean("score", "json")?.unwrap_or(false);
    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("score", "output")?,
    };
    let echo = ScoreEcho {
        command: "score",
        predictions: predictions.clone(),
        gold: gold.clone(),
        metric: match metric {
            MetricArg::Accuracy => "accuracy",
            MetricArg::TokenF1 => "token-f1",
        },
        json,
        output: output.clone(),
    };
    Ok(ScoreSettings {
        predictions,
        gold,
        metric,
        json,
        output,
        echo,
    })
}

pub enum ImpactForm {
    Relative { none: f64, redact: f64 },
    Pairings(BTreeMap<Pairing, f64>),
    Severity(BTreeMap<String, f64>),
}

pub struct ImpactSettings {
    pub form: ImpactForm,
    pub json: bool,
    pub output: Option<PathBuf>,
    pub echo: ImpactEcho,
}

#[derive(Serialize)]
pub struct ImpactEcho {
    command: &'static str,
    none: Option<f64>,
    redact: Option<f64>,
    pairing: BTreeMap<String, f64>,
    impacts: BTreeMap<String, f64>,
    json: bool,
    output: Option<PathBuf>,
}

fn parse_kv(pairs: &[String], what: &str) -> CliResult<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| usage(format!("{what} must look like KEY=VALUE, got {pair:?}")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{what}: {v:?} is not a number")))?;
        if map.insert(k.trim().to_string(), value).is_some() {
            return Err(usage(format!("{what}: duplicate key {k:?}")));
        }
    }
    Ok(map)
}

pub fn resolve_impact(args: &ImpactArgs, cfg: &FileConfig) -> CliResult<ImpactSettings> {
    let none = match args.none {
        Some(v) => Some(v),
        None => cfg.float("impact", "none")?,
    };
    let redact = match args.redact {
        Some(v) => Some(v),
        None => cfg.float("impact", "redact")?,
    };
    let pairing = if args.pairing.is_empty() {
        cfg.float_table("impact", "pairing")?.unwrap_or_default()
    } else {
        parse_kv(&args.pairing, "--pairing")?
    };
    let impacts = if args.impacts.is_empty() {
        cfg.float_table("impact", "impacts")?.unwrap_or_default()
    } else {
        parse_kv(&args.impacts, "--impacts")?
    };

    let relative = none.is_some() || redact.is_some();
    let forms = relative as usize + (!pairing.is_empty()) as usize + (!impacts.is_empty()) as usize;
    if forms != 1 {
        return Err(usage(
            "impact needs exactly one of --none/--redact, --pairing, or --impacts",
        ));
    }
    let form = if relative {
        match (none, redact) {
            (Some(none), Some(redact)) => ImpactForm::Relative { none, redact },
            _ => return Err(usage("impact requires both --none and --redact")),
        }
    } else if !pairing.is_empty() {
        let mut map = BTreeMap::new();
        for (k, v) in &pairing {
            let key: Pairing = k.parse().map_err(|e| usage(format!("{e}")))?;
            if map.insert(key, *v).is_some() {
                return Err(usage(format!("duplicate pairing {k:?}")));
            }
        }
        ImpactForm::Pairings(map)
    } else {
        ImpactForm::Severity(impacts.clone())
    };

    let json = args.json || cfg.boolean("impact", "json")?.unwrap_or(false);
    let output = match &args.output {
        Some(p) => Some(p.clone()),
        None => cfg.path("impact", "output")?,
    };
    let echo = ImpactEcho {
        command: "impact",
        none,
        redact,
        pairing,
        impacts,
        json,
        output: output.clone(),
    };
    Ok(ImpactSettings {
        form,
        json,
        output,
        echo,
    })
}

pub struct ValidateSettings {
    pub input: PathBuf,
    pub format: CorpusFormat,
    pub json: bool,
    pub echo: ValidateEcho,
}

#[derive(Serialize)]
pub struct ValidateEcho {
    command: &'static str,
    input: PathBuf,
    format: &'static str,
    json: bool,
}

pub fn resolve_validate(args: &ValidateArgs, cfg: &FileConfig) -> CliResult<ValidateSettings> {
    let input = match &args.input {
        Some(p) => p.clone(),
        None => cfg
            .path("validate", "input")?
            .ok_or_else(|| usage("validate requires --input"))?,
    };
    let format_arg = resolve_enum(args.format, cfg, "validate", "format", FormatArg::Plain)?;
    let json = args.json || cfg.boolean("validate", "json")?.unwrap_or(false);
    let echo = ValidateEcho {
        command: "validate",
        input: input.clone(),
        format: match format_arg {
            FormatArg::Plain => "plain",
            FormatArg::Qa => "qa",
        },
        json,
    };
    Ok(ValidateSettings {
        input,
        format: match format_arg {
            FormatArg::Plain => CorpusFormat::Plain,
            FormatArg::Qa => CorpusFormat::Qa,
        },
        json,
        echo,
    })
}
