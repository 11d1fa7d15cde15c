use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;
mod settings;

/// Errors split by exit code: usage problems exit 2, everything else 1.
pub enum CliError {
    Usage(String),
    Failure(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(err: anyhow::Error) -> Self {
        CliError::Failure(err)
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "redactkit",
    version,
    about = "PII redaction, corpus statistics, sampling plans, and impact scoring over JSONL corpora"
)]
pub struct Cli {
    /// TOML config file with [defaults] and per-subcommand tables; command
    /// line flags win over config values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Print the resolved configuration as JSON and write nothing.
    #[arg(long, global = true)]
    pub dry_run: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Redact a corpus using external annotations merged with the pattern
    /// recognizers.
    Redact(RedactArgs),
    /// Report redaction rate, entity histogram, per-record scores, and the
    /// dataset inclusion decision.
    Stats(StatsArgs),
    /// Build a progressive or repair sampling plan from per-record scores.
    Sample(SampleArgs),
    /// Merge tagged score points into a fraction,score,strategy CSV.
    Curve(CurveArgs),
    /// Score a prediction file against gold data.
    Score(ScoreArgs),
    /// Compute relative impact, classify severity, or render a pairing
    /// report.
    Impact(ImpactArgs),
    /// Check corpus structural invariants (ids, answer spans).
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Qa,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Full,
    Limited,
    None,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    /// Drop records whose answer was redacted.
    Train,
    /// Keep them as unanswerable.
    Eval,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScoreKindArg {
    Count,
    Coverage,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Accuracy,
    TokenF1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Progressive,
    Repair,
}

#[derive(Args)]
pub struct RedactArgs {
    /// Corpus JSONL, one record per line.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Annotation JSONL ({"doc_id": ..., "spans": [...]}).
    #[arg(long, value_name = "FILE")]
    pub annotations: Option<PathBuf>,

    /// Record format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Policy mode; `limited` needs --labels.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,

    /// Labels for a limited policy, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LABEL")]
    pub labels: Vec<String>,

    /// Policy file (TOML or JSON: mode, labels, token overrides). Replaces
    /// --policy/--labels.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["policy", "labels"])]
    pub policy_file: Option<PathBuf>,

    /// Skip the pattern recognizers; use external annotations only.
    #[arg(long)]
    pub no_patterns: bool,

    /// Recognizer configuration file (TOML or JSON).
    #[arg(long, value_name = "FILE")]
    pub recognizer_config: Option<PathBuf>,

    /// Disposition of QA records whose answer was redacted.
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,

    /// Include offset maps and applied spans in the output records.
    #[arg(long)]
    pub emit_map: bool,

    /// Worker threads; the default of 1 keeps processing strictly
    /// sequential.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Output file, written atomically (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Corpus JSONL, one record per line.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Annotation JSONL.
    #[arg(long, value_name = "FILE")]
    pub annotations: Option<PathBuf>,

    /// Record format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Policy mode; `limited` needs --labels.
    #[arg(long, value_enum)]
    pub policy: Option<PolicyArg>,

    /// Labels for a limited policy, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "LABEL")]
    pub labels: Vec<String>,

    /// Policy file (TOML or JSON).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["policy", "labels"])]
    pub policy_file: Option<PathBuf>,

    /// Skip the pattern recognizers.
    #[arg(long)]
    pub no_patterns: bool,

    /// Recognizer configuration file.
    #[arg(long, value_name = "FILE")]
    pub recognizer_config: Option<PathBuf>,

    /// Per-record score reported and exported: span count or redacted-char
    /// coverage.
    #[arg(long, value_enum)]
    pub score: Option<ScoreKindArg>,

    /// Dominant-entity share threshold for the inclusion decision.
    #[arg(long, value_name = "SHARE")]
    pub threshold: Option<f64>,

    /// Also write the per-record scores as id,score CSV to this file.
    #[arg(long, value_name = "FILE")]
    pub scores_out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Emit the report as JSON instead of text.
    #[arg(long)]
    pub json: bool,

    /// Report file (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Per-record score map: JSON (object, rows, or stats report) or CSV
    /// by file extension.
    #[arg(long, value_name = "FILE")]
    pub scores: Option<PathBuf>,

    /// Fraction of records the plan selects, in [0, 1].
    #[arg(long)]
    pub fraction: Option<f64>,

    /// progressive: records to redact; repair: records to keep.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,

    /// progressive: random | content-low | content-high; repair: random |
    /// content.
    #[arg(long, value_name = "STRATEGY")]
    pub strategy: Option<String>,

    /// Seed for the random strategy (required there, refused elsewhere).
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Plan file, JSONL of {"id", "action"} (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct CurveArgs {
    /// JSON point files, each one {"fraction", "score", "strategy"} or an
    /// array of them.
    #[arg(value_name = "FILE")]
    pub points: Vec<PathBuf>,

    /// Curve CSV (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ScoreArgs {
    /// Predictions JSONL ({"id", "prediction"}).
    #[arg(long, value_name = "FILE")]
    pub predictions: Option<PathBuf>,

    /// Gold data: {"id", "gold"} JSONL for accuracy, a QA corpus for
    /// token-f1.
    #[arg(long, value_name = "FILE")]
    pub gold: Option<PathBuf>,

    /// Metric to compute.
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,

    /// Emit JSON instead of the bare number.
    #[arg(long)]
    pub json: bool,

    /// Output file (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ImpactArgs {
    /// Baseline score (with --redact: print the relative impact).
    #[arg(long, value_name = "SCORE")]
    pub none: Option<f64>,

    /// Redacted score.
    #[arg(long, value_name = "SCORE")]
    pub redact: Option<f64>,

    /// Pairing scores as PAIRING=SCORE (e.g. none/none=74.9); repeat for
    /// each pairing. Renders the pairing report.
    #[arg(long, value_name = "PAIRING=SCORE")]
    pub pairing: Vec<String>,

    /// Per-model impacts as MODEL=IMPACT; repeat per model. Prints the
    /// majority-vote severity.
    #[arg(long, value_name = "MODEL=IMPACT")]
    pub impacts: Vec<String>,

    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,

    /// Output file (defaults to standard output).
    #[arg(long, alias = "out", value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ValidateArgs {
    /// Corpus JSONL to check.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Record format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,

    /// Emit the full check report as JSON on standard output.
    #[arg(long)]
    pub json: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(err)) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
