//! Command-line surface for `markeval`.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors. Results go
//! to stdout (or `--out`), diagnostics to stderr.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use markeval::analysis::{
    k_sweep, mode_collapse_experiment, noise_sweep_experiment, score_pair, CorrelationMethod,
    ExperimentOptions, Metric, MixtureSpec, ScoreSeries,
};
use markeval::io::{read_embeddings, read_labelled_values, render_report, Report, ReportFormat};
use markeval::EmbeddingSetF64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "ME_THREADS";

fn positive(raw: &str) -> Result<usize, String> {
    match raw.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(format!("expected a positive integer, got `{raw}`")),
    }
}

fn at_least_two(raw: &str) -> Result<usize, String> {
    match raw.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        _ => Err(format!("expected an integer >= 2, got `{raw}`")),
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "markeval",
    version,
    about = "Mark-recapture scores for embedding sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score an evaluation set against a reference set.
    Score(ScoreArgs),
    /// Estimates and scores for k = 1..=k-max.
    SweepK(SweepArgs),
    /// Run a seeded synthetic experiment.
    Synthetic(SyntheticArgs),
    /// Correlate metric scores with external ratings.
    Correlate(CorrelateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Petersen,
    Schnabel,
    Capture,
    Impar,
    Fid,
    All,
}

impl MetricArg {
    fn metrics(self) -> Vec<Metric> {
        match self {
            Self::Petersen => vec![Metric::Petersen],
            Self::Schnabel => vec![Metric::Schnabel],
            Self::Capture => vec![Metric::Capture],
            Self::Impar => vec![Metric::Impar],
            Self::Fid => vec![Metric::Fid],
            Self::All => Metric::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

impl Output {
    fn echo(&self, config: &mut BTreeMap<&'static str, Value>) {
        config.insert("format", json!(ReportFormat::from(self.format).to_string()));
    }
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    evaluation: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    metric: MetricArg,
    #[arg(long, default_value_t = markeval::DEFAULT_K, value_parser = positive)]
    k: usize,
    /// Include per-iteration Schnabel records.
    #[arg(long)]
    trace: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    evaluation: PathBuf,
    #[arg(long, value_parser = positive)]
    k_max: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Experiment {
    ModeCollapse,
    Noise,
}

#[derive(Debug, Args)]
struct SyntheticArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Number of mixture modes.
    #[arg(long, default_value_t = 5, value_parser = positive)]
    modes: usize,
    /// Samples per set; must be a multiple of --modes.
    #[arg(long, default_value_t = 1000, value_parser = at_least_two)]
    n: usize,
    #[arg(long, default_value_t = 8, value_parser = positive)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = markeval::DEFAULT_K, value_parser = positive)]
    k: usize,
    /// Isotropic stddev of every mode.
    #[arg(long, default_value_t = 1.0)]
    stddev: f64,
    /// Distance of each mode mean from the origin along its axis.
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    /// Noise levels for the noise experiment, as multiples of --stddev.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,2,10")]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 1, value_parser = positive)]
    repeats: usize,
    #[arg(long, value_enum, default_value = "all")]
    metric: MetricArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pearson,
    Kendall,
    Spearman,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<CorrelationMethod> {
        match self {
            Self::Pearson => vec![CorrelationMethod::Pearson],
            Self::Kendall => vec![CorrelationMethod::Kendall],
            Self::Spearman => vec![CorrelationMethod::Spearman],
            Self::All => CorrelationMethod::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
struct CorrelateArgs {
    /// `value` or `label,value` per line.
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    ratings: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    #[command(flatten)]
    output: Output,
}

/// Failure with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
}

impl From<markeval::Error> for Failure {
    fn from(e: markeval::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<String, Failure>;

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn config_value(config: BTreeMap<&'static str, Value>) -> Value {
    Value::Object(
        config
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
    )
}

fn emit<R: Report>(
    report: &R,
    config: BTreeMap<&'static str, Value>,
    output: &Output,
) -> CmdResult {
    let text = render_report(report, &config_value(config), output.format.into())?;
    match &output.out {
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load(path: &Path) -> Result<EmbeddingSetF64, Failure> {
    Ok(read_embeddings::<f64>(path)?)
}

fn run_score(args: &ScoreArgs) -> CmdResult {
    let reference = load(&args.reference)?;
    let evaluation = load(&args.evaluation)?;
    let metrics = args.metric.metrics();
    let mut report = score_pair(&reference, &evaluation, args.k, &metrics)?;
    if !args.trace {
        report = report.without_traces();
    }
    let mut config = BTreeMap::new();
    config.insert("command", json!("score"));
    config.insert("reference", json!(path_str(&args.reference)));
    config.insert("evaluation", json!(path_str(&args.evaluation)));
    config.insert(
        "metrics",
        json!(metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>()),
    );
    config.insert("k", json!(args.k));
    config.insert("trace", json!(args.trace));
    config.insert("n_reference", json!(reference.len()));
    config.insert("n_evaluation", json!(evaluation.len()));
    config.insert("d", json!(reference.dim()));
    args.output.echo(&mut config);
    emit(&report, config, &args.output)
}

fn run_sweep(args: &SweepArgs) -> CmdResult {
    let reference = load(&args.reference)?;
    let evaluation = load(&args.evaluation)?;
    let ks: Vec<usize> = (1..=args.k_max).collect();
    let report = k_sweep(&reference, &evaluation, &ks)?;
    let mut config = BTreeMap::new();
    config.insert("command", json!("sweep-k"));
    config.insert("reference", json!(path_str(&args.reference)));
    config.insert("evaluation", json!(path_str(&args.evaluation)));
    config.insert("k_max", json!(args.k_max));
    args.output.echo(&mut config);
    emit(&report, config, &args.output)
}

fn run_synthetic(args: &SyntheticArgs) -> CmdResult {
    if !args.n.is_multiple_of(args.modes) {
        return Err(Failure::Usage(format!(
            "--n ({}) must be a multiple of --modes ({})",
            args.n, args.modes
        )));
    }
    if !(args.stddev > 0.0 && args.stddev.is_finite()) {
        return Err(Failure::Usage("--stddev must be positive".into()));
    }
    let base = MixtureSpec::separated(
        args.modes,
        args.n / args.modes,
        args.d,
        args.separation,
        args.stddev,
        args.seed,
    );
    let opts = ExperimentOptions {
        k: args.k,
        metrics: args.metric.metrics(),
        repeats: args.repeats,
    };
    let mut config = BTreeMap::new();
    config.insert("command", json!("synthetic"));
    config.insert("modes", json!(args.modes));
    config.insert("n", json!(args.n));
    config.insert("d", json!(args.d));
    config.insert("seed", json!(args.seed));
    config.insert("k", json!(args.k));
    config.insert("stddev", json!(args.stddev));
    config.insert("separation", json!(args.separation));
    config.insert("repeats", json!(args.repeats));
    config.insert(
        "metrics",
        json!(opts.metrics.iter().map(|m| m.as_str()).collect::<Vec<_>>()),
    );
    args.output.echo(&mut config);
    let report = match args.experiment {
        Experiment::ModeCollapse => {
            config.insert("experiment", json!("mode-collapse"));
            mode_collapse_experiment(&base, &opts)?
        }
        Experiment::Noise => {
            let sigmas: Vec<f64> = args.sigmas.iter().map(|m| m * args.stddev).collect();
            config.insert("experiment", json!("noise"));
            config.insert("sigma_multiples", json!(args.sigmas));
            noise_sweep_experiment(&base, &sigmas, &opts).map_err(|e| match e {
                markeval::Error::Domain(msg) => Failure::Usage(msg),
                other => other.into(),
            })?
        }
    };
    emit(&report, config, &args.output)
}

fn aligned_series(scores: &Path, ratings: &Path) -> Result<ScoreSeries, Failure> {
    let s = read_labelled_values(scores)?;
    let r = read_labelled_values(ratings)?;
    let labelled = s.iter().chain(&r).all(|(l, _)| l.is_some());
    let (labels, xs, ys) = if labelled {
        let by_label: BTreeMap<&str, f64> =
            r.iter().map(|(l, v)| (l.as_deref().unwrap(), *v)).collect();
        if by_label.len() != r.len() || by_label.len() != s.len() {
            return Err(Failure::Data(
                "score and rating files must list the same systems once each".into(),
            ));
        }
        let mut labels = Vec::new();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (label, v) in &s {
            let label = label.as_deref().unwrap();
            let rating = by_label.get(label).ok_or_else(|| {
                Failure::Data(format!(
                    "system `{label}` has no rating in {}",
                    ratings.display()
                ))
            })?;
            labels.push(label.to_string());
            xs.push(*v);
            ys.push(*rating);
        }
        (labels, xs, ys)
    } else {
        if s.len() != r.len() {
            return Err(Failure::Data(format!(
                "{} scores but {} ratings",
                s.len(),
                r.len()
            )));
        }
        let labels = (0..s.len()).map(|i| i.to_string()).collect();
        (
            labels,
            s.iter().map(|x| x.1).collect(),
            r.iter().map(|x| x.1).collect(),
        )
    };
    Ok(ScoreSeries::new(labels, xs, ys)?)
}

fn run_correlate(args: &CorrelateArgs) -> CmdResult {
    let series = aligned_series(&args.scores, &args.ratings)?;
    let mut results = BTreeMap::new();
    for method in args.method.methods() {
        results.insert(method.as_str().to_string(), series.correlate(method)?);
    }
    let mut config = BTreeMap::new();
    config.insert("command", json!("correlate"));
    config.insert("scores", json!(path_str(&args.scores)));
    config.insert("ratings", json!(path_str(&args.ratings)));
    config.insert("n", json!(series.scores.len()));
    args.output.echo(&mut config);
    emit(&results, config, &args.output)
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got `{raw}`"
            ))
        })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| Failure::Data(format!("cannot start worker threads: {e}")))
}

/// Runs the CLI on `argv` (program name first) and returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{rendered}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{rendered}");
                EXIT_OK
            };
        }
    };

    let result = thread_pool().and_then(|pool| {
        pool.install(|| match &cli.command {
            Command::Score(a) => run_score(a),
            Command::SweepK(a) => run_sweep(a),
            Command::Synthetic(a) => run_synthetic(a),
            Command::Correlate(a) => run_correlate(a),
        })
    });

    match result {
        Ok(text) => {
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_DATA;
            }
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DATA
        }
    }
}
