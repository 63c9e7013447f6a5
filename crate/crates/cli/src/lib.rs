//! Command implementations behind the `tsetlin` binary.
//!
//! Each `cmd_*` function takes parsed arguments and returns what it would
//! print to stdout, so the commands can be driven from tests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsetlin_core::data::{
    build_lag_features, generate_artificial, load_series, LabeledDataset, NeighborConfig, PlantedOutbreak,
};
use tsetlin_core::eval::{cross_validate, score, Metrics};
use tsetlin_core::explain::{explain_model, render_json, render_text};
use tsetlin_core::model::TrainSettings;
use tsetlin_core::{FitOptions, Model, NegativeSampling, StateTrace};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const DATA: i32 = 3;
    pub const CONFIG: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] tsetlin_core::Error),
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) if e.is_config() => exit::CONFIG,
            CliError::Core(_) | CliError::File { .. } => exit::DATA,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tsetlin", version, about = "Tsetlin machine training, evaluation and rule extraction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Build lagged features for one region from a monthly series file.
    Features(FeaturesArgs),
    /// Train a model and write its document.
    Train(TrainArgs),
    /// Score a model on a dataset, or cross-validate a configuration.
    Eval(EvalArgs),
    /// Print the rules learned by each clause.
    Explain(ExplainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    Artificial,
    PlantedOutbreak,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKind,
    /// Number of samples (artificial only).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, env = "TSETLIN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Share of samples drawn from the positive cell (artificial only);
    /// uniform over all cells when omitted.
    #[arg(long)]
    pub positive_fraction: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the neighbour table (planted-outbreak only).
    #[arg(long)]
    pub neighbors_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    /// CSV with columns region,year,month,rate.
    #[arg(long)]
    pub series: PathBuf,
    #[arg(long)]
    pub target: String,
    /// Neighbour table; the bundled one when omitted.
    #[arg(long)]
    pub neighbors: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Hyperparameters shared by `train` and cross-validating `eval`.
#[derive(Debug, Clone, Args)]
pub struct Hyper {
    /// Total clause count over all classes.
    #[arg(long, default_value_t = 4)]
    pub clauses: usize,
    /// States per action N.
    #[arg(long, default_value_t = 100)]
    pub states: u32,
    /// Vote threshold T.
    #[arg(long, default_value_t = 1)]
    pub threshold: u32,
    /// Precision s.
    #[arg(long, default_value_t = 8.0)]
    pub s: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, env = "TSETLIN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Columns encoded one-hot, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    /// Keep at most this many thresholds per continuous feature.
    #[arg(long)]
    pub max_thresholds: Option<usize>,
    /// Give Type II feedback to every non-target class, not one sampled class.
    #[arg(long)]
    pub all_negatives: bool,
    /// Initial TA state; N when omitted.
    #[arg(long)]
    pub init_state: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    #[command(flatten)]
    pub hyper: Hyper,
    /// Train only on rows dated before this year.
    #[arg(long)]
    pub train_before: Option<i32>,
    /// Write the per-epoch TA state table here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "label")]
    pub label: String,
    /// Trained model to score; omit to cross-validate with `--folds`.
    #[arg(long, conflicts_with = "folds")]
    pub model: Option<PathBuf>,
    /// Score only the rows dated in this year.
    #[arg(long, requires = "model")]
    pub test_year: Option<i32>,
    #[arg(long)]
    pub folds: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    /// Run folds on all cores.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub hyper: Hyper,
    #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExplainFormat {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum, default_value_t = ExplainFormat::Text)]
    pub format: ExplainFormat,
}

/// Run a parsed command, returning its stdout text.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Features(a) => cmd_features(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Explain(a) => cmd_explain(&a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::File { path: path.to_owned(), source })
}

fn load_dataset(path: &Path, label: &str, categorical: &[String]) -> Result<LabeledDataset> {
    let mut data = LabeledDataset::read_csv(open(path)?, label)?;
    data.set_categorical(categorical)?;
    if data.is_empty() {
        return Err(tsetlin_core::Error::EmptyDataset.into());
    }
    Ok(data)
}

pub fn cmd_synth(a: &SynthArgs) -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    match a.kind {
        SynthKind::Artificial => {
            if let Some(p) = a.positive_fraction {
                if !(0.0..=1.0).contains(&p) {
                    return Err(CliError::Usage(format!("--positive-fraction must lie in [0, 1], got {p}")));
                }
            }
            let data = generate_artificial(&mut rng, a.n, a.positive_fraction);
            data.write_csv(create(&a.out)?)?;
            Ok(format!("wrote {} samples to {}\n", data.len(), a.out.display()))
        }
        SynthKind::PlantedOutbreak => {
            let (table, config) = PlantedOutbreak::default().generate(&mut rng);
            table.write_csv(create(&a.out)?)?;
            let mut msg = format!("wrote {} cells to {}\n", table.len(), a.out.display());
            if let Some(path) = &a.neighbors_out {
                let mut w = create(path)?;
                config.write(&mut w)?;
                w.flush().map_err(|source| CliError::File { path: path.clone(), source })?;
                msg.push_str(&format!("wrote neighbour table to {}\n", path.display()));
            }
            Ok(msg)
        }
    }
}

pub fn cmd_features(a: &FeaturesArgs) -> Result<String> {
    let table = load_series(open(&a.series)?)?;
    let config = match &a.neighbors {
        Some(path) => NeighborConfig::read(open(path)?)?,
        None => NeighborConfig::bundled(),
    };
    let data = build_lag_features(&table, &a.target, &config)?;
    data.write_csv(create(&a.out)?)?;
    Ok(format!("wrote {} rows of {} features to {}\n", data.len(), data.names.len(), a.out.display()))
}

/// Training settings for a dataset with `classes` classes.
pub fn settings(h: &Hyper, classes: usize) -> Result<TrainSettings> {
    let classes = classes.max(2);
    if h.clauses < 2 || !h.clauses.is_multiple_of(2) {
        return Err(tsetlin_core::Error::Config("clause count must be even and ≥ 2".into()).into());
    }
    if !h.clauses.is_multiple_of(classes) || !(h.clauses / classes).is_multiple_of(2) {
        return Err(tsetlin_core::Error::Config(format!(
            "{} clauses do not split into an even count for each of {classes} classes",
            h.clauses
        ))
        .into());
    }
    let s = TrainSettings {
        classes,
        clauses_per_class: h.clauses / classes,
        states_per_action: h.states,
        threshold: h.threshold,
        precision: h.s,
        epochs: h.epochs,
        init_state: h.init_state,
        negative_sampling: if h.all_negatives { NegativeSampling::AllOthers } else { NegativeSampling::SingleRandom },
        fit_options: FitOptions { max_thresholds: h.max_thresholds },
        ..TrainSettings::default()
    };
    s.machine_config(1, h.seed).validate()?;
    if s.epochs == 0 {
        return Err(tsetlin_core::Error::Config("epochs must be ≥ 1".into()).into());
    }
    Ok(s)
}

pub fn cmd_train(a: &TrainArgs) -> Result<String> {
    let mut data = load_dataset(&a.data, &a.label, &a.hyper.categorical)?;
    let settings = settings(&a.hyper, data.class_count())?;
    if let Some(year) = a.train_before {
        data = data.split_at_year(year)?.0;
    }
    let mut trace = a.trace.as_ref().map(|_| StateTrace::new());
    let model = Model::train(&data, &settings, a.hyper.seed, trace.as_mut())?;
    write_file(&a.out, &model.to_document())?;
    if let (Some(path), Some(trace)) = (&a.trace, &trace) {
        let mut w = create(path)?;
        trace
            .write_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|source| CliError::File { path: path.clone(), source })?;
    }
    let predicted = model.predict_rows(&data.rows)?;
    let correct = predicted.iter().zip(&data.labels).filter(|(p, y)| p == y).count();
    Ok(format!(
        "trained {} clauses on {} rows ({} input bits, {} epochs); training accuracy {:.4}\nwrote {}\n",
        settings.clauses_per_class * settings.classes,
        data.len(),
        model.binarizer.width(),
        settings.epochs,
        correct as f64 / data.len() as f64,
        a.out.display()
    ))
}

fn metrics_line(m: &Metrics) -> String {
    Metrics::NAMES.iter().zip(m.values()).map(|(n, v)| format!("{n} {v:.4}")).collect::<Vec<_>>().join("  ")
}

pub fn cmd_eval(a: &EvalArgs) -> Result<String> {
    match (&a.model, a.folds) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::File { path: path.clone(), source })?;
            let model = Model::from_document(&text)?;
            let mut data = LabeledDataset::read_csv(open(&a.data)?, &a.label)?;
            if let Some(year) = a.test_year {
                data = data.split_at_year(year)?.1;
            }
            let (m, c) = score(&model, &data, 1)?;
            Ok(match a.format {
                ReportFormat::Table => {
                    format!("{}\ntp {}  fp {}  tn {}  fn {}\n", metrics_line(&m), c.tp, c.fp, c.tn, c.fn_)
                }
                ReportFormat::Csv => {
                    let mut out = String::from("metric,value\n");
                    for (n, v) in Metrics::NAMES.iter().zip(m.values()) {
                        out.push_str(&format!("{n},{v:.4}\n"));
                    }
                    out
                }
                ReportFormat::Json => {
                    format!("{{\"metrics\":{},\"counts\":{}}}\n", to_json(&m), to_json(&c))
                }
            })
        }
        (None, Some(k)) => {
            if k < 2 {
                return Err(CliError::Usage(format!("--folds must be ≥ 2, got {k}")));
            }
            let data = load_dataset(&a.data, &a.label, &a.hyper.categorical)?;
            let settings = settings(&a.hyper, data.class_count())?;
            let report = cross_validate(&data, &settings, k, a.repeats, a.hyper.seed, a.parallel)?;
            Ok(match a.format {
                ReportFormat::Table => report.to_table(),
                ReportFormat::Csv => report.to_csv(),
                ReportFormat::Json => report.to_json() + "\n",
            })
        }
        _ => Err(CliError::Usage("give exactly one of --model or --folds".into())),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

pub fn cmd_explain(a: &ExplainArgs) -> Result<String> {
    let text = std::fs::read_to_string(&a.model).map_err(|source| CliError::File { path: a.model.clone(), source })?;
    let model = Model::from_document(&text)?;
    let rules = explain_model(&model)?;
    Ok(match a.format {
        ExplainFormat::Text => render_text(&rules),
        ExplainFormat::Structured => render_json(&rules) + "\n",
    })
}
