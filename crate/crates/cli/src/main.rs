//! `raman`: command-line front end for raman-core.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use raman_core::ErrorClass;

#[derive(Parser)]
#[command(name = "raman", version, about = "Raman spectral classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, normalize and truncate a spectra CSV.
    Ingest(IngestArgs),
    /// Stratified validation split and cross-validation folds.
    Split(SplitArgs),
    /// Train a baseline or neural classifier.
    Train(TrainArgs),
    /// Apply a saved model to a spectra CSV.
    Predict(PredictArgs),
    /// Generate synthetic spectra.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Reconstruction-error gates.
    #[command(subcommand)]
    Gate(GateCommand),
    /// Outlier-gated two-step classifier.
    #[command(subcommand)]
    Twostep(TwostepCommand),
    /// Cross-validated experiments from a JSON config.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
    /// Bundled synthetic benchmark corpus.
    #[command(subcommand)]
    Benchmark(BenchmarkCommand),
    /// Tidy CSV for plotting from a saved report.
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Keep this many leading features; defaults to the model width for wider inputs.
    #[arg(long)]
    width: Option<usize>,
    /// Skip per-spectrum min-max normalization.
    #[arg(long)]
    no_normalize: bool,
    /// Treat the file as an outlier corpus (all rows must be `neg`).
    #[arg(long)]
    outliers: bool,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fold plan JSON.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Knn,
    Svm,
    Tree,
    Gnb,
    Fcnn,
    Lcnn,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
}

/// Training-data selection shared by the fitting commands.
#[derive(Args)]
struct TrainData {
    /// Labeled spectra CSV.
    #[arg(long)]
    data: PathBuf,
    /// Fold plan from `split`; with `--fold`, trains on that fold's training part.
    #[arg(long, requires = "fold")]
    plan: Option<PathBuf>,
    #[arg(long, requires = "plan")]
    fold: Option<usize>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: TrainData,
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Extra synthetic training spectra appended to the real ones.
    #[arg(long)]
    synthetic: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, value_enum, default_value = "manhattan")]
    metric: MetricArg,
    #[arg(long, default_value_t = 10.0)]
    c: f64,
    #[arg(long, default_value_t = 10)]
    max_depth: usize,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    input: PathBuf,
    /// Prediction CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Pairwise weighted blends within each class.
    Blend(BlendArgs),
    /// Train a variational autoencoder on one class and sample from it.
    Vae(VaeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ClassArg {
    Pos,
    Neg,
}

impl ClassArg {
    fn label(self) -> raman_core::Label {
        match self {
            ClassArg::Pos => raman_core::Label::Positive,
            ClassArg::Neg => raman_core::Label::Negative,
        }
    }
}

#[derive(Args)]
struct BlendArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Classes to blend; both by default.
    #[arg(long, value_enum, value_delimiter = ',')]
    class: Vec<ClassArg>,
    /// Per-class sample from the pool; the full pool when omitted.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct VaeArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    class: ClassArg,
    #[arg(long)]
    count: usize,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    /// Encoder hidden widths, mirrored in the decoder.
    #[arg(long, value_delimiter = ',')]
    hidden: Vec<usize>,
    #[arg(long)]
    latent: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also save the trained model.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateModeArg {
    OneClass,
    Outlier,
}

#[derive(Args)]
struct GateOptions {
    #[arg(long, default_value_t = 2000)]
    gate_epochs: usize,
    /// Train on noise-corrupted inputs.
    #[arg(long)]
    denoising: bool,
}

#[derive(Subcommand)]
enum GateCommand {
    Fit(GateFitArgs),
}

#[derive(Args)]
struct GateFitArgs {
    #[command(flatten)]
    data: TrainData,
    #[arg(long, value_enum, default_value = "outlier")]
    mode: GateModeArg,
    #[command(flatten)]
    gate: GateOptions,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
    /// Per-spectrum training reconstruction errors.
    #[arg(long)]
    errors: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TwostepCommand {
    Fit(TwostepFitArgs),
}

#[derive(Args)]
struct TwostepFitArgs {
    #[command(flatten)]
    data: TrainData,
    /// Synthetic classifier training spectra from a CSV.
    #[arg(long, conflicts_with = "blended")]
    synthetic: Option<PathBuf>,
    /// Blend this many synthetic spectra, split by the real class ratio.
    #[arg(long, default_value_t = 0)]
    blended: usize,
    #[arg(long, default_value_t = 2000)]
    epochs: usize,
    #[command(flatten)]
    gate: GateOptions,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum ExperimentCommand {
    Run(ExperimentRunArgs),
}

#[derive(Args)]
struct ExperimentRunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Report directory.
    #[arg(long)]
    output: PathBuf,
    /// Overrides the config's fold seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum BenchmarkCommand {
    Gen(BenchmarkGenArgs),
}

#[derive(Args)]
struct BenchmarkGenArgs {
    /// Directory receiving spectra.csv and outliers.csv.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 100 features instead of 2,470.
    #[arg(long)]
    small: bool,
    /// JSON generator parameters; overrides `--small`.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Args)]
struct PlotdataArgs {
    /// report.json written by `experiment run`.
    #[arg(long)]
    report: PathBuf,
    /// accuracy_vs_count, accuracy_vs_scenario, grid_heatmap or error_histogram.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numerical => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
