//! `nfseer`: convert COCOMO data, train the multiplier bank, cross-validate it
//! against the untrained baseline, and predict effort.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "nfseer",
    version,
    about = "Neuro-fuzzy calibration of SEER-SEM effort multipliers"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a COCOMO-rated dataset to SEER-SEM ratings.
    Convert(ConvertArgs),
    /// Train the multiplier bank and save it.
    Train(TrainArgs),
    /// Cross-validate the trained bank against the baseline.
    Evaluate(EvaluateArgs),
    /// Predict effort with a saved bank.
    Predict(PredictArgs),
}

/// Dataset input and rating-table options shared by every command.
#[derive(Args, Debug, Clone, Default)]
pub struct DataArgs {
    /// Input dataset.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Dataset layout: seer-csv, cocomo-csv or promise-arff
    /// (default: promise-arff for .arff files, otherwise seer-csv; cocomo-csv for convert).
    #[arg(long, value_name = "FORMAT")]
    pub format: Option<String>,
    /// COCOMO 81 to COCOMO II conversion table (CSV).
    #[arg(long, value_name = "FILE")]
    pub rosetta: Option<PathBuf>,
    /// COCOMO to SEER-SEM mapping table (CSV).
    #[arg(long, value_name = "FILE")]
    pub mapping: Option<PathBuf>,
    /// Treat any rejected record or unmapped rating as an error.
    #[arg(long)]
    pub strict: bool,
}

/// Bank construction and training options.
#[derive(Args, Debug, Clone, Default)]
pub struct TrainingArgs {
    /// Parameter roster with anchor multipliers (TOML).
    #[arg(long, value_name = "FILE")]
    pub specs: Option<PathBuf>,
    /// Training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Premise learning rate.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Skip the monotonicity repair after each epoch.
    #[arg(long)]
    pub no_monotone: bool,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Output seer-csv file.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Transformation log (CSV); defaults to `<out>.log.csv`.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Output bank file (JSON).
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Loss history CSV; defaults to `<out>.history.csv`.
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CandidateKind {
    /// The bank trained end to end on each training split.
    Trained,
    /// The baseline again (self-comparison).
    Baseline,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub training: TrainingArgs,
    /// Number of folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Comparison report (JSON).
    #[arg(long, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Directory for interval and boxplot data (CSV and SVG).
    #[arg(long, value_name = "DIR")]
    pub plots: Option<PathBuf>,
    /// Model compared against the baseline.
    #[arg(long, value_enum, default_value_t = CandidateKind::Trained)]
    pub candidate: CandidateKind,
    /// Also train on the full dataset and save the bank here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Group folds by development mode before dealing.
    #[arg(long)]
    pub stratify: bool,
    /// Evaluate folds one after another instead of in parallel.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Saved bank file.
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Output predictions CSV.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
