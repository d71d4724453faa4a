//! `airgan`: ingest hourly pollutant data, train conditional GANs, generate
//! synthetic days, score them and draw the results.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use airgan_core::cgan::LossMode;
use airgan_core::data::RepSource;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "airgan", version, about = "Conditional GANs for daily pollution series")]
struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,

    /// Base seed (training, balancing and generation).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Directory for all outputs.
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Read a normalized hourly CSV into labelled and balanced datasets.
    Ingest(IngestArgs),
    /// Train one or more models on a balanced dataset.
    Train(TrainArgs),
    /// Sample synthetic days from checkpoints.
    Generate(GenerateArgs),
    /// Score real and generated datasets against the class representatives.
    Evaluate(EvaluateArgs),
    /// Draw band plots or training curves as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Hourly CSV with columns date,hour,value,station_id.
    pub csv: Option<PathBuf>,
    /// Which days define the class representatives in class_stats.json.
    #[arg(long, value_enum)]
    pub rep_source: Option<RepSourceArg>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Balanced dataset JSON [default: <output-dir>/balanced.json].
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, value_enum)]
    pub loss_mode: Option<LossModeArg>,
    /// Train on min-max scaled values.
    #[arg(long)]
    pub scale_inputs: bool,
    /// Generated samples used for the per-epoch RMSE.
    #[arg(long)]
    pub eval_samples: Option<usize>,
    /// Print progress every N epochs (0 = only per run).
    #[arg(long, default_value_t = 100)]
    pub progress: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Checkpoint files.
    #[arg(required = true)]
    pub checkpoints: Vec<PathBuf>,
    #[arg(long)]
    pub reps_per_class: Option<usize>,
    /// Dataset name (single checkpoint only) [default: run directory name].
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Generated dataset CSVs.
    pub fakes: Vec<PathBuf>,
    /// Balanced real dataset [default: <output-dir>/balanced.json].
    #[arg(long)]
    pub real: Option<PathBuf>,
    /// Full real dataset, used with --rep-source full [default: <output-dir>/dataset.json].
    #[arg(long)]
    pub full: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub rep_source: Option<RepSourceArg>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(subcommand)]
    pub kind: PlotKind,
    #[arg(long, global = true)]
    pub width: Option<f64>,
    #[arg(long, global = true)]
    pub height: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum PlotKind {
    /// Per-class bands of a real dataset or a generated one.
    Bands(BandArgs),
    /// Loss and RMSE curves of training histories.
    History(HistoryArgs),
}

#[derive(Debug, Args)]
pub struct BandArgs {
    /// Real dataset JSON.
    #[arg(long, conflicts_with = "fake", required_unless_present = "fake")]
    pub dataset: Option<PathBuf>,
    /// Generated dataset CSV.
    #[arg(long)]
    pub fake: Option<PathBuf>,
    /// class_stats.json of the real data; adds its mean as a dashed line.
    #[arg(long)]
    pub real_stats: Option<PathBuf>,
    /// Classes to draw, e.g. 0,3,7 [default: all].
    #[arg(long, value_delimiter = ',')]
    pub classes: Option<Vec<u8>>,
    /// File name prefix [default: input file stem].
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Args)]
pub struct HistoryArgs {
    /// history.csv files.
    #[arg(required = true)]
    pub histories: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossModeArg {
    PaperSaturating,
    NonSaturating,
}

impl From<LossModeArg> for LossMode {
    fn from(m: LossModeArg) -> Self {
        match m {
            LossModeArg::PaperSaturating => LossMode::PaperSaturating,
            LossModeArg::NonSaturating => LossMode::NonSaturating,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RepSourceArg {
    Balanced,
    Full,
}

impl From<RepSourceArg> for RepSource {
    fn from(r: RepSourceArg) -> Self {
        match r {
            RepSourceArg::Balanced => RepSource::Balanced,
            RepSourceArg::Full => RepSource::Full,
        }
    }
}

fn base_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        cfg.output_dir = dir.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = base_config(&cli)?;
    match cli.command {
        Command::Ingest(args) => commands::ingest(cfg, args),
        Command::Train(args) => commands::train(cfg, args),
        Command::Generate(args) => commands::generate(cfg, args),
        Command::Evaluate(args) => commands::evaluate(cfg, args),
        Command::Plot(args) => commands::plot(cfg, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
