//! `mvpois`: extreme measures, calibration and simulation from the command
//! line.
//!
//! Exit codes: 0 success, 1 runtime failure or reproduction mismatch,
//! 2 usage error, 3 inadmissible target, 4 infeasible target.

mod commands;
mod config;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{load_matrix, ConfigFile, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Inadmissible(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Inadmissible(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Mismatch(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl From<mvpois::Error> for CliError {
    fn from(e: mvpois::Error) -> Self {
        match e {
            mvpois::Error::Inadmissible(_) => CliError::Inadmissible(e.to_string()),
            mvpois::Error::InfeasibleTarget { .. } => CliError::Infeasible(e.to_string()),
            mvpois::Error::Domain(_) | mvpois::Error::Configuration(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "mvpois", version, about = "Extreme joint distributions and correlated Poisson processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute every extreme measure and the extreme correlation matrices.
    Ejd(CommonArgs),
    /// Find mixture weights matching a target correlation matrix.
    Calibrate(CommonArgs),
    /// Backward-simulate paths on [0, T], continue them to [0, mT], and
    /// write the paths and the correlation curve.
    Simulate(SimulateArgs),
    /// Recompute the reference three-dimensional example and compare it with
    /// the embedded expected values.
    #[command(name = "reproduce-paper", visible_alias = "reproduce-example")]
    Reproduce(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated intensities, e.g. 3,5,7.
    #[arg(long, value_delimiter = ',')]
    intensities: Option<Vec<f64>>,
    /// Horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Marginal truncation tolerance.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Target correlation matrix, JSON array of rows.
    #[arg(long)]
    target: Option<PathBuf>,
    /// Max-norm residual accepted by the calibration.
    #[arg(long)]
    threshold: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Number of replications.
    #[arg(long)]
    paths: Option<usize>,
    /// Number m of horizon intervals to cover.
    #[arg(long)]
    intervals: Option<usize>,
    /// Master RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// calibration.json produced by `calibrate`.
    #[arg(long, conflicts_with = "structure")]
    calibration: Option<PathBuf>,
    /// Simulate a single extreme measure, e.g. 010.
    #[arg(long)]
    structure: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Result<ConfigFile, CliError> {
        Ok(ConfigFile {
            intensities: self.intensities.clone(),
            horizon: self.horizon,
            epsilon: self.epsilon,
            target: self.target.as_deref().map(load_matrix).transpose()?,
            out: self.out.clone(),
            threshold: self.threshold,
            ..Default::default()
        })
    }

    fn file(&self) -> Result<ConfigFile, CliError> {
        match &self.config {
            Some(p) => ConfigFile::load(p),
            None => Ok(ConfigFile::default()),
        }
    }

    fn resolve(&self, extra: ConfigFile) -> Result<RunConfig, CliError> {
        let flags = self.overrides()?.merge(extra);
        RunConfig::resolve(self.file()?.merge(flags))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Ejd(args) => commands::ejd(&args.resolve(ConfigFile::default())?),
        Command::Calibrate(args) => commands::calibrate(&args.resolve(ConfigFile::default())?),
        Command::Simulate(args) => {
            let extra = ConfigFile {
                n_paths: args.paths,
                m_intervals: args.intervals,
                seed: args.seed,
                ..Default::default()
            };
            let config = args.common.resolve(extra)?;
            let source = match (&args.calibration, &args.structure) {
                (Some(p), None) => commands::MixtureSource::Calibration(p.clone()),
                (None, Some(s)) => commands::MixtureSource::Structure(s.clone()),
                _ => {
                    return Err(CliError::Usage(
                        "simulate needs --calibration FILE or --structure BITS".into(),
                    ))
                }
            };
            commands::simulate(&config, &source)
        }
        Command::Reproduce(args) => {
            let defaults = ConfigFile {
                intensities: Some(reference::INTENSITIES.to_vec()),
                epsilon: Some(reference::EPSILON),
                ..Default::default()
            };
            let config = RunConfig::resolve(defaults.merge(args.file()?).merge(args.overrides()?))?;
            commands::reproduce(&config)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
