use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hazardbench::cox::TieMethod;
use hazardbench::deepsurv::TrainConfig;
use hazardbench::ensemble::EnsembleMode;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "hazardbench",
    version,
    about = "Cox screening, Cox regression, neural risk models and concordance evaluation for time-to-event data",
    after_help = "Set HAZARDBENCH_LOG=error|warn|info|debug to control diagnostics on stderr."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort. Optional --input: a generator spec JSON.
    Simulate(RunArgs),
    /// Univariate Cox screening followed by a joint refit.
    Screen(RunArgs),
    /// Fit a Cox model on every covariate and its Breslow baseline hazard.
    FitCox(RunArgs),
    /// Train a risk network on all standardized covariates.
    FitDeepsurv(RunArgs),
    /// Fit the screening + network ensemble and evaluate it against its parts.
    Ensemble(RunArgs),
    /// Re-evaluate a saved model bundle. Inputs: model.json, then the cohort CSV.
    Evaluate(RunArgs),
    /// Kaplan-Meier curve of a cohort.
    Km(RunArgs),
    /// Cox survival curves. Inputs: cox_fit.json, baseline_hazard.csv, profiles CSV.
    Curves(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Input file; repeat for subcommands that take several.
    #[arg(long = "input")]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "time")]
    pub time_col: String,
    #[arg(long, default_value = "event")]
    pub event_col: String,
    /// Screening significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Training fraction for the train/validation split.
    #[arg(long)]
    pub split: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    /// Hidden layer widths, comma separated (e.g. "32,32"); empty for a linear network.
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long, value_parser = parse_mode, default_value = "pipeline")]
    pub mode: EnsembleMode,
    #[arg(long, value_parser = parse_tie, default_value = "breslow")]
    pub tie: TieMethod,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_mode(s: &str) -> Result<EnsembleMode, String> {
    s.parse()
}

fn parse_tie(s: &str) -> Result<TieMethod, String> {
    s.parse()
}

pub const DEFAULT_SPLIT: f64 = 0.8;

impl RunArgs {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn split_fraction(&self) -> f64 {
        self.split.unwrap_or(DEFAULT_SPLIT)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CliError::Usage(format!("--alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if let Some(f) = self.split {
            if !(f > 0.0 && f < 1.0) {
                return Err(CliError::Usage(format!("--split must lie in (0, 1), got {f}")));
            }
        }
        Ok(())
    }

    pub fn hidden_sizes(&self) -> Result<Option<Vec<usize>>, CliError> {
        let Some(h) = &self.hidden else { return Ok(None) };
        if h.trim().is_empty() {
            return Ok(Some(Vec::new()));
        }
        h.split(',')
            .map(|w| {
                w.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("--hidden: `{w}` is not a layer width")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn train_config(&self) -> Result<TrainConfig, CliError> {
        let defaults = TrainConfig::default();
        let config = TrainConfig {
            n_epochs: self.epochs.unwrap_or(defaults.n_epochs),
            learning_rate: self.lr.unwrap_or(defaults.learning_rate),
            l2_penalty: self.l2.unwrap_or(defaults.l2_penalty),
            hidden_sizes: self.hidden_sizes()?.unwrap_or(defaults.hidden_sizes),
            seed: self.seed(),
            optimizer: defaults.optimizer,
            checkpoint_interval: defaults.checkpoint_interval,
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}
