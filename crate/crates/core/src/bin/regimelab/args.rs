use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "regimelab", version, about = "NP/FR/MN regime model: evaluation, MAP fitting, sweeps and diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regime probabilities over an evenly spaced gap grid
    Probs(ProbsArgs),
    /// Cumulative counts and sliding-window label proportions
    Dynamics(DynamicsArgs),
    /// MAP fit of the gap trajectory at one lambda
    Fit(FitArgs),
    /// Fits over a log-spaced lambda grid with calibration-based selection
    Sweep(SweepArgs),
    /// Per-turn sensitivities of an existing fit
    Sens(SensArgs),
    /// Synthetic labeled corpus drawn from the model
    Synth(SynthArgs),
    /// Analytic derivatives against finite differences on random draws
    Checkgrad(CheckgradArgs),
}

/// Model parameters; unset values take the library defaults.
#[derive(Args, Debug, Clone, Default)]
pub struct ParamFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub eps_p: Option<f64>,
}

/// Estimation settings. Precedence: defaults < REGIMELAB_SEED < --config < flags.
#[derive(Args, Debug, Clone, Default)]
pub struct FitFlags {
    /// JSON object with flat FitConfig keys
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Increment penalty (lambda = 0.5 / sig_rw^2)
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Random-walk scale; alternative to --lambda
    #[arg(long, conflicts_with = "lambda")]
    pub sig_rw: Option<f64>,
    #[arg(long)]
    pub beta_fixed: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_a_hat: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_p_hat: Option<f64>,
    #[arg(long)]
    pub lam_alpha: Option<f64>,
    #[arg(long)]
    pub lam_gamma: Option<f64>,
    #[arg(long)]
    pub lam_kappa: Option<f64>,
    #[arg(long)]
    pub gauge_w: Option<f64>,
    #[arg(long)]
    pub eps_p: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub gradient_tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ProbsArgs {
    /// start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    pub grid: String,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DynamicsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Receives fit.json, trajectory.csv and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// lo:hi:count, log-spaced
    #[arg(long, default_value = "0.1:10:25")]
    pub grid_log: String,
    /// Fit every grid point from the default start instead of warm-starting
    #[arg(long)]
    pub cold: bool,
    /// Worker threads for --cold
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Receives sweep.csv and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct SensArgs {
    /// fit.json written by `fit`
    #[arg(long)]
    pub fit: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 86)]
    pub length: usize,
    #[arg(long, default_value_t = 0.3)]
    pub sig_rw: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub g0: f64,
    /// random_walk or piecewise_ramp
    #[arg(long, default_value = "piecewise_ramp")]
    pub scenario: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub params: ParamFlags,
    /// Receives corpus.json, truth.csv and manifest.json
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug)]
pub struct CheckgradArgs {
    #[arg(long, default_value_t = 1000)]
    pub draws: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
}
