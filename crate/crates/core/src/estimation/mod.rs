//! MAP reconstruction of the latent gap trajectory.
//!
//! The free quantities are the trajectory `G_1..G_T` and the global slopes
//! `α̂`, `γ̂` and capacity `κ̂`; `β`, `τ_A`, `τ_P` and the random-walk scale
//! stay fixed. `κ̂` is optimized through `κ = σ(u)` so it stays in `(0, 1)`.
//! A log-spaced sweep over the increment penalty `λ` reports the RMSE between
//! trajectories at adjacent grid points and the mean reconstructed `P_MN`
//! over MN-labeled turns, which drives the choice of `λ`.

mod lbfgs;
mod objective;

use std::thread;

use serde::{Deserialize, Serialize};

pub use lbfgs::{minimize, minimize_orthant, LbfgsOptions, Minimum};
pub use objective::{
    neg_logpost, FitConfig, ObjectiveTerms, OptimizerConfig, ParamHat, DEFAULT_LAMBDA,
};

use crate::corpus::{Label, LabeledCorpus};
use crate::error::{RegimeError, Result};
use crate::model::{evaluate, ModelParams, RegimeProbs};
use crate::sensitivity::{derivs, SensitivityBundle};

/// Outcome of a single MAP fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params_hat: ParamHat,
    pub objective: ObjectiveTerms,
    /// Clamped probabilities along the fitted trajectory.
    pub probs: Vec<RegimeProbs>,
    /// `false` when the iteration cap was hit or the line search stalled;
    /// the best point found is still reported.
    pub converged: bool,
    pub iterations: usize,
    pub config: FitConfig,
    pub turns: Vec<u32>,
    pub labels: Vec<Label>,
}

impl FitResult {
    /// Model parameters at the fitted values. `alpha` is not constrained
    /// to be positive by the fit.
    pub fn theta(&self) -> ModelParams {
        let p = &self.params_hat;
        self.config.model_params(p.alpha_hat, p.gamma_hat, p.kappa_hat)
    }

    pub fn gaps(&self) -> &[f64] {
        &self.params_hat.gap_trajectory
    }

    /// Mean `P_MN` over MN-labeled turns; `None` without MN turns.
    pub fn mn_calibration(&self) -> Option<f64> {
        let vals: Vec<f64> = self
            .labels
            .iter()
            .zip(&self.probs)
            .filter(|(l, _)| **l == Label::Mn)
            .map(|(_, p)| p.p_mn)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Fit from the default starting point.
pub fn fit_map(corpus: &LabeledCorpus, cfg: &FitConfig) -> Result<FitResult> {
    fit_map_from(corpus, cfg, &ParamHat::initial(corpus.len()))
}

/// Fit from an explicit starting point (warm start).
pub fn fit_map_from(corpus: &LabeledCorpus, cfg: &FitConfig, start: &ParamHat) -> Result<FitResult> {
    cfg.validate()?;
    if corpus.len() < 2 {
        return Err(RegimeError::Shape(format!(
            "MAP fit needs at least 2 turns, got {}",
            corpus.len()
        )));
    }
    if start.gap_trajectory.len() != corpus.len() {
        return Err(RegimeError::Shape(format!(
            "start trajectory has {} entries for a corpus of {}",
            start.gap_trajectory.len(),
            corpus.len()
        )));
    }
    let labels = corpus.labels();
    // Validates the start point and reports bad inputs with a turn index.
    neg_logpost(start, &labels, cfg)?;

    let opts = LbfgsOptions {
        max_iterations: cfg.optimizer.max_iterations,
        gradient_tolerance: cfg.optimizer.gradient_tolerance,
        ..LbfgsOptions::default()
    };
    let x0 = objective::pack(start);
    let min = minimize_orthant(|x, g, k| objective::value_and_gradient(x, &labels, cfg, g, k), &x0, &opts);

    let params_hat = objective::unpack(&min.x);
    let objective = neg_logpost(&params_hat, &labels, cfg)?;
    let theta = cfg.model_params(params_hat.alpha_hat, params_hat.gamma_hat, params_hat.kappa_hat);
    let probs = params_hat.gap_trajectory.iter().map(|&g| evaluate(g, &theta)).collect();

    Ok(FitResult {
        params_hat,
        objective,
        probs,
        converged: min.converged,
        iterations: min.iterations,
        config: *cfg,
        turns: corpus.turn_indices(),
        labels,
    })
}

/// Re-evaluate the probability model along the fitted trajectory.
pub fn reconstruct_probs(fit: &FitResult) -> Vec<RegimeProbs> {
    let theta = fit.theta();
    fit.gaps().iter().map(|&g| evaluate(g, &theta)).collect()
}

/// Per-turn sensitivities `∂P_k/∂G` at the fitted trajectory. A turn with
/// `Ĝ_t = 0` uses `sgn(0) = 0`.
pub fn trajectory_sensitivities(fit: &FitResult) -> Vec<SensitivityBundle> {
    let theta = fit.theta();
    fit.gaps().iter().map(|&g| derivs(g, &theta)).collect()
}

/// Number of points in the default sweep grid.
pub const DEFAULT_GRID_POINTS: usize = 25;

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) || n < 2 {
        return Err(RegimeError::Parameter(format!(
            "log grid needs 0 < lo < hi and at least 2 points, got {lo}:{hi}:{n}"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut grid: Vec<f64> =
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    grid[0] = lo;
    grid[n - 1] = hi;
    Ok(grid)
}

/// 25 log-spaced values on `[0.1, 10]`.
pub fn default_lambda_grid() -> Vec<f64> {
    log_grid(0.1, 10.0, DEFAULT_GRID_POINTS).expect("static grid is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub fits: Vec<FitResult>,
    /// RMSE between trajectories at grid points `i` and `i + 1`.
    pub adj_rmse: Vec<f64>,
    /// Mean `P_MN` over MN-labeled turns, per grid point.
    pub mn_calibration: Vec<Option<f64>>,
    /// `None` when the corpus has no MN turns.
    pub selected_lambda: Option<f64>,
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(RegimeError::Parameter(format!(
            "lambda grid needs at least 2 values, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
        return Err(RegimeError::Parameter("lambda grid values must be finite and positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RegimeError::Parameter("lambda grid must be strictly ascending".into()));
    }
    Ok(())
}

fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

fn assemble(grid: &[f64], fits: Vec<FitResult>) -> SweepResult {
    let adj_rmse = fits.windows(2).map(|w| rmse(w[0].gaps(), w[1].gaps())).collect();
    let mn_calibration: Vec<Option<f64>> = fits.iter().map(FitResult::mn_calibration).collect();
    let selected_lambda = select_from_calibration(grid, &mn_calibration, 0.5).ok();
    SweepResult { grid: grid.to_vec(), fits, adj_rmse, mn_calibration, selected_lambda }
}

/// Fit at every grid value in ascending order, each fit warm-started from
/// the previous solution.
pub fn lambda_sweep(corpus: &LabeledCorpus, cfg: &FitConfig, grid: &[f64]) -> Result<SweepResult> {
    check_grid(grid)?;
    let mut fits: Vec<FitResult> = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let c = FitConfig { lambda, ..*cfg };
        let fit = match fits.last() {
            Some(prev) => fit_map_from(corpus, &c, &prev.params_hat)?,
            None => fit_map(corpus, &c)?,
        };
        fits.push(fit);
    }
    Ok(assemble(grid, fits))
}

/// Fit every grid value from the default start, on up to `threads` worker
/// threads. The result does not depend on the thread count.
pub fn lambda_sweep_cold(
    corpus: &LabeledCorpus,
    cfg: &FitConfig,
    grid: &[f64],
    threads: usize,
) -> Result<SweepResult> {
    check_grid(grid)?;
    let threads = threads.clamp(1, grid.len());
    let chunk = grid.len().div_ceil(threads);
    let fits: Vec<Result<FitResult>> = thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|lambdas| {
                scope.spawn(move || {
                    lambdas
                        .iter()
                        .map(|&lambda| fit_map(corpus, &FitConfig { lambda, ..*cfg }))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(assemble(grid, fits))
}

/// Grid value whose calibration is nearest `target`; ties go to the
/// smaller `λ`.
pub fn select_lambda(sweep: &SweepResult, target: f64) -> Result<f64> {
    select_from_calibration(&sweep.grid, &sweep.mn_calibration, target)
}

pub fn select_from_calibration(grid: &[f64], calibration: &[Option<f64>], target: f64) -> Result<f64> {
    if grid.len() != calibration.len() {
        return Err(RegimeError::Shape(format!(
            "{} grid values but {} calibration values",
            grid.len(),
            calibration.len()
        )));
    }
    let mut best: Option<(f64, f64)> = None;
    for (&lambda, cal) in grid.iter().zip(calibration) {
        let Some(c) = cal else { continue };
        let dist = (c - target).abs();
        let better = match best {
            None => true,
            Some((bl, bd)) => dist < bd || (dist == bd && lambda < bl),
        };
        if better {
            best = Some((lambda, dist));
        }
    }
    best.map(|(l, _)| l).ok_or(RegimeError::CalibrationUnavailable)
}
