//! Derivatives of the regime probabilities with respect to the gap.
//!
//! Derivatives are taken on the unclamped map. The derivative of `|G|` is
//! `sgn(G)` with `sgn(0) = 0`, and the impulse that `|G|` contributes to the
//! second derivative at the origin is dropped. Since `∂G/∂A = 1` at fixed
//! competence, the same bundle is the sensitivity to alignment pressure.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, RegimeError, Result};
use crate::model::{mn_activation, regime_probs_unclamped, sigmoid, ModelParams, TheoreticalParams};
use crate::rng::{SeededRng, Stream};

/// First derivatives of the three final probabilities plus FR curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityBundle {
    pub d_p_np: f64,
    pub d_p_fr: f64,
    pub d_p_mn: f64,
    /// `∂²P_FR/∂G²`.
    pub d2_p_fr: f64,
    /// Derivative of the latent refusal propensity.
    pub d_p_fr_lat: f64,
    /// Derivative of the latent MN activation `σ(Z)`.
    pub d_p_mn_lat: f64,
}

impl SensitivityBundle {
    /// `S_NP + S_FR + S_MN`, zero up to rounding.
    pub fn zero_sum_residual(&self) -> f64 {
        self.d_p_np + self.d_p_fr + self.d_p_mn
    }
}

#[inline]
fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Unvalidated derivative evaluation.
pub(crate) fn derivs(gap: f64, params: &ModelParams) -> SensitivityBundle {
    let ModelParams { beta, alpha, gamma, kappa, .. } = *params;

    let s = sigmoid(beta * gap);
    let m = sigmoid(mn_activation(gap, s, params));
    let p_mn = kappa * m;

    let ds = beta * s * (1.0 - s);
    let d2s = beta * beta * s * (1.0 - s) * (1.0 - 2.0 * s);

    let dz = alpha * sign0(gap) + gamma * ds;
    let d2z = gamma * d2s;

    let dm = m * (1.0 - m) * dz;
    let d2m = m * (1.0 - m) * d2z + (1.0 - 2.0 * m) * (m * (1.0 - m)) * (dz * dz);

    let dp_mn = kappa * dm;
    let d2p_mn = kappa * d2m;

    let dp_fr = (1.0 - p_mn) * ds - s * dp_mn;
    let d2p_fr = (1.0 - p_mn) * d2s - 2.0 * ds * dp_mn - s * d2p_mn;
    let dp_np = -(1.0 - s) * dp_mn - (1.0 - p_mn) * ds;

    SensitivityBundle {
        d_p_np: dp_np,
        d_p_fr: dp_fr,
        d_p_mn: dp_mn,
        d2_p_fr: d2p_fr,
        d_p_fr_lat: ds,
        d_p_mn_lat: dm,
    }
}

/// Closed-form sensitivities `∂P_k/∂G` at `gap`.
pub fn derivs_wrt_gap(gap: f64, params: &ModelParams) -> Result<SensitivityBundle> {
    params.validate()?;
    ensure_finite("gap", gap)?;
    Ok(derivs(gap, params))
}

/// Sensitivities `∂P_k/∂A` in the theoretical form. Competence, and with it
/// the capacity `f_cap(C)`, is held fixed.
pub fn derivs_wrt_pressure(tp: &TheoreticalParams) -> Result<SensitivityBundle> {
    let reduced = tp.reduced()?;
    Ok(derivs(tp.gap(), &reduced))
}

/// Smallest denominator used when forming relative errors.
pub const REL_ERROR_FLOOR: f64 = 1e-8;

fn rel_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(REL_ERROR_FLOOR)
}

fn check_step(gap: f64, params: &ModelParams, step: f64) -> Result<()> {
    params.validate()?;
    ensure_finite("gap", gap)?;
    if !(1e-8..=1e-3).contains(&step) {
        return Err(RegimeError::Parameter(format!("step must lie in [1e-8, 1e-3], got {step}")));
    }
    if gap.abs() <= step {
        return Err(RegimeError::Kink { gap, step });
    }
    Ok(())
}

/// Maximum relative discrepancy between the analytic first derivatives and
/// central differences of the unclamped probability map.
///
/// The relative error of each component uses the denominator
/// `max(|analytic|, 1e-8)`.
pub fn finite_diff_check(gap: f64, params: &ModelParams, step: f64) -> Result<f64> {
    check_step(gap, params, step)?;
    let analytic = derivs(gap, params);
    let numeric = crate::precise::central_difference(gap, params, step);
    Ok([
        rel_error(analytic.d_p_np, numeric.0),
        rel_error(analytic.d_p_fr, numeric.1),
        rel_error(analytic.d_p_mn, numeric.2),
    ]
    .into_iter()
    .fold(0.0, f64::max))
}

/// Relative discrepancy between the analytic FR curvature and the second
/// central difference of the unclamped `P_FR`.
pub fn curvature_check(gap: f64, params: &ModelParams, step: f64) -> Result<f64> {
    check_step(gap, params, step)?;
    let analytic = derivs(gap, params).d2_p_fr;
    let numeric = crate::precise::second_difference_fr(gap, params, step);
    Ok(rel_error(analytic, numeric))
}

/// Smallest `|gap|` admitted by [`gradient_oracle`].
pub const ORACLE_GAP_EXCLUSION: f64 = 0.01;
/// Largest admissible relative error in [`gradient_oracle`].
pub const ORACLE_TOLERANCE: f64 = 1e-6;
/// Largest admissible `|S_NP + S_FR + S_MN|`.
pub const ZERO_SUM_TOLERANCE: f64 = 1e-12;

/// Summary of a seeded random-draw gradient check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub draws: usize,
    /// Draws whose relative error exceeded [`ORACLE_TOLERANCE`].
    pub derivative_failures: usize,
    /// Draws whose zero-sum residual exceeded [`ZERO_SUM_TOLERANCE`].
    pub zero_sum_failures: usize,
    pub worst_rel_error: f64,
    pub worst_zero_sum: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.derivative_failures == 0 && self.zero_sum_failures == 0
    }
}

/// One random draw: `gap ~ U(-6, 6)` with `|gap| ≥ 0.01`, then
/// `β, α ~ U(0.2, 3)`, `γ ~ U(-2, 2)`, `κ ~ U(0, 1)`, `τ_A ~ U(0, 2)`,
/// `τ_P ~ U(0, 1)`, drawn in that order.
pub fn oracle_draw(rng: &mut SeededRng) -> (f64, ModelParams) {
    loop {
        let gap = rng.uniform_in(-6.0, 6.0);
        let params = ModelParams {
            beta: rng.uniform_in(0.2, 3.0),
            alpha: rng.uniform_in(0.2, 3.0),
            gamma: rng.uniform_in(-2.0, 2.0),
            kappa: rng.uniform(),
            tau_a: rng.uniform_in(0.0, 2.0),
            tau_p: rng.uniform(),
            eps_p: crate::model::DEFAULT_EPS_P,
        };
        if gap.abs() >= ORACLE_GAP_EXCLUSION {
            return (gap, params);
        }
    }
}

/// Run [`finite_diff_check`] and the zero-sum identity on `draws` seeded
/// random instances.
pub fn gradient_oracle(draws: usize, seed: u64, step: f64) -> Result<GradCheckReport> {
    let mut rng = SeededRng::new(seed, Stream::GradCheck);
    let mut report = GradCheckReport {
        draws,
        derivative_failures: 0,
        zero_sum_failures: 0,
        worst_rel_error: 0.0,
        worst_zero_sum: 0.0,
    };
    for _ in 0..draws {
        let (gap, params) = oracle_draw(&mut rng);
        let err = finite_diff_check(gap, &params, step)?;
        let zs = derivs(gap, &params).zero_sum_residual().abs();
        report.worst_rel_error = report.worst_rel_error.max(err);
        report.worst_zero_sum = report.worst_zero_sum.max(zs);
        report.derivative_failures += usize::from(!(err <= ORACLE_TOLERANCE));
        report.zero_sum_failures += usize::from(!(zs <= ZERO_SUM_TOLERANCE));
    }
    Ok(report)
}

/// Plain double-precision central differences, kept for comparison with the
/// extended-precision oracle.
pub fn central_difference_f64(gap: f64, params: &ModelParams, step: f64) -> (f64, f64, f64) {
    let hi = regime_probs_unclamped(gap + step, params);
    let lo = regime_probs_unclamped(gap - step, params);
    let h2 = 2.0 * step;
    ((hi.0 - lo.0) / h2, (hi.1 - lo.1) / h2, (hi.2 - lo.2) / h2)
}
