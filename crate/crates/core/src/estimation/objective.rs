//! Negative log-posterior of a gap trajectory and its gradient.
//!
//! ```text
//! neg_loglik = -Σ_t log clamp(P_{y_t}(G_t))
//! pen_rw     = 0.5 Σ_{t≥2} (G_t - G_{t-1})² / σ_rw²      (σ_rw² = 0.5 / λ)
//! gauge_pen  = gauge_w · mean(G)²
//! pen_l2     = 0.5 (λ_α α² + λ_γ γ² + λ_κ κ²)
//! ```
//!
//! The gradient is exact for the clamped objective: a clamped probability
//! contributes zero derivative.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{RegimeError, Result};
use crate::model::{clamp_prob, evaluate, mn_activation, mn_and_rest, sigmoid, ModelParams, DEFAULT_EPS_P};

/// Optimizer settings carried inside [`FitConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_iterations: 5000, gradient_tolerance: 1e-8, seed: 0 }
    }
}

/// Fixed quantities of a MAP fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Increment penalty; `λ = 0.5 / σ_rw²`.
    pub lambda: f64,
    pub beta_fixed: f64,
    pub tau_a_hat: f64,
    pub tau_p_hat: f64,
    pub lam_alpha: f64,
    pub lam_gamma: f64,
    pub lam_kappa: f64,
    pub gauge_w: f64,
    pub eps_p: f64,
    pub optimizer: OptimizerConfig,
}

/// Default increment penalty.
pub const DEFAULT_LAMBDA: f64 = 1.15;

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
            beta_fixed: 1.0,
            tau_a_hat: 0.8,
            tau_p_hat: 0.4,
            lam_alpha: 1e-2,
            lam_gamma: 1e-2,
            lam_kappa: 1e-2,
            gauge_w: 1e2,
            eps_p: DEFAULT_EPS_P,
            optimizer: OptimizerConfig::default(),
        }
    }
}

impl FitConfig {
    /// Random-walk scale implied by `lambda`.
    pub fn sig_rw(&self) -> f64 {
        (0.5 / self.lambda).sqrt()
    }

    /// `lambda` expressed from a random-walk scale.
    pub fn lambda_from_sig_rw(sig_rw: f64) -> f64 {
        0.5 / (sig_rw * sig_rw)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(RegimeError::Parameter(m));
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(format!("lambda must be > 0, got {}", self.lambda));
        }
        if !(self.sig_rw().is_finite() && self.sig_rw() > 0.0) {
            return bad(format!("lambda {} gives a degenerate random-walk scale", self.lambda));
        }
        if !(self.beta_fixed.is_finite() && self.beta_fixed > 0.0) {
            return bad(format!("beta_fixed must be > 0, got {}", self.beta_fixed));
        }
        for (name, v) in [("tau_a_hat", self.tau_a_hat), ("tau_p_hat", self.tau_p_hat)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        for (name, v) in [
            ("lam_alpha", self.lam_alpha),
            ("lam_gamma", self.lam_gamma),
            ("lam_kappa", self.lam_kappa),
            ("gauge_w", self.gauge_w),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be >= 0, got {v}"));
            }
        }
        if !(self.eps_p > 0.0 && self.eps_p < 1e-3) {
            return bad(format!("eps_p must lie in (0, 1e-3), got {}", self.eps_p));
        }
        if self.optimizer.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.optimizer.gradient_tolerance.is_finite() && self.optimizer.gradient_tolerance > 0.0) {
            return bad(format!(
                "gradient_tolerance must be > 0, got {}",
                self.optimizer.gradient_tolerance
            ));
        }
        Ok(())
    }

    /// Model parameters for the given free values. `alpha` is not required
    /// to be positive here.
    pub fn model_params(&self, alpha: f64, gamma: f64, kappa: f64) -> ModelParams {
        ModelParams {
            beta: self.beta_fixed,
            alpha,
            gamma,
            tau_a: self.tau_a_hat,
            tau_p: self.tau_p_hat,
            kappa,
            eps_p: self.eps_p,
        }
    }
}

/// Free quantities of a MAP fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamHat {
    pub gap_trajectory: Vec<f64>,
    pub alpha_hat: f64,
    pub gamma_hat: f64,
    pub kappa_hat: f64,
}

impl ParamHat {
    /// Starting point: `G = 0`, `α = γ = 1`, `κ = 0.5`.
    pub fn initial(len: usize) -> Self {
        Self { gap_trajectory: vec![0.0; len], alpha_hat: 1.0, gamma_hat: 1.0, kappa_hat: 0.5 }
    }
}

/// Objective value and its decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    pub neg_logpost: f64,
    pub neg_loglik: f64,
    pub pen_rw: f64,
    pub gauge_pen: f64,
    pub pen_l2: f64,
}

fn check_shapes(gaps: &[f64], labels: &[Label]) -> Result<()> {
    if gaps.len() != labels.len() {
        return Err(RegimeError::Shape(format!(
            "trajectory has {} entries but there are {} labels",
            gaps.len(),
            labels.len()
        )));
    }
    if gaps.len() < 2 {
        return Err(RegimeError::Shape(format!("need at least 2 turns, got {}", gaps.len())));
    }
    Ok(())
}

fn penalties(gaps: &[f64], alpha: f64, gamma: f64, kappa: f64, cfg: &FitConfig) -> (f64, f64, f64) {
    let sig = cfg.sig_rw();
    let sum_sq: f64 = gaps.windows(2).map(|w| (w[1] - w[0]) * (w[1] - w[0])).sum();
    let pen_rw = 0.5 * sum_sq / (sig * sig);
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let gauge_pen = cfg.gauge_w * (mean * mean);
    let pen_l2 = 0.5
        * (cfg.lam_alpha * alpha * alpha + cfg.lam_gamma * gamma * gamma + cfg.lam_kappa * kappa * kappa);
    (pen_rw, gauge_pen, pen_l2)
}

/// Evaluate the objective and its decomposition.
pub fn neg_logpost(ph: &ParamHat, labels: &[Label], cfg: &FitConfig) -> Result<ObjectiveTerms> {
    check_shapes(&ph.gap_trajectory, labels)?;
    for (name, v) in [("alpha_hat", ph.alpha_hat), ("gamma_hat", ph.gamma_hat), ("kappa_hat", ph.kappa_hat)] {
        if !v.is_finite() {
            return Err(RegimeError::Numeric { turn: None, message: format!("{name} is {v}") });
        }
    }
    let params = cfg.model_params(ph.alpha_hat, ph.gamma_hat, ph.kappa_hat);
    let mut neg_loglik = 0.0;
    for (t, (&g, &y)) in ph.gap_trajectory.iter().zip(labels).enumerate() {
        if !g.is_finite() {
            return Err(RegimeError::Numeric { turn: Some(t + 1), message: format!("G is {g}") });
        }
        let term = -clamp_prob(evaluate(g, &params).prob(y), cfg.eps_p).ln();
        if !term.is_finite() {
            return Err(RegimeError::Numeric {
                turn: Some(t + 1),
                message: format!("log-likelihood term is {term} at G = {g}"),
            });
        }
        neg_loglik += term;
    }
    let (pen_rw, gauge_pen, pen_l2) =
        penalties(&ph.gap_trajectory, ph.alpha_hat, ph.gamma_hat, ph.kappa_hat, cfg);
    let neg_logpost = neg_loglik + pen_rw + gauge_pen + pen_l2;
    if !neg_logpost.is_finite() {
        return Err(RegimeError::Numeric { turn: None, message: format!("objective is {neg_logpost}") });
    }
    Ok(ObjectiveTerms { neg_logpost, neg_loglik, pen_rw, gauge_pen, pen_l2 })
}

/// Layout of the optimizer vector: `[G_1..G_T, α, γ, u]` with `κ = σ(u)`.
pub(crate) fn pack(ph: &ParamHat) -> Vec<f64> {
    let k = ph.kappa_hat.clamp(1e-9, 1.0 - 1e-9);
    let mut x = ph.gap_trajectory.clone();
    x.extend([ph.alpha_hat, ph.gamma_hat, (k / (1.0 - k)).ln()]);
    x
}

pub(crate) fn unpack(x: &[f64]) -> ParamHat {
    let t = x.len() - 3;
    ParamHat {
        gap_trajectory: x[..t].to_vec(),
        alpha_hat: x[t],
        gamma_hat: x[t + 1],
        kappa_hat: sigmoid(x[t + 2]),
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

#[inline]
fn inside(p: f64, eps: f64) -> bool {
    p > eps && p < 1.0 - eps
}

/// Objective value over the packed vector; writes the gradient into `grad`.
/// Value and gradient of the packed objective. `kink[t]` receives the
/// coefficient of `|G_t|` in the local expansion (zero for the globals); the
/// gradient uses `sgn(0) = 0`.
pub(crate) fn value_and_gradient(
    x: &[f64],
    labels: &[Label],
    cfg: &FitConfig,
    grad: &mut [f64],
    kink: &mut [f64],
) -> f64 {
    let t_len = labels.len();
    let (alpha, gamma, u) = (x[t_len], x[t_len + 1], x[t_len + 2]);
    let kappa = sigmoid(u);
    let params = cfg.model_params(alpha, gamma, kappa);
    let eps = cfg.eps_p;
    let beta = cfg.beta_fixed;

    grad.iter_mut().for_each(|g| *g = 0.0);
    kink.iter_mut().for_each(|k| *k = 0.0);
    let (mut d_alpha, mut d_gamma, mut d_kappa) = (0.0, 0.0, 0.0);
    let mut neg_loglik = 0.0;

    for (t, &y) in labels.iter().enumerate() {
        let g = x[t];
        let s = sigmoid(beta * g);
        let s_c = sigmoid(-beta * g);
        let z = mn_activation(g, s, &params);
        let (m, m_c) = (sigmoid(z), sigmoid(-z));
        let ds = beta * s * s_c;
        let mm = m * m_c;

        // [∂/∂G, ∂/∂α, ∂/∂γ, ∂/∂κ]
        let raw_mn = kappa * m;
        let (p_mn, rest) = mn_and_rest(kappa, m, m_c, eps);
        let d_mn = if inside(raw_mn, eps) {
            [
                kappa * mm * (alpha * sign0(g) + gamma * ds),
                kappa * mm * (g.abs() - cfg.tau_a_hat),
                kappa * mm * (s - cfg.tau_p_hat),
                m,
            ]
        } else {
            [0.0; 4]
        };

        let abs_mn = if inside(raw_mn, eps) { kappa * mm * alpha } else { 0.0 };
        let mut abs_y = abs_mn;
        let (p_y, d_y) = match y {
            Label::Mn => (p_mn, d_mn),
            Label::Fr => {
                let raw = rest * s;
                abs_y = if inside(raw, eps) { -s * abs_mn } else { 0.0 };
                let d = if inside(raw, eps) {
                    [
                        rest * ds - s * d_mn[0],
                        -s * d_mn[1],
                        -s * d_mn[2],
                        -s * d_mn[3],
                    ]
                } else {
                    [0.0; 4]
                };
                (clamp_prob(raw, eps), d)
            }
            Label::Np => {
                let raw = rest * s_c;
                abs_y = if inside(raw, eps) { -s_c * abs_mn } else { 0.0 };
                let d = if inside(raw, eps) {
                    [
                        -rest * ds - s_c * d_mn[0],
                        -s_c * d_mn[1],
                        -s_c * d_mn[2],
                        -s_c * d_mn[3],
                    ]
                } else {
                    [0.0; 4]
                };
                (clamp_prob(raw, eps), d)
            }
        };

        neg_loglik += -clamp_prob(p_y, eps).ln();
        grad[t] = -d_y[0] / p_y;
        kink[t] = -abs_y / p_y;
        d_alpha -= d_y[1] / p_y;
        d_gamma -= d_y[2] / p_y;
        d_kappa -= d_y[3] / p_y;
    }

    let gaps = &x[..t_len];
    let (pen_rw, gauge_pen, pen_l2) = penalties(gaps, alpha, gamma, kappa, cfg);

    let sig = cfg.sig_rw();
    let c = 1.0 / (sig * sig);
    for t in 1..t_len {
        let d = c * (gaps[t] - gaps[t - 1]);
        grad[t] += d;
        grad[t - 1] -= d;
    }
    let mean = gaps.iter().sum::<f64>() / t_len as f64;
    let dg = 2.0 * cfg.gauge_w * mean / t_len as f64;
    grad[..t_len].iter_mut().for_each(|g| *g += dg);

    d_alpha += cfg.lam_alpha * alpha;
    d_gamma += cfg.lam_gamma * gamma;
    d_kappa += cfg.lam_kappa * kappa;
    grad[t_len] = d_alpha;
    grad[t_len + 1] = d_gamma;
    grad[t_len + 2] = d_kappa * kappa * (1.0 - kappa);

    neg_loglik + pen_rw + gauge_pen + pen_l2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label::{Fr, Mn, Np};

    fn zero_penalties() -> FitConfig {
        FitConfig { lam_alpha: 0.0, lam_gamma: 0.0, lam_kappa: 0.0, gauge_w: 0.0, ..FitConfig::default() }
    }

    #[test]
    fn symmetric_point_closed_form() {
        let ph = ParamHat { gap_trajectory: vec![0.0, 0.0], alpha_hat: 0.0, gamma_hat: 0.0, kappa_hat: 0.0 };
        let terms = neg_logpost(&ph, &[Np, Np], &zero_penalties()).unwrap();
        assert!((terms.neg_loglik - 2.0 * 2f64.ln()).abs() <= 1e-11);
        assert_eq!(terms.pen_rw, 0.0);
        assert_eq!(terms.neg_logpost, terms.neg_loglik);
    }

    #[test]
    fn constant_trajectory_has_no_increment_penalty() {
        let ph = ParamHat { gap_trajectory: vec![0.7; 6], alpha_hat: 1.0, gamma_hat: 0.3, kappa_hat: 0.4 };
        let terms = neg_logpost(&ph, &[Np, Fr, Mn, Mn, Fr, Np], &FitConfig::default()).unwrap();
        assert_eq!(terms.pen_rw, 0.0);
        assert!((terms.gauge_pen - 1e2 * 0.49).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let cfg = FitConfig::default();
        let ph = ParamHat::initial(3);
        assert!(matches!(neg_logpost(&ph, &[Np, Np], &cfg), Err(RegimeError::Shape(_))));
        assert!(matches!(neg_logpost(&ParamHat::initial(1), &[Np], &cfg), Err(RegimeError::Shape(_))));
    }

    #[test]
    fn non_finite_reports_turn() {
        let ph = ParamHat { gap_trajectory: vec![0.0, f64::NAN, 0.0], ..ParamHat::initial(3) };
        match neg_logpost(&ph, &[Np, Fr, Mn], &FitConfig::default()) {
            Err(RegimeError::Numeric { turn, .. }) => assert_eq!(turn, Some(2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambda_sig_rw_roundtrip() {
        let cfg = FitConfig { lambda: 1.15, ..FitConfig::default() };
        assert!((FitConfig::lambda_from_sig_rw(cfg.sig_rw()) - 1.15).abs() < 1e-14);
    }

    #[test]
    fn packed_value_matches_objective_and_gradient_matches_differences() {
        let labels = [Np, Fr, Mn, Mn, Fr, Np, Mn];
        let ph = ParamHat {
            gap_trajectory: vec![-1.3, -0.4, 0.6, 1.7, 2.2, -2.5, 0.9],
            alpha_hat: 1.4,
            gamma_hat: -0.7,
            kappa_hat: 0.63,
        };
        let cfg = FitConfig::default();
        let x = pack(&ph);
        let mut grad = vec![0.0; x.len()];
        let mut kink = vec![0.0; x.len()];
        let v = value_and_gradient(&x, &labels, &cfg, &mut grad, &mut kink);
        let terms = neg_logpost(&unpack(&x), &labels, &cfg).unwrap();
        assert!((v - terms.neg_logpost).abs() <= 1e-12 * v.abs());

        let mut scratch = vec![0.0; x.len()];
        let mut sk = vec![0.0; x.len()];
        for i in 0..x.len() {
            let h = 1e-6;
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (value_and_gradient(&xp, &labels, &cfg, &mut scratch, &mut sk)
                - value_and_gradient(&xm, &labels, &cfg, &mut scratch, &mut sk))
                / (2.0 * h);
            let err = (fd - grad[i]).abs() / grad[i].abs().max(1.0);
            assert!(err < 1e-6, "component {i}: fd {fd} analytic {}", grad[i]);
        }
    }

    #[test]
    fn kink_weights_give_one_sided_slopes() {
        let labels = [Np, Mn, Fr, Mn];
        let ph = ParamHat {
            gap_trajectory: vec![0.0, 0.0, 0.0, 1.1],
            alpha_hat: -3.0,
            gamma_hat: 0.8,
            kappa_hat: 0.7,
        };
        let cfg = FitConfig::default();
        let x = pack(&ph);
        let (mut grad, mut kink) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        let v = value_and_gradient(&x, &labels, &cfg, &mut grad, &mut kink);
        assert!(kink[4..].iter().all(|k| *k == 0.0));
        let (mut scratch, mut sk) = (vec![0.0; x.len()], vec![0.0; x.len()]);
        for t in 0..3 {
            let h = 1e-7;
            let mut xp = x.clone();
            xp[t] = h;
            let right = (value_and_gradient(&xp, &labels, &cfg, &mut scratch, &mut sk) - v) / h;
            xp[t] = -h;
            let left = (v - value_and_gradient(&xp, &labels, &cfg, &mut scratch, &mut sk)) / h;
            assert!((right - (grad[t] + kink[t])).abs() < 1e-5, "turn {t}: {right}");
            assert!((left - (grad[t] - kink[t])).abs() < 1e-5, "turn {t}: {left}");
            assert!(kink[t] != 0.0);
        }
    }
}
