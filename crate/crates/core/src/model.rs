//! Three-regime probability model.
//!
//! A scalar gap `G = A - C` (alignment pressure minus competence) drives two
//! latent activations:
//!
//! - the refusal propensity `s = σ(βG)`;
//! - the meta-narrative activation `m = σ(Z)` with
//!   `Z = α(|G| - τ_A) + γ(s - τ_P)`.
//!
//! MN is allocated first (`P_MN = κ·m`), and FR / NP split the remaining mass
//! `1 - P_MN` in the ratio `s : 1 - s`. The reduced form takes `κ` as a free
//! scalar; the theoretical form derives it from competence through the
//! capacity curve `f_cap(C) = σ(η(C - C₀))`.
//!
//! Every emitted probability is clamped to `[eps_p, 1 - eps_p]`, MN first and
//! then FR and NP, so the three values sum to one only up to `4·eps_p`.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{ensure_finite, RegimeError, Result};

/// Default probability clamp.
pub const DEFAULT_EPS_P: f64 = 1e-12;

/// Parameters of the reduced (single-model) probability map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// FR slope.
    pub beta: f64,
    /// Gap-pressure slope of the MN activation.
    pub alpha: f64,
    /// Coupling of the MN activation to the FR propensity.
    pub gamma: f64,
    /// Gap threshold.
    pub tau_a: f64,
    /// FR-propensity threshold.
    pub tau_p: f64,
    /// MN capacity scalar in `[0, 1]`.
    pub kappa: f64,
    /// Probability clamp.
    pub eps_p: f64,
}

impl Default for ModelParams {
    /// Places the MN transition inside `G ∈ [0, 3]`.
    fn default() -> Self {
        Self {
            beta: 1.0,
            alpha: 2.0,
            gamma: 1.5,
            tau_a: 0.8,
            tau_p: 0.4,
            kappa: 0.9,
            eps_p: DEFAULT_EPS_P,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("gamma", self.gamma),
            ("tau_a", self.tau_a),
            ("tau_p", self.tau_p),
            ("kappa", self.kappa),
            ("eps_p", self.eps_p),
        ] {
            if !v.is_finite() {
                return Err(RegimeError::Parameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.beta <= 0.0 {
            return Err(RegimeError::Parameter(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.alpha <= 0.0 {
            return Err(RegimeError::Parameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(RegimeError::Parameter(format!(
                "kappa must lie in [0, 1], got {}",
                self.kappa
            )));
        }
        if !(self.eps_p > 0.0 && self.eps_p < 1e-3) {
            return Err(RegimeError::Parameter(format!(
                "eps_p must lie in (0, 1e-3), got {}",
                self.eps_p
            )));
        }
        Ok(())
    }
}

/// Parameters of the theoretical form, where the capacity scalar is derived
/// from competence instead of being supplied directly.
///
/// `model_params.kappa` is ignored by this path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalParams {
    pub model_params: ModelParams,
    /// Capacity slope.
    pub eta: f64,
    /// Competence at which capacity reaches one half.
    pub c0: f64,
    /// Competence `C`.
    pub competence: f64,
    /// Alignment pressure `A`.
    pub pressure: f64,
}

impl TheoreticalParams {
    pub fn gap(&self) -> f64 {
        self.pressure - self.competence
    }

    /// The equivalent reduced parameters: `κ := f_cap(C)`.
    pub fn reduced(&self) -> Result<ModelParams> {
        ensure_finite("competence", self.competence)?;
        ensure_finite("pressure", self.pressure)?;
        let kappa = capacity(self.competence, self.eta, self.c0)?;
        let params = ModelParams { kappa, ..self.model_params };
        params.validate()?;
        Ok(params)
    }
}

/// Full evaluation of the model at one gap value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeProbs {
    /// Latent refusal propensity `σ(βG)`.
    pub p_fr_lat: f64,
    /// Latent MN activation `σ(Z)`.
    pub p_mn_lat: f64,
    /// Internal MN activation `Z`.
    pub z_mn: f64,
    pub p_mn: f64,
    pub p_fr: f64,
    pub p_np: f64,
}

impl RegimeProbs {
    pub fn prob(&self, label: Label) -> f64 {
        match label {
            Label::Np => self.p_np,
            Label::Fr => self.p_fr,
            Label::Mn => self.p_mn,
        }
    }

    /// Regime with the largest final probability (ties resolve NP, FR, MN).
    pub fn argmax(&self) -> Label {
        let mut best = (Label::Np, self.p_np);
        for (label, p) in [(Label::Fr, self.p_fr), (Label::Mn, self.p_mn)] {
            if p > best.1 {
                best = (label, p);
            }
        }
        best.0
    }

    pub fn total(&self) -> f64 {
        self.p_np + self.p_fr + self.p_mn
    }
}

/// Logistic function in the overflow-free two-branch form.
#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub(crate) fn clamp_prob(p: f64, eps: f64) -> f64 {
    p.max(eps).min(1.0 - eps)
}

/// `1 / (1 + exp(-z))`; saturates to exactly 0 or 1 for large `|z|`.
pub fn logistic(z: f64) -> Result<f64> {
    ensure_finite("z", z)?;
    Ok(sigmoid(z))
}

/// Latent refusal propensity `σ(β·gap)`.
pub fn latent_fr(gap: f64, params: &ModelParams) -> Result<f64> {
    params.validate()?;
    ensure_finite("gap", gap)?;
    Ok(sigmoid(params.beta * gap))
}

/// Capacity curve `σ(η(C - C₀))`.
pub fn capacity(competence: f64, eta: f64, c0: f64) -> Result<f64> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(RegimeError::Parameter(format!("eta must be > 0, got {eta}")));
    }
    ensure_finite("c0", c0)?;
    ensure_finite("competence", competence)?;
    Ok(sigmoid(eta * (competence - c0)))
}

/// Clamped `P_MN` and its complement `1 - P_MN`, the latter formed from
/// `1 - κ` and `σ(-Z)` so it keeps full precision when `κ·m` is near 1.
#[inline]
pub(crate) fn mn_and_rest(kappa: f64, m: f64, m_c: f64, eps: f64) -> (f64, f64) {
    let raw = kappa * m;
    if raw < eps {
        (eps, 1.0 - eps)
    } else if raw > 1.0 - eps {
        (1.0 - eps, eps)
    } else {
        (raw, (1.0 - kappa) + kappa * m_c)
    }
}

#[inline]
pub(crate) fn mn_activation(gap: f64, p_fr_lat: f64, params: &ModelParams) -> f64 {
    params.alpha * (gap.abs() - params.tau_a) + params.gamma * (p_fr_lat - params.tau_p)
}

/// MN pressure: returns `(Z, σ(Z))`.
pub fn mn_pressure(gap: f64, p_fr_lat: f64, params: &ModelParams) -> Result<(f64, f64)> {
    params.validate()?;
    ensure_finite("gap", gap)?;
    if !(p_fr_lat > 0.0 && p_fr_lat < 1.0) {
        return Err(RegimeError::Domain(format!(
            "p_fr_lat must lie in (0, 1), got {p_fr_lat}"
        )));
    }
    let z = mn_activation(gap, p_fr_lat, params);
    Ok((z, sigmoid(z)))
}

/// Unvalidated evaluation used on hot paths; the caller guarantees finite
/// inputs. `alpha` may be non-positive here, as it can be during fitting.
pub(crate) fn evaluate(gap: f64, params: &ModelParams) -> RegimeProbs {
    let eps = params.eps_p;
    let p_fr_lat = sigmoid(params.beta * gap);
    let z_mn = mn_activation(gap, p_fr_lat, params);
    let p_mn_lat = sigmoid(z_mn);

    let (p_mn, rest) = mn_and_rest(params.kappa, p_mn_lat, sigmoid(-z_mn), eps);
    let p_fr = clamp_prob(rest * p_fr_lat, eps);
    let p_np = clamp_prob(rest * sigmoid(-params.beta * gap), eps);

    RegimeProbs { p_fr_lat, p_mn_lat, z_mn, p_mn, p_fr, p_np }
}

/// Final regime probabilities in the reduced form.
pub fn regime_probs(gap: f64, params: &ModelParams) -> Result<RegimeProbs> {
    params.validate()?;
    ensure_finite("gap", gap)?;
    Ok(evaluate(gap, params))
}

/// Final regime probabilities in the theoretical form: `G = A - C` and
/// `κ = f_cap(C)`.
pub fn regime_probs_theoretical(tp: &TheoreticalParams) -> Result<RegimeProbs> {
    let reduced = tp.reduced()?;
    Ok(evaluate(tp.gap(), &reduced))
}

/// `(P_NP, P_FR, P_MN)` without clamping; the map that the sensitivity
/// routines differentiate.
pub fn regime_probs_unclamped(gap: f64, params: &ModelParams) -> (f64, f64, f64) {
    let s = sigmoid(params.beta * gap);
    let m = sigmoid(mn_activation(gap, s, params));
    let p_mn = params.kappa * m;
    ((1.0 - p_mn) * (1.0 - s), (1.0 - p_mn) * s, p_mn)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values computed with mpmath at 50 digits.
    const SIGMA_1: f64 = 0.731_058_578_630_004_9;
    const SIGMA_6: f64 = 0.997_527_376_843_365_2;
    const SIGMA_1_25: f64 = 0.777_299_861_174_691_1;

    fn reference_params() -> ModelParams {
        ModelParams { beta: 1.0, alpha: 2.0, gamma: 1.5, tau_a: 0.8, tau_p: 0.4, kappa: 0.9, ..Default::default() }
    }

    #[test]
    fn logistic_reference_points() {
        assert_eq!(logistic(0.0).unwrap(), 0.5);
        assert!((1.0 - logistic(40.0).unwrap()).abs() <= 1e-15);
        assert!((logistic(1.0).unwrap() - SIGMA_1).abs() <= 1e-16);
        assert_eq!(logistic(1000.0).unwrap(), 1.0);
        assert_eq!(logistic(-1000.0).unwrap(), 0.0);
        assert!(matches!(logistic(f64::NAN), Err(RegimeError::Domain(_))));
        assert!(matches!(logistic(f64::INFINITY), Err(RegimeError::Domain(_))));
    }

    #[test]
    fn latent_fr_points() {
        let p = ModelParams { beta: 1.0, ..Default::default() };
        assert_eq!(latent_fr(0.0, &p).unwrap(), 0.5);
        assert!(latent_fr(-50.0, &p).unwrap() <= 1e-20);
        assert!((latent_fr(1.0, &p).unwrap() - SIGMA_1).abs() <= 1e-16);
        let bad = ModelParams { beta: 0.0, ..p };
        assert!(matches!(latent_fr(1.0, &bad), Err(RegimeError::Parameter(_))));
    }

    #[test]
    fn capacity_points() {
        assert_eq!(capacity(3.0, 1.0, 3.0).unwrap(), 0.5);
        assert!(capacity(-47.0, 1.0, 3.0).unwrap() < 1e-20);
        assert!((capacity(5.0, 3.0, 3.0).unwrap() - SIGMA_6).abs() <= 2.5e-16);
        assert!(matches!(capacity(0.0, 0.0, 0.0), Err(RegimeError::Parameter(_))));
        assert!(matches!(capacity(0.0, -1.0, 0.0), Err(RegimeError::Parameter(_))));
    }

    #[test]
    fn mn_pressure_points() {
        let p = reference_params();
        let (z, m) = mn_pressure(p.tau_a, p.tau_p, &p).unwrap();
        assert_eq!(z, 0.0);
        assert_eq!(m, 0.5);

        let (z1, _) = mn_pressure(1.7, 0.3, &p).unwrap();
        let (z2, _) = mn_pressure(-1.7, 0.3, &p).unwrap();
        assert_eq!(z1, z2);

        let (z, m) = mn_pressure(1.2, 0.7, &p).unwrap();
        assert!((z - 1.25).abs() <= 1e-15);
        assert!((m - SIGMA_1_25).abs() <= 1e-15);

        assert!(mn_pressure(1.0, 1.0, &p).is_err());
    }

    #[test]
    fn kappa_zero_kills_mn() {
        let p = ModelParams { kappa: 0.0, ..reference_params() };
        let r = regime_probs(0.0, &p).unwrap();
        assert_eq!(r.p_mn, p.eps_p);
        assert!((r.p_fr - 0.5).abs() <= p.eps_p);
        assert!((r.p_np - 0.5).abs() <= p.eps_p);
    }

    #[test]
    fn reference_bundle_at_gap_one() {
        // mpmath, 50 digits: Eqs. for s, Z, m and the hierarchical split.
        let r = regime_probs(1.0, &reference_params()).unwrap();
        let expect = [
            (r.p_fr_lat, 0.731_058_578_630_004_9),
            (r.z_mn, 0.896_587_867_945_007_3),
            (r.p_mn_lat, 0.710_247_804_045_904_7),
            (r.p_mn, 0.639_223_023_641_314_2),
            (r.p_fr, 0.263_749_103_539_211_7),
            (r.p_np, 0.097_027_872_819_474_07),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() <= 1e-14, "{got} vs {want}");
        }
        assert!((r.total() - 1.0).abs() <= 4.0 * 1e-12);
    }

    #[test]
    fn theoretical_form_matches_reduced() {
        let tp = TheoreticalParams {
            model_params: reference_params(),
            eta: 1.0,
            c0: 3.0,
            competence: 5.0,
            pressure: 6.0,
        };
        let theo = regime_probs_theoretical(&tp).unwrap();
        let kappa = capacity(5.0, 1.0, 3.0).unwrap();
        let red = regime_probs(1.0, &ModelParams { kappa, ..reference_params() }).unwrap();
        assert_eq!(theo, red);
        // mpmath: f_cap = σ(2), P_MN = σ(2)·σ(Z(1)).
        assert!((theo.p_mn - 0.625_584_190_443_840_5).abs() <= 1e-14);
        assert!((theo.p_fr - 0.273_719_889_550_728_6).abs() <= 1e-14);
        assert!((theo.p_np - 0.100_695_920_005_430_9).abs() <= 1e-14);
    }

    #[test]
    fn theoretical_low_capacity_suppresses_mn() {
        let tp = TheoreticalParams {
            model_params: reference_params(),
            eta: 1.0,
            c0: 60.0,
            competence: 5.0,
            pressure: 5.0,
        };
        let r = regime_probs_theoretical(&tp).unwrap();
        assert_eq!(r.p_mn, tp.model_params.eps_p);
    }

    #[test]
    fn parameter_validation() {
        let base = reference_params();
        for bad in [
            ModelParams { alpha: 0.0, ..base },
            ModelParams { kappa: 1.5, ..base },
            ModelParams { kappa: -0.1, ..base },
            ModelParams { eps_p: 0.0, ..base },
            ModelParams { eps_p: 1e-2, ..base },
            ModelParams { gamma: f64::NAN, ..base },
        ] {
            assert!(matches!(regime_probs(0.3, &bad), Err(RegimeError::Parameter(_))), "{bad:?}");
        }
        assert!(matches!(regime_probs(f64::NAN, &base), Err(RegimeError::Domain(_))));
    }

    #[test]
    fn extreme_gaps_stay_clamped() {
        let p = reference_params();
        for g in [-1e6, -700.0, 700.0, 1e6] {
            let r = regime_probs(g, &p).unwrap();
            for v in [r.p_np, r.p_fr, r.p_mn] {
                assert!(v >= p.eps_p && v <= 1.0 - p.eps_p);
            }
        }
    }
}
