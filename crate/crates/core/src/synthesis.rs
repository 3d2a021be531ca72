//! Seeded generator of synthetic labeled corpora drawn from the model itself.
//!
//! Trajectories and labels come from separate [`Stream`]s of the same seed.
//! Labels are emitted independently per turn given `G_t`, using one uniform
//! `u` per turn: NP if `u < P_NP`, FR if `u < P_NP + P_FR`, MN otherwise.

use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabeledCorpus};
use crate::error::{RegimeError, Result};
use crate::estimation::{fit_map, FitConfig, FitResult};
use crate::model::{evaluate, ModelParams};
use crate::rng::{SeededRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// `G_1 = g0`, `G_t = G_{t-1} + σ_rw·z_t`.
    RandomWalk,
    /// Holds `g0` over the first third, rises linearly to `|g0|` across the
    /// middle third and holds `|g0|` over the final third; independent
    /// `N(0, σ_rw²)` noise on every turn.
    PiecewiseRamp,
}

impl std::str::FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random_walk" => Ok(Scenario::RandomWalk),
            "piecewise_ramp" | "ramp" => Ok(Scenario::PiecewiseRamp),
            other => Err(format!("unknown scenario {other:?}; expected random_walk or piecewise_ramp")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub length: usize,
    pub sig_rw: f64,
    pub g0: f64,
    pub params: ModelParams,
    pub seed: u64,
    pub scenario: Scenario,
}

impl SynthSpec {
    /// The 86-turn ramp used for recovery checks.
    pub fn ramp(seed: u64) -> Self {
        Self {
            length: 86,
            sig_rw: 0.3,
            g0: -2.0,
            params: ModelParams::default(),
            seed,
            scenario: Scenario::PiecewiseRamp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 2 {
            return Err(RegimeError::Parameter(format!("length must be >= 2, got {}", self.length)));
        }
        if !(self.sig_rw.is_finite() && self.sig_rw > 0.0) {
            return Err(RegimeError::Parameter(format!("sig_rw must be > 0, got {}", self.sig_rw)));
        }
        if !self.g0.is_finite() {
            return Err(RegimeError::Parameter(format!("g0 must be finite, got {}", self.g0)));
        }
        if self.scenario == Scenario::PiecewiseRamp && self.g0 >= 0.0 {
            return Err(RegimeError::Parameter(format!(
                "piecewise ramp needs g0 < 0, got {}",
                self.g0
            )));
        }
        self.params.validate()
    }
}

/// Noise-free ramp shape: hold, linear rise, hold.
pub fn ramp_shape(length: usize, g0: f64) -> Vec<f64> {
    let first = length / 3;
    let last_start = length - length / 3;
    let top = g0.abs();
    (0..length)
        .map(|i| {
            if i < first {
                g0
            } else if i >= last_start {
                top
            } else {
                let span = (last_start - first) as f64;
                g0 + (top - g0) * ((i - first) as f64 + 1.0) / (span + 1.0)
            }
        })
        .collect()
}

pub fn sample_trajectory(spec: &SynthSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed, Stream::Trajectory);
    Ok(match spec.scenario {
        Scenario::RandomWalk => {
            let mut g = Vec::with_capacity(spec.length);
            g.push(spec.g0);
            for t in 1..spec.length {
                let next = g[t - 1] + spec.sig_rw * rng.standard_normal();
                g.push(next);
            }
            g
        }
        Scenario::PiecewiseRamp => ramp_shape(spec.length, spec.g0)
            .into_iter()
            .map(|g| g + spec.sig_rw * rng.standard_normal())
            .collect(),
    })
}

pub fn sample_labels(trajectory: &[f64], params: &ModelParams, seed: u64) -> Result<Vec<Label>> {
    params.validate()?;
    if let Some(t) = trajectory.iter().position(|g| !g.is_finite()) {
        return Err(RegimeError::Domain(format!("trajectory entry {} is not finite", t + 1)));
    }
    let mut rng = SeededRng::new(seed, Stream::Labels);
    Ok(trajectory
        .iter()
        .map(|&g| {
            let p = evaluate(g, params);
            let u = rng.uniform();
            if u < p.p_np {
                Label::Np
            } else if u < p.p_np + p.p_fr {
                Label::Fr
            } else {
                Label::Mn
            }
        })
        .collect())
}

/// A synthetic corpus with its generating trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub trajectory: Vec<f64>,
    pub corpus: LabeledCorpus,
}

pub fn synthesize(spec: &SynthSpec) -> Result<SyntheticCorpus> {
    let trajectory = sample_trajectory(spec)?;
    let labels = sample_labels(&trajectory, &spec.params, spec.seed)?;
    Ok(SyntheticCorpus { trajectory, corpus: LabeledCorpus::from_labels(&labels)? })
}

/// Pearson correlation; `0` when either side has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        sab / (saa.sqrt() * sbb.sqrt())
    }
}

pub fn rmse(a: &[f64], b: &[f64]) -> f64 {
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (ss / a.len() as f64).sqrt()
}

/// Refit on a seeded permutation of the corpus labels.
pub fn shuffled_refit(corpus: &LabeledCorpus, cfg: &FitConfig, seed: u64) -> Result<FitResult> {
    let mut labels = corpus.labels();
    SeededRng::new(seed, Stream::Shuffle).shuffle(&mut labels);
    fit_map(&LabeledCorpus::from_labels(&labels)?, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub correlation: f64,
    pub rmse: f64,
    /// RMSE of the all-zeros trajectory against the truth.
    pub rmse_zeros: f64,
    /// Correlation of the label-shuffled refit against the truth.
    pub correlation_shuffled: f64,
    pub beats_zero_baseline: bool,
    pub beats_shuffled_baseline: bool,
}

impl RecoveryReport {
    pub fn passed(&self) -> bool {
        self.beats_zero_baseline && self.beats_shuffled_baseline
    }
}

pub fn recovery_report(true_g: &[f64], fit: &FitResult, shuffled: &FitResult) -> Result<RecoveryReport> {
    for (name, other) in [("fit", fit.gaps()), ("shuffled fit", shuffled.gaps())] {
        if other.len() != true_g.len() {
            return Err(RegimeError::Shape(format!(
                "{name} has {} turns, truth has {}",
                other.len(),
                true_g.len()
            )));
        }
    }
    let correlation = pearson(true_g, fit.gaps());
    let rmse_fit = rmse(true_g, fit.gaps());
    let rmse_zeros = rmse(true_g, &vec![0.0; true_g.len()]);
    let correlation_shuffled = pearson(true_g, shuffled.gaps());
    Ok(RecoveryReport {
        correlation,
        rmse: rmse_fit,
        rmse_zeros,
        correlation_shuffled,
        beats_zero_baseline: rmse_fit < rmse_zeros,
        beats_shuffled_baseline: correlation > correlation_shuffled,
    })
}
