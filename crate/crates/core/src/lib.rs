//! Three-regime behavioral model driven by an alignment–competence gap.
//!
//! The crate evaluates NP / FR / MN regime probabilities, their closed-form
//! sensitivities to the gap, reconstructs a latent gap trajectory from a
//! labeled dialogue corpus by MAP estimation under a random-walk prior, and
//! computes label-dynamics series over the corpus.

pub mod corpus;
pub mod error;
pub mod estimation;
pub mod format;
pub mod model;
mod precise;
pub mod report;
pub mod rng;
pub mod sensitivity;
pub mod synthesis;

pub use corpus::{
    cumulative_counts, dynamics, dynamics_csv, label_strip, load_corpus, sliding_proportions, Label,
    LabelCounts, LabelProportions, LabeledCorpus, LabeledTurn,
};
pub use error::{RegimeError, Result};
pub use estimation::{
    default_lambda_grid, fit_map, fit_map_from, lambda_sweep, lambda_sweep_cold, log_grid,
    neg_logpost, reconstruct_probs, select_lambda, trajectory_sensitivities, FitConfig, FitResult,
    ObjectiveTerms, OptimizerConfig, ParamHat, SweepResult,
};
pub use model::{
    capacity, latent_fr, logistic, mn_pressure, regime_probs, regime_probs_theoretical,
    regime_probs_unclamped, ModelParams, RegimeProbs, TheoreticalParams, DEFAULT_EPS_P,
};
pub use sensitivity::{
    curvature_check, derivs_wrt_gap, derivs_wrt_pressure, finite_diff_check, gradient_oracle,
    GradCheckReport, SensitivityBundle,
};
pub use synthesis::{
    recovery_report, sample_labels, sample_trajectory, shuffled_refit, synthesize, RecoveryReport,
    Scenario, SynthSpec, SyntheticCorpus,
};
