//! Fringe-visibility inference from D₀ screen data.
//!
//! Everything here is maximum likelihood over the one-parameter family
//! `sinc²θa · (1 + V cos 2θd)`: point estimates with profile intervals, a
//! likelihood-ratio test of the collapsed mixture (V = 1/3) against intact
//! interference (V = 1), Monte Carlo sample-size calibration, and the PMT
//! stage sweep. Decision thresholds are conventions of this tool.

mod calibrate;
mod classify;
mod fit;
mod likelihood;
mod sweep;

pub use calibrate::{
    min_samples, Calibration, CalibrationRequest, CalibrationStep, DEFAULT_TRIALS, MAX_SAMPLES,
};
pub use classify::{
    classify, classify_histogram, classify_likelihood, default_llr_threshold, ClassificationResult,
    Decision, COLLAPSED_VISIBILITY, INTACT_VISIBILITY,
};
pub use fit::{
    fit_histogram, fit_visibility, maximize, PatternFit, CI_DROP, COARSE_GRID_POINTS,
    MIN_FIT_SAMPLES, V_TOLERANCE,
};
pub use likelihood::{BinnedLikelihood, FamilyNorm, UnbinnedLikelihood, VisibilityLikelihood};
pub use sweep::{stage_sweep, NcBracket, StageRecord, SweepPlan, SweepResult};
