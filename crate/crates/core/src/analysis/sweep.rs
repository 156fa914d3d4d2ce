//! PMT stage sweep: swap in photomultipliers with more and more dynodes and
//! find the first one whose presence at D₁ washes out the fringes at D₀.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_likelihood, Decision};
use super::fit::{check_positions, maximize, PatternFit, MIN_FIT_SAMPLES};
use super::likelihood::{FamilyNorm, UnbinnedLikelihood};
use crate::collapse::{Branch, BranchState, CollapseModel, DetectorSpec, DetectorVariant};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, ScreenConfig};
use crate::simulator::{
    derive_seed, run_with_patterns, Experiment, PatternSet, RunOptions, TimingModel,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub gain: f64,
    pub stages: RangeInclusive<u32>,
    pub ground_truth: CollapseModel,
    pub branches: BranchState,
    pub n_events_per_stage: u64,
    pub seed: u64,
    pub n_workers: usize,
    pub llr_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stages: u32,
    pub environment_count: f64,
    pub seed: u64,
    pub fit: PatternFit,
    pub log_likelihood_ratio: f64,
    pub decision: Decision,
}

/// Half-open interval `(low, high]` that must contain `N_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NcBracket {
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub gain: f64,
    pub records: Vec<StageRecord>,
    pub inferred_stage_threshold: Option<u32>,
    pub inferred_nc_bracket: Option<NcBracket>,
}

impl SweepResult {
    /// No stage classified collapsed precedes one classified intact.
    pub fn is_monotone(&self) -> bool {
        let mut seen_collapse = false;
        for r in &self.records {
            match r.decision {
                Decision::Collapsed => seen_collapse = true,
                Decision::Intact if seen_collapse => return false,
                _ => {}
            }
        }
        true
    }
}

pub fn stage_sweep(
    plan: &SweepPlan,
    optics: &OpticalConfig,
    screen: &ScreenConfig,
    timing: &TimingModel,
) -> Result<SweepResult> {
    if !(plan.gain.is_finite() && plan.gain > 1.0) {
        return Err(Error::invalid(format!(
            "sweep needs pmt_gain > 1 (got {})",
            plan.gain
        )));
    }
    if plan.stages.is_empty() {
        return Err(Error::invalid("stage range is empty"));
    }
    if plan.n_events_per_stage < MIN_FIT_SAMPLES as u64 {
        return Err(Error::TooFewSamples {
            got: plan.n_events_per_stage as usize,
            need: MIN_FIT_SAMPLES,
        });
    }
    let base = Experiment {
        optics: *optics,
        screen: *screen,
        detector: DetectorSpec::new(
            DetectorVariant::Pmt {
                gain: plan.gain,
                stages: *plan.stages.start(),
            },
            plan.branches,
        )?,
        collapse: plan.ground_truth,
        timing: *timing,
    };
    base.validate()?;
    let patterns = PatternSet::new(optics, screen)?;
    let norm = FamilyNorm::new(optics, screen);

    let records = plan
        .stages
        .clone()
        .into_par_iter()
        .map(|k| {
            let mut exp = base;
            exp.detector.variant = DetectorVariant::Pmt {
                gain: plan.gain,
                stages: k,
            };
            let seed = derive_seed(plan.seed, u64::from(k));
            let opts = RunOptions {
                n_events: plan.n_events_per_stage,
                seed,
                n_workers: plan.n_workers,
                event_cap: plan.n_events_per_stage,
            };
            let run = run_with_patterns(&exp, &patterns, &opts)?;
            let positions = run.positions();
            check_positions(&positions, screen, MIN_FIT_SAMPLES)?;
            let lik = UnbinnedLikelihood::new(&positions, optics, norm);
            let fit = maximize(&lik);
            let class = classify_likelihood(&lik, plan.llr_threshold);
            Ok(StageRecord {
                stages: k,
                environment_count: exp.detector.environment_count(Branch::Detect),
                seed,
                fit,
                log_likelihood_ratio: class.log_likelihood_ratio,
                decision: class.decision,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let inferred_stage_threshold = records
        .iter()
        .find(|r| r.decision == Decision::Collapsed)
        .map(|r| r.stages);
    let inferred_nc_bracket = inferred_stage_threshold.map(|k| NcBracket {
        low: plan.gain.powi(k as i32 - 1),
        high: plan.gain.powi(k as i32),
    });
    Ok(SweepResult {
        gain: plan.gain,
        records,
        inferred_stage_threshold,
        inferred_nc_bracket,
    })
}
