//! Monte Carlo sample-size calibration for telling two visibilities apart.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::likelihood::{FamilyNorm, UnbinnedLikelihood};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, PatternKind, PatternPdf, ScreenConfig};
use crate::simulator::{derive_seed, worker_rng};

pub const DEFAULT_TRIALS: usize = 400;
pub const MAX_SAMPLES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRequest {
    pub v_true: f64,
    pub v_alt: f64,
    pub error_rate: f64,
    /// Trials per hypothesis for each candidate sample size.
    pub trials: usize,
    pub seed: u64,
}

impl CalibrationRequest {
    pub fn new(v_true: f64, v_alt: f64, error_rate: f64, seed: u64) -> Self {
        Self {
            v_true,
            v_alt,
            error_rate,
            trials: DEFAULT_TRIALS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v_true", self.v_true), ("v_alt", self.v_alt)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1] (got {v})"
                )));
            }
        }
        if self.v_true == self.v_alt {
            return Err(Error::invalid("v_true and v_alt must differ"));
        }
        if !(self.error_rate > 0.0 && self.error_rate < 0.5) {
            return Err(Error::invalid(format!(
                "error_rate must lie in (0, 0.5) (got {})",
                self.error_rate
            )));
        }
        if self.trials < DEFAULT_TRIALS {
            return Err(Error::invalid(format!(
                "at least {DEFAULT_TRIALS} trials per candidate are required (got {})",
                self.trials
            )));
        }
        Ok(())
    }

    /// Symmetric decision threshold `ln((1 − α)/α)`.
    pub fn threshold(&self) -> f64 {
        ((1.0 - self.error_rate) / self.error_rate).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationStep {
    pub n: u64,
    pub error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub request: CalibrationRequest,
    pub threshold: f64,
    pub n_required: u64,
    /// Every candidate size evaluated, in evaluation order.
    pub schedule: Vec<CalibrationStep>,
}

struct Hypotheses<'a> {
    cfg: &'a OpticalConfig,
    norm: FamilyNorm,
    pdf_true: PatternPdf,
    pdf_alt: PatternPdf,
}

/// Misclassification rate at sample size `n`: the worse of the two
/// hypotheses, with an inconclusive outcome counted as an error.
fn error_rate(h: &Hypotheses<'_>, req: &CalibrationRequest, n: u64) -> f64 {
    let seed = derive_seed(req.seed, n);
    let threshold = req.threshold();
    let outcomes: Vec<bool> = (0..2 * req.trials)
        .into_par_iter()
        .map(|trial| {
            let from_alt = trial >= req.trials;
            let pdf = if from_alt { &h.pdf_alt } else { &h.pdf_true };
            let mut rng = worker_rng(seed, trial as u64);
            let xs: Vec<f64> = (0..n).map(|_| pdf.sample(&mut rng)).collect();
            let lik = UnbinnedLikelihood::new(&xs, h.cfg, h.norm);
            let nf = n as f64;
            let llr = (lik.fringe_term(req.v_alt) - nf * h.norm.at(req.v_alt).ln())
                - (lik.fringe_term(req.v_true) - nf * h.norm.at(req.v_true).ln());
            if from_alt {
                llr > threshold
            } else {
                llr < -threshold
            }
        })
        .collect();
    let (under_true, under_alt) = outcomes.split_at(req.trials);
    let rate = |o: &[bool]| o.iter().filter(|ok| !**ok).count() as f64 / o.len() as f64;
    rate(under_true).max(rate(under_alt))
}

/// Smallest sample size whose Monte Carlo misclassification rate is at most
/// `req.error_rate`, found by doubling and then bisection.
pub fn min_samples(
    req: &CalibrationRequest,
    cfg: &OpticalConfig,
    screen: &ScreenConfig,
) -> Result<Calibration> {
    req.validate()?;
    cfg.validate()?;
    screen.validate()?;
    let h = Hypotheses {
        cfg,
        norm: FamilyNorm::new(cfg, screen),
        pdf_true: PatternPdf::new(PatternKind::Family(req.v_true), cfg, screen)?,
        pdf_alt: PatternPdf::new(PatternKind::Family(req.v_alt), cfg, screen)?,
    };
    let mut schedule = Vec::new();
    let mut eval = |n: u64| {
        let r = error_rate(&h, req, n);
        schedule.push(CalibrationStep { n, error_rate: r });
        r <= req.error_rate
    };

    let mut hi = 1;
    while !eval(hi) {
        hi *= 2;
        if hi > MAX_SAMPLES {
            return Err(Error::NonConvergent { limit: MAX_SAMPLES });
        }
    }
    // `lo` failed (or is zero), `hi` passed.
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Calibration {
        request: *req,
        threshold: req.threshold(),
        n_required: hi,
        schedule,
    })
}
