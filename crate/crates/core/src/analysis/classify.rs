use serde::{Deserialize, Serialize};

use super::fit::check_positions;
use super::likelihood::{BinnedLikelihood, FamilyNorm, UnbinnedLikelihood, VisibilityLikelihood};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, ScreenConfig};

/// Visibility of the equal mixture produced by a collapsing D₁.
pub const COLLAPSED_VISIBILITY: f64 = 1.0 / 3.0;
/// Visibility when D₁ leaves the pair intact.
pub const INTACT_VISIBILITY: f64 = 1.0;

/// `ln 100`: a decisive likelihood ratio.
pub fn default_llr_threshold() -> f64 {
    100f64.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Collapsed,
    Intact,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub decision: Decision,
    /// `ln L(V = 1/3) − ln L(V = 1)`.
    pub log_likelihood_ratio: f64,
    pub threshold_used: f64,
}

impl ClassificationResult {
    pub fn from_llr(log_likelihood_ratio: f64, threshold_used: f64) -> Self {
        let decision = if log_likelihood_ratio > threshold_used {
            Decision::Collapsed
        } else if log_likelihood_ratio < -threshold_used {
            Decision::Intact
        } else {
            Decision::Inconclusive
        };
        Self {
            decision,
            log_likelihood_ratio,
            threshold_used,
        }
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::invalid(format!(
            "llr threshold must be finite and ≥ 0 (got {threshold})"
        )));
    }
    Ok(())
}

/// Collapsed-versus-intact decision from any likelihood.
pub fn classify_likelihood(
    lik: &impl VisibilityLikelihood,
    threshold: f64,
) -> ClassificationResult {
    let llr = lik.log_likelihood(COLLAPSED_VISIBILITY) - lik.log_likelihood(INTACT_VISIBILITY);
    ClassificationResult::from_llr(llr, threshold)
}

/// Simple-versus-simple likelihood-ratio test between the collapsed (V = 1/3)
/// and intact (V = 1) patterns. Accepts any non-empty sample.
pub fn classify(
    positions: &[f64],
    cfg: &OpticalConfig,
    screen: &ScreenConfig,
    threshold: f64,
) -> Result<ClassificationResult> {
    cfg.validate()?;
    screen.validate()?;
    check_threshold(threshold)?;
    check_positions(positions, screen, 1)?;
    let lik = UnbinnedLikelihood::new(positions, cfg, FamilyNorm::new(cfg, screen));
    Ok(classify_likelihood(&lik, threshold))
}

pub fn classify_histogram(
    counts: &[u64],
    cfg: &OpticalConfig,
    screen: &ScreenConfig,
    threshold: f64,
) -> Result<ClassificationResult> {
    cfg.validate()?;
    screen.validate()?;
    check_threshold(threshold)?;
    if counts.len() != screen.n_bins {
        return Err(Error::invalid(format!(
            "histogram has {} bins, screen has {}",
            counts.len(),
            screen.n_bins
        )));
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::TooFewSamples { got: 0, need: 1 });
    }
    Ok(classify_likelihood(
        &BinnedLikelihood::new(counts, cfg, screen),
        threshold,
    ))
}
