use serde::{Deserialize, Serialize};

use super::likelihood::{BinnedLikelihood, FamilyNorm, UnbinnedLikelihood, VisibilityLikelihood};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, ScreenConfig};

pub const MIN_FIT_SAMPLES: usize = 100;
pub const COARSE_GRID_POINTS: usize = 41;
pub const V_TOLERANCE: f64 = 1e-5;
/// Log-likelihood drop for a 95% one-parameter profile interval (χ²₁(0.95)/2).
pub const CI_DROP: f64 = 1.92;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximum-likelihood fringe visibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternFit {
    pub v_hat: f64,
    pub log_likelihood: f64,
    pub n_samples: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Whether the 41-point coarse scan showed a single peak.
    pub grid_unimodal: bool,
}

/// Golden-section maximum of `f` on `[lo, hi]`; ties keep the left part.
fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > V_TOLERANCE {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Point in `[inside, outside]` where `f` crosses `target`, with `f(inside) ≥ target > f(outside)`.
fn crossing(f: &impl Fn(f64) -> f64, target: f64, mut inside: f64, mut outside: f64) -> f64 {
    while (outside - inside).abs() > V_TOLERANCE {
        let mid = 0.5 * (inside + outside);
        if f(mid) >= target {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// Maximizes any visibility likelihood over `V ∈ [0, 1]`.
pub fn maximize(lik: &impl VisibilityLikelihood) -> PatternFit {
    let f = |v: f64| lik.log_likelihood(v);
    let step = 1.0 / (COARSE_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..COARSE_GRID_POINTS)
        .map(|i| f(i as f64 * step))
        .collect();

    let mut best = 0;
    for (i, &l) in grid.iter().enumerate() {
        if l > grid[best] {
            best = i;
        }
    }
    let peaks = (0..grid.len())
        .filter(|&i| {
            let left = i == 0 || grid[i] > grid[i - 1];
            let right = i + 1 == grid.len() || grid[i] >= grid[i + 1];
            left && right
        })
        .count();

    let lo = (best as f64 - 1.0).max(0.0) * step;
    let hi = ((best as f64 + 1.0) * step).min(1.0);
    let (mut v_hat, mut l_hat) = golden_max(&f, lo, hi);
    // The interior search never evaluates the bracket ends; a boundary optimum lives there.
    for v in [lo, hi] {
        let l = f(v);
        if l > l_hat || (l == l_hat && v < v_hat) {
            v_hat = v;
            l_hat = l;
        }
    }
    if grid[best] > l_hat {
        v_hat = best as f64 * step;
        l_hat = grid[best];
    }

    let target = l_hat - CI_DROP;
    let ci_low = if f(0.0) >= target {
        0.0
    } else {
        crossing(&f, target, v_hat, 0.0)
    };
    let ci_high = if f(1.0) >= target {
        1.0
    } else {
        crossing(&f, target, v_hat, 1.0)
    };

    PatternFit {
        v_hat,
        log_likelihood: l_hat,
        n_samples: lik.n_samples(),
        ci_low: ci_low.min(v_hat),
        ci_high: ci_high.max(v_hat),
        grid_unimodal: peaks == 1,
    }
}

pub(crate) fn check_positions(positions: &[f64], screen: &ScreenConfig, need: usize) -> Result<()> {
    if positions.len() < need {
        return Err(Error::TooFewSamples {
            got: positions.len(),
            need,
        });
    }
    if let Some(&x) = positions.iter().find(|x| !screen.contains(**x)) {
        return Err(Error::OutOfRangeSample {
            x,
            x_max: screen.x_max,
        });
    }
    Ok(())
}

/// Unbinned maximum-likelihood visibility of screen positions.
pub fn fit_visibility(
    positions: &[f64],
    cfg: &OpticalConfig,
    screen: &ScreenConfig,
) -> Result<PatternFit> {
    cfg.validate()?;
    screen.validate()?;
    check_positions(positions, screen, MIN_FIT_SAMPLES)?;
    let lik = UnbinnedLikelihood::new(positions, cfg, FamilyNorm::new(cfg, screen));
    Ok(maximize(&lik))
}

/// Visibility from per-bin counts on `screen`'s bins.
pub fn fit_histogram(
    counts: &[u64],
    cfg: &OpticalConfig,
    screen: &ScreenConfig,
) -> Result<PatternFit> {
    cfg.validate()?;
    screen.validate()?;
    if counts.len() != screen.n_bins {
        return Err(Error::invalid(format!(
            "histogram has {} bins, screen has {}",
            counts.len(),
            screen.n_bins
        )));
    }
    let total: u64 = counts.iter().sum();
    if total < MIN_FIT_SAMPLES as u64 {
        return Err(Error::TooFewSamples {
            got: total as usize,
            need: MIN_FIT_SAMPLES,
        });
    }
    Ok(maximize(&BinnedLikelihood::new(counts, cfg, screen)))
}
