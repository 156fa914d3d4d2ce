//! Test oracles, written against the closed-form patterns and kept apart
//! from the library's tabulation, sampling and likelihood code.

#![allow(dead_code)]

use std::f64::consts::PI;

use qeraser::collapse::{BranchState, CollapseModel, DetectorSpec, DetectorVariant};
use qeraser::optics::{OpticalConfig, ScreenConfig};
use qeraser::simulator::{Experiment, TimingModel};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub fn optics() -> OpticalConfig {
    OpticalConfig::new(0.1e-3, 0.5e-3, 702.2e-9, 1.0).unwrap()
}

pub fn screen() -> ScreenConfig {
    ScreenConfig::for_optics(&optics(), 100).unwrap()
}

pub fn experiment(variant: DetectorVariant, threshold_nc: f64, p_d1_first: f64) -> Experiment {
    Experiment {
        optics: optics(),
        screen: screen(),
        detector: DetectorSpec::new(variant, BranchState::default()).unwrap(),
        collapse: CollapseModel::hard(threshold_nc).unwrap(),
        timing: TimingModel::new(p_d1_first).unwrap(),
    }
}

pub fn pmt(gain: f64, stages: u32) -> DetectorVariant {
    DetectorVariant::Pmt { gain, stages }
}

/// `sinc²(πax/λf₀)·(1 + V cos(2πdx/λf₀))`, evaluated from scratch.
pub fn family_density(x: f64, v: f64, o: &OpticalConfig) -> f64 {
    let u = PI * o.slit_width * x / (o.wavelength * o.focal_length);
    let s = if u == 0.0 { 1.0 } else { (u.sin() / u).powi(2) };
    s * (1.0 + v * (2.0 * PI * o.slit_separation * x / (o.wavelength * o.focal_length)).cos())
}

/// Composite 5-point Gauss–Legendre quadrature with `m` panels.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, m: usize) -> f64 {
    const NODES: [f64; 5] = [
        0.0,
        -0.538_469_310_105_683_1,
        0.538_469_310_105_683_1,
        -0.906_179_845_938_664,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / m as f64;
    (0..m)
        .map(|i| {
            let mid = a + (i as f64 + 0.5) * h;
            NODES
                .iter()
                .zip(WEIGHTS)
                .map(|(t, w)| w * f(mid + 0.5 * h * t))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Probability of each of `n_bins` equal bins over `[-x_max, x_max]` under Family(v).
pub fn bin_probabilities(v: f64, o: &OpticalConfig, x_max: f64, n_bins: usize) -> Vec<f64> {
    let w = 2.0 * x_max / n_bins as f64;
    let masses: Vec<f64> = (0..n_bins)
        .map(|i| {
            let lo = -x_max + i as f64 * w;
            gauss_legendre(|x| family_density(x, v, o), lo, lo + w, 64)
        })
        .collect();
    let total: f64 = masses.iter().sum();
    masses.into_iter().map(|m| m / total).collect()
}

pub fn bin_counts(xs: &[f64], x_max: f64, n_bins: usize) -> Vec<u64> {
    let w = 2.0 * x_max / n_bins as f64;
    let mut counts = vec![0; n_bins];
    for &x in xs {
        let i = (((x + x_max) / w).floor() as usize).min(n_bins - 1);
        counts[i] += 1;
    }
    counts
}

/// Pearson statistic with adjacent bins pooled until each expects ≥ 5 counts.
/// Returns `(statistic, degrees of freedom)`.
pub fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut cells = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        o += c as f64;
        e += p * n as f64;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let stat = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    (stat, cells.len() - 1)
}

pub fn chi_square_critical(df: usize, q: f64) -> f64 {
    ChiSquared::new(df as f64).unwrap().inverse_cdf(q)
}

/// Asymptotic Kolmogorov coefficient `c(α) = sqrt(-ln(α/2)/2)`.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// One-sample KS statistic of `u` against Uniform(0, 1).
pub fn ks_uniform(u: &[f64]) -> f64 {
    let mut u = u.to_vec();
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

pub fn ks_two_sample_critical(n: usize, m: usize, alpha: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    ks_coefficient(alpha) * ((n + m) / (n * m)).sqrt()
}
