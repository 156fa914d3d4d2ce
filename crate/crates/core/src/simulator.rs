//! Per-pump-photon Monte Carlo at the signal screen D₀.
//!
//! Each event draws a device branch at D₁, decides whether the which-path
//! record collapses the pair, draws which detector fires first, and places the
//! signal photon on the screen. Only a collapsed pair whose idler is caught
//! first loses its fringes; every other event shows full two-slit
//! interference.
//!
//! How the two detection orders combine for collapsed pairs is set by
//! [`OrderWeighting`]. Under the default, the D₀-first pattern `sinc²·cos²θd`
//! and the D₁-first pattern `sinc²` are added with one common constant, so
//! equal order probabilities give `sinc²·(1 + cos²θd)`, fringe visibility 1/3.
//! Because `sinc²·cos²θd` carries about half the area of `sinc²`, a collapsed
//! photon then lands in the fringed pattern about a third of the time. The
//! alternative gives every photon the order probabilities directly, which for
//! a 50/50 split yields visibility 1/2.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collapse::{sample_branch, Branch, CollapseModel, DetectorSpec};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, PatternKind, PatternPdf, ScreenConfig};

pub const DEFAULT_EVENT_CAP: u64 = 10_000_000;

/// How the two detection-order patterns of a collapsed pair are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderWeighting {
    /// Intensities `p₀·sinc²cos²θd + p₁·sinc²` with a shared constant.
    #[default]
    EqualPeak,
    /// Each collapsed photon takes the D₁-first pattern with probability `p₁`.
    PerPhoton,
}

impl std::str::FromStr for OrderWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_peak" => Ok(OrderWeighting::EqualPeak),
            "per_photon" => Ok(OrderWeighting::PerPhoton),
            _ => Err(Error::invalid(format!(
                "order_weighting must be equal_peak or per_photon (got {s:?})"
            ))),
        }
    }
}

/// Probability that the idler reaches D₁ before the signal reaches D₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingModel {
    pub p_d1_first: f64,
    pub weighting: OrderWeighting,
}

impl Default for TimingModel {
    /// Matched optical paths: either detector is equally likely to fire first.
    fn default() -> Self {
        Self {
            p_d1_first: 0.5,
            weighting: OrderWeighting::EqualPeak,
        }
    }
}

impl TimingModel {
    pub fn new(p_d1_first: f64) -> Result<Self> {
        let t = Self {
            p_d1_first,
            weighting: OrderWeighting::default(),
        };
        t.validate()?;
        Ok(t)
    }

    pub fn with_weighting(mut self, weighting: OrderWeighting) -> Self {
        self.weighting = weighting;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_d1_first) {
            return Err(Error::invalid(format!(
                "p_d1_first must lie in [0, 1] (got {})",
                self.p_d1_first
            )));
        }
        Ok(())
    }
}

/// Everything that defines the physics of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub optics: OpticalConfig,
    pub screen: ScreenConfig,
    pub detector: DetectorSpec,
    pub collapse: CollapseModel,
    pub timing: TimingModel,
}

impl Experiment {
    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        self.screen.validate()?;
        self.detector.validate()?;
        self.collapse.validate()?;
        self.timing.validate()
    }

    /// Short hex digest of the canonical JSON form of the experiment.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("experiment serializes");
        let hash = Sha256::digest(&json);
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// The two screen densities an event can be drawn from.
#[derive(Debug, Clone)]
pub struct PatternSet {
    pub fringes: PatternPdf,
    pub envelope: PatternPdf,
}

impl PatternSet {
    pub fn new(optics: &OpticalConfig, screen: &ScreenConfig) -> Result<Self> {
        Ok(Self {
            fringes: PatternPdf::new(PatternKind::Family(1.0), optics, screen)?,
            envelope: PatternPdf::new(PatternKind::Family(0.0), optics, screen)?,
        })
    }

    /// Probability that a collapsed pair shows the D₁-first (envelope) pattern.
    pub fn envelope_weight(&self, timing: &TimingModel) -> f64 {
        let p1 = timing.p_d1_first;
        match timing.weighting {
            OrderWeighting::PerPhoton => p1,
            OrderWeighting::EqualPeak => {
                // Family(1) is 2·sinc²cos²θd; the D₀-first intensity is half of it.
                let fringe_area = 0.5 * self.fringes.raw_integral();
                let envelope_area = self.envelope.raw_integral();
                let num = p1 * envelope_area;
                let den = num + (1.0 - p1) * fringe_area;
                if den > 0.0 {
                    num / den
                } else {
                    p1
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_index: u64,
    pub branch: Branch,
    pub d1_first: bool,
    pub collapsed: bool,
    pub x_position: f64,
}

/// Event counts per screen bin. Bin `i` covers `[-x_max + i·w, -x_max + (i+1)·w)`;
/// `x = +x_max` belongs to the last bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub x_max: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(screen: &ScreenConfig) -> Self {
        Self {
            x_max: screen.x_max,
            counts: vec![0; screen.n_bins],
        }
    }

    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.x_max / self.n_bins() as f64
    }

    pub fn bin_index(&self, x: f64) -> Option<usize> {
        if !(-self.x_max..=self.x_max).contains(&x) {
            return None;
        }
        let i = ((x + self.x_max) / self.bin_width()).floor() as usize;
        Some(i.min(self.n_bins() - 1))
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        let n = self.n_bins();
        (0..=n)
            .map(|i| self.x_max * (2.0 * i as f64 / n as f64 - 1.0))
            .collect()
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let n = self.n_bins();
        (0..n)
            .map(|i| self.x_max * ((2 * i + 1) as f64 / n as f64 - 1.0))
            .collect()
    }

    pub fn add(&mut self, x: f64) {
        if let Some(i) = self.bin_index(x) {
            self.counts[i] += 1;
        }
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Simulates one pump photon.
pub fn simulate_event<R: Rng + ?Sized>(
    exp: &Experiment,
    patterns: &PatternSet,
    event_index: u64,
    rng: &mut R,
) -> EventRecord {
    let branch = sample_branch(&exp.detector.branches, rng);
    let count = exp.detector.environment_count(branch);
    // No environment particle ever saw the which-path information.
    let collapsed = if count > 0.0 {
        let p = exp.collapse.collapse_probability(count);
        if p >= 1.0 {
            true
        } else if p <= 0.0 {
            false
        } else {
            rng.gen::<f64>() < p
        }
    } else {
        false
    };
    let p_d1_first = if collapsed {
        patterns.envelope_weight(&exp.timing)
    } else {
        exp.timing.p_d1_first
    };
    let d1_first = rng.gen::<f64>() < p_d1_first;
    let pdf = if collapsed && d1_first {
        &patterns.envelope
    } else {
        &patterns.fringes
    };
    EventRecord {
        event_index,
        branch,
        d1_first,
        collapsed,
        x_position: pdf.sample(rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub n_events: u64,
    pub seed: u64,
    pub n_workers: usize,
    /// Events with index below the cap are kept individually.
    pub event_cap: u64,
}

impl RunOptions {
    pub fn new(n_events: u64, seed: u64) -> Self {
        Self {
            n_events,
            seed,
            n_workers: 1,
            event_cap: DEFAULT_EVENT_CAP,
        }
    }

    pub fn workers(mut self, n_workers: usize) -> Self {
        self.n_workers = n_workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(Error::invalid("n_events must be ≥ 1"));
        }
        if self.n_workers == 0 {
            return Err(Error::invalid("n_workers must be ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub events: Vec<EventRecord>,
    pub histogram: Histogram,
    pub n_events: u64,
    pub seed: u64,
    pub n_workers: usize,
    pub config_digest: String,
}

impl RunResult {
    pub fn positions(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.x_position).collect()
    }
}

/// RNG for `worker` under `seed`: one ChaCha key, one stream per worker.
pub fn worker_rng(seed: u64, worker: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker);
    rng
}

/// Mixes a tag into a seed (SplitMix64 finalizer) for independent sub-runs.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Contiguous event-index ranges, one per worker, sizes differing by at most one.
pub fn partition(n_events: u64, n_workers: usize) -> Vec<Range<u64>> {
    let w = n_workers as u64;
    let (base, extra) = (n_events / w, n_events % w);
    let mut start = 0;
    (0..w)
        .map(|i| {
            let len = base + u64::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

struct WorkerOutput {
    events: Vec<EventRecord>,
    histogram: Histogram,
}

fn run_worker(
    exp: &Experiment,
    patterns: &PatternSet,
    opts: &RunOptions,
    worker: usize,
    range: Range<u64>,
) -> WorkerOutput {
    let mut rng = worker_rng(opts.seed, worker as u64);
    let mut histogram = Histogram::new(&exp.screen);
    let kept = range.start.min(opts.event_cap)..range.end.min(opts.event_cap);
    let mut events = Vec::with_capacity((kept.end - kept.start) as usize);
    for i in range {
        let ev = simulate_event(exp, patterns, i, &mut rng);
        histogram.add(ev.x_position);
        if i < opts.event_cap {
            events.push(ev);
        }
    }
    WorkerOutput { events, histogram }
}

pub fn run_simulation(exp: &Experiment, opts: &RunOptions) -> Result<RunResult> {
    exp.validate()?;
    opts.validate()?;
    let patterns = PatternSet::new(&exp.optics, &exp.screen)?;
    run_with_patterns(exp, &patterns, opts)
}

/// As [`run_simulation`] with densities already tabulated for `exp`.
pub fn run_with_patterns(
    exp: &Experiment,
    patterns: &PatternSet,
    opts: &RunOptions,
) -> Result<RunResult> {
    opts.validate()?;
    let ranges = partition(opts.n_events, opts.n_workers);
    let outputs: Vec<WorkerOutput> = ranges
        .into_par_iter()
        .enumerate()
        .map(|(w, r)| run_worker(exp, patterns, opts, w, r))
        .collect();

    let mut histogram = Histogram::new(&exp.screen);
    let mut events = Vec::with_capacity(opts.n_events.min(opts.event_cap) as usize);
    for out in outputs {
        histogram.merge(&out.histogram);
        events.extend(out.events);
    }
    Ok(RunResult {
        events,
        histogram,
        n_events: opts.n_events,
        seed: opts.seed,
        n_workers: opts.n_workers,
        config_digest: exp.digest(),
    })
}
