//! Far-field double-slit patterns at the signal screen.
//!
//! Every pattern is a member of one family,
//!
//! ```text
//! I_V(x) = sinc²(θa) · (1 + V·cos 2θd),   θa = π a x / (λ f₀),  θd = π d x / (λ f₀)
//! ```
//!
//! with fringe visibility `V ∈ [0, 1]`. Since `cos²θ = (1 + cos 2θ)/2`, full
//! two-slit interference `sinc²·cos²θd` is `I_1 / 2`, the bare single-slit
//! envelope is `I_0`, and the equal mixture of the two,
//! `sinc²·(1 + cos²θd)`, is `(3/2)·I_{1/3}`. Only the shape matters; the
//! absolute scale of an intensity is meaningless.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes in the tabulated density. Odd, so that x = 0 is a node.
pub const PDF_NODES: usize = 16_385;

/// Screen extent in units of the first envelope null `λf₀/a`.
pub const DEFAULT_SCREEN_LOBES: f64 = 3.0;

/// Slit geometry and collimating lens. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalConfig {
    pub slit_width: f64,
    pub slit_separation: f64,
    pub wavelength: f64,
    pub focal_length: f64,
}

impl OpticalConfig {
    pub fn new(
        slit_width: f64,
        slit_separation: f64,
        wavelength: f64,
        focal_length: f64,
    ) -> Result<Self> {
        let cfg = Self {
            slit_width,
            slit_separation,
            wavelength,
            focal_length,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("slit_width_a", self.slit_width),
            ("slit_separation_d", self.slit_separation),
            ("wavelength", self.wavelength),
            ("focal_length_f0", self.focal_length),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and > 0 (got {v})"
                )));
            }
        }
        if self.slit_separation < self.slit_width {
            return Err(Error::invalid("slit_separation_d must be ≥ slit_width_a"));
        }
        Ok(())
    }

    /// `λf₀`, the length scale that converts slit dimensions into screen positions.
    pub fn scale(&self) -> f64 {
        self.wavelength * self.focal_length
    }

    /// First zero of the single-slit envelope, `λf₀/a`.
    pub fn envelope_null(&self) -> f64 {
        self.scale() / self.slit_width
    }

    /// Distance between neighbouring interference maxima, `λf₀/d`.
    pub fn fringe_period(&self) -> f64 {
        self.scale() / self.slit_separation
    }
}

/// The screen at D₀: `[-x_max, x_max]` split into `n_bins` equal bins.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreenConfig {
    pub x_max: f64,
    pub n_bins: usize,
}

impl ScreenConfig {
    pub fn new(x_max: f64, n_bins: usize) -> Result<Self> {
        let s = Self { x_max, n_bins };
        s.validate()?;
        Ok(s)
    }

    /// Screen spanning three envelope lobes on each side.
    pub fn for_optics(cfg: &OpticalConfig, n_bins: usize) -> Result<Self> {
        Self::new(DEFAULT_SCREEN_LOBES * cfg.envelope_null(), n_bins)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return Err(Error::invalid(format!(
                "x_max must be finite and > 0 (got {})",
                self.x_max
            )));
        }
        if self.n_bins < 2 {
            return Err(Error::invalid(format!(
                "n_bins must be ≥ 2 (got {})",
                self.n_bins
            )));
        }
        Ok(())
    }

    pub fn bin_width(&self) -> f64 {
        2.0 * self.x_max / self.n_bins as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        (-self.x_max..=self.x_max).contains(&x)
    }
}

/// Which D₀ pattern to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    /// Two-slit interference, `2·sinc²·cos²θd` (the V = 1 member).
    Interference,
    /// Single-slit envelope only, `sinc²` (V = 0).
    Envelope,
    /// Equal mixture of the two, `sinc²·(1 + cos²θd)` (V = 1/3 up to 3/2).
    Mixed,
    /// General member `sinc²·(1 + V cos 2θd)`.
    Family(f64),
}

impl PatternKind {
    pub fn family(visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::invalid(format!(
                "fringe visibility must lie in [0, 1] (got {visibility})"
            )));
        }
        Ok(PatternKind::Family(visibility))
    }

    pub fn visibility(&self) -> f64 {
        match *self {
            PatternKind::Interference => 1.0,
            PatternKind::Envelope => 0.0,
            PatternKind::Mixed => 1.0 / 3.0,
            PatternKind::Family(v) => v,
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternKind::Interference => f.write_str("interference"),
            PatternKind::Envelope => f.write_str("envelope"),
            PatternKind::Mixed => f.write_str("mixed"),
            PatternKind::Family(v) => write!(f, "family:{v}"),
        }
    }
}

impl FromStr for PatternKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interference" => Ok(PatternKind::Interference),
            "envelope" => Ok(PatternKind::Envelope),
            "mixed" => Ok(PatternKind::Mixed),
            other => match other.strip_prefix("family:") {
                Some(v) => {
                    let v: f64 = v.parse().map_err(|_| {
                        Error::invalid(format!("bad visibility in pattern kind {s:?}"))
                    })?;
                    PatternKind::family(v)
                }
                None => Err(Error::invalid(format!(
                    "unknown pattern kind {s:?} (expected interference, envelope, mixed or family:V)"
                ))),
            },
        }
    }
}

/// `sin(u)/u`, with the removable singularity filled by its series.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Envelope and fringe phases `(θa, θd)` at screen position `x`.
pub fn fringe_phases(x: f64, cfg: &OpticalConfig) -> (f64, f64) {
    let k = PI * x / cfg.scale();
    (k * cfg.slit_width, k * cfg.slit_separation)
}

/// Unnormalized intensity of `kind` at `x`.
pub fn pattern_value(x: f64, kind: PatternKind, cfg: &OpticalConfig) -> f64 {
    let (theta_a, theta_d) = fringe_phases(x, cfg);
    let envelope = sinc(theta_a).powi(2);
    match kind {
        PatternKind::Interference => 2.0 * envelope * theta_d.cos().powi(2),
        PatternKind::Envelope => envelope,
        PatternKind::Mixed => envelope * (1.0 + theta_d.cos().powi(2)),
        PatternKind::Family(v) => envelope * (1.0 + v * (2.0 * theta_d).cos()),
    }
}

/// A pattern tabulated on a symmetric grid and normalized to unit area.
///
/// The cumulative table is the running trapezoidal integral, so the CDF is
/// piecewise linear between nodes and sampling inverts it exactly.
#[derive(Debug, Clone)]
pub struct PatternPdf {
    kind: PatternKind,
    x_max: f64,
    raw_integral: f64,
    nodes: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl PatternPdf {
    pub fn new(kind: PatternKind, cfg: &OpticalConfig, screen: &ScreenConfig) -> Result<Self> {
        Self::with_nodes(kind, cfg, screen, PDF_NODES)
    }

    /// As [`PatternPdf::new`] with an explicit grid size (odd, ≥ 4097).
    pub fn with_nodes(
        kind: PatternKind,
        cfg: &OpticalConfig,
        screen: &ScreenConfig,
        n_nodes: usize,
    ) -> Result<Self> {
        cfg.validate()?;
        screen.validate()?;
        if n_nodes < 4097 || n_nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "pdf grid needs an odd node count ≥ 4097 (got {n_nodes})"
            )));
        }
        let x_max = screen.x_max;
        let half = n_nodes / 2;

        // Build the non-negative half and mirror it so that evenness is exact.
        let mut nodes = vec![0.0; n_nodes];
        let mut density = vec![0.0; n_nodes];
        for i in 0..=half {
            let x = x_max * (i as f64 / half as f64);
            let f = pattern_value(x, kind, cfg).max(0.0);
            nodes[half + i] = x;
            nodes[half - i] = -x;
            density[half + i] = f;
            density[half - i] = f;
        }

        let mut cdf = Vec::with_capacity(n_nodes);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..n_nodes {
            acc += 0.5 * (density[i - 1] + density[i]) * (nodes[i] - nodes[i - 1]);
            cdf.push(acc);
        }
        let integral = acc;
        if integral.is_nan() || integral < 1e-300 {
            return Err(Error::DegeneratePattern { integral });
        }
        for f in &mut density {
            *f /= integral;
        }
        for c in &mut cdf {
            *c /= integral;
        }
        cdf[n_nodes - 1] = 1.0;

        Ok(Self {
            kind,
            x_max,
            raw_integral: integral,
            nodes,
            density,
            cdf,
        })
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Trapezoidal integral of the unnormalized pattern over the screen.
    pub fn raw_integral(&self) -> f64 {
        self.raw_integral
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Trapezoidal integral of the tabulated density.
    pub fn integral(&self) -> f64 {
        self.nodes
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, f)| 0.5 * (f[0] + f[1]) * (x[1] - x[0]))
            .sum()
    }

    fn cell(&self, x: f64) -> usize {
        let j = self.nodes.partition_point(|&n| n <= x);
        j.saturating_sub(1).min(self.nodes.len() - 2)
    }

    /// Density at `x`, linearly interpolated; zero off the screen.
    pub fn density_at(&self, x: f64) -> f64 {
        if !(-self.x_max..=self.x_max).contains(&x) {
            return 0.0;
        }
        let j = self.cell(x);
        let (x0, x1) = (self.nodes[j], self.nodes[j + 1]);
        let t = (x - x0) / (x1 - x0);
        self.density[j] + t * (self.density[j + 1] - self.density[j])
    }

    /// CDF of the distribution that [`PatternPdf::sample`] draws from.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x <= -self.x_max {
            return 0.0;
        }
        if x >= self.x_max {
            return 1.0;
        }
        let j = self.cell(x);
        let (x0, x1) = (self.nodes[j], self.nodes[j + 1]);
        let t = (x - x0) / (x1 - x0);
        self.cdf[j] + t * (self.cdf[j + 1] - self.cdf[j])
    }

    /// Maps a uniform variate `u ∈ [0, 1)` to a screen position.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let j = self
            .cdf
            .partition_point(|&c| c <= u)
            .saturating_sub(1)
            .min(self.cdf.len() - 2);
        let (c0, c1) = (self.cdf[j], self.cdf[j + 1]);
        let (x0, x1) = (self.nodes[j], self.nodes[j + 1]);
        let x = if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        };
        x.clamp(-self.x_max, self.x_max)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.gen::<f64>())
    }
}
