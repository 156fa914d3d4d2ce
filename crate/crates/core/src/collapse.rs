//! Idler-side "detectors" at D₁ and the collapse decision.
//!
//! A device meeting the idler ends in one of three branches: the idler is
//! missed, it is absorbed and the device responds (amplifies, exposes a grain,
//! excites atoms), or it is absorbed and the response fails. Each branch
//! entangles some number of environment particles with the which-path
//! information. A [`CollapseModel`] turns that count into a collapse
//! probability.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied to counts before taking logs in the soft model.
pub const COUNT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Miss,
    Detect,
    Fail,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Miss => "miss",
            Branch::Detect => "detect",
            Branch::Fail => "fail",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "miss" => Ok(Branch::Miss),
            "detect" => Ok(Branch::Detect),
            "fail" => Ok(Branch::Fail),
            _ => Err(Error::invalid(format!("unknown branch {s:?}"))),
        }
    }
}

/// Squared amplitudes of the three device branches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    pub p_miss: f64,
    pub p_detect: f64,
    pub p_fail: f64,
}

impl Default for BranchState {
    /// An ideal device: every idler is absorbed and registered.
    fn default() -> Self {
        Self {
            p_miss: 0.0,
            p_detect: 1.0,
            p_fail: 0.0,
        }
    }
}

impl BranchState {
    pub fn new(p_miss: f64, p_detect: f64, p_fail: f64) -> Result<Self> {
        let b = Self {
            p_miss,
            p_detect,
            p_fail,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_miss", self.p_miss),
            ("p_detect", self.p_detect),
            ("p_fail", self.p_fail),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [0, 1] (got {p})"
                )));
            }
        }
        let total = self.p_miss + self.p_detect + self.p_fail;
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "branch probabilities must sum to 1 (got {total})"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectorVariant {
    /// The idler flies to a distant sink and never interacts.
    Sink,
    /// Cold atomic gas; absorption excites `atom_count` atoms.
    ColdAtom { atom_count: u64 },
    /// Photographic emulsion; one exposed grain entangles `grain_env_count` particles.
    Plate { grain_env_count: u64 },
    /// Photomultiplier with `stages` dynodes of gain `gain` each, electrons released into free space.
    Pmt { gain: f64, stages: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorSpec {
    pub variant: DetectorVariant,
    pub branches: BranchState,
}

impl DetectorSpec {
    pub fn new(variant: DetectorVariant, branches: BranchState) -> Result<Self> {
        let s = Self { variant, branches };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.branches.validate()?;
        match self.variant {
            DetectorVariant::Sink => Ok(()),
            DetectorVariant::ColdAtom { atom_count: 0 } => {
                Err(Error::invalid("atom_count must be ≥ 1"))
            }
            DetectorVariant::Plate { grain_env_count: 0 } => {
                Err(Error::invalid("grain_env_count must be ≥ 1"))
            }
            DetectorVariant::Pmt { gain, .. } if !(gain.is_finite() && gain >= 1.0) => Err(
                Error::invalid(format!("pmt_gain must be finite and ≥ 1 (got {gain})")),
            ),
            _ => Ok(()),
        }
    }

    /// Number of environment particles carrying the which-path information
    /// after the device ends in `branch`.
    pub fn environment_count(&self, branch: Branch) -> f64 {
        match (self.variant, branch) {
            (DetectorVariant::Sink, _) | (_, Branch::Miss) => 0.0,
            // Absorbed, but nothing downstream responded.
            (_, Branch::Fail) => 1.0,
            (DetectorVariant::ColdAtom { atom_count }, Branch::Detect) => atom_count as f64,
            (DetectorVariant::Plate { grain_env_count }, Branch::Detect) => grain_env_count as f64,
            (DetectorVariant::Pmt { gain, stages }, Branch::Detect) => gain.powi(stages as i32),
        }
    }
}

/// Collapse threshold `N_c` in environment particles, optionally smeared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseModel {
    pub threshold_nc: f64,
    /// Logistic width in `ln(count)`; zero gives a hard step.
    pub softness: f64,
}

impl CollapseModel {
    pub fn new(threshold_nc: f64, softness: f64) -> Result<Self> {
        let m = Self {
            threshold_nc,
            softness,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn hard(threshold_nc: f64) -> Result<Self> {
        Self::new(threshold_nc, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold_nc.is_finite() && self.threshold_nc >= 1.0) {
            return Err(Error::invalid(format!(
                "threshold_nc must be finite and ≥ 1 (got {})",
                self.threshold_nc
            )));
        }
        if !(self.softness.is_finite() && self.softness >= 0.0) {
            return Err(Error::invalid(format!(
                "softness must be finite and ≥ 0 (got {})",
                self.softness
            )));
        }
        Ok(())
    }

    pub fn collapse_probability(&self, count: f64) -> f64 {
        if self.softness == 0.0 {
            return if count >= self.threshold_nc { 1.0 } else { 0.0 };
        }
        let z = (count.max(COUNT_FLOOR) / self.threshold_nc).ln() / self.softness;
        1.0 / (1.0 + (-z).exp())
    }
}

/// Draws the device branch with the Born-rule weights of `branches`.
pub fn sample_branch<R: Rng + ?Sized>(branches: &BranchState, rng: &mut R) -> Branch {
    let u: f64 = rng.gen();
    if u < branches.p_miss {
        Branch::Miss
    } else if u < branches.p_miss + branches.p_detect || branches.p_fail == 0.0 {
        Branch::Detect
    } else {
        Branch::Fail
    }
}
