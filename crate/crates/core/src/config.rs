//! Run configuration: a sectioned `key = value` file.
//!
//! ```toml
//! [optics]
//! a_m = 1.0e-4
//! d_m = 5.0e-4
//! lambda_m = 7.022e-7
//! f0_m = 1.0
//!
//! [screen]
//! n_bins = 100          # x_max_m defaults to 3·λf₀/a
//!
//! [detector]
//! kind = "pmt"          # sink | cold_atom | plate | pmt
//! pmt_gain = 3.0
//! pmt_stages = 5
//!
//! [collapse]
//! threshold_nc = 100.0  # softness defaults to 0
//!
//! [run]
//! n_events = 1000000
//! seed = 1
//! ```
//!
//! `[timing] p_d1_first` defaults to 0.5, `[timing] order_weighting` to
//! `"equal_peak"` (the other choice is `"per_photon"`), and `[branches]` to `(0, 1, 0)`;
//! `run.n_workers` defaults to 1 and `run.event_cap` to 10⁷. Unknown keys
//! are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::collapse::{BranchState, CollapseModel, DetectorSpec, DetectorVariant};
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, ScreenConfig};
use crate::simulator::{Experiment, OrderWeighting, RunOptions, TimingModel, DEFAULT_EVENT_CAP};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    optics: RawOptics,
    screen: RawScreen,
    #[serde(default)]
    timing: RawTiming,
    detector: RawDetector,
    collapse: RawCollapse,
    #[serde(default)]
    branches: Option<RawBranches>,
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOptics {
    a_m: f64,
    d_m: f64,
    lambda_m: f64,
    f0_m: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScreen {
    x_max_m: Option<f64>,
    n_bins: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTiming {
    p_d1_first: Option<f64>,
    order_weighting: Option<OrderWeighting>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetector {
    kind: String,
    atom_count: Option<u64>,
    grain_env_count: Option<u64>,
    pmt_gain: Option<f64>,
    pmt_stages: Option<u32>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollapse {
    threshold_nc: f64,
    softness: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranches {
    p_miss: f64,
    p_detect: f64,
    p_fail: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    n_events: u64,
    seed: u64,
    n_workers: Option<usize>,
    event_cap: Option<u64>,
}

/// A fully validated configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunConfig {
    pub optics: OpticalConfig,
    pub screen: ScreenConfig,
    pub timing: TimingModel,
    pub detector: DetectorSpec,
    pub collapse: CollapseModel,
    pub run: RunOptions,
}

impl RunConfig {
    pub fn experiment(&self) -> Experiment {
        Experiment {
            optics: self.optics,
            screen: self.screen,
            detector: self.detector,
            collapse: self.collapse,
            timing: self.timing,
        }
    }
}

fn detector_variant(raw: &RawDetector) -> Result<DetectorVariant> {
    let kind = raw.kind.as_str();
    let given = [
        ("atom_count", raw.atom_count.is_some()),
        ("grain_env_count", raw.grain_env_count.is_some()),
        ("pmt_gain", raw.pmt_gain.is_some()),
        ("pmt_stages", raw.pmt_stages.is_some()),
    ];
    let allowed: &[&str] = match kind {
        "sink" => &[],
        "cold_atom" => &["atom_count"],
        "plate" => &["grain_env_count"],
        "pmt" => &["pmt_gain", "pmt_stages"],
        _ => {
            return Err(Error::invalid(format!(
                "detector.kind must be one of sink, cold_atom, plate, pmt (got {kind:?})"
            )))
        }
    };
    if let Some((key, _)) = given.iter().find(|(k, set)| *set && !allowed.contains(k)) {
        return Err(Error::invalid(format!(
            "detector.{key} does not apply to detector.kind = {kind:?}"
        )));
    }
    let required = |key: &str| {
        Error::invalid(format!(
            "detector.{key} is required when detector.kind = {kind:?}"
        ))
    };
    Ok(match kind {
        "sink" => DetectorVariant::Sink,
        "cold_atom" => DetectorVariant::ColdAtom {
            atom_count: raw.atom_count.ok_or_else(|| required("atom_count"))?,
        },
        "plate" => DetectorVariant::Plate {
            grain_env_count: raw
                .grain_env_count
                .ok_or_else(|| required("grain_env_count"))?,
        },
        _ => DetectorVariant::Pmt {
            gain: raw.pmt_gain.ok_or_else(|| required("pmt_gain"))?,
            stages: raw.pmt_stages.ok_or_else(|| required("pmt_stages"))?,
        },
    })
}

impl TryFrom<RawConfig> for RunConfig {
    type Error = Error;

    fn try_from(raw: RawConfig) -> Result<Self> {
        let optics = OpticalConfig::new(
            raw.optics.a_m,
            raw.optics.d_m,
            raw.optics.lambda_m,
            raw.optics.f0_m,
        )?;
        let screen = match raw.screen.x_max_m {
            Some(x_max) => ScreenConfig::new(x_max, raw.screen.n_bins)?,
            None => ScreenConfig::for_optics(&optics, raw.screen.n_bins)?,
        };
        let timing = match raw.timing.p_d1_first {
            Some(p) => TimingModel::new(p)?,
            None => TimingModel::default(),
        }
        .with_weighting(raw.timing.order_weighting.unwrap_or_default());
        let branches = match raw.branches {
            Some(b) => BranchState::new(b.p_miss, b.p_detect, b.p_fail)?,
            None => BranchState::default(),
        };
        let detector = DetectorSpec::new(detector_variant(&raw.detector)?, branches)?;
        let collapse = CollapseModel::new(
            raw.collapse.threshold_nc,
            raw.collapse.softness.unwrap_or(0.0),
        )?;
        let run = RunOptions {
            n_events: raw.run.n_events,
            seed: raw.run.seed,
            n_workers: raw.run.n_workers.unwrap_or(1),
            event_cap: raw.run.event_cap.unwrap_or(DEFAULT_EVENT_CAP),
        };
        run.validate()?;
        Ok(Self {
            optics,
            screen,
            timing,
            detector,
            collapse,
            run,
        })
    }
}

/// Parses and validates configuration text; `origin` labels parse errors.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_owned(),
        message: e.to_string().trim_end().to_owned(),
    })?;
    RunConfig::try_from(raw)
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.to_owned(),
        message: e.to_string(),
    })?;
    parse_config_str(&text, path)
}
