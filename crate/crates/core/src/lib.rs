//! Monte Carlo simulation and statistical analysis of a which-path collapse
//! experiment.
//!
//! A pump photon crosses a double slit and is down-converted into a signal
//! photon, which lands on the screen D₀, and an idler photon, which either
//! flies to a sink or meets a "detector" at D₁ (cold atoms, a photographic
//! plate, or a photomultiplier with a chosen number of dynode stages). If the
//! environment entangled with the which-path information exceeds a collapse
//! threshold and D₁ registers first, the signal photon shows only the
//! single-slit envelope; otherwise it shows two-slit fringes. Matched path
//! lengths make the two detection orders equally likely, so a collapsing D₁
//! leaves a pattern with fringe visibility 1/3.
//!
//! * [`optics`]: closed-form patterns, tabulated densities, sampling
//! * [`collapse`]: device branches, environment counts, collapse threshold
//! * [`simulator`]: per-event Monte Carlo with reproducible parallel streams
//! * [`analysis`]: visibility fits, classification, calibration, stage sweeps
//! * [`config`] and [`cli`]: the `qeraser` command-line tool

pub mod analysis;
pub mod cli;
pub mod collapse;
pub mod config;
pub mod error;
pub mod io;
pub mod optics;
pub mod simulator;

pub use error::{Error, Result};
