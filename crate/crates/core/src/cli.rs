//! The `qeraser` command-line tool.
//!
//! Exit codes: 0 on success, 1 on invalid input (arguments, configuration,
//! data files), 2 when a run fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    classify, classify_histogram, default_llr_threshold, fit_histogram, fit_visibility,
    min_samples, stage_sweep, Calibration, CalibrationRequest, ClassificationResult, PatternFit,
    SweepPlan, SweepResult, COLLAPSED_VISIBILITY, DEFAULT_TRIALS, INTACT_VISIBILITY,
};
use crate::collapse::DetectorVariant;
use crate::config::{parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::io::{self, TOOL_VERSION};
use crate::optics::{PatternKind, PatternPdf, ScreenConfig};
use crate::simulator::run_simulation;

const CONVENTION_NOTE: &str =
    "decision thresholds and confidence levels are conventions of this tool, not physical constants";

#[derive(Debug, Parser)]
#[command(
    name = "qeraser",
    version,
    about = "Which-path collapse experiment simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a normalized screen pattern as CSV
    Pattern {
        #[command(flatten)]
        common: Common,
        /// interference | envelope | mixed | family:V
        #[arg(long, value_parser = parse_kind)]
        kind: PatternKind,
    },
    /// Simulate events and write events, histogram and summary
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = default_llr_threshold())]
        llr_threshold: f64,
    },
    /// Fit and classify recorded screen data
    Analyze {
        #[command(flatten)]
        common: Common,
        /// Event CSV written by `simulate`
        #[arg(
            long,
            conflicts_with = "histogram",
            required_unless_present = "histogram"
        )]
        events: Option<PathBuf>,
        /// Histogram CSV written by `simulate`
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[arg(long, default_value_t = default_llr_threshold())]
        llr_threshold: f64,
    },
    /// Sweep PMT stage counts and locate the collapse threshold
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Inclusive stage range, e.g. 1..6
        #[arg(long, value_parser = parse_stages)]
        stages: (u32, u32),
        #[arg(long, default_value_t = default_llr_threshold())]
        llr_threshold: f64,
    },
    /// Estimate the sample size needed to tell two visibilities apart
    Calibrate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = INTACT_VISIBILITY)]
        v_true: f64,
        #[arg(long, default_value_t = COLLAPSED_VISIBILITY)]
        v_alt: f64,
        #[arg(long, default_value_t = 0.01)]
        error_rate: f64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
}

fn parse_kind(s: &str) -> std::result::Result<PatternKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_stages(s: &str) -> std::result::Result<(u32, u32), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("expected LO..HI, got {s:?}"))?;
    let lo: u32 = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad lower stage in {s:?}"))?;
    let hi: u32 = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad upper stage in {s:?}"))?;
    if lo > hi {
        return Err(format!("empty stage range {s:?}"));
    }
    Ok((lo, hi))
}

#[derive(Debug, Serialize)]
struct Metadata {
    tool: &'static str,
    seed: u64,
    n_events: u64,
    n_workers: usize,
    config_digest: String,
    note: &'static str,
}

impl Metadata {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            tool: TOOL_VERSION,
            seed: cfg.run.seed,
            n_events: cfg.run.n_events,
            n_workers: cfg.run.n_workers,
            config_digest: cfg.experiment().digest(),
            note: CONVENTION_NOTE,
        }
    }

    fn pairs(&self) -> Vec<(String, String)> {
        vec![
            ("tool".into(), self.tool.into()),
            ("seed".into(), self.seed.to_string()),
            ("n_events".into(), self.n_events.to_string()),
            ("n_workers".into(), self.n_workers.to_string()),
            ("config_digest".into(), self.config_digest.clone()),
        ]
    }
}

#[derive(Debug, Serialize)]
struct AnalysisReport {
    metadata: Metadata,
    source: String,
    fit: PatternFit,
    classification: ClassificationResult,
}

#[derive(Debug, Serialize)]
struct SimulationReport {
    metadata: Metadata,
    events_recorded: usize,
    fit_source: &'static str,
    fit: Option<PatternFit>,
    classification: Option<ClassificationResult>,
}

#[derive(Debug, Serialize)]
struct SweepReport {
    metadata: Metadata,
    llr_threshold: f64,
    #[serde(flatten)]
    sweep: SweepResult,
}

#[derive(Debug, Serialize)]
struct CalibrationReport {
    metadata: Metadata,
    #[serde(flatten)]
    calibration: Calibration,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn setup(common: &Common) -> Result<RunConfig> {
    let cfg = parse_config(&common.config)?;
    std::fs::create_dir_all(&common.out)?;
    Ok(cfg)
}

fn cmd_pattern(common: &Common, kind: PatternKind, out: &mut dyn Write) -> Result<()> {
    let cfg = setup(common)?;
    let pdf = PatternPdf::new(kind, &cfg.optics, &cfg.screen)?;
    let path = common.out.join("pattern.csv");
    let meta = Metadata::new(&cfg).pairs();
    io::save(&path, |w| io::write_pattern(w, &meta, &pdf, &cfg.optics))?;
    writeln!(
        out,
        "pattern {kind}: {} nodes over ±{:e} m -> {}",
        pdf.nodes().len(),
        pdf.x_max(),
        path.display()
    )?;
    Ok(())
}

fn cmd_simulate(common: &Common, llr_threshold: f64, out: &mut dyn Write) -> Result<()> {
    let cfg = setup(common)?;
    let run = run_simulation(&cfg.experiment(), &cfg.run)?;
    let meta = Metadata::new(&cfg);
    let pairs = meta.pairs();
    io::save(&common.out.join("events.csv"), |w| {
        io::write_events(w, &pairs, &run.events)
    })?;
    io::save(&common.out.join("histogram.csv"), |w| {
        io::write_histogram(w, &pairs, &run.histogram)
    })?;

    let all_recorded = run.events.len() as u64 == run.n_events;
    let (fit_source, fit, classification) = if all_recorded {
        let positions = run.positions();
        let fit = fit_visibility(&positions, &cfg.optics, &cfg.screen).ok();
        let class = classify(&positions, &cfg.optics, &cfg.screen, llr_threshold)?;
        ("events", fit, Some(class))
    } else {
        let counts = &run.histogram.counts;
        let fit = fit_histogram(counts, &cfg.optics, &cfg.screen).ok();
        let class = classify_histogram(counts, &cfg.optics, &cfg.screen, llr_threshold)?;
        ("histogram", fit, Some(class))
    };
    let report = SimulationReport {
        metadata: meta,
        events_recorded: run.events.len(),
        fit_source,
        fit,
        classification,
    };
    write_json(&common.out.join("summary.json"), &report)?;
    let v = fit.map_or("n/a".to_string(), |f| format!("{:.4}", f.v_hat));
    writeln!(
        out,
        "simulated {} events (seed {}, {} workers): v_hat = {v}, decision = {:?}",
        run.n_events,
        run.seed,
        run.n_workers,
        classification.map(|c| c.decision).expect("classified")
    )?;
    Ok(())
}

fn histogram_counts(path: &Path, screen: &ScreenConfig) -> Result<Vec<u64>> {
    let rows = io::read_histogram(path)?;
    if rows.len() != screen.n_bins {
        return Err(Error::invalid(format!(
            "{} has {} bins but the screen has {}",
            path.display(),
            rows.len(),
            screen.n_bins
        )));
    }
    let w = screen.bin_width();
    for (i, (center, _)) in rows.iter().enumerate() {
        let expected = -screen.x_max + (i as f64 + 0.5) * w;
        if (center - expected).abs() > 1e-6 * w {
            return Err(Error::invalid(format!(
                "{}: bin {i} centered at {center:e} m, expected {expected:e} m",
                path.display()
            )));
        }
    }
    Ok(rows.into_iter().map(|(_, n)| n).collect())
}

fn cmd_analyze(
    common: &Common,
    events: Option<&Path>,
    histogram: Option<&Path>,
    llr_threshold: f64,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = setup(common)?;
    let (source, fit, classification) = match (events, histogram) {
        (Some(path), _) => {
            let positions: Vec<f64> = io::read_events(path)?
                .iter()
                .map(|e| e.x_position)
                .collect();
            (
                format!("events:{}", path.display()),
                fit_visibility(&positions, &cfg.optics, &cfg.screen)?,
                classify(&positions, &cfg.optics, &cfg.screen, llr_threshold)?,
            )
        }
        (None, Some(path)) => {
            let counts = histogram_counts(path, &cfg.screen)?;
            (
                format!("histogram:{}", path.display()),
                fit_histogram(&counts, &cfg.optics, &cfg.screen)?,
                classify_histogram(&counts, &cfg.optics, &cfg.screen, llr_threshold)?,
            )
        }
        (None, None) => return Err(Error::invalid("analyze needs --events or --histogram")),
    };
    let report = AnalysisReport {
        metadata: Metadata::new(&cfg),
        source,
        fit,
        classification,
    };
    write_json(&common.out.join("analysis.json"), &report)?;
    writeln!(
        out,
        "analyzed {} samples: v_hat = {:.4} [{:.4}, {:.4}], llr = {:.3}, decision = {:?}",
        fit.n_samples,
        fit.v_hat,
        fit.ci_low,
        fit.ci_high,
        classification.log_likelihood_ratio,
        classification.decision
    )?;
    Ok(())
}

fn cmd_sweep(
    common: &Common,
    stages: (u32, u32),
    llr_threshold: f64,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = setup(common)?;
    let DetectorVariant::Pmt { gain, .. } = cfg.detector.variant else {
        return Err(Error::invalid("sweep requires detector.kind = \"pmt\""));
    };
    let plan = SweepPlan {
        gain,
        stages: stages.0..=stages.1,
        ground_truth: cfg.collapse,
        branches: cfg.detector.branches,
        n_events_per_stage: cfg.run.n_events,
        seed: cfg.run.seed,
        n_workers: cfg.run.n_workers,
        llr_threshold,
    };
    let sweep = stage_sweep(&plan, &cfg.optics, &cfg.screen, &cfg.timing)?;
    let line = match (sweep.inferred_stage_threshold, sweep.inferred_nc_bracket) {
        (Some(k), Some(b)) => format!("stage threshold {k}, N_c in ({}, {}]", b.low, b.high),
        _ => "no stage collapsed".to_string(),
    };
    write_json(
        &common.out.join("sweep.json"),
        &SweepReport {
            metadata: Metadata::new(&cfg),
            llr_threshold,
            sweep,
        },
    )?;
    writeln!(
        out,
        "sweep G = {gain}, stages {}..{}: {line}",
        stages.0, stages.1
    )?;
    Ok(())
}

fn cmd_calibrate(
    common: &Common,
    v_true: f64,
    v_alt: f64,
    error_rate: f64,
    trials: usize,
    out: &mut dyn Write,
) -> Result<()> {
    let cfg = setup(common)?;
    let mut req = CalibrationRequest::new(v_true, v_alt, error_rate, cfg.run.seed);
    req.trials = trials;
    let calibration = min_samples(&req, &cfg.optics, &cfg.screen)?;
    let n = calibration.n_required;
    write_json(
        &common.out.join("calibration.json"),
        &CalibrationReport {
            metadata: Metadata::new(&cfg),
            calibration,
        },
    )?;
    writeln!(
        out,
        "calibrate: n_required = {n} to separate V = {v_true} from V = {v_alt} at error rate {error_rate}"
    )?;
    Ok(())
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Pattern { common, kind } => cmd_pattern(common, *kind, out),
        Command::Simulate {
            common,
            llr_threshold,
        } => cmd_simulate(common, *llr_threshold, out),
        Command::Analyze {
            common,
            events,
            histogram,
            llr_threshold,
        } => cmd_analyze(
            common,
            events.as_deref(),
            histogram.as_deref(),
            *llr_threshold,
            out,
        ),
        Command::Sweep {
            common,
            stages,
            llr_threshold,
        } => cmd_sweep(common, *stages, *llr_threshold, out),
        Command::Calibrate {
            common,
            v_true,
            v_alt,
            error_rate,
            trials,
        } => cmd_calibrate(common, *v_true, *v_alt, *error_rate, *trials, out),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
