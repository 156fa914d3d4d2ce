use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const A: f64 = 1.0e-4;
const D: f64 = 5.0e-4;
const LAMBDA: f64 = 7.022e-7;
const F0: f64 = 1.0;

fn config(detector: &str, extra: &str, run: &str) -> String {
    format!(
        "[optics]\na_m = {A:e}\nd_m = {D:e}\nlambda_m = {LAMBDA:e}\nf0_m = {F0:e}\n\n\
         [screen]\nn_bins = 100\n{extra}\n\n\
         [detector]\n{detector}\n\n\
         [collapse]\nthreshold_nc = 100.0\n\n\
         [run]\n{run}\n"
    )
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn qeraser(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeraser"))
        .args(args)
        .output()
        .unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn mixed_pattern_has_one_plus_cos_squared_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let x1 = LAMBDA * F0 / (2.0 * D);
    // Eight fringe quarter-periods across each half screen puts x1 on a grid node.
    let cfg = config(
        "kind = \"sink\"",
        &format!("x_max_m = {:e}", 8.0 * x1),
        "n_events = 1000\nseed = 1",
    );
    let cfg = write_config(dir.path(), "mixed.toml", &cfg);
    let out = dir.path().join("out");
    let o = qeraser(&[
        "pattern",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--kind",
        "mixed",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let text = std::fs::read_to_string(out.join("pattern.csv")).unwrap();
    assert!(text.starts_with("# kind=mixed"));
    assert!(text.contains("# seed=1\n") && text.contains("# config_digest="));
    let rows: Vec<(f64, f64)> = data_lines(&text)
        .iter()
        .map(|l| {
            let (x, f) = l.split_once(',').unwrap();
            (x.parse().unwrap(), f.parse().unwrap())
        })
        .collect();
    let at = |target: f64| {
        rows.iter()
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
            .copied()
            .unwrap()
    };
    let (x0, f0) = at(0.0);
    let (xm, fm) = at(x1);
    assert!(x0.abs() < 1e-15 && (xm - x1).abs() < 1e-12 * x1);
    let u = PI * A / (2.0 * D);
    let expected = 2.0 / (u.sin() / u).powi(2);
    assert!(
        (f0 / fm - expected).abs() < 1e-9 * expected,
        "{} vs {expected}",
        f0 / fm
    );
}

#[test]
fn sink_run_round_trips_through_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "kind = \"sink\"",
        "",
        "n_events = 20000\nseed = 42\nn_workers = 3",
    );
    let cfg = write_config(dir.path(), "sink.toml", &cfg);
    let out = dir.path().join("run");
    let o = qeraser(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("decision = Intact"));

    for name in ["events.csv", "histogram.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        for key in ["tool", "seed", "n_events", "n_workers", "config_digest"] {
            assert!(text.contains(&format!("# {key}=")), "{name} lacks {key}");
        }
    }
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["fit_source"], "events");
    assert_eq!(summary["classification"]["decision"], "intact");

    let events = out.join("events.csv");
    let o = qeraser(&[
        "analyze",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--events",
        path_str(&events),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let analysis = read_json(&out.join("analysis.json"));
    assert_eq!(analysis["fit"], summary["fit"]);
    assert_eq!(analysis["classification"], summary["classification"]);

    let histogram = out.join("histogram.csv");
    let o = qeraser(&[
        "analyze",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--histogram",
        path_str(&histogram),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read_json(&out.join("analysis.json"))["classification"]["decision"],
        "intact"
    );
}

#[test]
fn sweep_reports_stage_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "kind = \"pmt\"\npmt_gain = 3.0\npmt_stages = 1",
        "",
        "n_events = 100000\nseed = 5\nn_workers = 4",
    );
    let cfg = write_config(dir.path(), "pmt.toml", &cfg);
    let out = dir.path().join("sweep");
    let o = qeraser(&[
        "sweep",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--stages",
        "1..6",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(
        line.contains("stage threshold 5, N_c in (81, 243]"),
        "{line}"
    );
    let report = read_json(&out.join("sweep.json"));
    assert_eq!(report["inferred_stage_threshold"], 5);
    assert_eq!(report["records"].as_array().unwrap().len(), 6);
}

#[test]
fn calibrate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.toml",
        &config("kind = \"sink\"", "", "n_events = 1000\nseed = 2024"),
    );
    let out = dir.path().join("cal");
    let o = qeraser(&[
        "calibrate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--error-rate",
        "0.05",
        "--trials",
        "400",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&out.join("calibration.json"));
    assert!(report["n_required"].as_u64().unwrap() > 1);
    assert!(report["metadata"]["note"]
        .as_str()
        .unwrap()
        .contains("conventions"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let bad = config("kind = \"sink\"", "", "n_events = 10\nseed = 1")
        .replace("d_m = 5e-4", "d_m = 5e-5");
    let bad = write_config(dir.path(), "bad.toml", &bad);
    let o = qeraser(&[
        "simulate",
        "--config",
        path_str(&bad),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("slit_separation_d must be ≥ slit_width_a"));

    let plate = config("kind = \"plate\"", "", "n_events = 10\nseed = 1");
    let plate = write_config(dir.path(), "plate.toml", &plate);
    let o = qeraser(&[
        "simulate",
        "--config",
        path_str(&plate),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let missing = dir.path().join("nope.toml");
    let o = qeraser(&[
        "simulate",
        "--config",
        path_str(&missing),
        "--out",
        path_str(&out),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let good = write_config(
        dir.path(),
        "good.toml",
        &config("kind = \"sink\"", "", "n_events = 10\nseed = 1"),
    );
    let o = qeraser(&[
        "pattern",
        "--config",
        path_str(&good),
        "--out",
        path_str(&out),
        "--kind",
        "family:2",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let o = qeraser(&[
        "sweep",
        "--config",
        path_str(&good),
        "--out",
        path_str(&out),
        "--stages",
        "1..3",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let no_events = dir.path().join("absent.csv");
    let o = qeraser(&[
        "analyze",
        "--config",
        path_str(&good),
        "--out",
        path_str(&out),
        "--events",
        path_str(&no_events),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let tiny = config(
        "kind = \"sink\"",
        "x_max_m = 1e-310",
        "n_events = 10\nseed = 1",
    );
    let tiny = write_config(dir.path(), "tiny.toml", &tiny);
    let o = qeraser(&[
        "pattern",
        "--config",
        path_str(&tiny),
        "--out",
        path_str(&out),
        "--kind",
        "envelope",
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let o = qeraser(&["simulate", "--out", path_str(&out)]);
    assert_eq!(o.status.code(), Some(1));
}
