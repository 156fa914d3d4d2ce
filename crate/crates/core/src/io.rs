//! Plain-text outputs: event and histogram CSV, tabulated pattern CSV.
//!
//! Every file starts with `#`-prefixed `key=value` metadata lines. Positions
//! are written with 17 significant digits so that they parse back to the
//! identical `f64`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::collapse::Branch;
use crate::error::{Error, Result};
use crate::optics::{OpticalConfig, PatternPdf};
use crate::simulator::{EventRecord, Histogram};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const EVENT_HEADER: &str = "event_index,branch,d1_first,collapsed,x_position_m";
pub const HISTOGRAM_HEADER: &str = "bin_center_m,count";
pub const PATTERN_HEADER: &str = "x_m,density";

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_metadata<W: Write>(w: &mut W, meta: &[(String, String)]) -> std::io::Result<()> {
    for (k, v) in meta {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

pub fn write_events<W: Write>(
    w: &mut W,
    meta: &[(String, String)],
    events: &[EventRecord],
) -> std::io::Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "{EVENT_HEADER}")?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{}",
            e.event_index,
            e.branch.as_str(),
            e.d1_first,
            e.collapsed,
            fmt_f64(e.x_position)
        )?;
    }
    Ok(())
}

pub fn write_histogram<W: Write>(
    w: &mut W,
    meta: &[(String, String)],
    histogram: &Histogram,
) -> std::io::Result<()> {
    write_metadata(w, meta)?;
    writeln!(w, "{HISTOGRAM_HEADER}")?;
    for (c, n) in histogram.bin_centers().iter().zip(&histogram.counts) {
        writeln!(w, "{},{n}", fmt_f64(*c))?;
    }
    Ok(())
}

pub fn write_pattern<W: Write>(
    w: &mut W,
    meta: &[(String, String)],
    pdf: &PatternPdf,
    optics: &OpticalConfig,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# kind={} a_m={} d_m={} lambda_m={} f0_m={} x_max_m={}",
        pdf.kind(),
        optics.slit_width,
        optics.slit_separation,
        optics.wavelength,
        optics.focal_length,
        pdf.x_max()
    )?;
    write_metadata(w, meta)?;
    writeln!(w, "{PATTERN_HEADER}")?;
    for (x, f) in pdf.nodes().iter().zip(pdf.density()) {
        writeln!(w, "{},{}", fmt_f64(*x), fmt_f64(*f))?;
    }
    Ok(())
}

pub fn save<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

/// Data rows of a CSV file after its metadata and header, with 1-based line numbers.
fn data_rows(path: &Path, header: &str) -> Result<Vec<(usize, String)>> {
    let reader = BufReader::new(File::open(path)?);
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if !seen_header {
            if trimmed != header {
                return Err(Error::Format {
                    path: path.to_owned(),
                    line: lineno,
                    message: format!("expected header {header:?}, found {trimmed:?}"),
                });
            }
            seen_header = true;
            continue;
        }
        rows.push((lineno, trimmed.to_owned()));
    }
    if !seen_header {
        return Err(Error::Format {
            path: path.to_owned(),
            line: 0,
            message: format!("missing header {header:?}"),
        });
    }
    Ok(rows)
}

fn field<T: std::str::FromStr>(
    path: &Path,
    line: usize,
    name: &str,
    raw: Option<&str>,
) -> Result<T> {
    let raw = raw.ok_or_else(|| Error::Format {
        path: path.to_owned(),
        line,
        message: format!("missing column {name}"),
    })?;
    raw.trim().parse().map_err(|_| Error::Format {
        path: path.to_owned(),
        line,
        message: format!("cannot parse {name} from {raw:?}"),
    })
}

pub fn read_events(path: &Path) -> Result<Vec<EventRecord>> {
    data_rows(path, EVENT_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            let mut cols = row.split(',');
            let event_index = field(path, line, "event_index", cols.next())?;
            let branch: String = field(path, line, "branch", cols.next())?;
            let branch: Branch = branch.parse().map_err(|_| Error::Format {
                path: path.to_owned(),
                line,
                message: format!("unknown branch {branch:?}"),
            })?;
            let d1_first = field(path, line, "d1_first", cols.next())?;
            let collapsed = field(path, line, "collapsed", cols.next())?;
            let x_position = field(path, line, "x_position_m", cols.next())?;
            if cols.next().is_some() {
                return Err(Error::Format {
                    path: path.to_owned(),
                    line,
                    message: "too many columns".into(),
                });
            }
            Ok(EventRecord {
                event_index,
                branch,
                d1_first,
                collapsed,
                x_position,
            })
        })
        .collect()
}

/// Bin centers and counts from a histogram CSV.
pub fn read_histogram(path: &Path) -> Result<Vec<(f64, u64)>> {
    data_rows(path, HISTOGRAM_HEADER)?
        .into_iter()
        .map(|(line, row)| {
            let mut cols = row.split(',');
            let center = field(path, line, "bin_center_m", cols.next())?;
            let count = field(path, line, "count", cols.next())?;
            Ok((center, count))
        })
        .collect()
}
