//! CSV and JSON emission. Floats are written with 17 significant digits so
//! that files round-trip exactly and repeat byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

use secbound_core::measure::Interval;
use secbound_core::DiagnosticsRow;

use crate::config::ConfigError;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a text cell when it would otherwise break the row.
pub fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Opens an output file up front so that unwritable paths surface as
/// configuration errors before any computation.
pub fn create(path: &Path) -> Result<BufWriter<File>, ConfigError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        if !parent.is_dir() {
            return Err(ConfigError::Io {
                path: path.display().to_string(),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
            });
        }
    }
    File::create(path).map(BufWriter::new).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_trajectory_csv(w: &mut impl Write, rows: &[DiagnosticsRow]) -> std::io::Result<()> {
    writeln!(w, "{}", DiagnosticsRow::COLUMNS.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.values().iter().map(|&v| fmt_f64(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Times at which `sigma` turns from negative to non-negative, located by
/// linear interpolation between the bracketing samples.
pub fn zero_crossings_down_up(rows: &[DiagnosticsRow]) -> Vec<f64> {
    rows.windows(2)
        .filter(|w| w[0].sigma < 0.0 && w[1].sigma >= 0.0)
        .map(|w| {
            let (a, b) = (w[0].sigma, w[1].sigma);
            w[0].t + (w[1].t - w[0].t) * a / (a - b)
        })
        .collect()
}

pub fn intervals_json(intervals: &[Interval]) -> Value {
    intervals
        .iter()
        .map(|i| json!({"t_start": i.t_start, "t_end": i.t_end, "contribution": i.contribution}))
        .collect::<Vec<_>>()
        .into()
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn write_json(w: &mut impl Write, value: &Value) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w)?;
    w.flush()
}

/// Summary with the fields that vary between identical runs removed.
pub fn without_metadata(summary: &Value) -> Value {
    let mut v = summary.clone();
    if let Some(map) = v.as_object_mut() {
        map.remove("timestamp");
        map.remove("runtime_seconds");
    }
    v
}
