//! Grids over `(J0/J, B/J)`: one measure evaluation per point, rows in
//! row-major order with `J0/J` as the slow index.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use secbound_core::{blp_measure, ChainParams, ModelFamily};

use crate::config::RunConfig;
use crate::output::{self, csv_text, fmt_f64};
use crate::suite::BOUND_TOL;
use crate::{Outcome, RunError};

pub const SWEEP_COLUMNS: [&str; 8] = [
    "j0",
    "b_field",
    "n_measure",
    "n_intervals",
    "max_bound_violation",
    "path_used",
    "status",
    "message",
];

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub j0: f64,
    pub b_field: f64,
    pub result: Result<PointValues, String>,
}

#[derive(Debug, Clone)]
pub struct PointValues {
    pub n_measure: f64,
    pub n_intervals: usize,
    pub max_bound_violation: f64,
    pub path_used: &'static str,
}

impl SweepPoint {
    pub fn status(&self) -> &'static str {
        match &self.result {
            Err(_) => "error",
            Ok(v) if v.max_bound_violation > BOUND_TOL => "bound_violation",
            Ok(_) => "ok",
        }
    }
}

pub fn sweep_points(cfg: &RunConfig) -> Vec<SweepPoint> {
    let coords: Vec<(f64, f64)> = cfg
        .j0_grid
        .values()
        .into_iter()
        .flat_map(|j0| cfg.b_grid.values().into_iter().map(move |b| (j0, b)))
        .collect();
    let grid = cfg.grid();
    let pairs = cfg.pair.family(cfg.seed);
    coords
        .par_iter()
        .map(|&(j0, b_field)| {
            let params = ChainParams {
                j_sys: j0 * cfg.chain.j_env,
                b_field: b_field * cfg.chain.j_env,
                ..cfg.chain
            };
            let result = blp_measure(&ModelFamily::Chain(params), &grid, pairs, cfg.path)
                .map(|report| PointValues {
                    n_measure: report.n_measure,
                    n_intervals: report.intervals.len(),
                    max_bound_violation: report
                        .per_pair_values
                        .iter()
                        .map(|v| v.max_bound_violation)
                        .fold(f64::NEG_INFINITY, f64::max),
                    path_used: report.path_used.as_str(),
                })
                .map_err(|e| e.to_string());
            SweepPoint { j0, b_field, result }
        })
        .collect()
}

pub fn write_sweep_csv(w: &mut impl Write, points: &[SweepPoint]) -> std::io::Result<()> {
    writeln!(w, "{}", SWEEP_COLUMNS.join(","))?;
    for p in points {
        match &p.result {
            Ok(v) => writeln!(
                w,
                "{},{},{},{},{},{},{},",
                fmt_f64(p.j0),
                fmt_f64(p.b_field),
                fmt_f64(v.n_measure),
                v.n_intervals,
                fmt_f64(v.max_bound_violation),
                v.path_used,
                p.status()
            )?,
            Err(message) => writeln!(
                w,
                "{},{},,,,,{},{}",
                fmt_f64(p.j0),
                fmt_f64(p.b_field),
                p.status(),
                csv_text(message)
            )?,
        }
    }
    w.flush()
}

pub fn run_sweep(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut csv = output::create(&cfg.out)?;
    let mut summary_file = output::create(&cfg.summary)?;
    let start = Instant::now();
    let points = sweep_points(cfg);
    write_sweep_csv(&mut csv, &points)?;

    let violations: Vec<String> = points
        .iter()
        .filter(|p| p.status() != "ok")
        .map(|p| match &p.result {
            Err(e) => format!("point (j0={}, b_field={}): {e}", p.j0, p.b_field),
            Ok(v) => format!(
                "point (j0={}, b_field={}): sigma exceeds the bound by {:.3e}",
                p.j0, p.b_field, v.max_bound_violation
            ),
        })
        .collect();
    let mut parameters = cfg.parameters_json();
    parameters["j0_grid"] = json!({"min": cfg.j0_grid.min, "max": cfg.j0_grid.max, "count": cfg.j0_grid.count});
    parameters["b_grid"] = json!({"min": cfg.b_grid.min, "max": cfg.b_grid.max, "count": cfg.b_grid.count});
    let summary = json!({
        "parameters": parameters,
        "points": points.len(),
        "failed_points": violations.len(),
        "runtime_seconds": start.elapsed().as_secs_f64(),
        "timestamp": output::timestamp(),
        "violations": violations,
    });
    output::write_json(&mut summary_file, &summary)?;
    Ok(Outcome { summary, violations })
}
