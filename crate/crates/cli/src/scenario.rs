use std::io::Write;
use std::time::Instant;

use serde_json::{json, Value};

use secbound_core::model::load_generic_model;
use secbound_core::{blp_measure, DiagnosticsRow, ModelFamily};

use crate::config::{RunConfig, Scenario};
use crate::output::{self, fmt_f64};
use crate::suite::{self, BOUND_TOL};
use crate::{sweep, Outcome, RunError};

/// `bound_total = (term1 + term2) / 2` and `E = 1 - D_env`, per row.
pub const ROW_IDENTITY_TOL: f64 = 1e-12;
/// `I = 2 S(rho_S)` for pure joint states.
pub const MUTUAL_INFO_TOL: f64 = 1e-9;
pub const ENTROPY_SYMMETRY_TOL: f64 = 1e-10;

fn row_violations(rows: &[DiagnosticsRow], scenario: Scenario) -> Vec<String> {
    let mut found = Vec::new();
    let mut note = |cond: bool, what: String| {
        if cond {
            found.push(what);
        }
    };
    for r in rows {
        note(
            (r.bound_total - (r.bound_term1 + r.bound_term2) / 2.0).abs() > ROW_IDENTITY_TOL,
            format!("t={}: bound_total differs from the mean of its terms", r.t),
        );
        note(
            (r.e_indist - (1.0 - r.d_env)).abs() > ROW_IDENTITY_TOL,
            format!("t={}: E_indist differs from 1 - D_env", r.t),
        );
        note(
            r.sigma - r.bound_total > BOUND_TOL,
            format!("t={}: sigma exceeds the bound by {:.3e}", r.t, r.sigma - r.bound_total),
        );
        note(
            (r.mutual_info_1 - 2.0 * r.svn_system_1).abs() > MUTUAL_INFO_TOL,
            format!("t={}: mutual information differs from twice the system entropy", r.t),
        );
        if scenario == Scenario::Fig2a {
            note(
                (r.svn_system_1 - r.svn_system_2).abs() > ENTROPY_SYMMETRY_TOL,
                format!("t={}: system entropies of the two inputs differ", r.t),
            );
        }
    }
    found
}

fn trajectory(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut csv = output::create(&cfg.out)?;
    let mut summary_file = output::create(&cfg.summary)?;
    let start = Instant::now();

    let family = match cfg.scenario {
        Scenario::Custom => {
            let path = cfg.model.as_ref().expect("validated on resolve");
            ModelFamily::Generic(load_generic_model(path).map_err(crate::ConfigError::Model)?)
        }
        _ => ModelFamily::Chain(cfg.chain),
    };
    let report = blp_measure(&family, &cfg.grid(), cfg.pair.family(cfg.seed), cfg.path)?;
    let rows = &report.best_trajectory.rows;
    output::write_trajectory_csv(&mut csv, rows)?;

    let mut violations = row_violations(rows, cfg.scenario);
    for value in &report.per_pair_values {
        if value.max_bound_violation > BOUND_TOL {
            violations.push(format!(
                "pair {}: sigma exceeds the bound by {:.3e}",
                value.pair, value.max_bound_violation
            ));
        }
    }

    let mut parameters = cfg.parameters_json();
    parameters["best_pair"] = json!(report.best_pair.to_string());
    parameters["per_pair_n_measure"] = report
        .per_pair_values
        .iter()
        .map(|v| json!({"pair": v.pair.to_string(), "n_measure": v.n_measure}))
        .collect::<Vec<_>>()
        .into();
    let summary = json!({
        "parameters": parameters,
        "n_measure": report.n_measure,
        "intervals": output::intervals_json(&report.intervals),
        "zero_crossings_down_up": output::zero_crossings_down_up(rows),
        "max_bound_violation": report.best_trajectory.max_bound_violation(),
        "runtime_seconds": start.elapsed().as_secs_f64(),
        "path_used": report.path_used.as_str(),
        "timestamp": output::timestamp(),
        "violations": violations,
    });
    output::write_json(&mut summary_file, &summary)?;
    Ok(Outcome { summary, violations })
}

fn bound_check(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let mut csv = output::create(&cfg.out)?;
    let mut summary_file = output::create(&cfg.summary)?;
    let start = Instant::now();
    let samples = suite::bound_suite(cfg.models, cfg.seed, &cfg.grid())?;

    writeln!(csv, "model,d_environment,t,sigma,bound_total,bound_term1,bound_term2,margin")?;
    for s in &samples {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s.model,
            s.d_environment,
            fmt_f64(s.t),
            fmt_f64(s.sigma),
            fmt_f64(s.bound.total),
            fmt_f64(s.bound.term1),
            fmt_f64(s.bound.term2),
            fmt_f64(s.margin())
        )?;
    }
    csv.flush()?;

    let violations: Vec<String> = samples
        .iter()
        .filter(|s| -s.margin() > BOUND_TOL)
        .map(|s| format!("model {} at t={}: sigma exceeds the bound by {:.3e}", s.model, s.t, -s.margin()))
        .collect();
    let worst = samples.iter().map(|s| -s.margin()).fold(f64::NEG_INFINITY, f64::max);
    let mut parameters = cfg.parameters_json();
    parameters["models"] = json!(cfg.models);
    let summary = json!({
        "parameters": parameters,
        "n_measure": Value::Null,
        "intervals": [],
        "zero_crossings_down_up": [],
        "max_bound_violation": worst,
        "runtime_seconds": start.elapsed().as_secs_f64(),
        "path_used": "dense",
        "timestamp": output::timestamp(),
        "violations": violations,
    });
    output::write_json(&mut summary_file, &summary)?;
    Ok(Outcome { summary, violations })
}

/// Runs one configured scenario and writes its CSV and summary.
pub fn run_scenario(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cfg.scenario {
        Scenario::BoundCheck => bound_check(cfg),
        Scenario::Sweep => sweep::run_sweep(cfg),
        _ => trajectory(cfg),
    }
}

/// The random-model bound suite plus the structural invariants of the
/// configured chain. Prints one line per check.
pub fn verify(cfg: &RunConfig, summary_path: Option<&std::path::Path>) -> Result<Outcome, RunError> {
    let mut summary_file = summary_path.map(output::create).transpose()?;
    let start = Instant::now();
    let bound_grid = secbound_core::TimeGrid::new(crate::config::BOUND_CHECK_T_MAX, crate::config::BOUND_CHECK_TIMES - 1)?;
    let samples = suite::bound_suite(cfg.models, cfg.seed, &bound_grid)?;
    let worst_bound = samples.iter().map(|s| -s.margin()).fold(f64::NEG_INFINITY, f64::max);
    let mut checks = vec![suite::Check {
        name: "random_model_bound",
        worst: worst_bound,
        tolerance: BOUND_TOL,
    }];
    checks.extend(suite::structural_checks(cfg.chain, &cfg.grid())?);

    let mut violations = Vec::new();
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        println!("{status} {:<24} worst {:.3e} (tolerance {:.0e})", c.name, c.worst, c.tolerance);
        if !c.passed() {
            violations.push(format!("{}: {:.3e} exceeds {:.0e}", c.name, c.worst, c.tolerance));
        }
    }
    let summary = json!({
        "parameters": cfg.parameters_json(),
        "checks": checks.iter().map(|c| json!({
            "name": c.name, "worst": c.worst, "tolerance": c.tolerance, "passed": c.passed()
        })).collect::<Vec<_>>(),
        "runtime_seconds": start.elapsed().as_secs_f64(),
        "timestamp": output::timestamp(),
        "violations": violations,
    });
    if let Some(w) = summary_file.as_mut() {
        output::write_json(w, &summary)?;
    }
    Ok(Outcome { summary, violations })
}
