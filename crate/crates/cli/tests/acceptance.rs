//! Acceptance report: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Regression values below were frozen from the first verified run.

use std::time::{Duration, Instant};

use rand::Rng;

use secbound_cli::output::zero_crossings_down_up;
use secbound_cli::suite::{self, BOUND_TOL};
use secbound_core::diagnostics::{bound_terms, finite_step_terms};
use secbound_core::evolution::{evolve_state, Evolver, Propagator};
use secbound_core::linalg::{hermitian_eigenvalues, partial_trace, trace_norm};
use secbound_core::measure::{blp_integral, blp_measure};
use secbound_core::random;
use secbound_core::{
    build_chain_model, run_trajectory, Bipartition, ChainParams, Complex64, ComplexMatrix, DiagnosticsRow,
    ModelFamily, PairFamily, PathChoice, Subsystem, TimeGrid, TrajectoryRecord,
};

/// Minimum of `bound_total - sigma` over the first sigma-positive interval
/// of the reference run.
const FIG1A_FIRST_INTERVAL_GAP: f64 = 1.2884670201498763e-3;
const FIG1A_GAP_REL_TOL: f64 = 1e-6;
/// Largest `E` at a down-to-up crossing of the reference run is 3.55e-5.
const CROSSING_E_THRESHOLD: f64 = 5e-5;
const CROSSING_WINDOW: f64 = 0.1;
/// The first increase of `D` at the Markovian point starts at `Jt = 5.067`.
const MARKOVIAN_WINDOW: f64 = 5.0;
const MARKOVIAN_TOL: f64 = 1e-6;
const SLOPE_TARGET: f64 = 1.0;
const SLOPE_TOL: f64 = 0.2;
const PATH_AGREEMENT_TOL: f64 = 1e-9;
const PHI_TOL: f64 = 1e-9;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: usize, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("[{}] {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn fig1a_params() -> ChainParams {
    ChainParams::default()
}

fn fig1a_grid() -> TimeGrid {
    TimeGrid::new(9.0, 2000).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn random_model_bounds(r: &mut Report) {
    let grid = TimeGrid::new(5.0, 19).unwrap();
    let (samples, elapsed) = timed(|| suite::bound_suite(50, 7, &grid).unwrap());
    let worst = samples.iter().map(|s| -s.margin()).fold(f64::NEG_INFINITY, f64::max);
    let ok = samples.len() == 1000 && worst <= BOUND_TOL && elapsed < Duration::from_secs(30);
    r.line(
        1,
        "bound on 50 random models",
        ok,
        format!("{} samples, max(sigma - B) = {worst:.3e}, {:.2} s", samples.len(), elapsed.as_secs_f64()),
    );
}

fn first_positive_run(rows: &[DiagnosticsRow]) -> &[DiagnosticsRow] {
    let Some(start) = rows.iter().position(|x| x.sigma > 0.0) else {
        return &[];
    };
    let len = rows[start..].iter().take_while(|x| x.sigma > 0.0).count();
    &rows[start..start + len]
}

fn fig1a(r: &mut Report, record: &TrajectoryRecord, elapsed: Duration) {
    let rows = &record.rows;
    let intervals = rows.windows(2).filter(|w| w[0].sigma <= 0.0 && w[1].sigma > 0.0).count();
    let violation = record.max_bound_violation();
    let gap = first_positive_run(rows)
        .iter()
        .map(|x| x.bound_total - x.sigma)
        .fold(f64::INFINITY, f64::min);
    let ok = intervals >= 1
        && violation <= BOUND_TOL
        && (gap - FIG1A_FIRST_INTERVAL_GAP).abs() <= FIG1A_GAP_REL_TOL * FIG1A_FIRST_INTERVAL_GAP
        && elapsed < Duration::from_secs(30);
    r.line(
        2,
        "fig1a bound and tightness",
        ok,
        format!(
            "{intervals} sigma-positive intervals, max(sigma - B) = {violation:.3e}, first-interval gap {gap:.6e} (frozen {FIG1A_FIRST_INTERVAL_GAP:.6e}), {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

fn has_local_min_near(rows: &[DiagnosticsRow], t: f64, f: impl Fn(&DiagnosticsRow) -> f64) -> bool {
    (1..rows.len() - 1).any(|k| {
        (rows[k].t - t).abs() <= CROSSING_WINDOW && f(&rows[k]) <= f(&rows[k - 1]) && f(&rows[k]) <= f(&rows[k + 1])
    })
}

fn fig1b(r: &mut Report, record: &TrajectoryRecord) {
    let rows = &record.rows;
    let crossings = zero_crossings_down_up(rows);
    let mut aligned = 0;
    let mut worst_e: f64 = 0.0;
    for &t in &crossings {
        let all = has_local_min_near(rows, t, |x| x.e_indist)
            && has_local_min_near(rows, t, |x| x.x_corr)
            && has_local_min_near(rows, t, |x| x.chi1_norm)
            && has_local_min_near(rows, t, |x| x.chi2_norm);
        aligned += usize::from(all);
        let nearest = rows
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .unwrap();
        worst_e = worst_e.max(nearest.e_indist);
    }
    let ok = !crossings.is_empty() && aligned == crossings.len() && worst_e < CROSSING_E_THRESHOLD;
    r.line(
        3,
        "fig1b minima at sigma crossings",
        ok,
        format!(
            "{aligned}/{} crossings with aligned minima of E, X, |chi1|, |chi2|; max E there {worst_e:.3e} (< {CROSSING_E_THRESHOLD:.0e})",
            crossings.len()
        ),
    );
}

fn fig2a(r: &mut Report, record: &TrajectoryRecord) {
    let rows = &record.rows;
    let twice = rows
        .iter()
        .map(|x| (x.mutual_info_1 - 2.0 * x.svn_system_1).abs())
        .fold(0.0, f64::max);
    let sym = rows
        .iter()
        .map(|x| (x.svn_system_1 - x.svn_system_2).abs())
        .fold(0.0, f64::max);
    let i0 = rows[0].mutual_info_1.abs();
    let ok = twice <= 1e-9 && sym <= 1e-10 && i0 <= 1e-10;
    r.line(
        4,
        "fig2a entropy identities",
        ok,
        format!("|I - 2S| <= {twice:.2e}, |S1 - S2| <= {sym:.2e}, I(0) = {i0:.2e}"),
    );
}

fn fig2b(r: &mut Report) {
    let params = ChainParams {
        b_field: 0.5,
        ..ChainParams::default()
    };
    let record = run_trajectory(&build_chain_model(params).unwrap(), &fig1a_grid(), PathChoice::Subspace).unwrap();
    let window: Vec<&DiagnosticsRow> = record.rows.iter().filter(|x| x.t <= MARKOVIAN_WINDOW).collect();
    let max_sigma = window.iter().map(|x| x.sigma).fold(f64::NEG_INFINITY, f64::max);
    let d: Vec<f64> = window.iter().map(|x| x.d_system).collect();
    let n = blp_integral(&d);
    let ok = max_sigma <= MARKOVIAN_TOL && n.abs() <= MARKOVIAN_TOL;
    r.line(
        5,
        "fig2b Markovian point",
        ok,
        format!("Jt in [0, {MARKOVIAN_WINDOW}]: max sigma = {max_sigma:.3e}, N = {n:.3e}"),
    );
}

fn log_log_slope(dts: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.log10()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.log10()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn finite_step_convergence(r: &mut Report) {
    let n_total = 7;
    let model = build_chain_model(ChainParams {
        n_total,
        ..ChainParams::default()
    })
    .unwrap();
    let ev = Evolver::new(&model, PathChoice::Dense).unwrap();
    let bp = model.bipartition();
    let dts = [1e-2, 1e-3, 1e-4];
    let mut rng = random::seeded(2024);
    let mut slopes = Vec::new();
    for _ in 0..5 {
        let t = rng.random_range(0.2..(n_total - 1) as f64);
        let snap = ev.snapshot(t).unwrap();
        let [r1, r2] = &snap.states;
        let exact = bound_terms(model.hamiltonian(), bp, r1, r2).unwrap();
        let finite: Vec<[f64; 2]> = dts
            .iter()
            .map(|&dt| finite_step_terms(model.hamiltonian(), bp, r1, r2, dt).unwrap())
            .collect();
        for (k, reference) in [exact.term1, exact.term2].into_iter().enumerate() {
            let errors: Vec<f64> = finite.iter().map(|f| (f[k] - reference).abs()).collect();
            slopes.push(log_log_slope(&dts, &errors));
        }
    }
    let ok = slopes.iter().all(|s| (s - SLOPE_TARGET).abs() <= SLOPE_TOL);
    let shown: Vec<String> = slopes.iter().map(|s| format!("{s:.3}")).collect();
    r.line(
        6,
        "finite-step convergence",
        ok,
        format!("log-log slopes [{}] (target {SLOPE_TARGET} +/- {SLOPE_TOL})", shown.join(", ")),
    );
}

fn oracle_equivalence(r: &mut Report) {
    let mut worst_path: f64 = 0.0;
    for n_total in 2..=7 {
        let model = build_chain_model(ChainParams {
            n_total,
            ..ChainParams::default()
        })
        .unwrap();
        let grid = TimeGrid::new((n_total - 1) as f64, 100).unwrap();
        let dense = run_trajectory(&model, &grid, PathChoice::Dense).unwrap();
        let sub = run_trajectory(&model, &grid, PathChoice::Subspace).unwrap();
        for (a, b) in dense.rows.iter().zip(&sub.rows) {
            for (x, y) in a.values().iter().zip(b.values()) {
                worst_path = worst_path.max((x - y).abs());
            }
        }
    }

    let mut rng = random::seeded(99);
    let a = random::complex_matrix(6, 6, &mut rng);
    let gram_oracle: f64 = hermitian_eigenvalues(&(&a.adjoint() * &a))
        .unwrap()
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    let tn_err = (trace_norm(&a).unwrap() - gram_oracle).abs();

    let bp = Bipartition::new(2, 8).unwrap();
    let m = random::complex_matrix(16, 16, &mut rng);
    let mut loops = ComplexMatrix::zeros(2, 2);
    for i in 0..2 {
        for j in 0..2 {
            for e in 0..8 {
                loops[(i, j)] += m[(i * 8 + e, j * 8 + e)];
            }
        }
    }
    let pt_err = partial_trace(&m, bp, Subsystem::System).unwrap().max_abs_diff(&loops);

    let model = build_chain_model(ChainParams {
        n_total: 4,
        ..ChainParams::default()
    })
    .unwrap();
    let psi = model.initial_pair()[0].joint();
    let h = model.hamiltonian();
    let mut taylor: Vec<Complex64> = psi.amplitudes().iter().copied().collect();
    let mut term = taylor.clone();
    for k in 1..20 {
        term = (0..term.len())
            .map(|i| (0..term.len()).map(|j| h[(i, j)] * term[j]).sum::<Complex64>() * Complex64::new(0.0, -0.3 / k as f64))
            .collect();
        for (o, z) in taylor.iter_mut().zip(&term) {
            *o += z;
        }
    }
    let evolved = evolve_state(&Propagator::dense(h).unwrap(), &psi, 0.3).unwrap();
    let prop_err = evolved
        .amplitudes()
        .iter()
        .zip(&taylor)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);

    let ok = worst_path <= PATH_AGREEMENT_TOL && tn_err <= 1e-10 && pt_err <= 1e-12 && prop_err <= 1e-10;
    r.line(
        7,
        "oracle equivalence",
        ok,
        format!(
            "dense vs subspace {worst_path:.2e}; trace norm {tn_err:.2e}; partial trace {pt_err:.2e}; propagator {prop_err:.2e}"
        ),
    );
}

fn structural(r: &mut Report) {
    let checks = suite::structural_checks(fig1a_params(), &fig1a_grid()).unwrap();
    let ok = checks.iter().all(suite::Check::passed);
    let shown: Vec<String> = checks.iter().map(|c| format!("{} {:.2e}", c.name, c.worst)).collect();
    r.line(8, "structural invariants", ok, shown.join(", "));
}

fn phi_symmetry(r: &mut Report) {
    let report = blp_measure(
        &ModelFamily::Chain(fig1a_params()),
        &fig1a_grid(),
        PairFamily::Equatorial(6),
        PathChoice::Subspace,
    )
    .unwrap();
    let values: Vec<f64> = report.per_pair_values.iter().map(|v| v.n_measure).collect();
    let spread = values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
        - values.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    r.line(
        9,
        "equatorial phi independence",
        spread <= PHI_TOL,
        format!("{} pairs, N = {:.12}, spread {spread:.2e}", values.len(), values[0]),
    );
}

fn performance(r: &mut Report, fig1a_elapsed: Duration) {
    let model = build_chain_model(ChainParams {
        n_total: 7,
        ..ChainParams::default()
    })
    .unwrap();
    let grid = TimeGrid::new(6.0, 500).unwrap();
    let (_, dense_elapsed) = single_threaded(|| timed(|| run_trajectory(&model, &grid, PathChoice::Dense).unwrap()));
    let ok = fig1a_elapsed < Duration::from_secs(30) && dense_elapsed < Duration::from_secs(60);
    r.line(
        10,
        "performance (single thread)",
        ok,
        format!(
            "fig1a subspace {:.2} s (< 30), dense n_total=7 x 500 steps {:.2} s (< 60)",
            fig1a_elapsed.as_secs_f64(),
            dense_elapsed.as_secs_f64()
        ),
    );
}

fn main() {
    let mut report = Report { failures: 0 };
    let model = build_chain_model(fig1a_params()).unwrap();
    let (record, elapsed) =
        single_threaded(|| timed(|| run_trajectory(&model, &fig1a_grid(), PathChoice::Subspace).unwrap()));

    random_model_bounds(&mut report);
    fig1a(&mut report, &record, elapsed);
    fig1b(&mut report, &record);
    fig2a(&mut report, &record);
    fig2b(&mut report);
    finite_step_convergence(&mut report);
    oracle_equivalence(&mut report);
    structural(&mut report);
    phi_symmetry(&mut report);
    performance(&mut report, elapsed);

    println!("acceptance: {} of 10 criteria failed", report.failures);
    if report.failures > 0 {
        std::process::exit(1);
    }
}
