//! Property suites run by `verify` and the bound-check scenario.

use rayon::prelude::*;

use secbound_core::diagnostics::{bound_terms, correlation_operator, gamma_term1, BoundTerms};
use secbound_core::evolution::Evolver;
use secbound_core::linalg::partial_trace;
use secbound_core::random;
use secbound_core::{build_chain_model, ChainParams, PathChoice, Subsystem, TimeGrid};

use crate::RunError;

/// Environment dimensions cycled through by the random-model suite.
pub const ENVIRONMENT_DIMS: [usize; 4] = [2, 3, 4, 8];
/// Half-width of the symmetric difference used for `sigma`.
pub const LOCAL_DIFFERENCE_STEP: f64 = 1e-5;
pub const BOUND_TOL: f64 = 1e-6;

pub const CHI_MARGINAL_TOL: f64 = 1e-12;
pub const PURITY_TOL: f64 = 1e-10;
pub const MAGNETIZATION_TOL: f64 = 1e-10;
pub const GAMMA_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
pub struct BoundSample {
    pub model: usize,
    pub d_environment: usize,
    pub t: f64,
    pub sigma: f64,
    pub bound: BoundTerms,
}

impl BoundSample {
    pub fn margin(&self) -> f64 {
        self.bound.total - self.sigma
    }
}

/// Random generic models with a two-level system: `sigma` from local
/// differencing against the bound at every time of `grid`. Model `k` draws
/// from its own stream seeded by `seed + k`.
pub fn bound_suite(models: usize, seed: u64, grid: &TimeGrid) -> Result<Vec<BoundSample>, RunError> {
    let per_model = (0..models)
        .into_par_iter()
        .map(|k| {
            let d_environment = ENVIRONMENT_DIMS[k % ENVIRONMENT_DIMS.len()];
            let mut rng = random::seeded(seed.wrapping_add(k as u64));
            let model = random::generic_model(2, d_environment, &mut rng)?;
            let ev = Evolver::new(&model, PathChoice::Dense)?;
            grid.times()
                .into_iter()
                .map(|t| {
                    let snap = ev.snapshot(t)?;
                    let [r1, r2] = &snap.states;
                    let bound = bound_terms(model.hamiltonian(), model.bipartition(), r1, r2)?;
                    Ok(BoundSample {
                        model: k,
                        d_environment,
                        t,
                        sigma: ev.local_sigma(t, LOCAL_DIFFERENCE_STEP)?,
                        bound,
                    })
                })
                .collect::<Result<Vec<_>, RunError>>()
        })
        .collect::<Result<Vec<_>, RunError>>()?;
    Ok(per_model.into_iter().flatten().collect())
}

/// One named invariant with its worst observed deviation.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.worst <= self.tolerance
    }
}

fn popcount_magnetization(amplitudes: &[secbound_core::Complex64], n_total: usize) -> f64 {
    amplitudes
        .iter()
        .enumerate()
        .map(|(i, z)| z.norm_sqr() * (n_total as f64 - 2.0 * (i.count_ones() as f64)))
        .sum()
}

/// Correlation-operator marginals, purity, magnetization and the
/// interaction-decomposition form of the first bound term, sampled along a
/// chain trajectory of the model's own pair.
pub fn structural_checks(params: ChainParams, grid: &TimeGrid) -> Result<Vec<Check>, RunError> {
    let model = build_chain_model(params)?;
    let ev = Evolver::new(&model, PathChoice::Auto)?;
    let n_total = params.n_total;
    let full_bp = model.bipartition();
    let wbp = ev.working_bipartition();
    let m0: Vec<f64> = ev
        .joint_states(0.0)?
        .iter()
        .map(|psi| popcount_magnetization(psi.amplitudes().as_slice(), n_total))
        .collect();

    let times = grid.times();
    let stride = (times.len() / 8).max(1);
    let samples: Vec<f64> = times.iter().copied().step_by(stride).collect();
    let worst = samples
        .par_iter()
        .map(|&t| -> Result<[f64; 4], RunError> {
            let mut w = [0.0f64; 4];
            let snap = ev.snapshot(t)?;
            for rho in &snap.states {
                let chi = correlation_operator(rho, wbp)?;
                for keep in [Subsystem::System, Subsystem::Environment] {
                    w[0] = w[0].max(partial_trace(&chi, wbp, keep)?.max_abs());
                }
                w[1] = w[1].max((rho.purity() - 1.0).abs());
            }
            let joint = ev.joint_states(t)?;
            for (k, psi) in joint.iter().enumerate() {
                let m = popcount_magnetization(psi.amplitudes().as_slice(), n_total);
                w[2] = w[2].max((m - m0[k]).abs());
            }
            let direct = bound_terms(ev.working_hamiltonian(), wbp, &snap.states[0], &snap.states[1])?;
            let full = [joint[0].density(), joint[1].density()];
            let env = [
                partial_trace(full[0].matrix(), full_bp, Subsystem::Environment)?,
                partial_trace(full[1].matrix(), full_bp, Subsystem::Environment)?,
            ];
            let delta = &env[0] - &env[1];
            for (k, rho) in full.iter().enumerate() {
                let rs = partial_trace(rho.matrix(), full_bp, Subsystem::System)?;
                let via_gamma = gamma_term1(&model, &rs, &delta)?;
                w[3] = w[3].max((via_gamma - direct.term1_branches[k]).abs());
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>, RunError>>()?
        .into_iter()
        .fold([0.0f64; 4], |acc, w| [acc[0].max(w[0]), acc[1].max(w[1]), acc[2].max(w[2]), acc[3].max(w[3])]);

    Ok(vec![
        Check {
            name: "chi_partial_traces",
            worst: worst[0],
            tolerance: CHI_MARGINAL_TOL,
        },
        Check {
            name: "joint_purity_drift",
            worst: worst[1],
            tolerance: PURITY_TOL,
        },
        Check {
            name: "magnetization_drift",
            worst: worst[2],
            tolerance: MAGNETIZATION_TOL,
        },
        Check {
            name: "gamma_term1_vs_direct",
            worst: worst[3],
            tolerance: GAMMA_TOL,
        },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_bound_suite_holds() {
        let grid = TimeGrid::new(2.0, 4).unwrap();
        let samples = bound_suite(4, 3, &grid).unwrap();
        assert_eq!(samples.len(), 20);
        assert_eq!(
            samples.iter().map(|s| s.d_environment).step_by(5).collect::<Vec<_>>(),
            vec![2, 3, 4, 8]
        );
        assert!(samples.iter().all(|s| s.margin() >= -BOUND_TOL));
    }

    #[test]
    fn structural_checks_pass_on_small_chain() {
        let params = ChainParams {
            n_total: 5,
            ..ChainParams::default()
        };
        let checks = structural_checks(params, &TimeGrid::new(3.0, 30).unwrap()).unwrap();
        assert_eq!(checks.len(), 4);
        for c in &checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
