//! Per-time quantities of an evolving pair: trace distances, the derivative
//! `sigma`, the correlation-based upper bound on `sigma`, correlation
//! operators, entropies and mutual information.

use thiserror::Error;

use crate::linalg::{
    hermitian_eig, hermitian_eigenvalues, kron, partial_trace, spectrum_entropy, trace_norm, Bipartition,
    Complex64, ComplexMatrix, DensityMatrix, LinalgError, Subsystem,
};
use crate::model::Model;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("differencing needs at least {needed} samples, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("grid spacing must be positive, got {0}")]
    InvalidSpacing(f64),
    #[error("model carries no interaction terms")]
    MissingInteractionTerms,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, DiagnosticsError>;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(DiagnosticsError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// `D(r1, r2) = ||r1 - r2|| / 2`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    same_dim(r1.dim(), r2.dim())?;
    operator_distance(r1.matrix(), r2.matrix())
}

fn operator_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    same_dim(a.rows(), b.rows())?;
    same_dim(a.cols(), b.cols())?;
    Ok(trace_norm(&(a - b))? / 2.0)
}

/// Optimal probability of identifying which of two equiprobable states was
/// prepared.
pub fn guess_probability(d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d) {
        return Err(DiagnosticsError::OutOfRange(d));
    }
    Ok((1.0 + d) / 2.0)
}

/// Central differences in the interior, one-sided first differences at the
/// two ends.
pub fn sigma_series(d_values: &[f64], dt: f64) -> Result<Vec<f64>> {
    if d_values.len() < 3 {
        return Err(DiagnosticsError::TooFewPoints {
            needed: 3,
            found: d_values.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(DiagnosticsError::InvalidSpacing(dt));
    }
    let n = d_values.len();
    let mut out = Vec::with_capacity(n);
    out.push((d_values[1] - d_values[0]) / dt);
    out.extend(d_values.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dt)));
    out.push((d_values[n - 1] - d_values[n - 2]) / dt);
    Ok(out)
}

/// Same differencing contract as [`sigma_series`].
pub fn mutual_information_rate(i_values: &[f64], dt: f64) -> Result<Vec<f64>> {
    sigma_series(i_values, dt)
}

/// `chi = rho_SE - rho_S (x) rho_E`.
pub fn correlation_operator(rho_se: &DensityMatrix, bp: Bipartition) -> Result<ComplexMatrix> {
    let rs = partial_trace(rho_se.matrix(), bp, Subsystem::System)?;
    let re = partial_trace(rho_se.matrix(), bp, Subsystem::Environment)?;
    Ok(rho_se.matrix() - &kron(&rs, &re))
}

/// `D(chi1, chi2) = ||chi1 - chi2|| / 2`.
pub fn correlation_distance(chi1: &ComplexMatrix, chi2: &ComplexMatrix) -> Result<f64> {
    operator_distance(chi1, chi2)
}

/// `1 - D(rho1_E, rho2_E)`.
pub fn env_indistinguishability(rho1_e: &DensityMatrix, rho2_e: &DensityMatrix) -> Result<f64> {
    Ok(1.0 - trace_distance(rho1_e, rho2_e)?)
}

fn matrix_entropy(m: &ComplexMatrix) -> Result<f64> {
    Ok(spectrum_entropy(&hermitian_eigenvalues(m)?))
}

/// `S(rho_S) + S(rho_E) - S(rho_SE)` in bits.
pub fn mutual_information(rho_se: &DensityMatrix, bp: Bipartition) -> Result<f64> {
    same_dim(rho_se.dim(), bp.joint_dim())?;
    let rs = partial_trace(rho_se.matrix(), bp, Subsystem::System)?;
    let re = partial_trace(rho_se.matrix(), bp, Subsystem::Environment)?;
    Ok(matrix_entropy(&rs)? + matrix_entropy(&re)? - matrix_entropy(rho_se.matrix())?)
}

/// The two terms of the bound and `total = (term1 + term2) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundTerms {
    /// `min_k ||Tr_E [H, rho_k^S (x) (rho_1^E - rho_2^E)]||`.
    pub term1: f64,
    /// `||Tr_E [H, chi_1 - chi_2]||`.
    pub term2: f64,
    pub total: f64,
    /// Term-one values for `k = 1, 2` before minimization.
    pub term1_branches: [f64; 2],
}

/// Marginals and correlation operators of one joint state.
struct Decomposed {
    system: ComplexMatrix,
    environment: ComplexMatrix,
    chi: ComplexMatrix,
}

fn decompose(rho: &ComplexMatrix, bp: Bipartition) -> Result<Decomposed> {
    let system = partial_trace(rho, bp, Subsystem::System)?;
    let environment = partial_trace(rho, bp, Subsystem::Environment)?;
    let chi = rho - &kron(&system, &environment);
    Ok(Decomposed {
        system,
        environment,
        chi,
    })
}

/// `||Tr_E [H, X]||`. The `-i` of the Heisenberg generator is dropped; the
/// trace norm does not see it.
fn reduced_commutator_norm(h: &ComplexMatrix, x: &ComplexMatrix, bp: Bipartition) -> Result<f64> {
    Ok(trace_norm(&reduced_commutator(h, x, bp))?)
}

/// `Tr_E [H, X]` without forming the joint commutator: only the
/// `d_S^2 d_E` entries that survive the trace are accumulated.
pub fn reduced_commutator(h: &ComplexMatrix, x: &ComplexMatrix, bp: Bipartition) -> ComplexMatrix {
    let (ds, de) = (bp.d_system(), bp.d_environment());
    let (h, x) = (h.inner(), x.inner());
    let d = h.nrows();
    ComplexMatrix::from_fn(ds, ds, |i, j| {
        let mut acc = Complex64::new(0.0, 0.0);
        for e in 0..de {
            let (row, col) = (i * de + e, j * de + e);
            for k in 0..d {
                acc += h[(row, k)] * x[(k, col)] - x[(row, k)] * h[(k, col)];
            }
        }
        acc
    })
}

fn bound_from_parts(h: &ComplexMatrix, bp: Bipartition, a: &Decomposed, b: &Decomposed) -> Result<BoundTerms> {
    let delta_env = &a.environment - &b.environment;
    let branch1 = reduced_commutator_norm(h, &kron(&a.system, &delta_env), bp)?;
    let branch2 = reduced_commutator_norm(h, &kron(&b.system, &delta_env), bp)?;
    let term1 = branch1.min(branch2);
    let term2 = reduced_commutator_norm(h, &(&a.chi - &b.chi), bp)?;
    Ok(BoundTerms {
        term1,
        term2,
        total: (term1 + term2) / 2.0,
        term1_branches: [branch1, branch2],
    })
}

/// Both terms of the upper bound on `sigma` for joint states `rho1`, `rho2`
/// evolving under `hamiltonian`.
pub fn bound_terms(
    hamiltonian: &ComplexMatrix,
    bp: Bipartition,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<BoundTerms> {
    same_dim(rho1.dim(), rho2.dim())?;
    same_dim(hamiltonian.rows(), rho1.dim())?;
    same_dim(bp.joint_dim(), rho1.dim())?;
    let a = decompose(rho1.matrix(), bp)?;
    let b = decompose(rho2.matrix(), bp)?;
    bound_from_parts(hamiltonian, bp, &a, &b)
}

/// [`bound_terms`] with the model's Hamiltonian and bipartition.
pub fn bound_rhs(model: &Model, rho1_se: &DensityMatrix, rho2_se: &DensityMatrix) -> Result<BoundTerms> {
    bound_terms(model.hamiltonian(), model.bipartition(), rho1_se, rho2_se)
}

/// Term-one branch through the interaction decomposition:
/// `||[sum_a gamma_a A_a, rho^S]||` with `gamma_a = Tr[B_a delta_env]`.
pub fn gamma_term1(model: &Model, rho_k_s: &ComplexMatrix, delta_env: &ComplexMatrix) -> Result<f64> {
    let terms = model.interaction_terms();
    if terms.is_empty() {
        return Err(DiagnosticsError::MissingInteractionTerms);
    }
    let bp = model.bipartition();
    same_dim(rho_k_s.rows(), bp.d_system())?;
    same_dim(delta_env.rows(), bp.d_environment())?;
    let mut effective = ComplexMatrix::zeros(bp.d_system(), bp.d_system());
    for term in terms {
        let gamma: Complex64 = (term.environment.inner() * delta_env.inner()).trace();
        effective = &effective + &term.system.scale(gamma);
    }
    Ok(trace_norm(&effective.commutator(rho_k_s))?)
}

/// Finite-step counterparts of the two bound terms: the commutator
/// `Tr_E [H, X]` is replaced by `Tr_E [U X U^dagger] / dt` with
/// `U = exp(-i H dt)`. Both operands have vanishing system marginal, so the
/// quotient tends to the commutator norm as `dt -> 0`.
pub fn finite_step_terms(
    hamiltonian: &ComplexMatrix,
    bp: Bipartition,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    dt: f64,
) -> Result<[f64; 2]> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DiagnosticsError::InvalidSpacing(dt));
    }
    same_dim(rho1.dim(), rho2.dim())?;
    same_dim(hamiltonian.rows(), rho1.dim())?;
    same_dim(bp.joint_dim(), rho1.dim())?;
    let a = decompose(rho1.matrix(), bp)?;
    let b = decompose(rho2.matrix(), bp)?;
    let u = hermitian_eig(hamiltonian)?.reconstruct_with(|e| Complex64::from_polar(1.0, -e * dt));
    let u_dag = u.adjoint();
    let step_norm = |x: &ComplexMatrix| -> Result<f64> {
        let moved = &(&u * x) * &u_dag;
        Ok(trace_norm(&partial_trace(&moved, bp, Subsystem::System)?)? / dt)
    };
    let delta_env = &a.environment - &b.environment;
    let term1 = step_norm(&kron(&a.system, &delta_env))?.min(step_norm(&kron(&b.system, &delta_env))?);
    let term2 = step_norm(&(&a.chi - &b.chi))?;
    Ok([term1, term2])
}

/// Every diagnostic available at a single time; derivatives need
/// neighbouring samples and are filled in by [`assemble_rows`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantDiagnostics {
    pub t: f64,
    pub d_system: f64,
    pub bound: BoundTerms,
    pub d_env: f64,
    pub x_corr: f64,
    pub chi_norms: [f64; 2],
    pub svn_system: [f64; 2],
    pub mutual_info: [f64; 2],
}

/// Evaluates one time slice for a pair of joint states.
pub fn evaluate_instant(
    t: f64,
    hamiltonian: &ComplexMatrix,
    bp: Bipartition,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<InstantDiagnostics> {
    same_dim(rho1.dim(), rho2.dim())?;
    same_dim(bp.joint_dim(), rho1.dim())?;
    let a = decompose(rho1.matrix(), bp)?;
    let b = decompose(rho2.matrix(), bp)?;
    let bound = bound_from_parts(hamiltonian, bp, &a, &b)?;

    let svn_s = [matrix_entropy(&a.system)?, matrix_entropy(&b.system)?];
    let svn_e = [matrix_entropy(&a.environment)?, matrix_entropy(&b.environment)?];
    let svn_se = [matrix_entropy(rho1.matrix())?, matrix_entropy(rho2.matrix())?];

    Ok(InstantDiagnostics {
        t,
        d_system: operator_distance(&a.system, &b.system)?,
        bound,
        d_env: operator_distance(&a.environment, &b.environment)?,
        x_corr: correlation_distance(&a.chi, &b.chi)?,
        chi_norms: [trace_norm(&a.chi)?, trace_norm(&b.chi)?],
        svn_system: svn_s,
        mutual_info: [
            svn_s[0] + svn_e[0] - svn_se[0],
            svn_s[1] + svn_e[1] - svn_se[1],
        ],
    })
}

/// One row of a trajectory, in output column order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub d_system: f64,
    pub sigma: f64,
    pub bound_total: f64,
    pub bound_term1: f64,
    pub bound_term2: f64,
    pub d_env: f64,
    pub e_indist: f64,
    pub x_corr: f64,
    pub chi1_norm: f64,
    pub chi2_norm: f64,
    pub svn_system_1: f64,
    pub svn_system_2: f64,
    pub mutual_info_1: f64,
    pub mutual_info_2: f64,
    pub d_i_dt_1: f64,
}

impl DiagnosticsRow {
    pub const COLUMNS: [&'static str; 16] = [
        "t",
        "D_system",
        "sigma",
        "bound_total",
        "bound_term1",
        "bound_term2",
        "D_env",
        "E_indist",
        "X_corr",
        "chi1_norm",
        "chi2_norm",
        "svn_system_1",
        "svn_system_2",
        "mutual_info_1",
        "mutual_info_2",
        "dIdt_1",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.d_system,
            self.sigma,
            self.bound_total,
            self.bound_term1,
            self.bound_term2,
            self.d_env,
            self.e_indist,
            self.x_corr,
            self.chi1_norm,
            self.chi2_norm,
            self.svn_system_1,
            self.svn_system_2,
            self.mutual_info_1,
            self.mutual_info_2,
            self.d_i_dt_1,
        ]
    }
}

/// Differencing that degrades gracefully on very short grids: zero for a
/// single sample, a forward difference for two.
fn derivative(values: &[f64], dt: f64) -> Result<Vec<f64>> {
    match values.len() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![0.0]),
        2 => {
            let slope = (values[1] - values[0]) / dt;
            Ok(vec![slope, slope])
        }
        _ => sigma_series(values, dt),
    }
}

/// Adds `sigma` and the mutual-information rate to a time-ordered series of
/// instants on a uniform grid with spacing `dt`.
pub fn assemble_rows(instants: &[InstantDiagnostics], dt: f64) -> Result<Vec<DiagnosticsRow>> {
    let d: Vec<f64> = instants.iter().map(|x| x.d_system).collect();
    let info: Vec<f64> = instants.iter().map(|x| x.mutual_info[0]).collect();
    let sigma = derivative(&d, dt)?;
    let rate = derivative(&info, dt)?;
    Ok(instants
        .iter()
        .enumerate()
        .map(|(i, x)| DiagnosticsRow {
            t: x.t,
            d_system: x.d_system,
            sigma: sigma[i],
            bound_total: x.bound.total,
            bound_term1: x.bound.term1,
            bound_term2: x.bound.term2,
            d_env: x.d_env,
            e_indist: 1.0 - x.d_env,
            x_corr: x.x_corr,
            chi1_norm: x.chi_norms[0],
            chi2_norm: x.chi_norms[1],
            svn_system_1: x.svn_system[0],
            svn_system_2: x.svn_system[1],
            mutual_info_1: x.mutual_info[0],
            mutual_info_2: x.mutual_info[1],
            d_i_dt_1: rate[i],
        })
        .collect())
}
