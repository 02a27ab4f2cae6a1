//! Exact unitary propagation and trajectory assembly.
//!
//! Two evaluation paths share the diagnostics code:
//!
//! * **Dense** factorizes the full Hamiltonian and works with joint density
//!   matrices on the whole Hilbert space.
//! * **Subspace** factorizes only the conserved sectors the initial states
//!   touch, and evaluates every diagnostic on `S (x) W`, where `W` is the set
//!   of environment basis states that appear in those sectors. Every state,
//!   marginal and correlation operator of the run is supported there, so the
//!   compressed quantities are exact rather than approximations.

use nalgebra::DVector;
use rayon::prelude::*;
use thiserror::Error;

use crate::diagnostics::{self, DiagnosticsError, DiagnosticsRow, InstantDiagnostics};
use crate::linalg::{
    hermitian_eig, Bipartition, Complex64, ComplexMatrix, DensityMatrix, HermitianEigen,
    LinalgError, PureState,
};
use crate::model::Model;

/// Largest amplitude weight tolerated outside the factorized sectors.
pub const SECTOR_LEAK_TOL: f64 = 1e-24;
/// Tolerance for orthonormality of a [`SubspaceOperator`] basis.
pub const SUBSPACE_GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("state dimension {found} does not match propagator dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state has weight {weight:.3e} outside the factorized sectors")]
    OutsideSectors { weight: f64 },
    #[error("subspace path requires conserved-sector metadata, which this model lacks")]
    SubspaceUnavailable,
    #[error("full unitary requested from a propagator that covers only part of the space")]
    PartialPropagator,
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("subspace basis is not orthonormal (Gram error {0:.3e})")]
    NonOrthonormalBasis(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

pub type Result<T> = std::result::Result<T, EvolutionError>;

/// Uniform samples `t_i = i t_max / n_steps`, `i = 0..=n_steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_max: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        if !t_max.is_finite() || t_max < 0.0 {
            return Err(EvolutionError::InvalidGrid(format!("t_max = {t_max}")));
        }
        if n_steps > 0 && t_max == 0.0 {
            return Err(EvolutionError::InvalidGrid(
                "t_max must be positive when n_steps > 0".into(),
            ));
        }
        Ok(Self { t_max, n_steps })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        if self.n_steps == 0 {
            0.0
        } else {
            self.t_max / self.n_steps as f64
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps)
            .map(|i| {
                if i == self.n_steps {
                    self.t_max
                } else {
                    i as f64 * self.dt()
                }
            })
            .collect()
    }
}

/// Spectral factorization of one invariant block of the Hamiltonian.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    /// Computational-basis indices spanned by the block.
    pub indices: Vec<usize>,
    pub eigen: HermitianEigen,
}

/// `exp(-i H t)` from a one-time eigendecomposition, possibly restricted to
/// a set of invariant sectors.
#[derive(Debug, Clone)]
pub struct Propagator {
    dimension: usize,
    blocks: Vec<SpectralBlock>,
    /// Basis indices not covered by any block.
    uncovered: Vec<usize>,
}

impl Propagator {
    /// Factorizes the whole Hamiltonian.
    pub fn dense(hamiltonian: &ComplexMatrix) -> Result<Self> {
        let dimension = hamiltonian.rows();
        Ok(Self {
            dimension,
            blocks: vec![SpectralBlock {
                indices: (0..dimension).collect(),
                eigen: hermitian_eig(hamiltonian)?,
            }],
            uncovered: Vec::new(),
        })
    }

    /// Factorizes the given invariant sectors only.
    pub fn sectors(hamiltonian: &ComplexMatrix, sectors: &[&[usize]]) -> Result<Self> {
        let blocks = sectors
            .iter()
            .map(|indices| {
                Ok(SpectralBlock {
                    indices: indices.to_vec(),
                    eigen: hermitian_eig(&hamiltonian.submatrix(indices))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut covered = vec![false; hamiltonian.rows()];
        for block in &blocks {
            for &i in &block.indices {
                covered[i] = true;
            }
        }
        let uncovered = (0..covered.len()).filter(|&i| !covered[i]).collect();
        Ok(Self {
            dimension: hamiltonian.rows(),
            blocks,
            uncovered,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// Total dimension of the factorized blocks.
    pub fn factorized_dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.indices.len()).sum()
    }

    /// Dense `exp(-i H t)`; only available when every sector is factorized.
    pub fn unitary(&self, t: f64) -> Result<ComplexMatrix> {
        if self.factorized_dimension() != self.dimension {
            return Err(EvolutionError::PartialPropagator);
        }
        let mut u = ComplexMatrix::zeros(self.dimension, self.dimension);
        for block in &self.blocks {
            let local = block
                .eigen
                .reconstruct_with(|lambda| Complex64::from_polar(1.0, -lambda * t));
            for (a, &i) in block.indices.iter().enumerate() {
                for (b, &j) in block.indices.iter().enumerate() {
                    u[(i, j)] = local[(a, b)];
                }
            }
        }
        Ok(u)
    }
}

/// Per-sector factorization for models with sector metadata, restricted to
/// the sectors the initial pair occupies; dense factorization otherwise.
pub fn make_propagator(model: &Model) -> Result<Propagator> {
    match model.sector_basis() {
        Some(sectors) => {
            let touched = touched_sectors(model, sectors);
            let chosen: Vec<&[usize]> = touched.iter().map(|&k| sectors[k].as_slice()).collect();
            Propagator::sectors(model.hamiltonian(), &chosen)
        }
        None => Propagator::dense(model.hamiltonian()),
    }
}

fn touched_sectors(model: &Model, sectors: &[Vec<usize>]) -> Vec<usize> {
    let joints: Vec<PureState> = model.initial_pair().iter().map(|p| p.joint()).collect();
    (0..sectors.len())
        .filter(|&k| {
            joints.iter().any(|psi| {
                sectors[k]
                    .iter()
                    .any(|&i| psi.amplitudes()[i].norm_sqr() > 0.0)
            })
        })
        .collect()
}

/// `V exp(-i Lambda t) V^dagger psi0`, applied block by block.
pub fn evolve_state(prop: &Propagator, psi0: &PureState, t: f64) -> Result<PureState> {
    if psi0.dim() != prop.dimension {
        return Err(EvolutionError::DimensionMismatch {
            expected: prop.dimension,
            found: psi0.dim(),
        });
    }
    let input = psi0.amplitudes();
    let leak: f64 = prop.uncovered.iter().map(|&i| input[i].norm_sqr()).sum();
    if leak > SECTOR_LEAK_TOL {
        return Err(EvolutionError::OutsideSectors { weight: leak });
    }
    let mut out = DVector::<Complex64>::zeros(prop.dimension);
    for block in &prop.blocks {
        let local = DVector::from_iterator(
            block.indices.len(),
            block.indices.iter().map(|&i| input[i]),
        );
        let v = block.eigen.vectors.inner();
        let mut coefficients = v.ad_mul(&local);
        for (c, &lambda) in coefficients.iter_mut().zip(&block.eigen.values) {
            *c *= Complex64::from_polar(1.0, -lambda * t);
        }
        let evolved = v * coefficients;
        for (k, &i) in block.indices.iter().enumerate() {
            out[i] = evolved[k];
        }
    }
    Ok(PureState::from_vector_unchecked(out, psi0.dims().to_vec()))
}

/// Operator `B C B^dagger` carried by an orthonormal basis `B` (columns are
/// full-space vectors) and a small coefficient matrix `C`.
#[derive(Debug, Clone)]
pub struct SubspaceOperator {
    basis: ComplexMatrix,
    coefficients: ComplexMatrix,
}

impl SubspaceOperator {
    pub fn new(basis: ComplexMatrix, coefficients: ComplexMatrix) -> Result<Self> {
        if coefficients.rows() != basis.cols() || !coefficients.is_square() {
            return Err(EvolutionError::DimensionMismatch {
                expected: basis.cols(),
                found: coefficients.rows(),
            });
        }
        let op = Self {
            basis,
            coefficients,
        };
        let gram = op.gram_error();
        if gram > SUBSPACE_GRAM_TOL {
            return Err(EvolutionError::NonOrthonormalBasis(gram));
        }
        Ok(op)
    }

    /// Basis made of computational-basis vectors `|indices[k]>`.
    pub fn from_coordinates(full_dim: usize, indices: &[usize], coefficients: ComplexMatrix) -> Result<Self> {
        let mut basis = ComplexMatrix::zeros(full_dim, indices.len());
        for (k, &i) in indices.iter().enumerate() {
            basis[(i, k)] = Complex64::new(1.0, 0.0);
        }
        Self::new(basis, coefficients)
    }

    pub fn rank_bound(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn coefficients(&self) -> &ComplexMatrix {
        &self.coefficients
    }

    /// `max |B^dagger B - I|`.
    pub fn gram_error(&self) -> f64 {
        let gram = &self.basis.adjoint() * &self.basis;
        gram.max_abs_diff(&ComplexMatrix::identity(self.basis.cols()))
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        &(&self.basis * &self.coefficients) * &self.basis.adjoint()
    }

    /// Equal to the trace norm of the dense operator for an orthonormal basis.
    pub fn trace_norm(&self) -> Result<f64> {
        Ok(crate::linalg::trace_norm(&self.coefficients)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathChoice {
    Dense,
    Subspace,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathUsed {
    Dense,
    Subspace,
}

impl PathUsed {
    pub fn as_str(&self) -> &'static str {
        match self {
            PathUsed::Dense => "dense",
            PathUsed::Subspace => "subspace",
        }
    }
}

/// Joint states of the pair at one time, in working coordinates.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub states: [DensityMatrix; 2],
}

/// Evolves a model's initial pair and exposes states in the coordinates the
/// diagnostics run on.
#[derive(Debug, Clone)]
pub struct Evolver {
    path: PathUsed,
    propagator: Propagator,
    initial: [PureState; 2],
    /// Full-space index of each working coordinate; `None` on the dense path.
    coordinates: Option<Vec<usize>>,
    hamiltonian: ComplexMatrix,
    bipartition: Bipartition,
    full_bipartition: Bipartition,
}

impl Evolver {
    pub fn new(model: &Model, choice: PathChoice) -> Result<Self> {
        let initial = [model.initial_pair()[0].joint(), model.initial_pair()[1].joint()];
        let full_bp = model.bipartition();
        let path = match choice {
            PathChoice::Dense => PathUsed::Dense,
            PathChoice::Subspace => {
                if model.sector_basis().is_none() {
                    return Err(EvolutionError::SubspaceUnavailable);
                }
                PathUsed::Subspace
            }
            PathChoice::Auto => {
                if model.sector_basis().is_some() {
                    PathUsed::Subspace
                } else {
                    PathUsed::Dense
                }
            }
        };
        match path {
            PathUsed::Dense => Ok(Self {
                path,
                propagator: Propagator::dense(model.hamiltonian())?,
                initial,
                coordinates: None,
                hamiltonian: model.hamiltonian().clone(),
                bipartition: full_bp,
                full_bipartition: full_bp,
            }),
            PathUsed::Subspace => {
                let propagator = make_propagator(model)?;
                let de = full_bp.d_environment();
                let mut env: Vec<usize> = propagator
                    .blocks()
                    .iter()
                    .flat_map(|b| b.indices.iter().map(|&i| i % de))
                    .collect();
                env.sort_unstable();
                env.dedup();
                let coordinates: Vec<usize> = (0..full_bp.d_system())
                    .flat_map(|s| env.iter().map(move |&e| s * de + e))
                    .collect();
                Ok(Self {
                    path,
                    propagator,
                    initial,
                    hamiltonian: model.hamiltonian().submatrix(&coordinates),
                    coordinates: Some(coordinates),
                    bipartition: Bipartition::new(full_bp.d_system(), env.len())?,
                    full_bipartition: full_bp,
                })
            }
        }
    }

    pub fn path(&self) -> PathUsed {
        self.path
    }

    pub fn propagator(&self) -> &Propagator {
        &self.propagator
    }

    /// Hamiltonian restricted to the working coordinates.
    pub fn working_hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// Bipartition of the working coordinates.
    pub fn working_bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn full_bipartition(&self) -> Bipartition {
        self.full_bipartition
    }

    /// Full-space index of each working coordinate (subspace path only).
    pub fn coordinates(&self) -> Option<&[usize]> {
        self.coordinates.as_deref()
    }

    /// Both joint pure states at time `t` on the full space.
    pub fn joint_states(&self, t: f64) -> Result<[PureState; 2]> {
        Ok([
            evolve_state(&self.propagator, &self.initial[0], t)?,
            evolve_state(&self.propagator, &self.initial[1], t)?,
        ])
    }

    pub fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let [a, b] = self.joint_states(t)?;
        let compress = |psi: PureState| -> DensityMatrix {
            match &self.coordinates {
                None => psi.density(),
                Some(coords) => {
                    let local = DVector::from_iterator(
                        coords.len(),
                        coords.iter().map(|&i| psi.amplitudes()[i]),
                    );
                    PureState::from_vector_unchecked(local, self.bipartition.dims()).density()
                }
            }
        };
        Ok(Snapshot {
            t,
            states: [compress(a), compress(b)],
        })
    }

    /// Lifts an operator in working coordinates back to the full space.
    pub fn lift(&self, op: ComplexMatrix) -> Result<SubspaceOperator> {
        let full = self.full_bipartition.joint_dim();
        match &self.coordinates {
            Some(coords) => SubspaceOperator::from_coordinates(full, coords, op),
            None => {
                let all: Vec<usize> = (0..full).collect();
                SubspaceOperator::from_coordinates(full, &all, op)
            }
        }
    }

    /// System trace distance of the pair at `t`.
    pub fn d_system(&self, t: f64) -> Result<f64> {
        let snap = self.snapshot(t)?;
        let keep = crate::linalg::Subsystem::System;
        let a = snap.states[0].reduce(self.bipartition, keep)?;
        let b = snap.states[1].reduce(self.bipartition, keep)?;
        Ok(diagnostics::trace_distance(&a, &b)?)
    }

    /// `sigma(t)` by a symmetric difference of half-width `h`, independent of
    /// any output grid.
    pub fn local_sigma(&self, t: f64, h: f64) -> Result<f64> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(EvolutionError::InvalidGrid(format!("difference step must be positive, got {h}")));
        }
        Ok((self.d_system(t + h)? - self.d_system(t - h)?) / (2.0 * h))
    }

    pub fn instant(&self, t: f64) -> Result<InstantDiagnostics> {
        let snap = self.snapshot(t)?;
        Ok(diagnostics::evaluate_instant(
            t,
            &self.hamiltonian,
            self.bipartition,
            &snap.states[0],
            &snap.states[1],
        )?)
    }
}

/// Every diagnostic column for one pair of evolving states.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub rows: Vec<DiagnosticsRow>,
    pub path_used: PathUsed,
    pub grid: TimeGrid,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn d_system(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.d_system).collect()
    }

    pub fn sigma(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sigma).collect()
    }

    /// `max(sigma - bound_total)` over rows.
    pub fn max_bound_violation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.sigma - r.bound_total)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evolves both members of the model's initial pair over `grid` and records
/// every diagnostic. Grid times are evaluated in parallel; row order follows
/// the grid.
pub fn run_trajectory(model: &Model, grid: &TimeGrid, path: PathChoice) -> Result<TrajectoryRecord> {
    let evolver = Evolver::new(model, path)?;
    run_with(&evolver, grid)
}

pub fn run_with(evolver: &Evolver, grid: &TimeGrid) -> Result<TrajectoryRecord> {
    let instants = grid
        .times()
        .par_iter()
        .map(|&t| evolver.instant(t))
        .collect::<Result<Vec<_>>>()?;
    let rows = diagnostics::assemble_rows(&instants, grid.dt())?;
    Ok(TrajectoryRecord {
        rows,
        path_used: evolver.path(),
        grid: *grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli_z;
    use crate::model::{build_chain_model, ChainParams};

    #[test]
    fn pauli_z_propagator() {
        let prop = Propagator::dense(&pauli_z()).unwrap();
        let t = 0.83;
        let u = prop.unitary(t).unwrap();
        assert!((u[(0, 0)] - Complex64::from_polar(1.0, -t)).norm() < 1e-15);
        assert!((u[(1, 1)] - Complex64::from_polar(1.0, t)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn unitary_at_zero_is_identity() {
        let model = build_chain_model(ChainParams {
            n_total: 4,
            ..ChainParams::default()
        })
        .unwrap();
        let u = Propagator::dense(model.hamiltonian()).unwrap().unitary(0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(16)) < 1e-12);
        let partial = make_propagator(&model).unwrap();
        assert!(matches!(partial.unitary(0.0), Err(EvolutionError::PartialPropagator)));
    }

    #[test]
    fn paper_pair_touches_two_sectors() {
        let model = build_chain_model(ChainParams::default()).unwrap();
        let prop = make_propagator(&model).unwrap();
        assert_eq!(prop.blocks().len(), 2);
        assert_eq!(prop.factorized_dimension(), 11);
        let ev = Evolver::new(&model, PathChoice::Auto).unwrap();
        assert_eq!(ev.path(), PathUsed::Subspace);
        assert_eq!(ev.working_bipartition().joint_dim(), 20);
    }

    #[test]
    fn state_outside_sectors_rejected() {
        let model = build_chain_model(ChainParams {
            n_total: 3,
            ..ChainParams::default()
        })
        .unwrap();
        let prop = make_propagator(&model).unwrap();
        let psi = PureState::basis(8, 7);
        assert!(matches!(
            evolve_state(&prop, &psi, 1.0),
            Err(EvolutionError::OutsideSectors { .. })
        ));
        assert!(matches!(
            evolve_state(&prop, &PureState::basis(4, 0), 1.0),
            Err(EvolutionError::DimensionMismatch { expected: 8, found: 4 })
        ));
    }

    #[test]
    fn time_grid_samples() {
        let grid = TimeGrid::new(9.0, 2000).unwrap();
        let times = grid.times();
        assert_eq!(times.len(), 2001);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), 9.0);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(TimeGrid::new(0.0, 0).unwrap().times(), vec![0.0]);
        assert!(TimeGrid::new(-1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 10).is_err());
    }

    #[test]
    fn subspace_operator_round_trip() {
        let coeff = ComplexMatrix::from_real_diagonal(&[0.5, -0.25]);
        let op = SubspaceOperator::from_coordinates(4, &[1, 3], coeff).unwrap();
        let dense = op.to_dense();
        assert_eq!(dense[(1, 1)], Complex64::new(0.5, 0.0));
        assert_eq!(dense[(3, 3)], Complex64::new(-0.25, 0.0));
        assert!((op.trace_norm().unwrap() - 0.75).abs() < 1e-15);
        let skewed = ComplexMatrix::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(
            SubspaceOperator::new(skewed, ComplexMatrix::identity(2)),
            Err(EvolutionError::NonOrthonormalBasis(_))
        ));
    }
}
