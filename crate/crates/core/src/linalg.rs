//! Dense complex linear algebra and quantum-state primitives.
//!
//! Everything else in the crate is expressed in terms of [`ComplexMatrix`],
//! [`PureState`] and [`DensityMatrix`]. Tensor products always put the system
//! factor leftmost, so a joint index is `s * d_environment + e`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::linalg::SVD;
use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
use thiserror::Error;

/// Elementwise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the trace and norm of states.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Most negative eigenvalue accepted in a density matrix.
pub const NEGATIVITY_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

const SVD_MAX_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("expected a square matrix, found {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A - A^dagger| = {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{found} entries cannot fill a {rows}x{cols} matrix")]
    ShapeMismatch { rows: usize, cols: usize, found: usize },
    #[error("matrix dimensions must be positive")]
    EmptyMatrix,
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("state is not normalized: |psi| = {0}")]
    NotNormalized(f64),
    #[error("singular value decomposition failed to converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dense complex matrix in double precision.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    /// Builds a matrix from entries listed in row-major order.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::ShapeMismatch {
                rows,
                cols,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_real_diagonal(diagonal: &[f64]) -> Self {
        let n = diagonal.len();
        Self::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diagonal[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Rank-one projector `|v><v|` (no normalization applied).
    pub fn outer(v: &DVector<Complex64>) -> Self {
        Self(v * v.adjoint())
    }

    pub fn from_inner(inner: DMatrix<Complex64>) -> Self {
        Self(inner)
    }

    pub fn inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        self.0.transpose().iter().copied().collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `[self, other] = self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Largest elementwise deviation `max |A - A^dagger|`.
    pub fn max_asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_asymmetry() <= tol
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.0.shape(), other.0.shape(), "shape mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * v
    }

    /// Principal submatrix on the given index set, in the order given.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        Self::from_fn(k, k, |i, j| self.0[(indices[i], indices[j])])
    }

    /// Number of singular values above `threshold`.
    pub fn numerical_rank(&self, threshold: f64) -> Result<usize> {
        Ok(singular_values(self)?
            .into_iter()
            .filter(|&s| s > threshold)
            .count())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}x{}", self.rows(), self.cols())?;
        if self.rows() * self.cols() <= 64 {
            write!(f, " {:?}", self.to_row_major())?;
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, index: (usize, usize)) -> &Complex64 {
        &self.0[index]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, index: (usize, usize)) -> &mut Complex64 {
        &mut self.0[index]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 + rhs.0)
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(self.0 - rhs.0)
    }
}

/// Which tensor factor survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    System,
    Environment,
}

/// System/environment split of a joint Hilbert space; the system is the
/// leftmost factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bipartition {
    d_system: usize,
    d_environment: usize,
}

impl Bipartition {
    pub fn new(d_system: usize, d_environment: usize) -> Result<Self> {
        if d_system == 0 || d_environment == 0 {
            return Err(LinalgError::EmptyMatrix);
        }
        Ok(Self {
            d_system,
            d_environment,
        })
    }

    pub fn d_system(&self) -> usize {
        self.d_system
    }

    pub fn d_environment(&self) -> usize {
        self.d_environment
    }

    pub fn joint_dim(&self) -> usize {
        self.d_system * self.d_environment
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.d_system, self.d_environment]
    }
}

/// Normalized state vector over a declared tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
    dims: Vec<usize>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let state = Self {
            amplitudes: DVector::from_vec(amplitudes),
            dims,
        };
        state.check_dims()?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(LinalgError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let mut v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(LinalgError::NotNormalized(norm));
        }
        v.unscale_mut(norm);
        let state = Self {
            amplitudes: v,
            dims,
        };
        state.check_dims()?;
        Ok(state)
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        Self {
            amplitudes: v,
            dims: vec![dim],
        }
    }

    pub(crate) fn from_vector_unchecked(amplitudes: DVector<Complex64>, dims: Vec<usize>) -> Self {
        Self { amplitudes, dims }
    }

    fn check_dims(&self) -> Result<()> {
        let product: usize = self.dims.iter().product();
        if product != self.amplitudes.len() || self.dims.is_empty() {
            return Err(LinalgError::DimensionMismatch {
                expected: product,
                found: self.amplitudes.len(),
            });
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `self (x) other`, with `self` as the left factor.
    pub fn tensor(&self, other: &Self) -> Self {
        let (a, b) = (&self.amplitudes, &other.amplitudes);
        let v = DVector::from_fn(a.len() * b.len(), |k, _| a[k / b.len()] * b[k % b.len()]);
        let dims = self.dims.iter().chain(other.dims.iter()).copied().collect();
        Self {
            amplitudes: v,
            dims,
        }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            matrix: ComplexMatrix::outer(&self.amplitudes),
            dims: self.dims.clone(),
        }
    }
}

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix, dims: Vec<usize>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let product: usize = dims.iter().product();
        if product != matrix.rows() || dims.is_empty() {
            return Err(LinalgError::DimensionMismatch {
                expected: product,
                found: matrix.rows(),
            });
        }
        let asym = matrix.max_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(LinalgError::NotHermitian {
                max_asymmetry: asym,
            });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > NORMALIZATION_TOL || trace.im.abs() > NORMALIZATION_TOL {
            return Err(LinalgError::InvalidDensity(format!(
                "trace {trace} differs from 1"
            )));
        }
        let lowest = hermitian_eigenvalues(&matrix)?
            .first()
            .copied()
            .unwrap_or(0.0);
        if lowest < -NEGATIVITY_TOL {
            return Err(LinalgError::InvalidDensity(format!(
                "negative eigenvalue {lowest:.3e}"
            )));
        }
        Ok(Self { matrix, dims })
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
            dims: vec![dim],
        }
    }

    pub(crate) fn new_unchecked(matrix: ComplexMatrix, dims: Vec<usize>) -> Self {
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// `Tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        let m = self.matrix.inner();
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Tr[rho O]`.
    pub fn expectation(&self, observable: &ComplexMatrix) -> Complex64 {
        (self.matrix.inner() * observable.inner()).trace()
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let dims = self.dims.iter().chain(other.dims.iter()).copied().collect();
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            dims,
        }
    }

    /// Reduced state on one side of `bp`.
    pub fn reduce(&self, bp: Bipartition, keep: Subsystem) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, bp, keep)?;
        let dim = m.rows();
        Ok(Self::new_unchecked(m, vec![dim]))
    }
}

/// Kronecker product `a (x) b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Spectral factorization of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let v = self.vectors.inner();
        let mut scaled = v.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        ComplexMatrix(scaled * v.adjoint())
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        });
    }
    let asym = h.max_asymmetry();
    let scale = h.max_abs().max(1.0);
    if asym > HERMITIAN_TOL * scale {
        return Err(LinalgError::NotHermitian {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

/// Eigendecomposition `h = V diag(lambda) V^dagger` with ascending eigenvalues.
///
/// Inputs whose asymmetry exceeds `1e-12` (relative to the largest entry once
/// that exceeds one) are rejected; accepted inputs are symmetrized first.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    let eig = h.hermitian_part().0.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(h.rows(), h.rows(), |i, j| {
        eig.eigenvectors[(i, order[j])]
    });
    Ok(HermitianEigen {
        values,
        vectors: ComplexMatrix(vectors),
    })
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    let mut values: Vec<f64> = h
        .hermitian_part()
        .0
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Singular values in no particular order.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new_unordered(
        a.0.clone(),
        false,
        false,
        f64::EPSILON,
        SVD_MAX_ITERATIONS,
    )
    .ok_or(LinalgError::NoConvergence)?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Trace norm `Tr sqrt(A^dagger A)`, the sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    Ok(singular_values(a)?.into_iter().sum())
}

/// Partial trace over the factor not named by `keep`.
pub fn partial_trace(m: &ComplexMatrix, bp: Bipartition, keep: Subsystem) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if m.rows() != bp.joint_dim() {
        return Err(LinalgError::DimensionMismatch {
            expected: bp.joint_dim(),
            found: m.rows(),
        });
    }
    let (ds, de) = (bp.d_system, bp.d_environment);
    let inner = &m.0;
    let out = match keep {
        Subsystem::System => DMatrix::from_fn(ds, ds, |a, b| {
            (0..de).map(|e| inner[(a * de + e, b * de + e)]).sum()
        }),
        Subsystem::Environment => DMatrix::from_fn(de, de, |e, f| {
            (0..ds).map(|s| inner[(s * de + e, s * de + f)]).sum()
        }),
    };
    Ok(ComplexMatrix(out))
}

/// Shannon entropy in bits of a spectrum, dropping eigenvalues below
/// [`ENTROPY_CUTOFF`].
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy `-Tr[rho log2 rho]` in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    // Density matrices are Hermitian by construction.
    let values = hermitian_eigenvalues(&rho.matrix).expect("density matrix is Hermitian");
    spectrum_entropy(&values)
}

/// Pauli matrices.
pub fn pauli_x() -> ComplexMatrix {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    ComplexMatrix::new(2, 2, vec![o, l, l, o]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    let o = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    ComplexMatrix::new(2, 2, vec![o, -i, i, o]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2));
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_pauli_z_is_diagonal() {
        let zz = kron(&pauli_z(), &pauli_z());
        assert_eq!(zz, ComplexMatrix::from_real_diagonal(&[1.0, -1.0, -1.0, 1.0]));
    }

    #[test]
    fn kron_block_structure() {
        let a = ComplexMatrix::from_fn(2, 2, |i, j| c((i * 2 + j) as f64 + 1.0, 0.5));
        let b = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64));
        let k = kron(&a, &b);
        assert_eq!((k.rows(), k.cols()), (6, 6));
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        assert_eq!(k[(i * 3 + p, j * 3 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn pauli_spectra() {
        let ez = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(ez.values, vec![-1.0, 1.0]);
        let ex = hermitian_eig(&pauli_x()).unwrap();
        assert!((ex.values[0] + 1.0).abs() < 1e-15 && (ex.values[1] - 1.0).abs() < 1e-15);
        // Eigenvector for -1 is |->, for +1 is |+>, up to phase.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = ex.vectors.inner();
        let minus_overlap = (v[(0, 0)] * s - v[(1, 0)] * s).norm();
        let plus_overlap = (v[(0, 1)] * s + v[(1, 1)] * s).norm();
        assert!((minus_overlap - 1.0).abs() < 1e-12);
        assert!((plus_overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_input_reports_asymmetry() {
        let m = ComplexMatrix::new(2, 2, vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        match hermitian_eig(&m) {
            Err(LinalgError::NotHermitian { max_asymmetry }) => {
                assert!((max_asymmetry - 0.5).abs() < 1e-15)
            }
            other => panic!("unexpected {other:?}"),
        }
        let msg = hermitian_eig(&m).unwrap_err().to_string();
        assert!(msg.contains("5.000e-1"), "{msg}");
    }

    #[test]
    fn trace_norm_simple_cases() {
        assert_eq!(trace_norm(&ComplexMatrix::zeros(3, 3)).unwrap(), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -2.0]);
        assert!((trace_norm(&d).unwrap() - 3.0).abs() < 1e-14);
        assert!(matches!(
            trace_norm(&ComplexMatrix::zeros(2, 3)),
            Err(LinalgError::NotSquare { .. })
        ));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)], vec![2, 2])
            .unwrap();
        let bp = Bipartition::new(2, 2).unwrap();
        let rs = partial_trace(bell.density().matrix(), bp, Subsystem::System).unwrap();
        assert!(rs.max_abs_diff(DensityMatrix::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_mismatched_dimension() {
        let bp = Bipartition::new(2, 3).unwrap();
        assert!(matches!(
            partial_trace(&ComplexMatrix::identity(4), bp, Subsystem::System),
            Err(LinalgError::DimensionMismatch { expected: 6, found: 4 })
        ));
    }

    #[test]
    fn entropy_of_standard_states() {
        assert!(von_neumann_entropy(&PureState::basis(4, 2).density()).abs() < 1e-15);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(2)) - 1.0).abs() < 1e-14);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(4)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn density_validation() {
        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(
            DensityMatrix::new(bad_trace, vec![2]),
            Err(LinalgError::InvalidDensity(_))
        ));
        let negative = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(
            DensityMatrix::new(negative, vec![2]),
            Err(LinalgError::InvalidDensity(_))
        ));
        let mixed = ComplexMatrix::from_real_diagonal(&[0.25, 0.75]);
        assert!(DensityMatrix::new(mixed.clone(), vec![3]).is_err());
        let rho = DensityMatrix::new(mixed, vec![2]).unwrap();
        assert!((trace_norm(rho.matrix()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn pure_state_requires_unit_norm() {
        assert!(matches!(
            PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)], vec![2]),
            Err(LinalgError::NotNormalized(_))
        ));
        let s = PureState::normalized(vec![c(1.0, 0.0), c(0.0, 1.0)], vec![2]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn row_major_round_trip() {
        let entries: Vec<Complex64> = (0..6).map(|k| c(k as f64, -(k as f64))).collect();
        let m = ComplexMatrix::new(2, 3, entries.clone()).unwrap();
        assert_eq!(m[(0, 2)], entries[2]);
        assert_eq!(m[(1, 0)], entries[3]);
        assert_eq!(m.to_row_major(), entries);
        assert!(matches!(
            ComplexMatrix::new(2, 2, entries),
            Err(LinalgError::ShapeMismatch { .. })
        ));
    }
}
