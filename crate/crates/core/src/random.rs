//! Seeded random matrices, states and generic models for property suites.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{Bipartition, Complex64, ComplexMatrix, DensityMatrix, PureState};
use crate::model::{Model, ProductInput, Result};

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

/// Complex Gaussian with `E|z|^2 = 1`.
fn complex_normal(rng: &mut SimRng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre matrix with unit-variance complex entries.
pub fn complex_matrix(rows: usize, cols: usize, rng: &mut SimRng) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_normal(rng);
        }
    }
    m
}

/// Hermitian matrix whose independent entries have unit variance: real
/// normal diagonal, complex normal upper triangle.
pub fn hermitian(dim: usize, rng: &mut SimRng) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        h[(i, i)] = Complex64::new(normal(rng), 0.0);
        for j in i + 1..dim {
            let z = complex_normal(rng);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

/// Haar-random pure state.
pub fn haar_state(dim: usize, rng: &mut SimRng) -> PureState {
    let amplitudes = (0..dim).map(|_| complex_normal(rng)).collect();
    PureState::normalized(amplitudes, vec![dim]).expect("nonzero Gaussian vector")
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fixed).
pub fn unitary(dim: usize, rng: &mut SimRng) -> ComplexMatrix {
    let qr = complex_matrix(dim, dim, rng).into_inner().qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_inner(q)
}

/// Full-rank density matrix `G G^dagger / Tr`.
pub fn density_matrix(dim: usize, rng: &mut SimRng) -> DensityMatrix {
    let g = complex_matrix(dim, dim, rng);
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m.scale_real(1.0 / tr).hermitian_part(), vec![dim])
        .expect("Wishart matrix is a valid state")
}

/// Random Hermitian dynamics on `d_system (x) d_environment` with Haar
/// product inputs and no interaction decomposition.
pub fn generic_model(d_system: usize, d_environment: usize, rng: &mut SimRng) -> Result<Model> {
    let bp = Bipartition::new(d_system, d_environment)?;
    let h = hermitian(bp.joint_dim(), rng);
    let mut input = || ProductInput {
        system: haar_state(d_system, rng),
        environment: haar_state(d_environment, rng),
    };
    let pair = [input(), input()];
    Model::new(h, bp, pair, Vec::new())
}
