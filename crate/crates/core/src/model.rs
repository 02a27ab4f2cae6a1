//! XX spin-chain Hamiltonians, initial state pairs and user-supplied models.
//!
//! Basis convention: `|0>` is the `sigma^z = +1` state and an excitation is a
//! site in `|1>`. Site 0 is the open system and the leftmost tensor factor;
//! in a computational basis index it is the most significant bit.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::linalg::{
    kron, partial_trace, pauli_x, pauli_y, pauli_z, Bipartition, Complex64, ComplexMatrix,
    DensityMatrix, LinalgError, PureState, Subsystem, HERMITIAN_TOL,
};

/// Largest asymmetry accepted in a user-supplied Hamiltonian.
pub const MODEL_HERMITIAN_TOL: f64 = 1e-10;
/// Second Schmidt coefficient above which an initial state counts as correlated.
pub const PRODUCT_STATE_TOL: f64 = 1e-8;
/// Largest deviation from unit norm that is silently normalized away on load.
pub const LOAD_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("site {site} out of range for a chain of {n_total} spins")]
    SiteOutOfRange { site: usize, n_total: usize },
    #[error("invalid chain parameters: {0}")]
    InvalidParams(String),
    #[error("cannot read model file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file does not parse (line {line}, column {column}): {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{location}: Hamiltonian is not Hermitian (max |H - H^dagger| = {max_asymmetry:.3e})")]
    NonHermitian { location: String, max_asymmetry: f64 },
    #[error("{location}: dimension mismatch, expected {expected}, found {found}")]
    DimensionMismatch {
        location: String,
        expected: usize,
        found: usize,
    },
    #[error("{location}: initial joint state is correlated (second Schmidt coefficient {schmidt:.3e}); initial system-environment correlations are not allowed")]
    InitialCorrelations { location: String, schmidt: f64 },
    #[error("{location}: invalid state: {message}")]
    InvalidState { location: String, message: String },
    #[error("{location}: interaction terms do not reproduce the Hamiltonian up to an environment-local part (residual {residual:.3e})")]
    InteractionMismatch { location: String, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    fn matrix(self) -> ComplexMatrix {
        match self {
            Axis::X => pauli_x(),
            Axis::Y => pauli_y(),
            Axis::Z => pauli_z(),
        }
    }
}

/// Pauli operator on `site` of an `n_total`-spin register, identity elsewhere.
pub fn pauli_on_site(axis: Axis, site: usize, n_total: usize) -> Result<ComplexMatrix> {
    if site >= n_total {
        return Err(ModelError::SiteOutOfRange { site, n_total });
    }
    let left = ComplexMatrix::identity(1 << site);
    let right = ComplexMatrix::identity(1 << (n_total - site - 1));
    Ok(kron(&kron(&left, &axis.matrix()), &right))
}

/// Single-site operators the chain Hamiltonian is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OperatorConvention {
    /// Spin-1/2 operators `S = sigma / 2`: hopping amplitude `J`, maximum
    /// single-excitation group velocity `2J`, edge detuning `2B`.
    #[default]
    Spin,
    /// Pauli matrices as written: hopping amplitude `4J`, edge detuning `4B`.
    Pauli,
}

impl OperatorConvention {
    /// Scale `s` of the single-site operators, `S = s sigma`.
    pub fn scale(self) -> f64 {
        match self {
            OperatorConvention::Spin => 0.5,
            OperatorConvention::Pauli => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            OperatorConvention::Spin => "spin",
            OperatorConvention::Pauli => "pauli",
        }
    }
}

/// Parameters of the chain `H = H_SE + H_E`, with `N + 1 = n_total` spins:
///
/// `H_SE = -2 J0 (S_0^x S_1^x + S_0^y S_1^y)`,
/// `H_E = -2 J sum_n (S_n^x S_{n+1}^x + S_n^y S_{n+1}^y) - 2 B sum_{n>=1} S_n^z`,
///
/// with `S = s sigma` fixed by [`OperatorConvention`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainParams {
    pub n_total: usize,
    /// Environment coupling `J`; time is measured in units of `1/J`.
    pub j_env: f64,
    /// System-environment coupling `J0`.
    pub j_sys: f64,
    pub b_field: f64,
    /// Also apply the field to the system spin.
    pub field_on_system: bool,
    pub convention: OperatorConvention,
}

impl Default for ChainParams {
    fn default() -> Self {
        Self {
            n_total: 10,
            j_env: 1.0,
            j_sys: 1.0,
            b_field: 0.01,
            field_on_system: false,
            convention: OperatorConvention::Spin,
        }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_total < 2 {
            return Err(ModelError::InvalidParams(format!(
                "n_total must be at least 2, got {}",
                self.n_total
            )));
        }
        if self.n_total > 20 {
            return Err(ModelError::InvalidParams(format!(
                "n_total = {} exceeds the dense-storage limit of 20",
                self.n_total
            )));
        }
        if self.j_env == 0.0 || !self.j_env.is_finite() {
            return Err(ModelError::InvalidParams("j_env must be finite and nonzero".into()));
        }
        if !self.j_sys.is_finite() || !self.b_field.is_finite() {
            return Err(ModelError::InvalidParams("couplings must be finite".into()));
        }
        Ok(())
    }
}

/// One product term `A (x) B` of the system-environment coupling.
#[derive(Debug, Clone)]
pub struct InteractionTerm {
    pub system: ComplexMatrix,
    pub environment: ComplexMatrix,
}

/// Pure product input `|s> (x) |e>`.
#[derive(Debug, Clone)]
pub struct ProductInput {
    pub system: PureState,
    pub environment: PureState,
}

impl ProductInput {
    pub fn joint(&self) -> PureState {
        self.system.tensor(&self.environment)
    }

    pub fn density(&self) -> DensityMatrix {
        self.joint().density()
    }
}

/// Joint Hamiltonian, bipartition, structural metadata and the pair of
/// initial product states to compare.
#[derive(Debug, Clone)]
pub struct Model {
    hamiltonian: ComplexMatrix,
    bipartition: Bipartition,
    interaction_terms: Vec<InteractionTerm>,
    environment_hamiltonian: Option<ComplexMatrix>,
    sector_basis: Option<Vec<Vec<usize>>>,
    initial_pair: [ProductInput; 2],
    chain: Option<ChainParams>,
}

impl Model {
    /// Generic model without sector metadata. Interaction terms, when given,
    /// must reproduce `hamiltonian` up to a term `I (x) M`.
    pub fn new(
        hamiltonian: ComplexMatrix,
        bipartition: Bipartition,
        initial_pair: [ProductInput; 2],
        interaction_terms: Vec<InteractionTerm>,
    ) -> Result<Self> {
        let dim = bipartition.joint_dim();
        if !hamiltonian.is_square() || hamiltonian.rows() != dim {
            return Err(ModelError::DimensionMismatch {
                location: "hamiltonian".into(),
                expected: dim,
                found: hamiltonian.rows(),
            });
        }
        let asym = hamiltonian.max_asymmetry();
        if asym > MODEL_HERMITIAN_TOL {
            return Err(ModelError::NonHermitian {
                location: "hamiltonian".into(),
                max_asymmetry: asym,
            });
        }
        let hamiltonian = hamiltonian.hermitian_part();
        for (k, input) in initial_pair.iter().enumerate() {
            check_input_dims(input, bipartition, &format!("initial_states[{k}]"))?;
        }
        let environment_hamiltonian = if interaction_terms.is_empty() {
            None
        } else {
            Some(environment_residual(&hamiltonian, bipartition, &interaction_terms)?)
        };
        Ok(Self {
            hamiltonian,
            bipartition,
            interaction_terms,
            environment_hamiltonian,
            sector_basis: None,
            initial_pair,
            chain: None,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn bipartition(&self) -> Bipartition {
        self.bipartition
    }

    pub fn interaction_terms(&self) -> &[InteractionTerm] {
        &self.interaction_terms
    }

    /// `M` such that `H = sum_a A_a (x) B_a + I (x) M`, when interaction
    /// terms are known.
    pub fn environment_hamiltonian(&self) -> Option<&ComplexMatrix> {
        self.environment_hamiltonian.as_ref()
    }

    /// Computational-basis index sets of the conserved excitation sectors,
    /// indexed by excitation number.
    pub fn sector_basis(&self) -> Option<&[Vec<usize>]> {
        self.sector_basis.as_deref()
    }

    pub fn initial_pair(&self) -> &[ProductInput; 2] {
        &self.initial_pair
    }

    pub fn initial_densities(&self) -> [DensityMatrix; 2] {
        [self.initial_pair[0].density(), self.initial_pair[1].density()]
    }

    pub fn chain_params(&self) -> Option<&ChainParams> {
        self.chain.as_ref()
    }

    /// Same dynamics, different initial pair.
    pub fn with_initial_pair(&self, pair: [ProductInput; 2]) -> Result<Self> {
        for (k, input) in pair.iter().enumerate() {
            check_input_dims(input, self.bipartition, &format!("initial_states[{k}]"))?;
        }
        Ok(Self {
            initial_pair: pair,
            ..self.clone()
        })
    }

    /// Replaces the system states, keeping each member's environment state.
    pub fn with_system_states(&self, first: PureState, second: PureState) -> Result<Self> {
        let [a, b] = &self.initial_pair;
        self.with_initial_pair([
            ProductInput {
                system: first,
                environment: a.environment.clone(),
            },
            ProductInput {
                system: second,
                environment: b.environment.clone(),
            },
        ])
    }
}

fn check_input_dims(input: &ProductInput, bp: Bipartition, location: &str) -> Result<()> {
    if input.system.dim() != bp.d_system() {
        return Err(ModelError::DimensionMismatch {
            location: format!("{location}.system_state"),
            expected: bp.d_system(),
            found: input.system.dim(),
        });
    }
    if input.environment.dim() != bp.d_environment() {
        return Err(ModelError::DimensionMismatch {
            location: format!("{location}.environment_state"),
            expected: bp.d_environment(),
            found: input.environment.dim(),
        });
    }
    Ok(())
}

/// Returns `M` with `H - sum_a A_a (x) B_a = I (x) M`, or an error if the
/// residual acts nontrivially on the system.
fn environment_residual(
    hamiltonian: &ComplexMatrix,
    bp: Bipartition,
    terms: &[InteractionTerm],
) -> Result<ComplexMatrix> {
    let mut residual = hamiltonian.clone();
    for (k, term) in terms.iter().enumerate() {
        let location = format!("interaction_terms[{k}]");
        if !term.system.is_square() || term.system.rows() != bp.d_system() {
            return Err(ModelError::DimensionMismatch {
                location: format!("{location}.system"),
                expected: bp.d_system(),
                found: term.system.rows(),
            });
        }
        if !term.environment.is_square() || term.environment.rows() != bp.d_environment() {
            return Err(ModelError::DimensionMismatch {
                location: format!("{location}.environment"),
                expected: bp.d_environment(),
                found: term.environment.rows(),
            });
        }
        residual = &residual - &kron(&term.system, &term.environment);
    }
    let env_part = partial_trace(&residual, bp, Subsystem::Environment)?
        .scale_real(1.0 / bp.d_system() as f64);
    let lifted = kron(&ComplexMatrix::identity(bp.d_system()), &env_part);
    let mismatch = residual.max_abs_diff(&lifted);
    if mismatch > MODEL_HERMITIAN_TOL * hamiltonian.max_abs().max(1.0) {
        return Err(ModelError::InteractionMismatch {
            location: "interaction_terms".into(),
            residual: mismatch,
        });
    }
    Ok(env_part)
}

/// Nearest-neighbour XX couplings and longitudinal fields on an `n_sites`
/// register, assembled directly in the computational basis.
///
/// `couplings` holds `(n, m, c)` for `c (sx_n sx_m + sy_n sy_m)`; `fields`
/// holds `(n, c)` for `c sz_n`.
fn xx_register(n_sites: usize, couplings: &[(usize, usize, f64)], fields: &[(usize, f64)]) -> ComplexMatrix {
    let dim = 1usize << n_sites;
    let bit = |state: usize, site: usize| (state >> (n_sites - 1 - site)) & 1;
    let mut h = ComplexMatrix::zeros(dim, dim);
    for state in 0..dim {
        let mut diag = 0.0;
        for &(site, c) in fields {
            diag += if bit(state, site) == 0 { c } else { -c };
        }
        h[(state, state)] += Complex64::new(diag, 0.0);
        for &(n, m, c) in couplings {
            // sx sx + sy sy = 2 (s+ s- + s- s+): swaps an anti-aligned pair.
            if bit(state, n) != bit(state, m) {
                let flipped = state ^ (1 << (n_sites - 1 - n)) ^ (1 << (n_sites - 1 - m));
                h[(flipped, state)] += Complex64::new(2.0 * c, 0.0);
            }
        }
    }
    h
}

/// Builds the chain model with the `|+>, |->` input pair.
pub fn build_chain_model(p: ChainParams) -> Result<Model> {
    p.validate()?;
    let n = p.n_total;
    let n_env = n - 1;

    let scale = p.convention.scale();
    // -2 J (S^x S^x + S^y S^y) = -2 J s^2 (sx sx + sy sy), -2 B S^z = -2 B s sz.
    let xx = |j: f64| -2.0 * j * scale * scale;
    let z = -2.0 * p.b_field * scale;

    let mut couplings = vec![(0, 1, xx(p.j_sys))];
    couplings.extend((1..n - 1).map(|site| (site, site + 1, xx(p.j_env))));
    let mut fields: Vec<(usize, f64)> = (1..n).map(|site| (site, z)).collect();
    if p.field_on_system {
        fields.push((0, z));
    }
    let hamiltonian = xx_register(n, &couplings, &fields);

    let env_couplings: Vec<_> = (0..n_env.saturating_sub(1))
        .map(|site| (site, site + 1, xx(p.j_env)))
        .collect();
    let env_fields: Vec<_> = (0..n_env).map(|site| (site, z)).collect();
    let environment_hamiltonian = xx_register(n_env, &env_couplings, &env_fields);

    let coupling = Complex64::new(xx(p.j_sys), 0.0);
    let mut interaction_terms = vec![
        InteractionTerm {
            system: pauli_x(),
            environment: pauli_on_site(Axis::X, 0, n_env)?.scale(coupling),
        },
        InteractionTerm {
            system: pauli_y(),
            environment: pauli_on_site(Axis::Y, 0, n_env)?.scale(coupling),
        },
    ];
    if p.field_on_system {
        interaction_terms.push(InteractionTerm {
            system: pauli_z(),
            environment: ComplexMatrix::identity(1 << n_env).scale_real(z),
        });
    }

    let mut sectors = vec![Vec::new(); n + 1];
    for state in 0..(1usize << n) {
        sectors[state.count_ones() as usize].push(state);
    }

    debug_assert!(hamiltonian.is_hermitian(HERMITIAN_TOL));
    Ok(Model {
        hamiltonian,
        bipartition: Bipartition::new(2, 1 << n_env)?,
        interaction_terms,
        environment_hamiltonian: Some(environment_hamiltonian),
        sector_basis: Some(sectors),
        initial_pair: paper_initial_pair(n)?,
        chain: Some(p),
    })
}

/// Environment register with every spin in `|0>`.
pub fn environment_vacuum(n_total: usize) -> PureState {
    let n_env = n_total - 1;
    PureState::from_vector_unchecked(PureState::basis(1 << n_env, 0).amplitudes().clone(), vec![2; n_env])
}

/// `|+> (x) |0...0>` and `|-> (x) |0...0>`.
pub fn paper_initial_pair(n_total: usize) -> Result<[ProductInput; 2]> {
    equatorial_pair(0.0, n_total)
}

/// Antipodal equatorial system states `(|0> +- e^{i phi}|1>)/sqrt 2` with the
/// environment in `|0...0>`.
pub fn equatorial_pair(phi: f64, n_total: usize) -> Result<[ProductInput; 2]> {
    if n_total < 2 {
        return Err(ModelError::InvalidParams(format!(
            "n_total must be at least 2, got {n_total}"
        )));
    }
    let phase = Complex64::from_polar(FRAC_1_SQRT_2, phi);
    let zero = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let make = |sign: f64| ProductInput {
        system: PureState::new(vec![zero, phase * sign], vec![2]).expect("unit norm"),
        environment: environment_vacuum(n_total),
    };
    Ok([make(1.0), make(-1.0)])
}

// ----------------------------------------------------------------------------
// Generic model files.

type RawEntry = [f64; 2];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDims {
    system: usize,
    environment: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitialState {
    system_state: Option<Vec<RawEntry>>,
    environment_state: Option<Vec<RawEntry>>,
    joint_state: Option<Vec<RawEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    system: Vec<Vec<RawEntry>>,
    environment: Vec<Vec<RawEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    dims: RawDims,
    hamiltonian: Vec<Vec<RawEntry>>,
    initial_states: Vec<RawInitialState>,
    #[serde(default)]
    interaction_terms: Option<Vec<RawInteraction>>,
}

fn raw_matrix(rows: &[Vec<RawEntry>], expected: usize, location: &str) -> Result<ComplexMatrix> {
    if rows.len() != expected {
        return Err(ModelError::DimensionMismatch {
            location: location.to_string(),
            expected,
            found: rows.len(),
        });
    }
    let mut entries = Vec::with_capacity(expected * expected);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != expected {
            return Err(ModelError::DimensionMismatch {
                location: format!("{location}[{i}]"),
                expected,
                found: row.len(),
            });
        }
        entries.extend(row.iter().map(|&[re, im]| Complex64::new(re, im)));
    }
    Ok(ComplexMatrix::new(expected, expected, entries)?)
}

fn raw_state(entries: &[RawEntry], expected: usize, location: &str) -> Result<PureState> {
    if entries.len() != expected {
        return Err(ModelError::DimensionMismatch {
            location: location.to_string(),
            expected,
            found: entries.len(),
        });
    }
    let amplitudes: Vec<Complex64> = entries.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > LOAD_NORM_TOL {
        return Err(ModelError::InvalidState {
            location: location.to_string(),
            message: format!("norm {norm} is not 1"),
        });
    }
    Ok(PureState::normalized(amplitudes, vec![expected])?)
}

/// Splits a joint pure state into its product factors, or reports the
/// correlation it carries.
fn factorize_joint(joint: &PureState, bp: Bipartition, location: &str) -> Result<ProductInput> {
    let (ds, de) = (bp.d_system(), bp.d_environment());
    let coefficients = ComplexMatrix::from_fn(ds, de, |s, e| joint.amplitudes()[s * de + e]);
    let svd = nalgebra::linalg::SVD::new(coefficients.into_inner(), true, true);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let second = order.get(1).map_or(0.0, |&k| svd.singular_values[k]);
    if second > PRODUCT_STATE_TOL {
        return Err(ModelError::InitialCorrelations {
            location: location.to_string(),
            schmidt: second,
        });
    }
    let lead = order[0];
    let u = svd.u.as_ref().expect("requested");
    let v_t = svd.v_t.as_ref().expect("requested");
    let system: Vec<Complex64> = (0..ds).map(|s| u[(s, lead)]).collect();
    let environment: Vec<Complex64> = (0..de).map(|e| v_t[(lead, e)]).collect();
    Ok(ProductInput {
        system: PureState::normalized(system, vec![ds])?,
        environment: PureState::normalized(environment, vec![de])?,
    })
}

/// Parses a generic model document.
pub fn parse_generic_model(text: &str) -> Result<Model> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let bp = Bipartition::new(raw.dims.system, raw.dims.environment).map_err(|_| {
        ModelError::InvalidParams("dims must be positive".into())
    })?;
    let dim = bp.joint_dim();
    let hamiltonian = raw_matrix(&raw.hamiltonian, dim, "hamiltonian")?;
    let asym = hamiltonian.max_asymmetry();
    if asym > MODEL_HERMITIAN_TOL {
        return Err(ModelError::NonHermitian {
            location: "hamiltonian".into(),
            max_asymmetry: asym,
        });
    }

    if raw.initial_states.len() != 2 {
        return Err(ModelError::DimensionMismatch {
            location: "initial_states".into(),
            expected: 2,
            found: raw.initial_states.len(),
        });
    }
    let mut inputs = Vec::with_capacity(2);
    for (k, state) in raw.initial_states.iter().enumerate() {
        let location = format!("initial_states[{k}]");
        let input = match (&state.system_state, &state.environment_state, &state.joint_state) {
            (Some(s), Some(e), None) => ProductInput {
                system: raw_state(s, bp.d_system(), &format!("{location}.system_state"))?,
                environment: raw_state(e, bp.d_environment(), &format!("{location}.environment_state"))?,
            },
            (None, None, Some(j)) => {
                let joint = raw_state(j, dim, &format!("{location}.joint_state"))?;
                factorize_joint(&joint, bp, &format!("{location}.joint_state"))?
            }
            _ => {
                return Err(ModelError::InvalidState {
                    location,
                    message: "give either system_state and environment_state, or joint_state".into(),
                })
            }
        };
        inputs.push(input);
    }
    let second = inputs.pop().expect("two states");
    let first = inputs.pop().expect("two states");

    let mut terms = Vec::new();
    for (k, term) in raw.interaction_terms.iter().flatten().enumerate() {
        terms.push(InteractionTerm {
            system: raw_matrix(&term.system, bp.d_system(), &format!("interaction_terms[{k}].system"))?,
            environment: raw_matrix(
                &term.environment,
                bp.d_environment(),
                &format!("interaction_terms[{k}].environment"),
            )?,
        });
    }
    Model::new(hamiltonian, bp, [first, second], terms)
}

/// Reads and validates a generic model file.
pub fn load_generic_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_generic_model(&text)
}

/// Serializes a model in the generic file format (product inputs only).
pub fn generic_model_json(model: &Model) -> serde_json::Value {
    use serde_json::json;
    let matrix = |m: &ComplexMatrix| -> serde_json::Value {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .into()
    };
    let vector = |s: &PureState| -> serde_json::Value {
        s.amplitudes().iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>().into()
    };
    let bp = model.bipartition();
    let mut doc = json!({
        "dims": {"system": bp.d_system(), "environment": bp.d_environment()},
        "hamiltonian": matrix(model.hamiltonian()),
        "initial_states": model.initial_pair().iter().map(|p| json!({
            "system_state": vector(&p.system),
            "environment_state": vector(&p.environment),
        })).collect::<Vec<_>>(),
    });
    if !model.interaction_terms().is_empty() {
        doc["interaction_terms"] = model
            .interaction_terms()
            .iter()
            .map(|t| json!({"system": matrix(&t.system), "environment": matrix(&t.environment)}))
            .collect::<Vec<_>>()
            .into();
    }
    doc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{trace_norm, Subsystem};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_site_paulis() {
        assert_eq!(pauli_on_site(Axis::Z, 0, 1).unwrap(), pauli_z());
        assert_eq!(
            pauli_on_site(Axis::X, 1, 2).unwrap(),
            kron(&ComplexMatrix::identity(2), &pauli_x())
        );
        let x = pauli_on_site(Axis::X, 0, 1).unwrap();
        let y = pauli_on_site(Axis::Y, 0, 1).unwrap();
        assert_eq!(x.anticommutator(&y).max_abs(), 0.0);
        assert!(matches!(
            pauli_on_site(Axis::X, 3, 3),
            Err(ModelError::SiteOutOfRange { site: 3, n_total: 3 })
        ));
    }

    #[test]
    fn two_spin_hamiltonian_matches_closed_form() {
        let p = ChainParams {
            n_total: 2,
            j_env: 1.0,
            j_sys: 0.7,
            b_field: 0.3,
            field_on_system: false,
            convention: OperatorConvention::Pauli,
        };
        let model = build_chain_model(p).unwrap();
        let xx = kron(&pauli_x(), &pauli_x());
        let yy = kron(&pauli_y(), &pauli_y());
        let iz = kron(&ComplexMatrix::identity(2), &pauli_z());
        let expected = (&xx + &yy).scale_real(-2.0 * 0.7) + iz.scale_real(-2.0 * 0.3);
        assert!(model.hamiltonian().max_abs_diff(&expected) < 1e-15);
        // |01> is index 1, |10> is index 2.
        assert!((model.hamiltonian()[(1, 2)] - c(-4.0 * 0.7)).norm() < 1e-15);

        // Spin operators: a quarter of the hopping, half the field.
        let spin = build_chain_model(ChainParams {
            convention: OperatorConvention::Spin,
            ..p
        })
        .unwrap();
        let expected = (&xx + &yy).scale_real(-0.7 / 2.0) + iz.scale_real(-0.3);
        assert!(spin.hamiltonian().max_abs_diff(&expected) < 1e-15);
        assert!((spin.hamiltonian()[(1, 2)] - c(-0.7)).norm() < 1e-15);
    }

    fn chain_oracle(p: &ChainParams) -> ComplexMatrix {
        let s = match p.convention {
            OperatorConvention::Spin => 0.5,
            OperatorConvention::Pauli => 1.0,
        };
        let n = p.n_total;
        let dim = 1 << n;
        let mut h = ComplexMatrix::zeros(dim, dim);
        for site in 0..n - 1 {
            let j = if site == 0 { p.j_sys } else { p.j_env };
            let xx = &pauli_on_site(Axis::X, site, n).unwrap() * &pauli_on_site(Axis::X, site + 1, n).unwrap();
            let yy = &pauli_on_site(Axis::Y, site, n).unwrap() * &pauli_on_site(Axis::Y, site + 1, n).unwrap();
            h = &h + &(&xx + &yy).scale_real(-2.0 * j * s * s);
        }
        let first = if p.field_on_system { 0 } else { 1 };
        for site in first..n {
            h = &h + &pauli_on_site(Axis::Z, site, n).unwrap().scale_real(-2.0 * p.b_field * s);
        }
        h
    }

    #[test]
    fn chain_matches_pauli_product_oracle() {
        for field_on_system in [false, true] {
            for convention in [OperatorConvention::Spin, OperatorConvention::Pauli] {
                let p = ChainParams {
                    n_total: 5,
                    j_env: 1.3,
                    j_sys: 0.6,
                    b_field: 0.25,
                    field_on_system,
                    convention,
                };
                let model = build_chain_model(p).unwrap();
                assert!(model.hamiltonian().max_abs_diff(&chain_oracle(&p)) < 1e-13);
            }
        }
    }

    #[test]
    fn chain_conserves_magnetization_and_is_real() {
        let p = ChainParams {
            n_total: 6,
            b_field: 0.4,
            ..ChainParams::default()
        };
        let model = build_chain_model(p).unwrap();
        let h = model.hamiltonian();
        let mut mz = ComplexMatrix::zeros(64, 64);
        for site in 0..6 {
            mz = &mz + &pauli_on_site(Axis::Z, site, 6).unwrap();
        }
        assert!(h.commutator(&mz).max_abs() < 1e-12);
        assert!(h.max_asymmetry() < 1e-12);
        assert!(h.to_row_major().iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn chain_interaction_reconstruction() {
        for field_on_system in [false, true] {
            let p = ChainParams {
                n_total: 4,
                b_field: 0.2,
                field_on_system,
                ..ChainParams::default()
            };
            let model = build_chain_model(p).unwrap();
            let mut sum = kron(
                &ComplexMatrix::identity(2),
                model.environment_hamiltonian().unwrap(),
            );
            for term in model.interaction_terms() {
                sum = &sum + &kron(&term.system, &term.environment);
            }
            assert!(sum.max_abs_diff(model.hamiltonian()) < 1e-12);
        }
    }

    #[test]
    fn sectors_are_block_diagonal() {
        let model = build_chain_model(ChainParams {
            n_total: 5,
            b_field: 0.3,
            ..ChainParams::default()
        })
        .unwrap();
        let sectors = model.sector_basis().unwrap();
        assert_eq!(sectors.len(), 6);
        assert_eq!(sectors.iter().map(Vec::len).sum::<usize>(), 32);
        let mut label = vec![0; 32];
        for (k, sector) in sectors.iter().enumerate() {
            for &s in sector {
                label[s] = k;
            }
        }
        let h = model.hamiltonian();
        for i in 0..32 {
            for j in 0..32 {
                if label[i] != label[j] {
                    assert!(h[(i, j)].norm() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn paper_pair_properties() {
        let [a, b] = paper_initial_pair(4).unwrap();
        let (ra, rb) = (a.density(), b.density());
        assert!((ra.purity() - 1.0).abs() < 1e-14);
        let bp = Bipartition::new(2, 8).unwrap();
        let sa = partial_trace(ra.matrix(), bp, Subsystem::System).unwrap();
        let sb = partial_trace(rb.matrix(), bp, Subsystem::System).unwrap();
        assert!((trace_norm(&(&sa - &sb)).unwrap() / 2.0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn equatorial_pair_at_zero_is_paper_pair() {
        let eq = equatorial_pair(0.0, 3).unwrap();
        let paper = paper_initial_pair(3).unwrap();
        for k in 0..2 {
            assert_eq!(eq[k].joint(), paper[k].joint());
        }
        let [a, b] = equatorial_pair(std::f64::consts::FRAC_PI_2, 3).unwrap();
        assert!((a.system.amplitudes()[1] - Complex64::new(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(a.system.inner(&b.system).norm() < 1e-15);
    }

    #[test]
    fn equatorial_states_have_no_z_component() {
        for phi in [0.0, 0.4, 1.9, 3.0] {
            for input in equatorial_pair(phi, 2).unwrap() {
                let z = input.system.density().expectation(&pauli_z());
                assert!(z.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn invalid_chain_params_rejected() {
        let p = ChainParams {
            n_total: 1,
            ..ChainParams::default()
        };
        assert!(matches!(build_chain_model(p), Err(ModelError::InvalidParams(_))));
        let p = ChainParams {
            j_env: 0.0,
            ..ChainParams::default()
        };
        assert!(matches!(build_chain_model(p), Err(ModelError::InvalidParams(_))));
    }

    const ZZ_MODEL: &str = r#"{
        "dims": {"system": 2, "environment": 2},
        "hamiltonian": [
            [[1,0],[0,0],[0,0],[0,0]],
            [[0,0],[-1,0],[0,0],[0,0]],
            [[0,0],[0,0],[-1,0],[0,0]],
            [[0,0],[0,0],[0,0],[1,0]]
        ],
        "initial_states": [
            {"system_state": [[1,0],[0,0]], "environment_state": [[0.6,0],[0,0.8]]},
            {"joint_state": [[0,0],[0,0],[0.6,0],[0,0.8]]}
        ]
    }"#;

    #[test]
    fn generic_model_accepts_zz() {
        let model = parse_generic_model(ZZ_MODEL).unwrap();
        let zz = kron(&pauli_z(), &pauli_z());
        assert!(model.hamiltonian().max_abs_diff(&zz) < 1e-15);
        assert_eq!(model.bipartition().dims(), [2, 2]);
        let second = &model.initial_pair()[1];
        assert!((second.system.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
        let overlap = second.environment.inner(&model.initial_pair()[0].environment);
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn generic_model_round_trips_through_json() {
        let model = parse_generic_model(ZZ_MODEL).unwrap();
        let text = generic_model_json(&model).to_string();
        let again = parse_generic_model(&text).unwrap();
        assert_eq!(again.hamiltonian(), model.hamiltonian());
        assert_eq!(again.initial_densities(), model.initial_densities());
    }

    #[test]
    fn generic_model_rejects_asymmetry() {
        let text = ZZ_MODEL.replacen("[[0,0],[-1,0],[0,0],[0,0]]", "[[0.001,0],[-1,0],[0,0],[0,0]]", 1);
        match parse_generic_model(&text) {
            Err(ModelError::NonHermitian { max_asymmetry, .. }) => assert!((max_asymmetry - 1e-3).abs() < 1e-15),
            other => panic!("expected NonHermitian, got {other:?}"),
        }
    }

    #[test]
    fn generic_model_rejects_entangled_input() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let text = ZZ_MODEL.replacen(
            "[[0,0],[0,0],[0.6,0],[0,0.8]]",
            &format!("[[{s},0],[0,0],[0,0],[{s},0]]"),
            1,
        );
        match parse_generic_model(&text) {
            Err(ModelError::InitialCorrelations { location, schmidt }) => {
                assert_eq!(location, "initial_states[1].joint_state");
                assert!((schmidt - s).abs() < 1e-12);
            }
            other => panic!("expected InitialCorrelations, got {other:?}"),
        }
    }

    #[test]
    fn generic_model_errors_carry_locations() {
        match parse_generic_model("{\"dims\": {\"system\": 2,\n \"environment\": \"two\"}}") {
            Err(ModelError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected Parse, got {other:?}"),
        }
        let text = ZZ_MODEL.replacen("\"dims\"", "\"extra\": 1, \"dims\"", 1);
        let err = parse_generic_model(&text).unwrap_err().to_string();
        assert!(err.contains("extra"), "{err}");
        let text = ZZ_MODEL.replacen("[[1,0],[0,0]]", "[[1,0],[0,0],[0,0]]", 1);
        match parse_generic_model(&text) {
            Err(ModelError::DimensionMismatch { location, expected, found }) => {
                assert_eq!((location.as_str(), expected, found), ("initial_states[0].system_state", 2, 3));
            }
            other => panic!("expected DimensionMismatch, got {other:?}"),
        }
    }
}
