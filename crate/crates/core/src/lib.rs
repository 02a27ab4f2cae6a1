//! Exact simulation of an open quantum system embedded in a larger closed
//! system, for studying trace-distance non-Markovianity together with the
//! system-environment correlations that drive it.
//!
//! * [`linalg`]: dense complex kernels (Kronecker products, Hermitian
//!   eigensolves, trace norms, partial traces, entropies).
//! * [`model`]: XX spin-chain Hamiltonians, initial pairs and generic model
//!   files.
//! * [`evolution`]: spectral propagation on dense or sector-restricted
//!   spaces and trajectory assembly.
//! * [`diagnostics`]: per-time trace distances, the correlation bound on the
//!   rate of change of distinguishability, and information measures.
//! * [`measure`]: increasing-distinguishability intervals and the measure
//!   optimized over input pairs.
//! * [`random`]: seeded random operators and models.

pub mod diagnostics;
pub mod evolution;
pub mod linalg;
pub mod measure;
pub mod model;
pub mod random;

pub use diagnostics::{DiagnosticsRow, InstantDiagnostics};
pub use evolution::{run_trajectory, PathChoice, PathUsed, TimeGrid, TrajectoryRecord};
pub use linalg::{Bipartition, Complex64, ComplexMatrix, DensityMatrix, PureState, Subsystem};
pub use measure::{blp_measure, MeasureReport, ModelFamily, PairFamily};
pub use model::{build_chain_model, ChainParams, Model};
