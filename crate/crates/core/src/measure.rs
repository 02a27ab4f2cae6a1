//! Intervals of growing distinguishability and the trace-distance
//! non-Markovianity measure, optimized over families of input pairs.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::evolution::{run_trajectory, EvolutionError, PathChoice, PathUsed, TimeGrid, TrajectoryRecord};
use crate::linalg::PureState;
use crate::model::{build_chain_model, equatorial_pair, ChainParams, Model, ModelError};
use crate::random;

/// A step counts as an increase only if it exceeds this.
pub const INCREASE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("series and time axis differ in length ({values} vs {times})")]
    LengthMismatch { values: usize, times: usize },
    #[error("pair family is empty")]
    EmptyFamily,
}

pub type Result<T> = std::result::Result<T, MeasureError>;

/// One maximal run of strictly increasing trace distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub t_start: f64,
    pub t_end: f64,
    /// `D(t_end) - D(t_start)`, the integral of `sigma` over the run.
    pub contribution: f64,
}

/// Index ranges `(i, j)` with `d[k+1] > d[k] + threshold` for `i <= k < j`.
pub fn increasing_runs(d_values: &[f64]) -> Vec<(usize, usize)> {
    let mut runs = Vec::new();
    let mut start = None;
    for k in 0..d_values.len().saturating_sub(1) {
        let rising = d_values[k + 1] > d_values[k] + INCREASE_THRESHOLD;
        match (rising, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, d_values.len() - 1));
    }
    runs
}

/// Maximal intervals on which `D` strictly increases, with their
/// contributions to the measure.
pub fn increasing_intervals(d_values: &[f64], times: &[f64]) -> Result<Vec<Interval>> {
    if d_values.len() != times.len() {
        return Err(MeasureError::LengthMismatch {
            values: d_values.len(),
            times: times.len(),
        });
    }
    Ok(increasing_runs(d_values)
        .into_iter()
        .map(|(i, j)| Interval {
            t_start: times[i],
            t_end: times[j],
            contribution: d_values[j] - d_values[i],
        })
        .collect())
}

/// Sum of all positive increments of `D`; the discrete integral of `sigma`
/// over the region where it is positive.
pub fn blp_integral(d_values: &[f64]) -> f64 {
    d_values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&step| step > INCREASE_THRESHOLD)
        .fold(0.0, |acc, step| acc + step)
}

/// Candidate input pairs to optimize over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairFamily {
    /// The model's own pair (`|+>, |->` for chains).
    Paper,
    /// `n_phi` antipodal equatorial pairs with `phi` uniform on `[0, pi)`.
    Equatorial(usize),
    /// Haar-random pure system states; environments as in the model's pair.
    Random { count: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairDescriptor {
    Paper,
    Equatorial { phi: f64 },
    Random { index: usize },
}

impl std::fmt::Display for PairDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PairDescriptor::Paper => write!(f, "paper"),
            PairDescriptor::Equatorial { phi } => write!(f, "equatorial(phi={phi})"),
            PairDescriptor::Random { index } => write!(f, "random#{index}"),
        }
    }
}

/// Dynamics to evaluate: a chain (rebuilt per pair) or a fixed generic model.
#[derive(Debug, Clone)]
pub enum ModelFamily {
    Chain(ChainParams),
    Generic(Model),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairValue {
    pub pair: PairDescriptor,
    pub n_measure: f64,
    /// `max(sigma - bound_total)` along this pair's trajectory.
    pub max_bound_violation: f64,
}

#[derive(Debug, Clone)]
pub struct MeasureReport {
    /// Increasing intervals of the best pair.
    pub intervals: Vec<Interval>,
    pub n_measure: f64,
    pub best_pair: PairDescriptor,
    pub per_pair_values: Vec<PairValue>,
    pub path_used: PathUsed,
    /// Trajectory of the best pair.
    pub best_trajectory: TrajectoryRecord,
}

fn candidate_models(family: &ModelFamily, pairs: PairFamily) -> Result<Vec<(PairDescriptor, Model)>> {
    let base = match family {
        ModelFamily::Chain(p) => build_chain_model(*p)?,
        ModelFamily::Generic(m) => m.clone(),
    };
    let out = match pairs {
        PairFamily::Paper => vec![(PairDescriptor::Paper, base)],
        PairFamily::Equatorial(n_phi) => {
            let n_total = match family {
                ModelFamily::Chain(p) => p.n_total,
                ModelFamily::Generic(_) => 0,
            };
            (0..n_phi)
                .map(|k| {
                    let phi = PI * k as f64 / n_phi as f64;
                    let model = if n_total > 0 {
                        base.with_initial_pair(equatorial_pair(phi, n_total)?)?
                    } else {
                        let [a, b] = equatorial_pair(phi, 2)?;
                        base.with_system_states(a.system, b.system)?
                    };
                    Ok((PairDescriptor::Equatorial { phi }, model))
                })
                .collect::<Result<Vec<_>>>()?
        }
        PairFamily::Random { count, seed } => {
            let mut rng = random::seeded(seed);
            let ds = base.bipartition().d_system();
            (0..count)
                .map(|index| {
                    let a: PureState = random::haar_state(ds, &mut rng);
                    let b: PureState = random::haar_state(ds, &mut rng);
                    Ok((PairDescriptor::Random { index }, base.with_system_states(a, b)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    if out.is_empty() {
        return Err(MeasureError::EmptyFamily);
    }
    Ok(out)
}

/// Runs one trajectory per candidate pair and maximizes the accumulated
/// growth of the trace distance.
pub fn blp_measure(
    family: &ModelFamily,
    grid: &TimeGrid,
    pairs: PairFamily,
    path: PathChoice,
) -> Result<MeasureReport> {
    let candidates = candidate_models(family, pairs)?;
    let runs = candidates
        .par_iter()
        .map(|(descriptor, model)| {
            let record = run_trajectory(model, grid, path)?;
            Ok((*descriptor, blp_integral(&record.d_system()), record))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.1 > runs[best].1 {
            best = k;
        }
    }
    let per_pair_values = runs
        .iter()
        .map(|(pair, n, record)| PairValue {
            pair: *pair,
            n_measure: *n,
            max_bound_violation: record.max_bound_violation(),
        })
        .collect();
    let (best_pair, n_measure, record) = runs.into_iter().nth(best).expect("nonempty");
    let intervals = increasing_intervals(&record.d_system(), &record.times())?;
    Ok(MeasureReport {
        intervals,
        n_measure,
        best_pair,
        per_pair_values,
        path_used: record.path_used,
        best_trajectory: record,
    })
}
