//! Multi-start Nelder-Mead maximization shared by the variance criterion and
//! the MK mean-value search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values within this distance of the best are ties, resolved by lowest start index.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Fresh simplices built around a converged point before giving up.
const MAX_RESTARTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub seed: u64,
    pub starts: usize,
    /// Iteration budget per start, shared across its restarts.
    pub max_iterations: usize,
    pub step_tolerance: f64,
    pub value_tolerance: f64,
}

impl OptimizerConfig {
    /// Defaults for an `n`-qubit problem: `max(32, 8n)` starts.
    pub fn for_qubits(n: usize) -> Self {
        OptimizerConfig { starts: default_starts(n), ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_starts(mut self, starts: usize) -> Self {
        self.starts = starts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::InvalidConfig("starts must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.step_tolerance > 0.0 && self.value_tolerance > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            seed: 0,
            starts: 32,
            max_iterations: 20_000,
            step_tolerance: 1e-10,
            value_tolerance: 1e-12,
        }
    }
}

pub fn default_starts(n: usize) -> usize {
    32.max(8 * n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerMetadata {
    pub starts_used: usize,
    pub total_iterations: usize,
    pub total_evaluations: usize,
    pub best_start: usize,
    pub best_start_iterations: usize,
    pub converged_starts: usize,
}

/// Result of one local ascent.
#[derive(Debug, Clone)]
pub struct LocalAscent {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// Best value after each iteration; never decreases.
    pub history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MultiStartOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub metadata: OptimizerMetadata,
}

struct Simplex {
    vertices: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn around<F: Fn(&[f64]) -> f64>(f: &F, center: &[f64], step: f64) -> Self {
        let mut vertices = vec![center.to_vec()];
        for i in 0..center.len() {
            let mut v = center.to_vec();
            v[i] += step;
            vertices.push(v);
        }
        let values = vertices.iter().map(|v| f(v)).collect();
        Simplex { vertices, values }
    }

    /// Sorts vertices by descending value.
    fn order(&mut self) {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        self.vertices = idx.iter().map(|&i| self.vertices[i].clone()).collect();
        self.values = idx.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.vertices[0];
        self.vertices[1..]
            .iter()
            .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }
}

/// Nelder-Mead maximization with dimension-adapted coefficients. When the
/// simplex collapses the search is restarted from the best vertex with a
/// fresh simplex, until a restart stops improving the value.
pub fn nelder_mead_max<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    initial_step: f64,
    config: &OptimizerConfig,
) -> LocalAscent {
    let dim = start.len();
    let d = dim.max(1) as f64;
    let (reflect, expand, contract, shrink) = (1.0, 1.0 + 2.0 / d, 0.75 - 1.0 / (2.0 * d), 1.0 - 1.0 / d);

    let mut simplex = Simplex::around(f, start, initial_step);
    let mut evaluations = dim + 1;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut converged = false;
    let mut restarts = 0;
    simplex.order();
    let mut value_at_restart = simplex.values[0];

    while iterations < config.max_iterations {
        let spread = simplex.values[0] - simplex.values[dim];
        if simplex.diameter() < config.step_tolerance || spread < config.value_tolerance {
            let best = simplex.values[0];
            if restarts > 0 && best - value_at_restart < config.value_tolerance {
                converged = true;
                break;
            }
            if restarts == MAX_RESTARTS {
                converged = true;
                break;
            }
            restarts += 1;
            value_at_restart = best;
            let center = simplex.vertices[0].clone();
            simplex = Simplex::around(f, &center, initial_step);
            evaluations += dim + 1;
            simplex.order();
            continue;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex.vertices[..dim].iter().map(|v| v[k]).sum::<f64>() / d)
            .collect();
        let worst = simplex.vertices[dim].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect() };

        let xr = along(reflect);
        let fr = f(&xr);
        evaluations += 1;
        if fr > simplex.values[0] {
            let xe = along(reflect * expand);
            let fe = f(&xe);
            evaluations += 1;
            if fe > fr {
                simplex.vertices[dim] = xe;
                simplex.values[dim] = fe;
            } else {
                simplex.vertices[dim] = xr;
                simplex.values[dim] = fr;
            }
        } else if fr > simplex.values[dim - 1] {
            simplex.vertices[dim] = xr;
            simplex.values[dim] = fr;
        } else {
            let (xc, fc, accept_over) = if fr > simplex.values[dim] {
                let xc = along(reflect * contract);
                let fc = f(&xc);
                (xc, fc, fr)
            } else {
                let xc = along(-contract);
                let fc = f(&xc);
                (xc, fc, simplex.values[dim])
            };
            evaluations += 1;
            if fc >= accept_over {
                simplex.vertices[dim] = xc;
                simplex.values[dim] = fc;
            } else {
                let best = simplex.vertices[0].clone();
                for i in 1..=dim {
                    let v: Vec<f64> =
                        best.iter().zip(&simplex.vertices[i]).map(|(b, x)| b + shrink * (x - b)).collect();
                    simplex.values[i] = f(&v);
                    simplex.vertices[i] = v;
                }
                evaluations += dim;
            }
        }
        simplex.order();
        history.push(simplex.values[0]);
    }

    LocalAscent {
        point: simplex.vertices[0].clone(),
        value: simplex.values[0],
        iterations,
        evaluations,
        converged,
        history,
    }
}

/// Index of the winning start: highest value, lowest index among ties.
pub fn select_best(values: &[f64]) -> usize {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|&v| v >= top - TIE_TOLERANCE).unwrap_or(0)
}

/// Runs one local ascent per start point (concurrently) and keeps the best.
/// The result does not depend on scheduling.
pub fn multi_start_max<F: Fn(&[f64]) -> f64 + Sync>(
    f: &F,
    starts: Vec<Vec<f64>>,
    initial_step: f64,
    config: &OptimizerConfig,
) -> MultiStartOutcome {
    let runs: Vec<LocalAscent> =
        starts.par_iter().map(|s| nelder_mead_max(f, s, initial_step, config)).collect();
    let values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let best = select_best(&values);
    let metadata = OptimizerMetadata {
        starts_used: runs.len(),
        total_iterations: runs.iter().map(|r| r.iterations).sum(),
        total_evaluations: runs.iter().map(|r| r.evaluations).sum(),
        best_start: best,
        best_start_iterations: runs[best].iterations,
        converged_starts: runs.iter().filter(|r| r.converged).count(),
    };
    let LocalAscent { point, value, .. } = runs.into_iter().nth(best).expect("at least one start");
    MultiStartOutcome { point, value, metadata }
}
