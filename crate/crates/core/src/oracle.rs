//! Independent ground truth: a pure state is a full product state exactly
//! when every single-qubit reduction is pure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::Result;
use crate::tensor::{check_qubits, reduced_density, PureState, C64};

pub const ORACLE_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleVerdict {
    pub is_product: bool,
    pub min_purity: f64,
    pub per_qubit_purities: Vec<f64>,
}

pub fn is_product_oracle(psi: &PureState) -> OracleVerdict {
    let per_qubit_purities: Vec<f64> = (1..=psi.n())
        .map(|j| {
            let rho = reduced_density(psi, j).expect("qubit index in range");
            rho.as_slice().iter().map(|z| z.norm_sqr()).sum()
        })
        .collect();
    let min_purity = per_qubit_purities.iter().copied().fold(f64::INFINITY, f64::min);
    OracleVerdict { is_product: min_purity > 1.0 - ORACLE_EPSILON, min_purity, per_qubit_purities }
}

/// `n` independent single-qubit states, each a normalized pair of complex
/// Gaussians.
pub fn random_product_factors(n: usize, seed: u64) -> Result<Vec<[C64; 2]>> {
    check_qubits(n, 1)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = || C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
    Ok((0..n)
        .map(|_| {
            let (a, b) = (gaussian(), gaussian());
            let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            [a / norm, b / norm]
        })
        .collect())
}

pub fn random_product_state(n: usize, seed: u64) -> Result<PureState> {
    PureState::product(&random_product_factors(n, seed)?)
}

/// Haar-random state: normalized vector of `2^n` complex Gaussians.
pub fn random_state(n: usize, seed: u64) -> Result<PureState> {
    check_qubits(n, 2)?;
    PureState::random(n, seed)
}
