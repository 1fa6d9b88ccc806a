//! The variance criterion.
//!
//! For a local unitary `U` write `α = ⟨0ⁿ|Uψ⟩`, `β = ⟨1ⁿ|Uψ⟩`. A state is
//! entangled iff `Δ(Uψ, B̂_n) < 2^(n-1)` at a `U` maximizing `|α|² + |β|²`
//! with both overlaps made nonnegative. Product states reach the bound,
//! since some `U` maps them to `|0ⁿ⟩`.
//!
//! The search runs over two angles per qubit. The factor
//!
//! ```text
//! U_j = [[ cos(θ/2),          e^{-iχ} sin(θ/2) ],
//!        [ -e^{iχ} sin(θ/2),  cos(θ/2)         ]]
//! ```
//!
//! covers every `U(2)` element up to a left diagonal phase, and those phases
//! only rotate `α` and `β` without changing their moduli. So the modulus form
//! is maximized unconstrained and [`phase_fix`] restores `α, β ≥ 0` afterwards.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mk::canonical_operator;
use crate::optimize::{multi_start_max, OptimizerConfig, OptimizerMetadata};
use crate::tensor::{
    apply_single, check_arity, check_qubits, inner, mat2_adjoint, mat2_max_deviation, mat2_mul,
    norm, Mat2, PureState, QubitOperator, C64, IDENTITY_2, ZERO,
};

/// Relative margin `τ` below which a state counts as product.
pub const DEFAULT_TAU: f64 = 1e-6;

const UNITARY_TOL: f64 = 1e-10;
const FACTOR_NORM_TOL: f64 = 1e-10;

/// `U_1 ⊗ … ⊗ U_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitary {
    factors: Vec<Mat2>,
}

impl LocalUnitary {
    pub fn new(factors: Vec<Mat2>) -> Result<Self> {
        check_qubits(factors.len(), 1)?;
        for f in &factors {
            let dev = mat2_max_deviation(&mat2_mul(&mat2_adjoint(f), f), &IDENTITY_2);
            if dev.is_nan() || dev >= UNITARY_TOL {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(LocalUnitary { factors })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![IDENTITY_2; n])
    }

    /// The two-angle family: `angles = [θ_1, χ_1, …, θ_n, χ_n]`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || !angles.len().is_multiple_of(2) {
            return Err(Error::Dimension(format!("{} angles do not describe a local unitary", angles.len())));
        }
        Self::new(angles.chunks_exact(2).map(|c| angle_factor(c[0], c[1])).collect())
    }

    pub fn n(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Mat2] {
        &self.factors
    }

    pub fn adjoint(&self) -> Self {
        LocalUnitary { factors: self.factors.iter().map(mat2_adjoint).collect() }
    }

    fn check(&self, psi: &PureState) -> Result<()> {
        if self.n() != psi.n() {
            return Err(Error::ArityMismatch { expected: self.n(), found: psi.n() });
        }
        Ok(())
    }
}

impl Serialize for LocalUnitary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let factors: Vec<[[[f64; 2]; 2]; 2]> = self
            .factors
            .iter()
            .map(|m| m.map(|row| row.map(|z| [z.re, z.im])))
            .collect();
        factors.serialize(serializer)
    }
}

fn angle_factor(theta: f64, chi: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, chi);
    [[C64::new(c, 0.0), phase.conj() * s], [-phase * s, C64::new(c, 0.0)]]
}

/// Contracts `ψ` against one row of every factor: `Σ_x Π_j U_j[row][x_j] ψ_x`.
fn row_overlap(amps: &[C64], factors: &[Mat2], row: usize) -> C64 {
    let mut len = amps.len() / 2;
    let last = &factors[factors.len() - 1][row];
    let mut buf: Vec<C64> = (0..len).map(|k| last[0] * amps[2 * k] + last[1] * amps[2 * k + 1]).collect();
    for f in factors[..factors.len() - 1].iter().rev() {
        let r = &f[row];
        len /= 2;
        for k in 0..len {
            buf[k] = r[0] * buf[2 * k] + r[1] * buf[2 * k + 1];
        }
    }
    buf[0]
}

/// `(⟨0ⁿ|Uψ⟩, ⟨1ⁿ|Uψ⟩)`.
pub fn overlaps(psi: &PureState, u: &LocalUnitary) -> Result<(C64, C64)> {
    u.check(psi)?;
    Ok((row_overlap(psi.amplitudes(), &u.factors, 0), row_overlap(psi.amplitudes(), &u.factors, 1)))
}

pub fn apply_local_unitary(u: &LocalUnitary, psi: &PureState) -> Result<PureState> {
    u.check(psi)?;
    let n = psi.n();
    let mut amps = psi.amplitudes().to_vec();
    for (j, f) in u.factors.iter().enumerate() {
        amps = apply_single(&amps, n, j + 1, f);
    }
    PureState::new(amps)
}

/// `Δ(ψ, B) = ⟨ψ|B²|ψ⟩ − ⟨ψ|B|ψ⟩²` from a single application of `B`.
pub fn variance(psi: &PureState, op: &dyn QubitOperator) -> Result<f64> {
    check_arity(op, psi)?;
    if !op.is_hermitian() {
        return Err(Error::NonHermitian(f64::NAN));
    }
    let w = op.apply_to(psi.amplitudes());
    let mean = inner(psi.amplitudes(), &w);
    if mean.im.abs() >= 1e-10 {
        return Err(Error::NonHermitian(mean.im.abs()));
    }
    let second = norm(&w).powi(2);
    Ok((second - mean.re * mean.re).max(0.0))
}

/// `Δ(ψ, U†B̂_nU)`, evaluated as `Δ(Uψ, B̂_n)`.
pub fn conjugated_variance(psi: &PureState, u: &LocalUnitary) -> Result<f64> {
    check_qubits(psi.n(), 2)?;
    let rotated = apply_local_unitary(u, psi)?;
    variance(&rotated, &canonical_operator(psi.n())?)
}

/// `|⟨0ⁿ|Uψ⟩|² + |⟨1ⁿ|Uψ⟩|²`, equal to the constrained objective once the
/// overlaps are phase-fixed.
pub fn objective(psi: &PureState, u: &LocalUnitary) -> Result<f64> {
    let (alpha, beta) = overlaps(psi, u)?;
    Ok(alpha.norm_sqr() + beta.norm_sqr())
}

/// Prepends `diag(e^{ia}, e^{ib})` to the first factor so that both overlaps
/// become real and nonnegative. A zero overlap keeps its phase.
pub fn phase_fix(psi: &PureState, u: &LocalUnitary) -> Result<LocalUnitary> {
    let (alpha, beta) = overlaps(psi, u)?;
    let undo = |z: C64| if z == ZERO { C64::new(1.0, 0.0) } else { C64::from_polar(1.0, -z.arg()) };
    let d = [[undo(alpha), ZERO], [ZERO, undo(beta)]];
    let mut factors = u.factors.clone();
    factors[0] = mat2_mul(&d, &factors[0]);
    LocalUnitary::new(factors)
}

#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveMaximum {
    pub unitary: LocalUnitary,
    pub value: f64,
    pub metadata: OptimizerMetadata,
}

/// Multi-start maximization of the overlap objective. Start 0 is the identity.
pub fn maximize_objective(psi: &PureState, config: &OptimizerConfig) -> Result<ObjectiveMaximum> {
    config.validate()?;
    let n = psi.n();
    check_qubits(n, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = vec![vec![0.0; 2 * n]];
    while starts.len() < config.starts {
        starts.push(
            (0..n)
                .flat_map(|_| [rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI)])
                .collect(),
        );
    }
    let amps = psi.amplitudes();
    let f = |x: &[f64]| {
        let factors: Vec<Mat2> = x.chunks_exact(2).map(|c| angle_factor(c[0], c[1])).collect();
        row_overlap(amps, &factors, 0).norm_sqr() + row_overlap(amps, &factors, 1).norm_sqr()
    };
    let outcome = multi_start_max(&f, starts, 0.5, config);
    let unitary = phase_fix(psi, &LocalUnitary::from_angles(&outcome.point)?)?;
    let value = objective(psi, &unitary)?;
    Ok(ObjectiveMaximum { unitary, value, metadata: outcome.metadata })
}

/// Maps each normalized factor `ψ_j` to `|0⟩`: row 0 is `ψ_j†`, row 1 its
/// orthogonal complement.
pub fn localize_product(factors: &[[C64; 2]]) -> Result<LocalUnitary> {
    let mats = factors
        .iter()
        .map(|&[u0, u1]| {
            let dev = ((u0.norm_sqr() + u1.norm_sqr()).sqrt() - 1.0).abs();
            if dev.is_nan() || dev >= FACTOR_NORM_TOL {
                return Err(Error::NotNormalized(dev));
            }
            Ok([[u0.conj(), u1.conj()], [-u1, u0]])
        })
        .collect::<Result<Vec<_>>>()?;
    LocalUnitary::new(mats)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Entangled,
    Product,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecisionReport {
    pub n: usize,
    pub objective_value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub variance: f64,
    pub bound: f64,
    pub margin: f64,
    pub tau: f64,
    pub verdict: Verdict,
    pub optimizer_metadata: OptimizerMetadata,
    pub local_unitary: LocalUnitary,
}

pub fn decide(psi: &PureState, config: &OptimizerConfig) -> Result<DecisionReport> {
    decide_with_tau(psi, config, DEFAULT_TAU)
}

/// Entangled iff `2^(n-1) − Δ > τ·2^(n-1)` at the optimizer's best `U`.
pub fn decide_with_tau(psi: &PureState, config: &OptimizerConfig, tau: f64) -> Result<DecisionReport> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::InvalidConfig(format!("tau = {tau} must lie in (0, 1)")));
    }
    let best = maximize_objective(psi, config)?;
    let (alpha, beta) = overlaps(psi, &best.unitary)?;
    let variance = conjugated_variance(psi, &best.unitary)?;
    let bound = 2f64.powi(psi.n() as i32 - 1);
    let margin = bound - variance;
    let verdict = if margin > tau * bound { Verdict::Entangled } else { Verdict::Product };
    Ok(DecisionReport {
        n: psi.n(),
        objective_value: best.value,
        alpha: alpha.re,
        beta: beta.re,
        variance,
        bound,
        margin,
        tau,
        verdict,
        optimizer_metadata: best.metadata,
        local_unitary: best.unitary,
    })
}
