//! Mermin-Klyshko Bell operators.
//!
//! The pair `(B_n, B'_n)` obeys
//!
//! ```text
//! B_n  = B_{n-1} ⊗ S_n + B'_{n-1} ⊗ D_n
//! B'_n = B'_{n-1} ⊗ S_n − B_{n-1} ⊗ D_n
//! ```
//!
//! with `S_n = ½(a_n + a'_n)·σ`, `D_n = ½(a_n − a'_n)·σ`, `B_1 = a_1·σ` and
//! `B'_1 = a'_1·σ`. Read left to right this is a bond-dimension-2 product
//! operator, which is how [`MkOperator`] applies it without ever forming a
//! `2^n × 2^n` matrix.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{multi_start_max, OptimizerConfig, OptimizerMetadata};
use crate::tensor::{
    accumulate_single, apply_single, apply_single_into, check_qubits, expectation,
    kron, mat2_lincomb, power_iteration_norm, ComplexMatrix, Mat2, PureState, QubitOperator,
    UnitVector3, C64, DENSE_QUBIT_CAP, ONE, ZERO,
};

const SPECTRAL_TOL: f64 = 1e-10;

/// The two measurement directions `(a_j, a'_j)` of one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPair {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
}

impl MeasurementPair {
    pub fn swapped(&self) -> Self {
        MeasurementPair { a: self.a_prime, a_prime: self.a }
    }

    /// `(½(a+a')·σ, ½(a−a')·σ)`.
    fn half_sum_difference(&self) -> (Mat2, Mat2) {
        let a = self.a.spin_matrix();
        let ap = self.a_prime.spin_matrix();
        (mat2_lincomb(0.5, &a, 0.5, &ap), mat2_lincomb(0.5, &a, -0.5, &ap))
    }
}

#[derive(Deserialize)]
struct RawSettings {
    n: usize,
    pairs: Vec<MeasurementPair>,
}

/// One measurement pair per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSettings")]
pub struct MeasurementSettings {
    n: usize,
    pairs: Vec<MeasurementPair>,
}

impl TryFrom<RawSettings> for MeasurementSettings {
    type Error = Error;

    fn try_from(raw: RawSettings) -> Result<Self> {
        let settings = MeasurementSettings::new(raw.pairs)?;
        if settings.n != raw.n {
            return Err(Error::Dimension(format!(
                "settings declare n = {} but list {} pairs",
                raw.n, settings.n
            )));
        }
        Ok(settings)
    }
}

impl MeasurementSettings {
    pub fn new(pairs: Vec<MeasurementPair>) -> Result<Self> {
        check_qubits(pairs.len(), 1)?;
        Ok(MeasurementSettings { n: pairs.len(), pairs })
    }

    /// Settings from `4n` angles: per qubit `[polar_a, azimuth_a, polar_a', azimuth_a']`.
    pub fn from_angles(angles: &[f64]) -> Result<Self> {
        if angles.is_empty() || !angles.len().is_multiple_of(4) {
            return Err(Error::Dimension(format!("{} angles do not describe settings", angles.len())));
        }
        Self::new(
            angles
                .chunks_exact(4)
                .map(|c| MeasurementPair {
                    a: UnitVector3::from_angles(c[0], c[1]),
                    a_prime: UnitVector3::from_angles(c[2], c[3]),
                })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[MeasurementPair] {
        &self.pairs
    }

    /// Exchanges every `a_j` with `a'_j`.
    pub fn swapped(&self) -> Self {
        MeasurementSettings { n: self.n, pairs: self.pairs.iter().map(MeasurementPair::swapped).collect() }
    }
}

/// Matrix-free handle for `B_n` (or `B'_n` when `primed`).
#[derive(Debug, Clone)]
pub struct MkOperator {
    settings: Arc<MeasurementSettings>,
    primed: bool,
}

impl MkOperator {
    pub fn settings(&self) -> &MeasurementSettings {
        &self.settings
    }

    pub fn is_primed(&self) -> bool {
        self.primed
    }
}

impl QubitOperator for MkOperator {
    fn qubits(&self) -> usize {
        self.settings.n
    }

    fn apply_to(&self, amplitudes: &[C64]) -> Vec<C64> {
        let (b, b_prime) = apply_pair(&self.settings, amplitudes);
        if self.primed {
            b_prime
        } else {
            b
        }
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// `(B_n v, B'_n v)` by sweeping the qubits once.
pub(crate) fn apply_pair(settings: &MeasurementSettings, v: &[C64]) -> (Vec<C64>, Vec<C64>) {
    let n = settings.n;
    let first = &settings.pairs[0];
    let mut b = apply_single(v, n, 1, &first.a.spin_matrix());
    let mut bp = apply_single(v, n, 1, &first.a_prime.spin_matrix());
    let mut next_b = vec![ZERO; v.len()];
    let mut next_bp = vec![ZERO; v.len()];
    for (idx, pair) in settings.pairs.iter().enumerate().skip(1) {
        let qubit = idx + 1;
        let (s, d) = pair.half_sum_difference();
        let neg_d = mat2_lincomb(-1.0, &d, 0.0, &d);
        apply_single_into(&b, n, qubit, &s, &mut next_b);
        accumulate_single(&bp, n, qubit, &d, &mut next_b);
        apply_single_into(&bp, n, qubit, &s, &mut next_bp);
        accumulate_single(&b, n, qubit, &neg_d, &mut next_bp);
        std::mem::swap(&mut b, &mut next_b);
        std::mem::swap(&mut bp, &mut next_bp);
    }
    (b, bp)
}

/// `(B_n, B'_n)` for one choice of settings.
#[derive(Debug, Clone)]
pub struct MkOperatorPair {
    b: MkOperator,
    b_prime: MkOperator,
}

impl MkOperatorPair {
    pub fn n(&self) -> usize {
        self.b.settings.n
    }

    pub fn settings(&self) -> &MeasurementSettings {
        &self.b.settings
    }

    pub fn b(&self) -> &MkOperator {
        &self.b
    }

    pub fn b_prime(&self) -> &MkOperator {
        &self.b_prime
    }

    /// Both operators as explicit matrices, built by the Kronecker recursion.
    pub fn dense(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        dense_pair(self.settings())
    }

    /// Largest `|eigenvalue|` of `B_n`: exact diagonalization up to the dense
    /// cap, a power-iteration lower estimate beyond it.
    pub fn spectral_norm(&self) -> Result<f64> {
        if self.n() <= DENSE_QUBIT_CAP {
            let (b, _) = self.dense()?;
            let ev = b.hermitian_eigenvalues()?;
            Ok(ev[0].abs().max(ev[ev.len() - 1].abs()))
        } else {
            Ok(power_iteration_norm(&self.b, 200, 0))
        }
    }
}

/// Upper bound `2^((n-1)/2)` on the operator norm of any `B_n`.
pub fn norm_bound(n: usize) -> f64 {
    2f64.powf((n as f64 - 1.0) / 2.0)
}

pub fn mk_build(settings: MeasurementSettings) -> Result<MkOperatorPair> {
    check_qubits(settings.n, 1)?;
    let settings = Arc::new(settings);
    Ok(MkOperatorPair {
        b: MkOperator { settings: Arc::clone(&settings), primed: false },
        b_prime: MkOperator { settings, primed: true },
    })
}

fn dense_pair(settings: &MeasurementSettings) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if settings.n > DENSE_QUBIT_CAP {
        return Err(Error::DenseCap { requested: settings.n, cap: DENSE_QUBIT_CAP });
    }
    let first = &settings.pairs[0];
    let mut b = ComplexMatrix::from_mat2(&first.a.spin_matrix());
    let mut bp = ComplexMatrix::from_mat2(&first.a_prime.spin_matrix());
    for pair in &settings.pairs[1..] {
        let (s, d) = pair.half_sum_difference();
        let (s, d) = (ComplexMatrix::from_mat2(&s), ComplexMatrix::from_mat2(&d));
        let next_b = kron(&b, &s)?.add(&kron(&bp, &d)?)?;
        let next_bp = kron(&bp, &s)?.sub(&kron(&b, &d)?)?;
        b = next_b;
        bp = next_bp;
    }
    Ok((b, bp))
}

/// Planar settings whose operator is `2^((n-1)/2)(|GHZ+⟩⟨GHZ+| − |GHZ-⟩⟨GHZ-|)`.
///
/// `a_j` sits at azimuth `θ_j = (j-1)(-1)^(n+1) π/(2n)` and `a'_j` is `a_j`
/// rotated by `-(-1)^(n+1) π/2`. With this recursion `B + iB'` is proportional
/// to `e^{iΦ}|1ⁿ⟩⟨0ⁿ|` (or its transpose), and these two choices are what make
/// `Φ = 0` for every `n`.
pub fn canonical_settings(n: usize) -> Result<MeasurementSettings> {
    check_qubits(n, 2)?;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let step = sign * PI / (2.0 * n as f64);
    let pairs = (0..n)
        .map(|j| {
            let theta = j as f64 * step;
            MeasurementPair {
                a: UnitVector3::planar(theta),
                a_prime: UnitVector3::planar(theta - sign * FRAC_PI_2),
            }
        })
        .collect();
    MeasurementSettings::new(pairs)
}

pub(crate) fn canonical_operator(n: usize) -> Result<MkOperator> {
    Ok(mk_build(canonical_settings(n)?)?.b)
}

/// The canonical pair, checked against its spectral form up to the dense cap.
pub fn canonical_mk(n: usize) -> Result<MkOperatorPair> {
    let pair = mk_build(canonical_settings(n)?)?;
    if n <= DENSE_QUBIT_CAP {
        let deviation = spectral_form_deviation(&pair.b);
        if deviation.is_nan() || deviation >= SPECTRAL_TOL {
            return Err(Error::SpectralMismatch { n, deviation });
        }
    }
    Ok(pair)
}

/// `max |B e_j − c(e_{2ⁿ-1-j} if j ∈ {0, 2ⁿ-1})|` over all basis columns.
fn spectral_form_deviation(op: &MkOperator) -> f64 {
    let n = op.qubits();
    let dim = 1usize << n;
    let c = C64::new(norm_bound(n), 0.0);
    let mut e = vec![ZERO; dim];
    let mut deviation = 0.0f64;
    for j in 0..dim {
        e[j] = ONE;
        let col = op.apply_to(&e);
        e[j] = ZERO;
        for (i, v) in col.iter().enumerate() {
            let expected = if (j == 0 && i == dim - 1) || (j == dim - 1 && i == 0) { c } else { ZERO };
            deviation = deviation.max((v - expected).norm());
        }
    }
    deviation
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GhzSign {
    Plus,
    Minus,
}

/// `(|0ⁿ⟩ ± |1ⁿ⟩)/√2`.
pub fn ghz(n: usize, sign: GhzSign) -> Result<PureState> {
    check_qubits(n, 2)?;
    let dim = 1usize << n;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; dim];
    amps[0] = C64::new(s, 0.0);
    amps[dim - 1] = match sign {
        GhzSign::Plus => C64::new(s, 0.0),
        GhzSign::Minus => C64::new(-s, 0.0),
    };
    PureState::new(amps)
}

/// `cos φ|0ⁿ⟩ + sin φ|1ⁿ⟩` for `0 ≤ φ ≤ π/4`.
pub fn generalized_ghz(n: usize, phi: f64) -> Result<PureState> {
    check_qubits(n, 2)?;
    let quarter = std::f64::consts::FRAC_PI_4;
    if !(0.0..=quarter + 1e-12).contains(&phi) {
        return Err(Error::AngleRange(phi));
    }
    let phi = phi.min(quarter);
    let dim = 1usize << n;
    let mut amps = vec![ZERO; dim];
    amps[0] = C64::new(phi.cos(), 0.0);
    amps[dim - 1] = C64::new(phi.sin(), 0.0);
    PureState::new(amps)
}

/// `⟨ψ|B_n|ψ⟩`.
pub fn mk_mean(psi: &PureState, settings: &MeasurementSettings) -> Result<f64> {
    let pair = mk_build(settings.clone())?;
    expectation(psi, &pair.b)
}

fn mean_unchecked(psi: &PureState, settings: &MeasurementSettings) -> f64 {
    let (b, _) = apply_pair(settings, psi.amplitudes());
    crate::tensor::inner(psi.amplitudes(), &b).re
}

/// Best MK mean value found for a state.
#[derive(Debug, Clone, Serialize)]
pub struct MeanMaximum {
    pub settings: MeasurementSettings,
    pub value: f64,
    pub metadata: OptimizerMetadata,
}

/// Multi-start maximization of `⟨ψ|B_n|ψ⟩` over all settings, each direction
/// given by polar and azimuthal angles. For `n ≥ 2` the canonical settings
/// seed start 0.
pub fn max_mk_mean(psi: &PureState, config: &OptimizerConfig) -> Result<MeanMaximum> {
    config.validate()?;
    let n = psi.n();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut starts = Vec::with_capacity(config.starts);
    if n >= 2 {
        let canonical = canonical_settings(n)?;
        starts.push(
            canonical
                .pairs()
                .iter()
                .flat_map(|p| [FRAC_PI_2, p.a.y().atan2(p.a.x()), FRAC_PI_2, p.a_prime.y().atan2(p.a_prime.x())])
                .collect(),
        );
    }
    while starts.len() < config.starts {
        starts.push(
            (0..2 * n)
                .flat_map(|_| [0, 1])
                .map(|k| if k == 0 { rng.random_range(0.0..PI) } else { rng.random_range(0.0..2.0 * PI) })
                .collect(),
        );
    }
    let objective = |x: &[f64]| {
        let settings = MeasurementSettings::from_angles(x).expect("4n angles");
        mean_unchecked(psi, &settings)
    };
    let outcome = multi_start_max(&objective, starts, 0.5, config);
    let settings = MeasurementSettings::from_angles(&outcome.point)?;
    Ok(MeanMaximum { value: mk_mean(psi, &settings)?, settings, metadata: outcome.metadata })
}
