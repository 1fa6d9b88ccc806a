//! Dense complex linear algebra sized for n-qubit systems.

use std::fmt;
use std::ops::{Index, IndexMut};

use faer::{c64, Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest qubit count handled with explicit `2^n × 2^n` matrices.
pub const DENSE_QUBIT_CAP: usize = 10;
/// Largest qubit count handled at all (matrix-free above the dense cap).
pub const MAX_QUBITS: usize = 16;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
const UNIT_TOL: f64 = 1e-12;
const RENORMALIZE_LIMIT: f64 = 1e-6;
const EXACT_NORM_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A 2×2 block used for single-qubit operators.
pub type Mat2 = [[C64; 2]; 2];

pub const PAULI_X: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
pub const PAULI_Y: Mat2 = [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]];
pub const PAULI_Z: Mat2 = [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]];
pub const IDENTITY_2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

pub(crate) fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub(crate) fn mat2_lincomb(ca: f64, a: &Mat2, cb: f64, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][j] * ca + b[i][j] * cb;
        }
    }
    out
}

pub(crate) fn mat2_max_deviation(a: &Mat2, b: &Mat2) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..2 {
        for j in 0..2 {
            dev = dev.max((a[i][j] - b[i][j]).norm());
        }
    }
    dev
}

pub(crate) fn check_qubits(n: usize, min: usize) -> Result<()> {
    if n < min || n > MAX_QUBITS {
        return Err(Error::QubitRange { n, min, max: MAX_QUBITS });
    }
    Ok(())
}

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}×{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        ComplexMatrix { rows: 2, cols: 2, data: vec![m[0][0], m[0][1], m[1][0], m[1][1]] }
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut m = Self::zeros(u.len(), v.len());
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                m[(i, j)] = ui * vj.conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "cannot apply {}×{} matrix to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// Largest entrywise modulus of `A − A†`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() < HERMITIAN_TOL
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Eigenvalues of a Hermitian matrix in descending order.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let dev = self.hermitian_deviation();
        if dev >= HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        let d = self.rows;
        let m = Mat::<c64>::from_fn(d, d, |r, c| {
            let z = self.data[r * d + c];
            c64::new(z.re, z.im)
        });
        let mut values = m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Dimension(format!("eigenvalue solver failed on a {d}×{d} matrix: {e:?}")))?;
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}×{} vs {}×{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}×{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                write!(f, " {:.6}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product. Fails when a dimension would exceed the dense cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let cap = 1usize << DENSE_QUBIT_CAP;
    if rows > cap || cols > cap {
        let requested = rows.max(cols).next_power_of_two().trailing_zeros() as usize;
        return Err(Error::DenseCap { requested, cap: DENSE_QUBIT_CAP });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Unit vector in R³ selecting a spin direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let deviation = (x * x + y * y + z * z - 1.0).abs();
        if deviation.is_nan() || deviation >= UNIT_TOL {
            return Err(Error::NotUnit(x, y, z));
        }
        Ok(UnitVector3 { x, y, z })
    }

    /// Direction with polar angle `polar` from +z and azimuth `azimuth` from +x.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        UnitVector3 { x: sp * ca, y: sp * sa, z: cp }
    }

    /// Direction in the x-y plane at angle `theta` from +x.
    pub fn planar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        UnitVector3 { x: c, y: s, z: 0.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// `a·σ` as a 2×2 block.
    pub fn spin_matrix(&self) -> Mat2 {
        [
            [C64::new(self.z, 0.0), C64::new(self.x, -self.y)],
            [C64::new(self.x, self.y), C64::new(-self.z, 0.0)],
        ]
    }
}

impl Serialize for UnitVector3 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_array().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UnitVector3 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [x, y, z] = <[f64; 3]>::deserialize(deserializer)?;
        UnitVector3::new(x, y, z).map_err(serde::de::Error::custom)
    }
}

/// `a_x σ_x + a_y σ_y + a_z σ_z`.
pub fn spin_observable(a: &UnitVector3) -> ComplexMatrix {
    ComplexMatrix::from_mat2(&a.spin_matrix())
}

/// Normalized state vector of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Validates length and norm. Amplitudes within `1e-6` of unit norm are
    /// renormalized, anything further off is rejected.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidLength(len));
        }
        let n = len.trailing_zeros() as usize;
        check_qubits(n, 1)?;
        let norm = norm(&amplitudes);
        let deviation = (norm - 1.0).abs();
        if deviation.is_nan() || deviation >= RENORMALIZE_LIMIT {
            return Err(Error::NotNormalized(deviation));
        }
        let amplitudes = if deviation < EXACT_NORM_TOL {
            amplitudes
        } else {
            amplitudes.into_iter().map(|a| a / norm).collect()
        };
        Ok(PureState { n, amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector of power-of-two length.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(f64::INFINITY));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state; bit `n - j` of `index` is qubit `j`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n, 1)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::Dimension(format!("basis index {index} for {n} qubits")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(PureState { n, amplitudes })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    /// `ψ_1 ⊗ … ⊗ ψ_n` from single-qubit factors.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        check_qubits(factors.len(), 1)?;
        let mut amplitudes = vec![ONE];
        for f in factors {
            amplitudes = amplitudes.iter().flat_map(|a| [a * f[0], a * f[1]]).collect();
        }
        Self::new(amplitudes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.n != other.n {
            return Err(Error::ArityMismatch { expected: self.n, found: other.n });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn with_global_phase(&self, phase: f64) -> PureState {
        let p = C64::from_polar(1.0, phase);
        PureState { n: self.n, amplitudes: self.amplitudes.iter().map(|a| a * p).collect() }
    }

    /// Normalized vector of independent complex Gaussians.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        check_qubits(n, 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amplitudes: Vec<C64> = (0..1usize << n)
            .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        Self::normalized(amplitudes)
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// `Σ conj(u_i) v_i`.
pub(crate) fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Applies `m` on qubit `qubit` (1-based) of an `n`-qubit vector.
pub(crate) fn apply_single(amps: &[C64], n: usize, qubit: usize, m: &Mat2) -> Vec<C64> {
    let mut out = vec![ZERO; amps.len()];
    apply_single_into(amps, n, qubit, m, &mut out);
    out
}

pub(crate) fn apply_single_into(amps: &[C64], n: usize, qubit: usize, m: &Mat2, out: &mut [C64]) {
    let stride = 1usize << (n - qubit);
    for block in (0..amps.len()).step_by(2 * stride) {
        for k in block..block + stride {
            let (x0, x1) = (amps[k], amps[k + stride]);
            out[k] = m[0][0] * x0 + m[0][1] * x1;
            out[k + stride] = m[1][0] * x0 + m[1][1] * x1;
        }
    }
}

/// Adds `m` applied on `qubit` to `out`.
pub(crate) fn accumulate_single(amps: &[C64], n: usize, qubit: usize, m: &Mat2, out: &mut [C64]) {
    let stride = 1usize << (n - qubit);
    for block in (0..amps.len()).step_by(2 * stride) {
        for k in block..block + stride {
            let (x0, x1) = (amps[k], amps[k + stride]);
            out[k] += m[0][0] * x0 + m[0][1] * x1;
            out[k + stride] += m[1][0] * x0 + m[1][1] * x1;
        }
    }
}

/// Linear operator on the state space of a fixed number of qubits.
pub trait QubitOperator: Send + Sync {
    fn qubits(&self) -> usize;

    /// `op·v` for a vector of length `2^qubits()`.
    fn apply_to(&self, amplitudes: &[C64]) -> Vec<C64>;

    fn is_hermitian(&self) -> bool;

    /// Explicit matrix, built column by column.
    fn to_dense(&self) -> Result<ComplexMatrix> {
        let n = self.qubits();
        if n > DENSE_QUBIT_CAP {
            return Err(Error::DenseCap { requested: n, cap: DENSE_QUBIT_CAP });
        }
        let dim = 1usize << n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        let mut e = vec![ZERO; dim];
        for j in 0..dim {
            e[j] = ONE;
            for (i, v) in self.apply_to(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = ZERO;
        }
        Ok(m)
    }
}

/// Identity on `n` qubits.
#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl QubitOperator for IdentityOperator {
    fn qubits(&self) -> usize {
        self.0
    }

    fn apply_to(&self, amplitudes: &[C64]) -> Vec<C64> {
        amplitudes.to_vec()
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// A 2×2 operator on one qubit, identity elsewhere.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    n: usize,
    qubit: usize,
    matrix: Mat2,
}

impl LocalOperator {
    pub fn new(n: usize, qubit: usize, matrix: &ComplexMatrix) -> Result<Self> {
        check_qubits(n, 1)?;
        if qubit == 0 || qubit > n {
            return Err(Error::QubitIndex { index: qubit, n });
        }
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Dimension(format!("{}×{} is not a one-qubit operator", matrix.rows(), matrix.cols())));
        }
        let matrix = [[matrix[(0, 0)], matrix[(0, 1)]], [matrix[(1, 0)], matrix[(1, 1)]]];
        Ok(LocalOperator { n, qubit, matrix })
    }
}

impl QubitOperator for LocalOperator {
    fn qubits(&self) -> usize {
        self.n
    }

    fn apply_to(&self, amplitudes: &[C64]) -> Vec<C64> {
        apply_single(amplitudes, self.n, self.qubit, &self.matrix)
    }

    fn is_hermitian(&self) -> bool {
        mat2_max_deviation(&self.matrix, &mat2_adjoint(&self.matrix)) < HERMITIAN_TOL
    }
}

/// Explicit `2^n × 2^n` operator.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    n: usize,
    matrix: ComplexMatrix,
    hermitian: bool,
}

impl DenseOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let dim = matrix.rows();
        if !matrix.is_square() || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::Dimension(format!(
                "{}×{} is not an n-qubit operator",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        if n > DENSE_QUBIT_CAP {
            return Err(Error::DenseCap { requested: n, cap: DENSE_QUBIT_CAP });
        }
        let hermitian = matrix.is_hermitian();
        Ok(DenseOperator { n, matrix, hermitian })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl QubitOperator for DenseOperator {
    fn qubits(&self) -> usize {
        self.n
    }

    fn apply_to(&self, amplitudes: &[C64]) -> Vec<C64> {
        self.matrix.mul_vec(amplitudes).expect("dimension checked at construction")
    }

    fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn to_dense(&self) -> Result<ComplexMatrix> {
        Ok(self.matrix.clone())
    }
}

pub(crate) fn check_arity(op: &dyn QubitOperator, psi: &PureState) -> Result<()> {
    if op.qubits() != psi.n() {
        return Err(Error::ArityMismatch { expected: op.qubits(), found: psi.n() });
    }
    Ok(())
}

/// `op·ψ` (unnormalized).
pub fn apply_operator(op: &dyn QubitOperator, psi: &PureState) -> Result<Vec<C64>> {
    check_arity(op, psi)?;
    Ok(op.apply_to(psi.amplitudes()))
}

/// `⟨ψ|op|ψ⟩` for a Hermitian operator.
pub fn expectation(psi: &PureState, op: &dyn QubitOperator) -> Result<f64> {
    check_arity(op, psi)?;
    if !op.is_hermitian() {
        return Err(Error::NonHermitian(f64::NAN));
    }
    let value = inner(psi.amplitudes(), &op.apply_to(psi.amplitudes()));
    if value.im.abs() >= 1e-10 {
        return Err(Error::NonHermitian(value.im.abs()));
    }
    Ok(value.re)
}

/// Reduced density matrix of one qubit (1-based), tracing out the rest.
pub fn reduced_density(psi: &PureState, qubit: usize) -> Result<ComplexMatrix> {
    let n = psi.n();
    if qubit == 0 || qubit > n {
        return Err(Error::QubitIndex { index: qubit, n });
    }
    let stride = 1usize << (n - qubit);
    let amps = psi.amplitudes();
    let (mut r00, mut r01, mut r11) = (0.0, ZERO, 0.0);
    for block in (0..amps.len()).step_by(2 * stride) {
        for k in block..block + stride {
            let (a0, a1) = (amps[k], amps[k + stride]);
            r00 += a0.norm_sqr();
            r11 += a1.norm_sqr();
            r01 += a0 * a1.conj();
        }
    }
    ComplexMatrix::from_vec(2, 2, vec![C64::new(r00, 0.0), r01, r01.conj(), C64::new(r11, 0.0)])
}

/// Rayleigh-quotient estimate of the largest `|eigenvalue|` of a Hermitian
/// operator by power iteration on `op²`. Never exceeds the true value.
pub fn power_iteration_norm(op: &dyn QubitOperator, iterations: usize, seed: u64) -> f64 {
    let n = op.qubits();
    let mut v = match PureState::random(n, seed) {
        Ok(s) => s.into_amplitudes(),
        Err(_) => return 0.0,
    };
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = op.apply_to(&v);
        let w_norm = norm(&w);
        estimate = w_norm;
        if w_norm == 0.0 {
            break;
        }
        let w2 = op.apply_to(&w);
        let w2_norm = norm(&w2);
        if w2_norm == 0.0 {
            break;
        }
        v = w2.into_iter().map(|z| z / w2_norm).collect();
    }
    estimate
}
