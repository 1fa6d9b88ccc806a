use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("amplitude count {0} is not a power of two of at least 2")]
    InvalidLength(usize),

    #[error("qubit count {n} outside supported range {min}..={max}")]
    QubitRange { n: usize, min: usize, max: usize },

    #[error("state norm deviates from 1 by {0:e}")]
    NotNormalized(f64),

    #[error("vector ({0}, {1}, {2}) is not a unit vector")]
    NotUnit(f64, f64, f64),

    #[error("operator acts on {expected} qubits but the state has {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("dense mode supports at most {cap} qubits, requested {requested}")]
    DenseCap { requested: usize, cap: usize },

    #[error("operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("qubit index {index} out of range 1..={n}")]
    QubitIndex { index: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("angle {0} outside [0, π/4]")]
    AngleRange(f64),

    #[error("canonical operator for n = {n} deviates from its spectral form by {deviation:e}")]
    SpectralMismatch { n: usize, deviation: f64 },

    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}
