//! Entanglement detection for multiqubit pure states.
//!
//! A pure state of `n` qubits is entangled exactly when the variance of the
//! canonical Mermin-Klyshko operator, taken on the state after a local unitary
//! that maximizes its weight on `|0…0⟩` and `|1…1⟩`, stays strictly below
//! `2^(n-1)`. This crate builds the operators, solves that maximization and
//! reports the verdict, together with an independent purity oracle used to
//! cross-check it.
//!
//! Qubit 1 is the most significant bit of a basis index throughout.

pub mod criterion;
pub mod error;
pub mod mk;
pub mod optimize;
pub mod oracle;
pub mod tensor;

pub use criterion::{
    apply_local_unitary, conjugated_variance, decide, decide_with_tau, localize_product,
    maximize_objective, objective, overlaps, phase_fix, variance, DecisionReport, LocalUnitary,
    ObjectiveMaximum, Verdict, DEFAULT_TAU,
};
pub use error::{Error, Result};
pub use mk::{
    canonical_mk, canonical_settings, ghz, generalized_ghz, max_mk_mean, mk_build, mk_mean,
    GhzSign, MeanMaximum, MeasurementPair, MeasurementSettings, MkOperator, MkOperatorPair,
};
pub use optimize::{OptimizerConfig, OptimizerMetadata};
pub use oracle::{
    is_product_oracle, random_product_factors, random_product_state, random_state, OracleVerdict,
    ORACLE_EPSILON,
};
pub use tensor::{
    apply_operator, expectation, kron, reduced_density, spin_observable, ComplexMatrix,
    DenseOperator, IdentityOperator, LocalOperator, PureState, QubitOperator, UnitVector3, C64,
    DENSE_QUBIT_CAP, IDENTITY_2, MAX_QUBITS, PAULI_X, PAULI_Y, PAULI_Z, Mat2,
};
