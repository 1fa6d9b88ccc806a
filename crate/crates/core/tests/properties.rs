use std::f64::consts::PI;

use mkent_core::criterion::apply_local_unitary;
use mkent_core::{
    canonical_mk, conjugated_variance, decide, kron, mk_build, objective, random_state, reduced_density,
    spin_observable, variance, ComplexMatrix, DenseOperator, LocalUnitary, MeasurementSettings,
    OptimizerConfig, PureState, UnitVector3, C64,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-4i32..=4, -4i32..=4).prop_map(|(re, im)| C64::new(re as f64 * 0.5, im as f64 * 0.25))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |d| ComplexMatrix::from_vec(rows, cols, d).unwrap())
}

fn angles(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, len)
}

fn dense_local(u: &LocalUnitary) -> ComplexMatrix {
    u.factors().iter().fold(ComplexMatrix::identity(1), |acc, f| kron(&acc, &ComplexMatrix::from_mat2(f)).unwrap())
}

proptest! {
    #[test]
    fn kron_is_associative(a in matrix(2, 3), b in matrix(1, 2), c in matrix(2, 2)) {
        let left = kron(&kron(&a, &b).unwrap(), &c).unwrap();
        let right = kron(&a, &kron(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn reduced_density_has_unit_trace(n in 1usize..=7, seed in any::<u64>()) {
        let psi = PureState::random(n, seed).unwrap();
        for j in 1..=n {
            let rho = reduced_density(&psi, j).unwrap();
            prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
            prop_assert!(rho.is_hermitian());
            let ev = rho.hermitian_eigenvalues().unwrap();
            prop_assert!(ev[1] > -1e-12);
        }
    }

    #[test]
    fn swapping_settings_exchanges_pair(n in 1usize..=5, raw in angles(20)) {
        let settings = MeasurementSettings::from_angles(&raw[..4 * n]).unwrap();
        let (b, bp) = mk_build(settings.clone()).unwrap().dense().unwrap();
        let (sb, sbp) = mk_build(settings.swapped()).unwrap().dense().unwrap();
        prop_assert!(sb.max_abs_diff(&bp).unwrap() < 1e-12);
        prop_assert!(sbp.max_abs_diff(&b).unwrap() < 1e-12);
    }

    #[test]
    fn recursion_step_is_consistent(n in 2usize..=5, raw in angles(20)) {
        let settings = MeasurementSettings::from_angles(&raw[..4 * n]).unwrap();
        let shorter = MeasurementSettings::new(settings.pairs()[..n - 1].to_vec()).unwrap();
        let (b_prev, bp_prev) = mk_build(shorter).unwrap().dense().unwrap();
        let last = settings.pairs()[n - 1];
        let (a, ap) = (spin_observable(&last.a), spin_observable(&last.a_prime));
        let half = C64::new(0.5, 0.0);
        let s = a.add(&ap).unwrap().scale(half);
        let d = a.sub(&ap).unwrap().scale(half);
        let expected = kron(&b_prev, &s).unwrap().add(&kron(&bp_prev, &d).unwrap()).unwrap();
        let (b, _) = mk_build(settings).unwrap().dense().unwrap();
        prop_assert!(b.max_abs_diff(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn matrix_free_equals_dense(n in 1usize..=8, raw in angles(32), seed in any::<u64>()) {
        let pair = mk_build(MeasurementSettings::from_angles(&raw[..4 * n]).unwrap()).unwrap();
        let psi = PureState::random(n, seed).unwrap();
        let (b, bp) = pair.dense().unwrap();
        let via_dense = b.mul_vec(psi.amplitudes()).unwrap();
        let via_dense_p = bp.mul_vec(psi.amplitudes()).unwrap();
        let free = mkent_core::apply_operator(pair.b(), &psi).unwrap();
        let free_p = mkent_core::apply_operator(pair.b_prime(), &psi).unwrap();
        for (x, y) in free.iter().zip(&via_dense).chain(free_p.iter().zip(&via_dense_p)) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn objective_is_bounded(n in 2usize..=6, seed in any::<u64>(), raw in angles(12)) {
        let psi = PureState::random(n, seed).unwrap();
        let u = LocalUnitary::from_angles(&raw[..2 * n]).unwrap();
        let value = objective(&psi, &u).unwrap();
        prop_assert!((0.0..=1.0 + 1e-9).contains(&value));
    }

    #[test]
    fn unitary_covariance_against_dense_conjugation(n in 2usize..=5, seed in any::<u64>(), raw in angles(10)) {
        let psi = PureState::random(n, seed).unwrap();
        let u = LocalUnitary::from_angles(&raw[..2 * n]).unwrap();
        let (b, _) = canonical_mk(n).unwrap().dense().unwrap();
        let big_u = dense_local(&u);
        let conjugated = big_u.adjoint().matmul(&b).unwrap().matmul(&big_u).unwrap();
        let expected = variance(&psi, &DenseOperator::new(conjugated).unwrap()).unwrap();
        prop_assert!((conjugated_variance(&psi, &u).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn local_unitary_application_matches_dense(n in 1usize..=5, seed in any::<u64>(), raw in angles(10)) {
        let psi = PureState::random(n, seed).unwrap();
        let u = LocalUnitary::from_angles(&raw[..2 * n]).unwrap();
        let expected = dense_local(&u).mul_vec(psi.amplitudes()).unwrap();
        let got = apply_local_unitary(&u, &psi).unwrap();
        for (x, y) in got.amplitudes().iter().zip(&expected) {
            prop_assert!((x - y).norm() < 1e-13);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn spin_observables_square_to_identity(polar in 0.0..PI, azimuth in 0.0..2.0 * PI) {
        let s = spin_observable(&UnitVector3::from_angles(polar, azimuth));
        prop_assert!(s.is_hermitian());
        prop_assert!(s.matmul(&s).unwrap().max_abs_diff(&ComplexMatrix::identity(2)).unwrap() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn global_phase_does_not_change_decision(n in 2usize..=4, seed in any::<u64>(), phase in 0.0..2.0 * PI) {
        let psi = random_state(n, seed).unwrap();
        let config = OptimizerConfig::for_qubits(n);
        let a = decide(&psi, &config).unwrap();
        let b = decide(&psi.with_global_phase(phase), &config).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert!((a.objective_value - b.objective_value).abs() < 1e-9);
    }
}
