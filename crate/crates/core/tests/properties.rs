//! Property-based invariants over seeded random objects.
//!
//! Strategies draw dimensions and 64-bit seeds; all object generation goes
//! through the crate's deterministic generators, so failures reproduce from
//! the printed seed values alone.

use nalgebra::Complex;
use proptest::prelude::*;

use qmt_core::channels::{classify_channel, kraus_from_choi, ChoiMatrix, QuantumOperation};
use qmt_core::instruments::{induced_observable, luders_instrument, random_instrument};
use qmt_core::linop::{self, HermitianMatrix, Subsystem};
use qmt_core::measproc::{max_induced_choi_distance, ozawa_dilation};
use qmt_core::qobjects::{born_probability, random};
use qmt_core::thermo::{
    mutual_information, mutual_information_via_relative_entropy, relative_entropy,
};
use qmt_core::{tol, Error};

fn dims() -> impl Strategy<Value = usize> {
    2usize..=4
}

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigendecomposition_reconstructs_and_is_unitary(dim in dims(), seed in seeds()) {
        let rho = random::state(dim, seed).unwrap();
        let eig = rho.hermitian().eig();
        let recon_residual = linop::max_abs_diff(&eig.reconstruct(), rho.matrix());
        prop_assert!(recon_residual <= 1e-10 * dim as f64);
        prop_assert!(eig.unitarity_residual() <= 1e-10);
    }

    #[test]
    fn sqrt_squares_back_on_psd(dim in dims(), seed in seeds()) {
        let rho = random::state(dim, seed).unwrap();
        let sqrt = rho.hermitian().sqrt_psd(tol::tol_psd()).unwrap();
        let back = sqrt.matrix() * sqrt.matrix();
        prop_assert!(linop::max_abs_diff(&back, rho.matrix()) <= 1e-9);
    }

    #[test]
    fn partial_trace_is_trace_preserving_and_splits_products(
        da in 2usize..=3,
        db in 2usize..=3,
        seed in seeds(),
    ) {
        let a = random::state(da, seed).unwrap();
        let b = random::state(db, seed ^ 0xABCD).unwrap();
        let joint = linop::kron(a.matrix(), b.matrix());
        let first = linop::partial_trace(&joint, (da, db), Subsystem::First).unwrap();
        let second = linop::partial_trace(&joint, (da, db), Subsystem::Second).unwrap();
        prop_assert!(linop::max_abs_diff(&first, a.matrix()) <= 1e-12);
        prop_assert!(linop::max_abs_diff(&second, b.matrix()) <= 1e-12);
        prop_assert!((linop::trace_re(&first) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn born_probabilities_normalize(dim in dims(), n in 2usize..=4, seed in seeds()) {
        let obs = random::povm(dim, n, seed).unwrap();
        let rho = random::state(dim, seed ^ 0x1234).unwrap();
        let p = born_probability(&obs, &rho).unwrap();
        let total: f64 = p.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn generated_povm_effects_are_psd_and_normalized(
        dim in dims(),
        n in 2usize..=4,
        seed in seeds(),
    ) {
        let obs = random::povm(dim, n, seed).unwrap();
        let mut sum = linop::identity(dim) * Complex::new(0.0, 0.0);
        for e in obs.effects() {
            prop_assert!(e.min_eigenvalue() >= -tol::tol_psd());
            sum += e.matrix();
        }
        prop_assert!(linop::max_abs_diff(&sum, &linop::identity(dim)) <= 1e-9);
    }

    #[test]
    fn generated_full_rank_states_are_strictly_positive(dim in dims(), seed in seeds()) {
        let s = random::full_rank_state(dim, seed).unwrap();
        prop_assert!(s.min_eigenvalue() > tol::tol_strict());
    }

    #[test]
    fn luders_and_induced_observable_round_trip(
        dim in dims(),
        n in 2usize..=3,
        seed in seeds(),
    ) {
        let obs = random::povm(dim, n, seed).unwrap();
        let inst = luders_instrument(&obs).unwrap();
        let induced = induced_observable(&inst).unwrap();
        for (a, b) in induced.effects().iter().zip(obs.effects()) {
            prop_assert!(linop::max_abs_diff(a.matrix(), b.matrix()) <= 1e-9);
        }
    }

    #[test]
    fn bistochastic_channels_are_strictly_positive(dim in dims(), seed in seeds()) {
        let u = random::unitary(dim, seed).unwrap();
        let class = classify_channel(&QuantumOperation::from_unitary(&u).unwrap());
        prop_assert!(class.bistochastic);
        prop_assert!(class.strictly_positive);
    }

    #[test]
    fn mutual_information_routes_agree_and_are_nonnegative(seed in seeds()) {
        let joint = random::state(4, seed).unwrap();
        let a = mutual_information(&joint, (2, 2)).unwrap();
        let b = mutual_information_via_relative_entropy(&joint, (2, 2)).unwrap();
        prop_assert!(a >= -1e-9);
        prop_assert!((a - b).abs() <= 1e-8);
    }

    #[test]
    fn relative_entropy_is_nonnegative(dim in dims(), seed in seeds()) {
        let rho = random::state(dim, seed).unwrap();
        let sigma = random::full_rank_state(dim, seed ^ 0x5678).unwrap();
        let d = relative_entropy(&rho, sigma.hermitian()).unwrap();
        prop_assert!(d >= -1e-9);
    }
}

proptest! {
    // Heavier cases: dilation round trips and Choi manipulations.
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn dilation_round_trip(dim in 2usize..=3, n in 2usize..=3, seed in seeds()) {
        let inst = random_instrument(dim, n, 1, seed).unwrap();
        let proc = ozawa_dilation(&inst).unwrap();
        let dist = max_induced_choi_distance(&proc, &inst).unwrap();
        prop_assert!(dist <= 1e-9, "distance {dist:.3e}");
    }

    #[test]
    fn choi_round_trip_preserves_action_and_rank(
        dim in 2usize..=3,
        n in 2usize..=3,
        seed in seeds(),
    ) {
        let inst = random_instrument(dim, n, 2, seed).unwrap();
        let op = inst.operation(0);
        let back = kraus_from_choi(&op.to_choi(), tol::tol_rank()).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let unit = linop::matrix_unit(dim, i, j);
                let x = op.apply(&unit).unwrap();
                let y = back.apply(&unit).unwrap();
                prop_assert!(linop::max_abs_diff(&x, &y) <= 1e-9);
            }
        }
        prop_assert_eq!(
            op.min_kraus_count(tol::tol_rank()),
            back.min_kraus_count(tol::tol_rank())
        );
    }

    #[test]
    fn choi_positivity_gates_kraus_extraction(dim in 2usize..=3, seed in seeds()) {
        // A Choi matrix with one eigenvalue pushed negative must be rejected.
        let rho = random::state(dim * dim, seed).unwrap();
        let spoiled = rho.matrix() - linop::identity(dim * dim) * Complex::new(2.0, 0.0);
        let choi = ChoiMatrix::new(
            dim,
            dim,
            HermitianMatrix::from_nearly_hermitian(&spoiled).unwrap(),
        )
        .unwrap();
        let rejected = matches!(
            kraus_from_choi(&choi, tol::tol_rank()),
            Err(Error::NotCompletelyPositive { .. })
        );
        prop_assert!(rejected);
    }
}
