use proptest::prelude::*;

use phi_lab_core::channels::{apply_channel, sample_unital_channel};
use phi_lab_core::entropy::{matrix_phi_entropy, operator_phi_entropy};
use phi_lab_core::frechet::{frechet_d1, frechet_d2, frechet_d3, stack, superop_matrix, unstack};
use phi_lab_core::linalg::eigenvalues;
use phi_lab_core::phi::divided_difference_at;
use phi_lab_core::sampling::{haar_unitary, sample_direction, sample_ensemble, sample_spectrum_in, trial_rng};
use phi_lab_core::{HermitianMatrix, KrausChannel, MatrixEnsemble, ScalarFunction};

fn phis() -> impl Strategy<Value = ScalarFunction> {
    prop_oneof![
        Just(ScalarFunction::square()),
        Just(ScalarFunction::xlogx()),
        Just(ScalarFunction::power(1.5).unwrap()),
    ]
}

fn close(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> bool {
    (a - b).max_abs_entry() <= tol * (1.0 + a.max_abs_entry().max(b.max_abs_entry()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_a_nonnegative_jensen_gap(f in phis(), seed: u64, d in 1usize..=4, atoms in 1usize..=4) {
        let mut rng = trial_rng(seed, "prop/entropy", 0);
        let e = sample_ensemble(&mut rng, d, atoms, 0.5, 4.0).unwrap();
        prop_assert!(matrix_phi_entropy(&f, &e).unwrap() >= -1e-12);
        let constant = MatrixEnsemble::deterministic(e.atoms()[0].clone()).unwrap();
        prop_assert!(matrix_phi_entropy(&f, &constant).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn operator_entropy_is_unitarily_covariant(f in phis(), seed: u64, d in 1usize..=4) {
        let mut rng = trial_rng(seed, "prop/covariance", 0);
        let e = sample_ensemble(&mut rng, d, 3, 0.5, 4.0).unwrap();
        let u = haar_unitary(&mut rng, d);
        let rotated = e.map(|a| a.conjugate_by(&u)).unwrap();
        let lhs = operator_phi_entropy(&f, &rotated).unwrap();
        let rhs = operator_phi_entropy(&f, &e).unwrap().conjugate_by(&u);
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn unital_channels_are_linear_and_contract_spectra(seed: u64, d in 1usize..=4, k in 1usize..=4) {
        let mut rng = trial_rng(seed, "prop/channel", 0);
        let n: KrausChannel = sample_unital_channel(&mut rng, d, k).unwrap();
        let a = sample_spectrum_in(&mut rng, d, 0.5, 4.0);
        let b = sample_direction(&mut rng, d);
        let combo = apply_channel(&n, &(&a.scale(0.3) + &b.scale(-1.7))).unwrap();
        let split = &apply_channel(&n, &a).unwrap().scale(0.3) + &apply_channel(&n, &b).unwrap().scale(-1.7);
        prop_assert!(close(&combo, &split, 1e-12));
        let id = apply_channel(&n, &HermitianMatrix::identity(d)).unwrap();
        prop_assert!(close(&id, &HermitianMatrix::identity(d), 1e-10));
        let na = apply_channel(&n, &a).unwrap();
        let (lo, hi) = (a.min_eigenvalue(), a.max_eigenvalue());
        for l in eigenvalues(&na) {
            prop_assert!(l >= lo - 1e-10 && l <= hi + 1e-10);
        }
    }

    #[test]
    fn derivatives_are_symmetric_multilinear_maps(f in phis(), seed: u64, d in 1usize..=4) {
        let mut rng = trial_rng(seed, "prop/frechet", 0);
        let a = sample_spectrum_in(&mut rng, d, 0.5, 4.0);
        let x = sample_direction(&mut rng, d);
        let y = sample_direction(&mut rng, d);
        let w = sample_direction(&mut rng, d);
        let sum = frechet_d1(&f, &a, &(&x + &y.scale(2.0))).unwrap();
        let parts = &frechet_d1(&f, &a, &x).unwrap() + &frechet_d1(&f, &a, &y).unwrap().scale(2.0);
        prop_assert!(close(&sum, &parts, 1e-12));
        prop_assert!(close(&frechet_d2(&f, &a, &x, &y).unwrap(), &frechet_d2(&f, &a, &y, &x).unwrap(), 1e-12));
        let xyw = frechet_d3(&f, &a, &x, &y, &w).unwrap();
        for other in [frechet_d3(&f, &a, &w, &x, &y).unwrap(), frechet_d3(&f, &a, &y, &w, &x).unwrap()] {
            prop_assert!(close(&xyw, &other, 1e-9));
        }
    }

    #[test]
    fn superoperator_matches_first_derivative(f in phis(), seed: u64, d in 1usize..=4) {
        let mut rng = trial_rng(seed, "prop/superop", 0);
        let a = sample_spectrum_in(&mut rng, d, 0.5, 4.0);
        let x = sample_direction(&mut rng, d);
        prop_assert_eq!(unstack(&stack(x.as_matrix()), d).unwrap(), x.as_matrix().clone());
        let t = superop_matrix(&f, &a).unwrap();
        prop_assert!(close(&t.apply_hermitian(&x).unwrap(), &frechet_d1(&f, &a, &x).unwrap(), 1e-12));
    }

    #[test]
    fn divided_differences_are_symmetric_and_collapse(f in phis(), x0 in 0.5f64..4.0, x1 in 0.5f64..4.0, x2 in 0.5f64..4.0) {
        let coincident = 1e-7;
        let v = divided_difference_at(&f, &[x0, x1, x2], coincident);
        let w = divided_difference_at(&f, &[x2, x0, x1], coincident);
        prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
        let tied = divided_difference_at(&f, &[x0, x0, x0], coincident);
        prop_assert!((tied - f.deriv(2, x0) / 2.0).abs() <= 1e-12 * (1.0 + tied.abs()));
    }

    #[test]
    fn ensembles_and_channels_round_trip_through_json(seed: u64, d in 1usize..=3) {
        let mut rng = trial_rng(seed, "prop/json", 0);
        let e = sample_ensemble(&mut rng, d, 3, 0.5, 4.0).unwrap();
        let back: MatrixEnsemble = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        prop_assert_eq!(back, e);
        let n = sample_unital_channel(&mut rng, d, 2).unwrap();
        let back: KrausChannel = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
        prop_assert_eq!(back, n);
    }
}
