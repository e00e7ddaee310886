mod common;

use common::*;
use gridstrength::gscr::{
    case_gscr, case_jacobian, compute_gscr, extended_jacobian, factorization_check, lemma2_check,
};
use gridstrength::netmodel::{
    build_susceptance, kron_reduce, scale_impedance, Branch, CaseFile, ReducedNetwork,
};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn reduced(case: &CaseFile) -> DMatrix<f64> {
    ReducedNetwork::from_case(case).unwrap().b.entries().clone()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

#[test]
fn kron_matches_full_pivot_oracle_on_five_bus_networks() {
    for seed in 0..100 {
        let case = random_case(seed, 2, 3);
        let b = build_susceptance(&case);
        let red = kron_reduce(&b, &[1, 2]).unwrap();
        let oracle = oracle_kron(&dense_susceptance(&case), &[0, 1]);
        let err = (red.entries() - &oracle).amax();
        assert!(err <= 1e-12 * oracle.amax().max(1.0), "seed {seed}: {err:e}");
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn assembly_is_exactly_symmetric(seed in any::<u64>(), nc in 1usize..6, ni in 0usize..5) {
        let b = build_susceptance(&random_case(seed, nc, ni));
        let m = b.entries();
        prop_assert_eq!(m, &m.transpose());
    }

    #[test]
    fn reduced_network_is_negative_definite(seed in any::<u64>(), nc in 1usize..6, ni in 0usize..5) {
        let b = reduced(&random_case(seed, nc, ni));
        let eig = SymmetricEigen::new(-b.clone());
        prop_assert!(eig.eigenvalues.min() > 0.0);
        for i in 0..b.nrows() {
            prop_assert!(b[(i, i)] < 0.0);
            for j in (0..b.ncols()).filter(|j| *j != i) {
                prop_assert!(b[(i, j)] >= 0.0);
            }
        }
    }

    #[test]
    fn elimination_composes(seed in any::<u64>(), ni in 1usize..5) {
        let case = random_case(seed, 3, ni);
        let b = build_susceptance(&case);
        let once = kron_reduce(&b, &[1]).unwrap();
        let twice = kron_reduce(&kron_reduce(&b, &[1, 2, 3]).unwrap(), &[1]).unwrap();
        let err = (once.entries() - twice.entries()).amax();
        prop_assert!(err <= 1e-10 * once.entries().amax().max(1.0));
    }

    #[test]
    fn impedance_scaling_divides_susceptance(seed in any::<u64>(), s in 0.05f64..20.0) {
        let case = random_case(seed, 3, 2);
        let base = reduced(&case);
        let scaled = reduced(&scale_impedance(&case, s).unwrap());
        let err = max_rel_entry_err(&(scaled * s), &base);
        prop_assert!(err <= 1e-12, "{err:e}");
    }

    #[test]
    fn jacobian_spectrum_equals_symmetrized_spectrum(seed in any::<u64>(), nc in 1usize..8, ni in 0usize..4) {
        let case = random_case(seed, nc, ni);
        let j = case_jacobian(&case).unwrap();
        let r = compute_gscr(&j).unwrap();
        let mut general: Vec<f64> = j.matrix().complex_eigenvalues().iter().map(|z| {
            assert!(z.im.abs() <= 1e-8 * z.re.abs().max(1.0));
            z.re
        }).collect();
        general.sort_by(f64::total_cmp);
        let scale = r.eigen.lambdas.last().copied().unwrap();
        for (a, b) in general.iter().zip(&r.eigen.lambdas) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn eigenvalues_scale_with_inverse_impedance(seed in any::<u64>(), s in 0.1f64..10.0) {
        let case = random_case(seed, 4, 2);
        let a = compute_gscr(&case_jacobian(&case).unwrap()).unwrap().eigen.lambdas;
        let b = compute_gscr(&case_jacobian(&scale_impedance(&case, s).unwrap()).unwrap()).unwrap().eigen.lambdas;
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(rel_err(y * s, *x) <= 1e-9);
        }
    }

    #[test]
    fn adding_a_tie_never_lowers_gscr(seed in any::<u64>(), x in 0.05f64..2.0, a in 1u32..5, b in 1u32..5) {
        prop_assume!(a != b);
        let case = random_case(seed, 4, 2);
        let mut tied = case.clone();
        tied.branches.push(Branch { from: a, to: b, x_pu: x });
        let before = case_gscr(&case).unwrap();
        let after = case_gscr(&tied).unwrap();
        prop_assert!(after >= before * (1.0 - 1e-12), "{before} -> {after}");
    }

    #[test]
    fn lemma2_holds_on_random_networks(seed in any::<u64>(), nc in 1usize..11, ni in 0usize..4) {
        let report = lemma2_check(&case_jacobian(&random_case(seed, nc, ni)).unwrap()).unwrap();
        prop_assert!(report.holds(), "{report:?}");
    }

    #[test]
    fn determinant_factorizes(seed in any::<u64>(), nc in 1usize..8, rho in 0.2f64..2.0, t in 0.0f64..3.0) {
        let j = case_jacobian(&random_case(seed, nc, 2)).unwrap();
        let f = factorization_check(&j, rho, t).unwrap();
        prop_assert!(f.residual <= 1e-8, "{f:?}");
    }

    #[test]
    fn gscr_matches_bisection_oracle(seed in any::<u64>(), ni in 0usize..4) {
        let case = random_case(seed, 6, ni);
        let g = case_gscr(&case).unwrap();
        prop_assert!(rel_err(g, oracle_gscr(&case)) <= 1e-9);
    }
}

#[test]
fn single_bus_gscr_is_inverse_of_rating_times_impedance() {
    for (p, z) in [(1.0, 0.5), (0.99, 1.0 / 3.0), (2.5, 0.137), (0.3, 1.9)] {
        let b = gridstrength::netmodel::SusceptanceMatrix::new(DMatrix::from_element(1, 1, -1.0 / z), vec![1]);
        let j = extended_jacobian(&b, &nalgebra::DVector::from_element(1, p)).unwrap();
        let g = compute_gscr(&j).unwrap().gscr;
        assert!(rel_err(g, 1.0 / (p * z)) <= 1e-12);
    }
}

#[test]
fn factorization_hand_example() {
    let b = gridstrength::netmodel::SusceptanceMatrix::new(
        DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 1.0, -2.0]),
        vec![1, 2],
    );
    let j = extended_jacobian(&b, &nalgebra::DVector::from_element(2, 1.0)).unwrap();
    let f = factorization_check(&j, 1.0, 1.0).unwrap();
    assert!((f.determinant + 5.0 / 3.0).abs() <= 1e-12);
    assert!((f.product + 5.0 / 3.0).abs() <= 1e-12);
}
