use cayley_core::linalg::seeded_rng;
use cayley_core::torus::nonlinear::{fd_linearization_check, linearization_error, DEFAULT_LADDER};
use cayley_core::torus::operators::{
    adjointness_residual, dbar_forms_matrix, direct_sum, null_spaces, span_distance, DEFAULT_KERNEL_TOL,
};
use cayley_core::torus::{
    adjoint_matrix, dbar_matrix, dbar_star_matrix, dirac_matrix, index_from_chern, index_from_topology, kernel_dim,
    ChernNumbers, TopologicalInvariants,
};
use cayley_core::{Bundle, FourierSection, Rational, Scalar, TorusModel};
use num_complex::Complex64;
use proptest::prelude::*;

#[test]
fn kernel_dimensions_are_stable_in_the_truncation() {
    for k in 0..=3 {
        let m = TorusModel::<f64>::new(k).unwrap();
        let dims: Vec<usize> = [dbar_matrix(&m), dbar_star_matrix(&m), dirac_matrix(&m), adjoint_matrix(&m)]
            .into_iter()
            .map(|op| kernel_dim(&op.unwrap(), DEFAULT_KERNEL_TOL).complex_dim)
            .collect();
        assert_eq!(dims, vec![2, 2, 4, 4], "K = {k}");
        let rep = kernel_dim(&dirac_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL);
        assert_eq!(rep.real_dim, 8);
        if k > 0 {
            assert!(rep.gap_orders.unwrap() >= 6.0);
            assert!(rep.warning.is_none());
        }
    }
}

#[test]
fn adjointness_is_exact_on_rational_sections() {
    let m = TorusModel::<Rational>::new(2).unwrap();
    let mut rng = seeded_rng(8, 0);
    let zero = Rational::from_i64(0);
    let d = dbar_forms_matrix(&m).unwrap();
    let s = dbar_star_matrix(&m).unwrap();
    assert_eq!(adjointness_residual(&m, &d, &s, 5, &mut rng).unwrap(), zero);
    let dirac = dirac_matrix(&m).unwrap();
    let adj = adjoint_matrix(&m).unwrap();
    assert_eq!(adjointness_residual(&m, &dirac, &adj, 5, &mut rng).unwrap(), zero);
}

#[test]
fn cayley_kernel_is_sum_of_complex_kernels() {
    let m = TorusModel::<f64>::new(2).unwrap();
    let tol = DEFAULT_KERNEL_TOL;
    let sum =
        direct_sum(&null_spaces(&dbar_matrix(&m).unwrap(), tol), &null_spaces(&dbar_star_matrix(&m).unwrap(), tol));
    let dist = span_distance(&null_spaces(&dirac_matrix(&m).unwrap(), tol), &sum).unwrap();
    assert!(dist < 1e-10, "{dist}");
}

#[test]
fn linearization_of_the_cayley_operator_is_the_dirac_operator() {
    let m = TorusModel::<f64>::new(1).unwrap();
    let mut rng = seeded_rng(21, 0);
    for _ in 0..3 {
        let v1 = FourierSection::random(&m, Bundle::Normal, 1.0, &mut rng);
        let w = FourierSection::random(&m, Bundle::Forms02, 1.0, &mut rng);
        assert!(linearization_error(&m, &v1, &w, 1e-5).unwrap() < 1e-6);
    }
}

#[test]
fn constant_sections_have_zero_remainder() {
    let m = TorusModel::<f64>::new(1).unwrap();
    let v1 = FourierSection::single_mode(&m, Bundle::Normal, [0; 4], 0, Complex64::new(1.0, 2.0)).unwrap();
    let w = FourierSection::zero(&m, Bundle::Forms02);
    let rep = fd_linearization_check(&m, &v1, &w, &DEFAULT_LADDER).unwrap();
    assert!(rep.vacuous && rep.pass);
    assert!(rep.residuals.iter().all(|&r| r == 0.0));
}

#[test]
fn index_examples() {
    assert_eq!(index_from_topology(&TopologicalInvariants::new(0, 0, 0)).unwrap(), 0);
    assert_eq!(index_from_topology(&TopologicalInvariants::new(-16, 24, 0)).unwrap(), 4);
    assert_eq!(index_from_topology(&TopologicalInvariants::new(0, 0, 5)).unwrap(), -5);
    assert_eq!(index_from_chern(&ChernNumbers { c1_sq: 0, c2: 24, c2_nu: 0 }).unwrap(), 4);
    // the flat torus: all invariants vanish and so does the index of ∂̄ ⊕ ∂̄*
    let m = TorusModel::<f64>::new(1).unwrap();
    let kd = kernel_dim(&dirac_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL).complex_dim as i64;
    let ka = kernel_dim(&adjoint_matrix(&m).unwrap(), DEFAULT_KERNEL_TOL).complex_dim as i64;
    assert_eq!(kd - ka, index_from_topology(&TopologicalInvariants::new(0, 0, 0)).unwrap());
}

proptest! {
    #[test]
    fn index_formulas_agree(a in -40i64..40, c2 in -200i64..200, c2_nu in -50i64..50) {
        // c₁² = 6a − c₂ satisfies both divisibility conditions
        let c = ChernNumbers { c1_sq: 6 * a - c2, c2, c2_nu };
        prop_assert!(c.divisible());
        let topo = c.to_topology().unwrap();
        prop_assert_eq!(index_from_chern(&c).unwrap(), index_from_topology(&topo).unwrap());
    }

    #[test]
    fn index_rejects_odd_half_sums(s in -100i64..100, e in -100i64..100, n in -10i64..10) {
        let r = index_from_topology(&TopologicalInvariants::new(s, e, n));
        prop_assert_eq!(r.is_ok(), (s + e) % 2 == 0);
    }
}
