use cayley_core::graphs::angles::{normalize_angles, validate_angles};
use cayley_core::graphs::system::tau_components;
use cayley_core::graphs::{
    canonical_angles, construct_from_angles, is_complex_plane, normal_isom, normal_isom_inverse, residual_quadratics,
    solve_tau_system, tau_system, GraphCoefficients, InverseNormalization, GRAPH_RADIUS,
};
use cayley_core::linalg::{gaussian, seeded_rng};
use cayley_core::sampling::{complex_test_plane, random_angles, PlaneFamily};
use cayley_core::spin7::phi0_model;
use cayley_core::{
    CalabiYauModel, CayleyForm, ComplexVector, Phase, Rational, Scalar, TypedVector, Vector, VectorType,
};
use proptest::prelude::*;
use rand::Rng;

fn random_lambda<R: Rng>(rng: &mut R, radius: f64) -> GraphCoefficients<f64> {
    let mut lam = GraphCoefficients::<f64>::zero();
    for j in 1..=4 {
        for i in 5..=8 {
            lam.set(j, i, gaussian(rng));
        }
    }
    let scale = radius * rng.random_range(0.1..1.0) / lam.norm();
    GraphCoefficients::from_rows(lam.rows().map(|r| r.map(|x| x * scale)))
}

#[test]
fn fifty_newton_solutions_are_cayley() {
    let phi = CayleyForm::<f64>::phi0();
    let mut rng = seeded_rng(50, 0);
    let mut solved = 0;
    while solved < 50 {
        let mut seed = random_lambda(&mut rng, GRAPH_RADIUS);
        for i in 5..=8 {
            seed.set(1, i, 0.0);
        }
        if seed.norm() > 0.3 {
            continue;
        }
        let out = solve_tau_system(&seed, 1e-13).unwrap();
        let q = residual_quadratics(&out.lambda);
        assert!(q.iter().all(|x| x.abs() < 1e-8), "{q:?}");
        let tau = phi.tau_on(&out.lambda.frame()).unwrap().norm();
        assert!(tau < 1e-8, "‖τ‖ = {tau}");
        solved += 1;
    }
}

#[test]
fn polynomials_are_e_components_for_random_graphs() {
    let phi = CayleyForm::<f64>::phi0();
    let mut rng = seeded_rng(100, 0);
    for _ in 0..100 {
        let lam = random_lambda(&mut rng, 0.5);
        let comps = tau_components(&phi, &lam).unwrap();
        let poly = tau_system(&lam);
        for (e, eq) in comps.e_part.iter().zip(&poly) {
            assert!((e - eq).abs() < 1e-13);
        }
        for (q, sd) in residual_quadratics(&lam).iter().zip(&comps.self_dual) {
            assert!((q - 2.0 * sd).abs() < 1e-13);
        }
    }
}

#[test]
fn complex_detector_agrees_with_j_invariance() {
    let mut rng = seeded_rng(500, 0);
    let models: Vec<CalabiYauModel<f64>> = vec![
        CalabiYauModel::new(2, Phase::quarter_turns(1)).unwrap(),
        CalabiYauModel::new(3, Phase::from_radians(0.7)).unwrap(),
        CalabiYauModel::new(4, Phase::from_radians(-1.1)).unwrap(),
        phi0_model(),
    ];
    let mut disagreements = 0;
    let mut complex = 0;
    let mut m_p1_non_complex = 0;
    for i in 0..500 {
        let model = &models[i % models.len()];
        let m = model.m();
        let p = 1 + (i / models.len()) % (m - 1).max(1);
        let p = p.min(m - 1).max(1);
        let (family, plane) = complex_test_plane(&mut rng, model.j(), p).unwrap();
        let check = is_complex_plane(model, &plane, 1e-8).unwrap();
        if !check.agrees() {
            disagreements += 1;
        }
        if matches!(family, PlaneFamily::Complex | PlaneFamily::ReversedComplex) {
            assert!(check.complex, "{family:?} m={m} p={p}");
        }
        complex += check.complex as usize;
        if p + 1 == m && !check.complex {
            m_p1_non_complex += 1;
        }
    }
    assert_eq!(disagreements, 0);
    assert!(complex > 100 && complex < 400);
    assert!(m_p1_non_complex > 0);
}

#[test]
fn quarter_phase_counterexample() {
    // m = 2, φ = π/2: σ vanishes on a non-complex line pair, Im Ω does not.
    let model = CalabiYauModel::<Rational>::new(2, Phase::quarter_turns(1)).unwrap();
    let (c, s) = (Rational::from_ratio(3, 5), Rational::from_ratio(4, 5));
    let v1 = Vector::from_i64(&[1, 0, 0, 0]);
    let v2 = Vector::new(vec![Rational::from_i64(0), c, s.clone(), Rational::from_i64(0)]);
    let plane = cayley_core::OrientedPlane::new(vec![v1, v2], 0.0).unwrap();
    let check = is_complex_plane(&model, &plane, 0.0).unwrap();
    assert_eq!(check.sigma_residual, 0.0);
    assert_eq!(check.imaginary_residual, Some(0.8));
    assert!(!check.complex && !check.j_invariant);
}

#[test]
fn normal_isomorphism_round_trip_is_exact() {
    let model = phi0_model::<Rational>();
    let j = model.j().clone();
    for (a, b) in [(1, 0), (0, 1), (3, -2), (-5, 7)] {
        let v =
            j.d_dz_bar::<Rational>(3).scale(&num_complex::Complex::new(Rational::from_i64(a), Rational::from_i64(b)));
        let w = &v
            + &j.d_dz_bar::<Rational>(4)
                .scale(&num_complex::Complex::new(Rational::from_i64(b), Rational::from_i64(2)));
        let tv = TypedVector::new(&j, w.clone(), VectorType::AntiHolomorphic, 0.0).unwrap();
        let form = normal_isom(&model, &tv).unwrap();
        let back = normal_isom_inverse(&model, &form, InverseNormalization::Corrected, 0.0).unwrap();
        assert_eq!(back.vector(), &w);
        let scaled = normal_isom_inverse(&model, &form, InverseNormalization::Unscaled, 0.0).unwrap();
        let four = num_complex::Complex::new(Rational::from_i64(4), Rational::from_i64(0));
        assert_eq!(scaled.vector(), &w.scale(&four));
    }
    let _: Option<ComplexVector<f64>> = None;
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn angles_round_trip(seed in any::<u64>(), shape in 0usize..6, signs in 0usize..2) {
        let (m, p) = [(4, 2), (4, 3), (3, 1), (3, 2), (4, 1), (2, 1)][shape];
        let j = if signs == 0 || m != 4 {
            cayley_core::ComplexStructure::standard(m)
        } else {
            cayley_core::ComplexStructure::with_signs(&[1, 1, -1, -1]).unwrap()
        };
        let mut rng = seeded_rng(seed, 9);
        let angles = random_angles(&mut rng, m, p);
        validate_angles(m, &angles, 1e-12).unwrap();
        let plane = construct_from_angles(&mut rng, &j, &angles).unwrap();
        let rec = canonical_angles(&plane, &j).unwrap();
        let expected = normalize_angles(&angles);
        prop_assert_eq!(normalize_angles(&rec.angles).len(), p);
        for (a, b) in expected.iter().zip(&rec.angles) {
            prop_assert!((a - b).abs() < 1e-9, "{:?} ({:?}) vs {:?}", angles, expected, rec.angles);
        }
        prop_assert!(!rec.defective(1e-9));
    }
}
