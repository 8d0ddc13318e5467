//! Canonical angles of `2p`-planes in ℂ^m and the σ detector for complex
//! planes.

use std::f64::consts::FRAC_PI_2;

use cayley_core::graphs::angles::{normalize_angles, validate_angles};
use cayley_core::graphs::{canonical_angles, construct_from_angles, is_complex_plane};
use cayley_core::linalg::seeded_rng;
use cayley_core::sampling::{complex_test_plane, random_angles, PlaneFamily};
use cayley_core::spin7::phi0_model;
use cayley_core::{CalabiYauModel, ComplexStructure, OrientedPlane, Phase, Rational, Scalar, Vector};
use serde_json::json;

use super::stream;
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::{Check, Status};

pub const DEFAULT_ROUND_TRIPS: usize = 100;
pub const DEFAULT_DETECTOR_PLANES: usize = 500;
/// `J`-invariance and σ threshold, as a multiple of `tol`.
pub const DETECTOR_TOL_FACTOR: f64 = 10.0;

const SHAPES: [(usize, usize); 6] = [(4, 2), (4, 3), (3, 1), (3, 2), (4, 1), (2, 1)];

pub fn run(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = angle_checks(cfg)?;
    checks.extend(detector_checks(cfg)?);
    Ok(checks)
}

fn structures(m: usize) -> Vec<ComplexStructure> {
    let mut out = vec![ComplexStructure::standard(m)];
    if m == 4 {
        out.push(phi0_model::<f64>().j().clone());
    }
    out
}

fn angle_checks(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = cfg.tol;
    let mut rng = seeded_rng(cfg.seed, stream::ANGLES);
    let n = cfg.samples_or(DEFAULT_ROUND_TRIPS);

    let (mut worst, mut defective) = (0.0f64, 0);
    for i in 0..n {
        let (m, p) = SHAPES[i % SHAPES.len()];
        let js = structures(m);
        let j = &js[(i / SHAPES.len()) % js.len()];
        let angles = random_angles(&mut rng, m, p);
        validate_angles(m, &angles, 1e-12)?;
        let plane = construct_from_angles(&mut rng, j, &angles)?;
        let rec = canonical_angles(&plane, j)?;
        let expected = normalize_angles(&angles);
        let err = expected.iter().zip(&rec.angles).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(if rec.angles.len() == p { err } else { f64::INFINITY });
        defective += usize::from(rec.defective(tol));
    }
    let round_trip = Check::within(
        "angles.round_trip",
        "a plane built from admissible canonical angles in a random unitary frame recovers those angles",
        worst,
        tol,
    )
    .with_details(json!({ "samples": n, "shapes": SHAPES, "defective_decompositions": defective }));
    let round_trip = if defective > 0 { round_trip.with_status(Status::Fail) } else { round_trip };

    // complex planes: every angle vanishes
    let mut complex_worst = 0.0f64;
    let mut complex_planes = 0;
    for (m, p) in SHAPES.into_iter().chain([(2, 2), (4, 4)]) {
        for j in structures(m) {
            let plane = construct_from_angles(&mut rng, &j, &vec![0.0; p])?;
            let rec = canonical_angles(&plane, &j)?;
            complex_worst = complex_worst.max(rec.angles.iter().map(|a| a.abs()).fold(0.0, f64::max));
            complex_planes += 1;
        }
    }

    // ω|_V = 0: every angle is π/2
    let mut isotropic_worst = 0.0f64;
    let mut isotropic = Vec::new();
    for (m, p) in [(2, 1), (3, 1), (4, 1), (4, 2)] {
        for j in structures(m) {
            isotropic.push((j.clone(), construct_from_angles(&mut rng, &j, &vec![FRAC_PI_2; p])?));
        }
    }
    isotropic.push((ComplexStructure::standard(4), OrientedPlane::coordinate(8, &[1, 3, 5, 7])?));
    isotropic.push((phi0_model::<f64>().j().clone(), OrientedPlane::coordinate(8, &[1, 3, 6, 8])?));
    for (j, plane) in &isotropic {
        let omega = j.kahler_form::<f64>();
        let b = plane.basis();
        let mut omega_restricted = 0.0f64;
        for x in 0..b.len() {
            for y in x + 1..b.len() {
                omega_restricted = omega_restricted.max(omega.evaluate(&[b[x].clone(), b[y].clone()])?.abs());
            }
        }
        let rec = canonical_angles(plane, j)?;
        let err = rec.angles.iter().map(|a| (a - FRAC_PI_2).abs()).fold(omega_restricted, f64::max);
        isotropic_worst = isotropic_worst.max(err);
    }

    Ok(vec![
        round_trip,
        Check::within("angles.complex_planes", "every canonical angle of a complex plane is 0", complex_worst, tol)
            .with_details(json!({ "planes": complex_planes })),
        Check::within(
            "angles.isotropic_planes",
            "every canonical angle of a plane on which ω vanishes is π/2",
            isotropic_worst,
            tol,
        )
        .with_details(json!({ "planes": isotropic.len() })),
    ])
}

fn detector_checks(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = DETECTOR_TOL_FACTOR * cfg.tol;
    let mut rng = seeded_rng(cfg.seed, stream::DETECTOR);
    let n = cfg.samples_or(DEFAULT_DETECTOR_PLANES);
    let models: Vec<CalabiYauModel<f64>> = vec![
        CalabiYauModel::new(2, Phase::quarter_turns(1))?,
        CalabiYauModel::new(3, Phase::from_radians(0.7))?,
        CalabiYauModel::new(4, Phase::from_radians(-1.1))?,
        phi0_model(),
    ];
    let (mut disagreements, mut complex, mut m_p1, mut m_p1_non_complex, mut known_complex_missed) = (0, 0, 0, 0, 0);
    for i in 0..n {
        let model = &models[i % models.len()];
        let m = model.m();
        let p = (1 + (i / models.len()) % (m - 1).max(1)).clamp(1, m - 1);
        let (family, plane) = complex_test_plane(&mut rng, model.j(), p)?;
        let check = is_complex_plane(model, &plane, tol)?;
        disagreements += usize::from(!check.agrees());
        if matches!(family, PlaneFamily::Complex | PlaneFamily::ReversedComplex) && !check.complex {
            known_complex_missed += 1;
        }
        complex += usize::from(check.complex);
        if p + 1 == m {
            m_p1 += 1;
            m_p1_non_complex += usize::from(!check.complex);
        }
    }
    let agreement = Check::count(
        "angles.detector_agreement",
        "σ vanishing on all (p+1)-subsets, with Im Ω also vanishing when p + 1 = m, detects exactly the J-invariant planes",
        disagreements + known_complex_missed,
    )
    .with_details(json!({
        "planes": n,
        "tolerance": tol,
        "complex": complex,
        "m_equals_p_plus_1": m_p1,
        "m_equals_p_plus_1_non_complex": m_p1_non_complex,
        "known_complex_missed": known_complex_missed,
    }));

    Ok(vec![agreement, counterexample(cfg)?])
}

/// `m = 2`, phase π/2, `V = span{e₁, cos θ Je₁ + sin θ e₂}` with
/// `(cos θ, sin θ) = (3/5, 4/5)`: σ vanishes but the plane is not complex.
fn counterexample(cfg: &SuiteConfig) -> Result<Check> {
    if cfg.exact() {
        counterexample_with::<Rational>(cfg)
    } else {
        counterexample_with::<f64>(cfg)
    }
}

fn counterexample_with<S: Scalar>(cfg: &SuiteConfig) -> Result<Check> {
    let tol = cfg.identity_tol();
    let model = CalabiYauModel::<S>::new(2, Phase::quarter_turns(1))?;
    let v1 = Vector::from_i64(&[1, 0, 0, 0]);
    let v2 = Vector::new(vec![S::zero(), S::from_ratio(3, 5), S::from_ratio(4, 5), S::zero()]);
    let plane = OrientedPlane::new(vec![v1, v2], tol)?;
    let check = is_complex_plane(&model, &plane, tol)?;
    let im = check.imaginary_residual.unwrap_or(0.0);
    let ok = check.sigma_residual <= tol && (im - 0.8).abs() <= 1e-12 && !check.complex && !check.j_invariant;
    Ok(Check::within(
        "angles.quarter_phase_counterexample",
        "for m = 2 and phase π/2, σ vanishes on a non-complex line pair while Im Ω equals sin θ ≠ 0, so Im Ω is needed when p + 1 = m",
        check.sigma_residual,
        tol,
    )
    .with_status(Status::from_bool(ok))
    .with_details(json!({ "check": check.to_json(), "expected_imaginary_residual": 0.8 })))
}
