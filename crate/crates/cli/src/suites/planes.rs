//! Cayley planes: calibration against vanishing of τ on seeded random planes,
//! and the standard examples.

use cayley_core::linalg::seeded_rng;
use cayley_core::sampling::{haar_plane, perturb_plane, random_cayley_plane, reverse_orientation};
use cayley_core::{CayleyForm, OrientedPlane, Rational, Scalar, Vector};
use serde_json::json;

use super::stream;
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::{json_f64, Check};

pub const DEFAULT_PLANES: usize = 1000;
/// `‖τ‖` threshold as a multiple of the `|Φ − 1|` threshold.
pub const TAU_TOL_FACTOR: f64 = 100.0;
/// Size of the perturbation of Cayley planes. Near a Cayley plane
/// `1 − Φ(V) ~ ‖τ‖²`, so perturbations giving `‖τ‖` between the τ threshold
/// and the square root of the Φ threshold would classify inconsistently;
/// 1e-2 stays well clear of that window.
pub const PERTURBATION: f64 = 1e-2;

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    cayley: usize,
    non_cayley: usize,
    contradictions: usize,
    anti_cayley_violations: usize,
    anti_cayley: usize,
}

pub fn run(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let phi_tol = cfg.tol;
    let tau_tol = TAU_TOL_FACTOR * cfg.tol;
    let phi = CayleyForm::<f64>::phi0();
    let mut rng = seeded_rng(cfg.seed, stream::PLANES);
    let n = cfg.samples_or(DEFAULT_PLANES);

    let mut t = Tally::default();
    let mut worst_calibration = f64::NEG_INFINITY;
    let mut first_contradiction = None;
    for i in 0..n {
        // Haar planes are oriented so that Φ(V) ≥ 0: τ cannot see the
        // orientation, and on the reversed orientation Φ = −1 at τ = 0.
        let v = match i % 5 {
            0 | 1 => {
                let v = haar_plane(&mut rng, 8, 4)?;
                let value = phi.evaluate_plane(&v)?;
                worst_calibration = worst_calibration.max(value.abs() - 1.0);
                if value < 0.0 {
                    reverse_orientation(&v)?
                } else {
                    v
                }
            }
            2 => random_cayley_plane(&mut rng, &phi)?,
            3 => {
                let r = reverse_orientation(&random_cayley_plane(&mut rng, &phi)?)?;
                t.anti_cayley += 1;
                let value = phi.evaluate_plane(&r)?;
                let tau = phi.tau_on(r.basis())?.norm();
                if (value + 1.0).abs() >= phi_tol || tau >= tau_tol {
                    t.anti_cayley_violations += 1;
                }
                reverse_orientation(&r)?
            }
            _ => {
                let base = random_cayley_plane(&mut rng, &phi)?;
                perturb_plane(&mut rng, &base, PERTURBATION)?
            }
        };
        let value = phi.evaluate_plane(&v)?;
        let tau = phi.tau_on(v.basis())?.norm();
        let calibrated = (value - 1.0).abs() < phi_tol;
        let tau_zero = tau < tau_tol;
        if calibrated != tau_zero {
            t.contradictions += 1;
            first_contradiction.get_or_insert(json!({ "plane": i, "phi": value, "tau_norm": tau }));
        }
        if calibrated {
            t.cayley += 1;
        } else {
            t.non_cayley += 1;
        }
    }

    let mut checks = vec![
        Check::count(
            "planes.cayley_tau_equivalence",
            "an oriented 4-plane with Φ(V) ≥ 0 is Cayley if and only if τ vanishes on it",
            t.contradictions,
        )
        .with_details(json!({
            "planes": n,
            "cayley": t.cayley,
            "non_cayley": t.non_cayley,
            "phi_tolerance": phi_tol,
            "tau_tolerance": tau_tol,
            "perturbation": PERTURBATION,
            "first_contradiction": first_contradiction,
        })),
        Check::count(
            "planes.anti_cayley",
            "τ vanishes on orientation-reversed Cayley planes, where Φ = −1",
            t.anti_cayley_violations,
        )
        .with_details(json!({ "planes": t.anti_cayley })),
        Check::within(
            "planes.calibration_inequality",
            "|Φ(V)| ≤ 1 on every oriented orthonormal 4-plane",
            worst_calibration.max(0.0),
            1e-12,
        )
        .with_details(json!({ "max_excess": json_f64(worst_calibration) })),
    ];
    checks.extend(standard_planes(cfg)?);
    Ok(checks)
}

/// The complex plane `span{e₁..e₄}`, the special Lagrangian plane
/// `span{e₁, e₃, e₆, e₈}` and the 14 coordinate planes of Φ.
fn standard_planes(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    if cfg.exact() {
        standard_planes_with::<Rational>(cfg)
    } else {
        standard_planes_with::<f64>(cfg)
    }
}

fn standard_planes_with<S: Scalar>(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let tol = cfg.identity_tol();
    let phi = CayleyForm::<S>::phi0();
    let mut checks = Vec::new();
    for (name, idx, reference) in [
        ("planes.standard_complex", [1, 2, 3, 4], "the complex plane z₃ = z₄ = 0 is Cayley"),
        ("planes.special_lagrangian", [1, 3, 6, 8], "the special Lagrangian plane span{e₁, e₃, e₆, e₈} is Cayley"),
    ] {
        let v = OrientedPlane::coordinate(8, &idx)?;
        let c = phi.is_cayley(&v, tol)?;
        checks.push(
            Check::within(name, reference, (c.phi_value - 1.0).abs().max(c.tau_norm), tol)
                .with_status(crate::report::Status::from_bool(c.cayley && c.tau_vanishes))
                .with_details(json!({ "basis": idx, "phi": c.phi_value, "tau_norm": c.tau_norm })),
        );
    }
    let mut violations = 0;
    for (idx, c) in phi.phi().sorted_terms() {
        let mut basis: Vec<Vector<S>> = idx.iter().map(|&k| Vector::basis(8, k)).collect();
        if c < S::zero() {
            basis[0] = basis[0].scale(&-S::one());
        }
        let v = OrientedPlane::new(basis, tol)?;
        let check = phi.is_cayley(&v, tol)?;
        violations += usize::from(!(check.cayley && check.tau_vanishes));
    }
    checks.push(Check::count(
        "planes.coordinate_cayley",
        "each of the 14 coordinate planes in Φ, oriented so that Φ = 1, is Cayley with τ = 0",
        violations,
    ));
    Ok(checks)
}
