//! Seeded generators for the random planes and angle vectors used by the
//! verification suites.

use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::Result;
use crate::exterior::Vector;
use crate::graphs::angles::construct_from_angles;
use crate::kahler::ComplexStructure;
use crate::linalg;
use crate::plane::OrientedPlane;
use crate::spin7::CayleyForm;

const FRAME_TOL: f64 = 1e-10;

/// Haar-random oriented `k`-plane in ℝⁿ.
pub fn haar_plane<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<OrientedPlane<f64>> {
    OrientedPlane::new(linalg::haar_frame(rng, n, k), FRAME_TOL)
}

/// Random Cayley plane: a Haar 3-frame `x, u, v` completed by the triple
/// cross product `w = Φ(x, u, v, ·)♯`, which has unit length and
/// `Φ(x, u, v, w) = 1`.
pub fn random_cayley_plane<R: Rng + ?Sized>(rng: &mut R, phi: &CayleyForm<f64>) -> Result<OrientedPlane<f64>> {
    let f = linalg::haar_frame(rng, 8, 3);
    let one_form = phi.phi().contract(&f)?;
    let w = Vector::new((1..=8).map(|i| one_form.coeff(&[i])).collect());
    let mut basis = f;
    basis.push(w);
    OrientedPlane::orthonormalize(basis, FRAME_TOL)
}

/// Moves every basis vector by Gaussian noise of size `eps` and
/// re-orthonormalizes, keeping the orientation.
pub fn perturb_plane<R: Rng + ?Sized>(rng: &mut R, plane: &OrientedPlane<f64>, eps: f64) -> Result<OrientedPlane<f64>> {
    let n = plane.ambient_dim();
    let rows = plane
        .basis()
        .iter()
        .map(|v| Vector::new(v.comps().iter().map(|c| c + eps * linalg::gaussian(rng)).collect()))
        .collect();
    OrientedPlane::orthonormalize(rows, FRAME_TOL).inspect(|p| debug_assert_eq!(p.ambient_dim(), n))
}

/// The same plane with the opposite orientation.
pub fn reverse_orientation(plane: &OrientedPlane<f64>) -> Result<OrientedPlane<f64>> {
    let mut basis = plane.basis().to_vec();
    basis[0] = basis[0].scale(&-1.0);
    OrientedPlane::new(basis, FRAME_TOL)
}

/// Uniformly drawn admissible canonical angles for a `2p`-plane in ℂ^m.
pub fn random_angles<R: Rng + ?Sized>(rng: &mut R, m: usize, p: usize) -> Vec<f64> {
    let complex_pairs = (2 * p).saturating_sub(m);
    let free = p - complex_pairs;
    let mut angles = vec![0.0; complex_pairs];
    if free == 0 {
        return angles;
    }
    let mut head: Vec<f64> = (0..free - 1).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect();
    head.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let floor = head.last().copied().unwrap_or(0.0);
    angles.extend(head);
    angles.push(rng.random_range(floor..PI));
    angles
}

/// Which family a test plane for the complex-plane detector was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaneFamily {
    Complex,
    ReversedComplex,
    NearlyComplex,
    Generic,
    Haar,
}

/// Draws a `2p`-plane in `(ℝ^{2m}, J)` from a mixture that puts equal weight
/// on complex, reversed complex, nearly complex (one small angle), generic
/// canonical-angle and Haar planes.
pub fn complex_test_plane<R: Rng + ?Sized>(
    rng: &mut R,
    j: &ComplexStructure,
    p: usize,
) -> Result<(PlaneFamily, OrientedPlane<f64>)> {
    let m = j.m();
    let family = match rng.random_range(0..5) {
        0 => PlaneFamily::Complex,
        1 => PlaneFamily::ReversedComplex,
        2 => PlaneFamily::NearlyComplex,
        3 => PlaneFamily::Generic,
        _ => PlaneFamily::Haar,
    };
    let plane = match family {
        PlaneFamily::Complex => construct_from_angles(rng, j, &vec![0.0; p])?,
        PlaneFamily::ReversedComplex => {
            let mut a = vec![0.0; p];
            a[p - 1] = PI;
            construct_from_angles(rng, j, &a)?
        }
        PlaneFamily::NearlyComplex => {
            let mut a = vec![0.0; p];
            if 2 * p > m {
                // Every pair is forced complex; nudge the plane off instead.
                let base = construct_from_angles(rng, j, &a)?;
                return Ok((family, perturb_plane(rng, &base, 1e-3)?));
            }
            a[p - 1] = 1e-3;
            construct_from_angles(rng, j, &a)?
        }
        PlaneFamily::Generic => {
            let a = random_angles(rng, m, p);
            construct_from_angles(rng, j, &a)?
        }
        PlaneFamily::Haar => haar_plane(rng, 2 * m, 2 * p)?,
    };
    Ok((family, plane))
}
