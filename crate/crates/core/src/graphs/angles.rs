//! Canonical angles of an oriented real `2p`-plane in `(ℝ^{2m}, J)`.
//!
//! With `F` an orthonormal frame of `V`, `B = FᵀJF` is the matrix of the
//! Kähler form restricted to `V`. Its canonical pairs `(x, y)` satisfy
//! `⟨Jx, y⟩ = cos θ`, and `Jx = cos θ·y + sin θ·u` with `u ⟂ V` unit,
//! which yields the unitary basis `x, u` of each pair.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde_json::{json, Value};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::exterior::Vector;
use crate::kahler::ComplexStructure;
use crate::linalg;
use crate::plane::OrientedPlane;

/// Below this, `sin θ` (resp. `cos θ`) is treated as zero when choosing
/// pair partners.
const PAIRING_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalAngles {
    /// `θ_1 ≤ … ≤ θ_{p-1} ≤ π/2`, `θ_{p-1} ≤ θ_p ≤ π`.
    pub angles: Vec<f64>,
    /// Real vectors `e_1, …, e_m` such that `e_1, Je_1, …, e_m, Je_m` is
    /// orthonormal, ordered as in the canonical form of `V`.
    pub unitary_basis: Vec<Vector<f64>>,
    /// Smallest gap between distinct consecutive `cos θ` values; small gaps
    /// make the individual pair vectors (not the angles) ill-conditioned.
    pub min_gap: f64,
    /// Off-block entries of `B` in the recovered pair basis.
    pub pairing_residual: f64,
    /// Distance of the canonical spanning vectors from `V`.
    pub reconstruction_residual: f64,
    /// Max entry of the Gram matrix of `{e_k, Je_k}` minus the identity.
    pub unitarity_residual: f64,
}

impl CanonicalAngles {
    pub fn defective(&self, tol: f64) -> bool {
        self.pairing_residual > tol || self.reconstruction_residual > tol || self.unitarity_residual > tol
    }

    pub fn to_json(&self) -> Value {
        json!({
            "angles": self.angles,
            "unitary_basis": self.unitary_basis.iter().map(|v| v.comps().to_vec()).collect::<Vec<_>>(),
            "min_gap": self.min_gap,
            "pairing_residual": self.pairing_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "unitarity_residual": self.unitarity_residual,
        })
    }
}

struct Pair {
    x: DVector<f64>,
    y: DVector<f64>,
    // Coordinates of x, y in the frame of V.
    xi: DVector<f64>,
    eta: DVector<f64>,
    cos: f64,
    sin: f64,
}

fn orthonormal_complement(w: &DMatrix<f64>, remove: &[&DVector<f64>]) -> DMatrix<f64> {
    let mut kept: Vec<DVector<f64>> = Vec::new();
    for col in w.column_iter() {
        let mut v = col.into_owned();
        for _ in 0..2 {
            for r in remove.iter().copied().chain(kept.iter()) {
                let d = r.dot(&v);
                v -= r * d;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            kept.push(v / n);
        }
    }
    let target = w.ncols() - remove.len();
    kept.truncate(target);
    if kept.is_empty() {
        return DMatrix::zeros(w.nrows(), 0);
    }
    DMatrix::from_columns(&kept)
}

pub fn canonical_angles(plane: &OrientedPlane<f64>, j: &ComplexStructure) -> Result<CanonicalAngles> {
    let n = plane.ambient_dim();
    if n != 2 * j.m() {
        return Err(Error::DimensionMismatch { left: 2 * j.m(), right: n });
    }
    if plane.dim() % 2 == 1 {
        return Err(Error::Invalid("plane dimension must be even".into()));
    }
    let m = j.m();
    let p = plane.dim() / 2;
    let f = plane.frame_matrix();
    let jm = j.matrix();
    let b = f.transpose() * &jm * &f;

    let mut pairs: Vec<Pair> = Vec::with_capacity(p);
    let mut w = DMatrix::<f64>::identity(2 * p, 2 * p);
    while pairs.len() < p {
        let btb = b.transpose() * &b;
        let restricted = w.transpose() * &btb * &w;
        let eig = SymmetricEigen::new(restricted);
        let top = eig.eigenvalues.imax();
        let xi = (&w * eig.eigenvectors.column(top)).normalize();
        let bxi = &b * &xi;
        let c = bxi.norm();
        let mut eta = if c > PAIRING_EPS {
            bxi / c
        } else {
            // ω vanishes on what is left: any partner in W ⟂ x.
            let rest = orthonormal_complement(&w, &[&xi]);
            rest.column(0).into_owned()
        };
        eta -= &xi * xi.dot(&eta);
        eta.normalize_mut();
        let x = &f * &xi;
        let jx = &jm * &x;
        let outside = &jx - &f * (f.transpose() * &jx);
        let s = outside.norm();
        let y = &f * &eta;
        pairs.push(Pair { x, y, xi: xi.clone(), eta: eta.clone(), cos: c, sin: s });
        w = orthonormal_complement(&w, &[&xi, &eta]);
    }

    // Descending cos = ascending θ.
    pairs.sort_by(|a, b| b.cos.partial_cmp(&a.cos).unwrap_or(std::cmp::Ordering::Equal));
    let mut q = DMatrix::zeros(2 * p, 2 * p);
    for (k, pr) in pairs.iter().enumerate() {
        q.set_column(2 * k, &pr.xi);
        q.set_column(2 * k + 1, &pr.eta);
    }
    let mut angles: Vec<f64> = pairs.iter().map(|pr| pr.sin.atan2(pr.cos)).collect();
    if q.determinant() < 0.0 {
        let last = pairs.last_mut().expect("p ≥ 1");
        last.y = -&last.y;
        last.eta = -&last.eta;
        q.set_column(2 * p - 1, &last.eta);
        angles[p - 1] = PI - angles[p - 1];
    }

    let blocks = q.transpose() * &b * &q;
    let mut pairing_residual: f64 = 0.0;
    for r in 0..2 * p {
        for c in 0..2 * p {
            if r / 2 != c / 2 {
                pairing_residual = pairing_residual.max(blocks[(r, c)].abs());
            }
        }
    }

    let mut min_gap = f64::INFINITY;
    for wdw in pairs.windows(2) {
        let gap = wdw[0].cos - wdw[1].cos;
        if gap > 0.0 {
            min_gap = min_gap.min(gap);
        }
    }

    // Unitary vectors: x_k always; u_k = (y_k − cos θ_k Jx_k)/sin θ_k when
    // the pair is not complex.
    let mut x_vecs = Vec::with_capacity(p);
    let mut u_vecs = Vec::with_capacity(p);
    let mut recon = 0.0f64;
    let proj = &f * f.transpose();
    for (k, pr) in pairs.iter().enumerate() {
        let (ct, st) = (angles[k].cos(), angles[k].sin());
        let jx = &jm * &pr.x;
        let u = if st > 1e-9 { Some((&pr.y - &jx * ct) / st) } else { None };
        let canonical = match &u {
            Some(u) => &jx * ct + u * st,
            None => &jx * ct,
        };
        for v in [&pr.x, &canonical] {
            recon = recon.max((v - &proj * v).amax());
        }
        x_vecs.push(pr.x.clone());
        u_vecs.push(u);
    }

    // Ordering: for 2p ≤ m every pair contributes x then u; for 2p > m the
    // angled pairs come first and the purely complex pairs follow with x only.
    let mut ordered: Vec<Option<DVector<f64>>> = Vec::with_capacity(m);
    if 2 * p <= m {
        for k in 0..p {
            ordered.push(Some(x_vecs[k].clone()));
            ordered.push(u_vecs[k].clone());
        }
    } else {
        let complex_pairs = 2 * p - m;
        for k in complex_pairs..p {
            ordered.push(Some(x_vecs[k].clone()));
            ordered.push(u_vecs[k].clone());
        }
        for x in x_vecs.iter().take(complex_pairs) {
            ordered.push(Some(x.clone()));
        }
    }
    let unitary_basis = complete_unitary(&jm, m, ordered);
    let unitarity_residual = unitarity_residual(&jm, &unitary_basis);

    Ok(CanonicalAngles {
        angles,
        unitary_basis: unitary_basis.iter().map(|v| Vector::new(v.iter().copied().collect())).collect(),
        min_gap,
        pairing_residual,
        reconstruction_residual: recon,
        unitarity_residual,
    })
}

/// Fill the `None` slots (and pad to `m`) with vectors Hermitian-orthogonal
/// to everything already chosen, then re-orthonormalize in the complex sense.
fn complete_unitary(jm: &DMatrix<f64>, m: usize, mut slots: Vec<Option<DVector<f64>>>) -> Vec<DVector<f64>> {
    slots.resize(m, None);
    let mut chosen: Vec<DVector<f64>> = Vec::new();
    let push_orth = |v: &DVector<f64>, chosen: &[DVector<f64>]| -> Option<DVector<f64>> {
        let mut w = v.clone();
        for _ in 0..2 {
            for c in chosen {
                let jc = jm * c;
                w -= c * c.dot(&w);
                w -= &jc * jc.dot(&w);
            }
        }
        let nrm = w.norm();
        (nrm > 1e-8).then(|| w / nrm)
    };
    // Fixed slots first so that they keep their direction.
    let mut fixed: Vec<(usize, DVector<f64>)> = Vec::new();
    for (k, s) in slots.iter().enumerate() {
        if let Some(v) = s {
            if let Some(w) = push_orth(v, &chosen) {
                chosen.push(w.clone());
                fixed.push((k, w));
            }
        }
    }
    let mut out: Vec<Option<DVector<f64>>> = vec![None; m];
    for (k, w) in fixed {
        out[k] = Some(w);
    }
    let n = jm.nrows();
    let mut candidates = (0..n).map(|i| DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }));
    for slot in out.iter_mut() {
        if slot.is_none() {
            for cand in candidates.by_ref() {
                if let Some(w) = push_orth(&cand, &chosen) {
                    chosen.push(w.clone());
                    *slot = Some(w);
                    break;
                }
            }
        }
    }
    out.into_iter().map(|s| s.expect("ℂ^m always completes")).collect()
}

fn unitarity_residual(jm: &DMatrix<f64>, basis: &[DVector<f64>]) -> f64 {
    let mut all = Vec::with_capacity(2 * basis.len());
    for e in basis {
        all.push(e.clone());
        all.push(jm * e);
    }
    let g = DMatrix::from_columns(&all);
    let gram = g.transpose() * &g - DMatrix::identity(all.len(), all.len());
    gram.amax()
}

/// Checks `θ_1 ≤ … ≤ θ_{p-1} ≤ π/2`, `θ_{p-1} ≤ θ_p ≤ π`, and that the
/// first `2p − m` angles vanish when `2p > m`.
pub fn validate_angles(m: usize, angles: &[f64], tol: f64) -> Result<()> {
    let p = angles.len();
    if p == 0 || 2 * p > 2 * m {
        return Err(Error::Invalid(format!("need 1 ≤ p ≤ m, got p={p}, m={m}")));
    }
    for (k, &t) in angles.iter().enumerate() {
        let upper = if k + 1 == p { PI } else { FRAC_PI_2 };
        if !(-tol..=upper + tol).contains(&t) {
            return Err(Error::Invalid(format!("θ_{} = {t} out of range", k + 1)));
        }
        if k > 0 && t + tol < angles[k - 1] {
            return Err(Error::Invalid("angles must be non-decreasing".into()));
        }
    }
    if 2 * p > m {
        // A fully complex pair may still carry the reversed orientation.
        let bad = |k: usize, t: f64| t.abs() > tol && !(k + 1 == p && (t - PI).abs() <= tol);
        if let Some(k) = (0..2 * p - m).find(|&k| bad(k, angles[k])) {
            return Err(Error::Invalid(format!("θ_{} must vanish when 2p > m", k + 1)));
        }
    }
    Ok(())
}

/// The representative returned by [`canonical_angles`]. The admissible range
/// is not a normal form: reversing two pairs preserves the orientation, so
/// e.g. `(θ₁, θ₂)` and `(π − θ₂, π − θ₁)` describe the same plane. The
/// invariants are the multiset `{|cos θ_k|}` and the sign of `Π cos θ_k`;
/// sorting `|cos θ|` downwards and putting the sign on the last angle gives
/// `θ_1 ≤ … ≤ θ_{p-1} ≤ π/2` and `θ_{p-1} ≤ θ_p ≤ π − θ_{p-1}`.
pub fn normalize_angles(angles: &[f64]) -> Vec<f64> {
    let mut cos: Vec<f64> = angles.iter().map(|t| t.cos()).collect();
    let negative = cos.iter().filter(|c| **c < 0.0).count() % 2 == 1;
    for c in &mut cos {
        *c = c.abs().min(1.0);
    }
    cos.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut out: Vec<f64> = cos.iter().map(|c| c.acos()).collect();
    if negative {
        if let Some(last) = out.last_mut() {
            *last = PI - *last;
        }
    }
    out
}

/// The canonical plane in the standard coordinates of `J`: the unitary basis
/// is `e_k ↦` real coordinate `2k − 1`.
pub fn canonical_plane(j: &ComplexStructure, angles: &[f64]) -> Result<OrientedPlane<f64>> {
    let m = j.m();
    validate_angles(m, angles, 1e-12)?;
    let p = angles.len();
    let n = 2 * m;
    let e = |k: usize| Vector::<f64>::basis(n, 2 * k - 1);
    let complex_pairs = (2 * p).saturating_sub(m);
    let mut rows = Vec::with_capacity(2 * p);
    let mut next = 1;
    let mut angled = Vec::new();
    for (k, &t) in angles.iter().enumerate() {
        if k < complex_pairs {
            continue;
        }
        let x = e(next);
        let u = e(next + 1);
        next += 2;
        angled.push((x, u, t));
    }
    for (x, u, t) in angled {
        let jx = j.apply(&x);
        rows.push(x);
        rows.push(&jx.scale(&t.cos()) + &u.scale(&t.sin()));
    }
    for &t in angles.iter().take(complex_pairs) {
        let x = e(next);
        next += 1;
        let jx = j.apply(&x);
        rows.push(x);
        rows.push(jx.scale(&t.cos().round()));
    }
    // Complex pairs carry θ = 0, so they belong first in the oriented basis.
    if complex_pairs > 0 {
        let split = 2 * (p - complex_pairs);
        rows.rotate_left(split);
    }
    OrientedPlane::new(rows, 1e-12)
}

/// A random plane with the given canonical angles: the canonical plane moved
/// by a random unitary map and re-framed by a random rotation of its basis.
pub fn construct_from_angles<R: Rng + ?Sized>(
    rng: &mut R,
    j: &ComplexStructure,
    angles: &[f64],
) -> Result<OrientedPlane<f64>> {
    let base = canonical_plane(j, angles)?;
    let m = j.m();
    // realify() commutes with the standard structure; conjugate by the sign
    // pattern to commute with J.
    let d = DMatrix::from_fn(2 * m, 2 * m, |r, c| {
        if r != c {
            0.0
        } else if r % 2 == 1 {
            j.signs()[r / 2] as f64
        } else {
            1.0
        }
    });
    let u = &d * linalg::realify(&linalg::haar_unitary(rng, m)) * &d;
    let k = base.dim();
    let mut rot = DMatrix::from_columns(
        &linalg::haar_frame(rng, k, k).iter().map(|v| DVector::from_column_slice(v.comps())).collect::<Vec<_>>(),
    );
    if rot.determinant() < 0.0 {
        rot.column_mut(0).neg_mut();
    }
    let frame = &u * base.frame_matrix() * rot;
    OrientedPlane::new(linalg::column_vectors(&frame), 1e-10)
}
