//! The Cayley 4-form on ℝ⁸, the `Λ²₇ ⊕ Λ²₂₁` splitting and the τ tensor.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{two_form_pairs, Multivector, Vector};
use crate::kahler::{CalabiYauModel, ComplexStructure, Phase};
use crate::linalg;
use crate::plane::OrientedPlane;
use crate::scalar::Scalar;

/// Signed index quadruples of the standard Cayley form.
pub const PHI0_TERMS: [([usize; 4], i64); 14] = [
    ([1, 2, 3, 4], 1),
    ([1, 2, 5, 6], -1),
    ([1, 2, 7, 8], -1),
    ([1, 3, 5, 7], -1),
    ([1, 3, 6, 8], 1),
    ([1, 4, 5, 8], -1),
    ([1, 4, 6, 7], -1),
    ([2, 3, 5, 8], -1),
    ([2, 3, 6, 7], -1),
    ([2, 4, 5, 7], 1),
    ([2, 4, 6, 8], -1),
    ([3, 4, 5, 6], -1),
    ([3, 4, 7, 8], -1),
    ([5, 6, 7, 8], 1),
];

const N: usize = 8;
const PAIRS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Literal,
    FromCalabiYau { phase: f64, j_signs: Vec<i8> },
}

/// A Cayley 4-form together with its cached `π₇` matrix.
///
/// `pi7` uses the decomposable formula `π₇(x∧y) = ½(x∧y + Φ(x,y,·,·))`
/// extended linearly. On `Λ²₇` this acts as multiplication by 2, so the
/// orthogonal projection is half of it; see [`CayleyForm::projection_ratio`].
#[derive(Debug, Clone)]
pub struct CayleyForm<S> {
    phi: Multivector<S>,
    provenance: Provenance,
    pi7: Vec<Vec<S>>,
}

impl<S: Scalar> CayleyForm<S> {
    pub fn from_form(phi: Multivector<S>, provenance: Provenance) -> Result<Self> {
        if phi.dim() != N {
            return Err(Error::DimensionMismatch { left: N, right: phi.dim() });
        }
        match phi.grade() {
            Some(4) => {}
            Some(k) => return Err(Error::GradeMismatch { expected: 4, found: k }),
            None => return Err(Error::Inhomogeneous),
        }
        let half = S::half();
        // column c is the image of the c-th basis 2-form
        let mut cols = Vec::with_capacity(PAIRS);
        for (i, j) in two_form_pairs(N) {
            let eij = Multivector::basis(N, &[i, j])?;
            let contraction = phi.hook_basis(i).hook_basis(j);
            cols.push((&eij + &contraction).scale(&half).two_form_coords());
        }
        let pi7 = (0..PAIRS).map(|r| (0..PAIRS).map(|c| cols[c][r].clone()).collect()).collect();
        Ok(Self { phi, provenance, pi7 })
    }

    pub fn phi0() -> Self {
        let phi = Multivector::from_terms(N, PHI0_TERMS.iter().map(|(idx, s)| (&idx[..], S::from_i64(*s))))
            .expect("valid literal");
        Self::from_form(phi, Provenance::Literal).expect("valid literal")
    }

    /// `Φ = ½ ω∧ω + Re Ω` for a complex dimension 4 model.
    pub fn from_cy(model: &CalabiYauModel<S>) -> Result<Self> {
        if model.m() != 4 {
            return Err(Error::WrongModelDimension { expected: 4, found: model.m() });
        }
        let w = model.omega();
        let phi = &w.wedge(w)?.scale(&S::half()) + &model.holomorphic_volume().re;
        Self::from_form(
            phi,
            Provenance::FromCalabiYau { phase: model.phase().radians(), j_signs: model.j().signs().to_vec() },
        )
    }

    pub fn phi(&self) -> &Multivector<S> {
        &self.phi
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn pi7_matrix(&self) -> &[Vec<S>] {
        &self.pi7
    }

    fn apply_matrix(m: &[Vec<S>], a: &Multivector<S>) -> Multivector<S> {
        let x = a.two_form_coords();
        let y: Vec<S> = m
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&x)
                    .filter(|(_, b)| !b.is_zero())
                    .fold(S::zero(), |acc, (r, b)| acc + r.clone() * b.clone())
            })
            .collect();
        Multivector::from_two_form_coords(N, &y)
    }

    fn check_two_form(a: &Multivector<S>) -> Result<()> {
        if a.dim() != N {
            return Err(Error::DimensionMismatch { left: N, right: a.dim() });
        }
        match a.grade() {
            Some(2) | None => Ok(()),
            Some(k) => Err(Error::GradeMismatch { expected: 2, found: k }),
        }
    }

    /// Linear extension of `½(x∧y + Φ(x,y,·,·))`.
    pub fn pi7(&self, a: &Multivector<S>) -> Result<Multivector<S>> {
        Self::check_two_form(a)?;
        Ok(Self::apply_matrix(&self.pi7, a))
    }

    /// Orthogonal projection onto `Λ²₇` (half of [`CayleyForm::pi7`]).
    pub fn project7(&self, a: &Multivector<S>) -> Result<Multivector<S>> {
        Ok(self.pi7(a)?.scale(&S::half()))
    }

    pub fn decompose(&self, a: &Multivector<S>) -> Result<TwoFormDecomposition<S>> {
        let part7 = self.project7(a)?;
        let part21 = a - &part7;
        Ok(TwoFormDecomposition { part7, part21 })
    }

    /// Matrix of `α ↦ *(Φ ∧ α)` on 2-forms; its eigenvalues are 3 on `Λ²₇` and
    /// −1 on `Λ²₂₁`.
    pub fn star_wedge_matrix(&self) -> Vec<Vec<S>> {
        let cols: Vec<Vec<S>> = two_form_pairs(N)
            .into_iter()
            .map(|(i, j)| {
                let e = Multivector::basis(N, &[i, j]).unwrap();
                self.phi.wedge(&e).unwrap().hodge_star().two_form_coords()
            })
            .collect();
        (0..PAIRS).map(|r| (0..PAIRS).map(|c| cols[c][r].clone()).collect()).collect()
    }

    /// Spectral projection `(Id + T)/4` onto the eigenvalue-3 space of
    /// `T = *(Φ ∧ ·)`.
    pub fn spectral_projection_matrix(&self) -> Vec<Vec<S>> {
        let t = self.star_wedge_matrix();
        let quarter = S::from_ratio(1, 4);
        (0..PAIRS)
            .map(|r| {
                (0..PAIRS)
                    .map(|c| {
                        let id = if r == c { S::one() } else { S::zero() };
                        (id + t[r][c].clone()) * quarter.clone()
                    })
                    .collect()
            })
            .collect()
    }

    /// The scalar `c` with `pi7 = c · (spectral projection)`, together with the
    /// max residual of that identity.
    pub fn projection_ratio(&self) -> (S, S) {
        let spec = self.spectral_projection_matrix();
        // read c off the largest diagonal entry of the spectral projection
        let (r, _) =
            (0..PAIRS).map(|r| (r, spec[r][r].to_f64().abs())).fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let c = self.pi7[r][r].clone() / spec[r][r].clone();
        let mut worst = S::zero();
        for r in 0..PAIRS {
            for k in 0..PAIRS {
                let d = (self.pi7[r][k].clone() - c.clone() * spec[r][k].clone()).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        (c, worst)
    }

    pub fn pi7_rank(&self, tol: f64) -> usize {
        linalg::rank(&self.pi7, tol)
    }

    /// Rank of `Id − ½π₇`, the projection onto `Λ²₂₁`.
    pub fn complement_rank(&self, tol: f64) -> usize {
        let m: Vec<Vec<S>> = (0..PAIRS)
            .map(|r| {
                (0..PAIRS)
                    .map(|c| {
                        let id = if r == c { S::one() } else { S::zero() };
                        id - self.pi7[r][c].clone() * S::half()
                    })
                    .collect()
            })
            .collect();
        linalg::rank(&m, tol)
    }

    /// The 28 forms `e^i∧e^j − e_i⌟(e_j⌟Φ)`, `i < j`.
    pub fn lambda27_spanning_set(&self) -> Vec<Multivector<S>> {
        two_form_pairs(N)
            .into_iter()
            .map(|(i, j)| {
                let e = Multivector::basis(N, &[i, j]).unwrap();
                &e - &self.phi.hook_basis(j).hook_basis(i)
            })
            .collect()
    }

    /// `Φ(·, u, v, w)` as a 1-form.
    pub fn partial(&self, u: &Vector<S>, v: &Vector<S>, w: &Vector<S>) -> Result<Multivector<S>> {
        Ok(-&self.phi.contract(&[u.clone(), v.clone(), w.clone()])?)
    }

    /// `Φ(x, y, ·, ·)` as a 2-form.
    pub fn pair_contraction(&self, x: &Vector<S>, y: &Vector<S>) -> Result<Multivector<S>> {
        self.phi.contract(&[x.clone(), y.clone()])
    }

    /// The Λ²₇-valued 4-form
    /// `τ(x,u,v,w) = ¼(π₇(Φ(·,u,v,w)∧x♭) − π₇(Φ(·,v,w,x)∧u♭) + π₇(Φ(·,w,x,u)∧v♭) − π₇(Φ(·,x,u,v)∧w♭))`,
    /// valid for arbitrary (non-orthogonal) arguments.
    pub fn tau(&self, x: &Vector<S>, u: &Vector<S>, v: &Vector<S>, w: &Vector<S>) -> Result<TauValue<S>> {
        let cyc = [(x, u, v, w, false), (u, v, w, x, true), (v, w, x, u, false), (w, x, u, v, true)];
        let mut acc = Multivector::zero(N);
        for (a, b, c, d, negative) in cyc {
            let t = self.partial(b, c, d)?.wedge(&a.flat())?;
            acc = if negative { &acc - &t } else { &acc + &t };
        }
        let form = self.pi7(&acc)?.scale(&S::from_ratio(1, 4));
        Ok(TauValue { form })
    }

    /// Shortcut `π₇(Φ(·,u,v,w)∧x♭)`, equal to [`CayleyForm::tau`] when the
    /// arguments are orthonormal.
    pub fn tau_orthogonal(&self, x: &Vector<S>, u: &Vector<S>, v: &Vector<S>, w: &Vector<S>) -> Result<TauValue<S>> {
        let t = self.partial(u, v, w)?.wedge(&x.flat())?;
        Ok(TauValue { form: self.pi7(&t)? })
    }

    pub fn tau_on(&self, vs: &[Vector<S>]) -> Result<TauValue<S>> {
        match vs {
            [x, u, v, w] => self.tau(x, u, v, w),
            _ => Err(Error::Invalid(format!("τ takes 4 vectors, got {}", vs.len()))),
        }
    }

    /// Frame expression `Σ_{i=2}^{8} (e^i∧(e_1⌟Φ) − e^1∧(e_i⌟Φ)) ⊗ π₇(e^1∧e^i)`
    /// evaluated on four vectors.
    pub fn tau_frame_formula(&self, vs: &[Vector<S>]) -> Result<TauValue<S>> {
        self.frame_sum(vs, |i| {
            let a = Multivector::basis(N, &[i])?.wedge(&self.phi.hook_basis(1))?;
            let b = Multivector::basis(N, &[1])?.wedge(&self.phi.hook_basis(i))?;
            Ok(&a - &b)
        })
    }

    /// The same frame expression with both terms `e^i∧(e_1⌟Φ)`, which cancel.
    #[allow(clippy::eq_op)] // the printed formula, cancellation included
    pub fn tau_frame_formula_degenerate(&self, vs: &[Vector<S>]) -> Result<TauValue<S>> {
        self.frame_sum(vs, |i| {
            let a = Multivector::basis(N, &[i])?.wedge(&self.phi.hook_basis(1))?;
            Ok(&a - &a)
        })
    }

    fn frame_sum(&self, vs: &[Vector<S>], coeff_form: impl Fn(usize) -> Result<Multivector<S>>) -> Result<TauValue<S>> {
        let mut acc = Multivector::zero(N);
        for i in 2..=N {
            let c = coeff_form(i)?.evaluate(vs)?;
            if c.is_zero() {
                continue;
            }
            let e1i = Multivector::basis(N, &[1, i])?;
            acc = &acc + &self.pi7(&e1i)?.scale(&c);
        }
        Ok(TauValue { form: acc })
    }

    /// `Φ(f_1, f_2, f_3, f_4)` on the oriented basis.
    pub fn evaluate_plane(&self, plane: &OrientedPlane<S>) -> Result<S> {
        if plane.dim() != 4 || plane.ambient_dim() != N {
            return Err(Error::DimensionMismatch { left: 4, right: plane.dim() });
        }
        self.phi.evaluate(plane.basis())
    }

    pub fn is_cayley(&self, plane: &OrientedPlane<S>, tol: f64) -> Result<CayleyCheck> {
        let value = self.evaluate_plane(plane)?;
        let tau = self.tau_on(plane.basis())?;
        Ok(CayleyCheck {
            cayley: value.within(&S::one(), tol),
            phi_value: value.to_f64(),
            tau_norm: tau.norm(),
            tau_vanishes: tau.is_zero_within(tol),
        })
    }

    pub fn to_f64(&self) -> CayleyForm<f64> {
        CayleyForm {
            phi: self.phi.to_f64(),
            provenance: self.provenance.clone(),
            pi7: self.pi7.iter().map(|r| r.iter().map(Scalar::to_f64).collect()).collect(),
        }
    }

    pub fn describe(&self) -> Value {
        match &self.provenance {
            Provenance::Literal => json!({ "source": "literal" }),
            Provenance::FromCalabiYau { phase, j_signs } => {
                json!({ "source": "calabi-yau", "phase": phase, "j_signs": j_signs })
            }
        }
    }
}

/// Complex structure `J₀` (pair signs `+,+,−,−`) for which
/// `½ω₀² + Re(e^{iπ} dz_1∧…∧dz_4)` is exactly the literal Cayley form.
pub fn phi0_model<S: Scalar>() -> CalabiYauModel<S> {
    CalabiYauModel::with_structure(
        ComplexStructure::with_signs(&[1, 1, -1, -1]).expect("valid signs"),
        Phase::quarter_turns(2),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFormDecomposition<S> {
    pub part7: Multivector<S>,
    pub part21: Multivector<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauValue<S> {
    form: Multivector<S>,
}

impl<S: Scalar> TauValue<S> {
    pub fn form(&self) -> &Multivector<S> {
        &self.form
    }

    pub fn norm_sq(&self) -> S {
        self.form.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().to_f64().max(0.0).sqrt()
    }

    pub fn is_zero_within(&self, tol: f64) -> bool {
        if S::BACKEND == crate::Backend::Exact {
            self.form.is_zero()
        } else {
            self.norm() <= tol
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CayleyCheck {
    pub cayley: bool,
    pub phi_value: f64,
    pub tau_norm: f64,
    pub tau_vanishes: bool,
}
