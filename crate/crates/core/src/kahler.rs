//! Flat Kähler linear algebra on ℝ^{2m} ≅ ℂ^m.
//!
//! Complex coordinates are `z_k = x_{2k-1} + i s_k x_{2k}` where the sign
//! `s_k = ±1` is a property of the complex structure; the standard structure
//! has every `s_k = +1`, i.e. `J e_{2k-1} = e_{2k}`, `J e_{2k} = -e_{2k-1}`.

use nalgebra::DMatrix;
use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{ComplexMultivector, ComplexVector, Multivector, Vector};
use crate::scalar::Scalar;

pub const MAX_COMPLEX_DIM: usize = 4;

/// Unit complex number stored as `(cos φ, sin φ)` so rational points on the
/// circle stay exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase<S> {
    cos: S,
    sin: S,
}

impl<S: Scalar> Phase<S> {
    pub fn new(cos: S, sin: S, tol: f64) -> Result<Self> {
        let r = cos.clone() * cos.clone() + sin.clone() * sin.clone() - S::one();
        if !r.is_negligible(tol) {
            return Err(Error::InvalidPhase { residual: r.to_f64() });
        }
        Ok(Self { cos, sin })
    }

    pub fn zero() -> Self {
        Self { cos: S::one(), sin: S::zero() }
    }

    /// `e^{ikπ/2}`.
    pub fn quarter_turns(k: i64) -> Self {
        let (c, s) = match k.rem_euclid(4) {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        };
        Self { cos: S::from_i64(c), sin: S::from_i64(s) }
    }

    /// `(a/c, b/c)` for a Pythagorean triple `a² + b² = c²`.
    /// The triple is checked on the integers, so float quotients that miss
    /// the unit circle by roundoff are still accepted.
    pub fn pythagorean(a: i64, b: i64, c: i64) -> Result<Self> {
        let r = (a as i128).pow(2) + (b as i128).pow(2) - (c as i128).pow(2);
        if c == 0 || r != 0 {
            return Err(Error::InvalidPhase { residual: r as f64 });
        }
        Ok(Self { cos: S::from_ratio(a, c), sin: S::from_ratio(b, c) })
    }

    pub fn cos(&self) -> &S {
        &self.cos
    }

    pub fn sin(&self) -> &S {
        &self.sin
    }

    pub fn as_complex(&self) -> Complex<S> {
        Complex::new(self.cos.clone(), self.sin.clone())
    }

    pub fn radians(&self) -> f64 {
        self.sin.to_f64().atan2(self.cos.to_f64()).rem_euclid(std::f64::consts::TAU)
    }
}

impl Phase<f64> {
    pub fn from_radians(phi: f64) -> Self {
        Self { cos: phi.cos(), sin: phi.sin() }
    }
}

/// Orthogonal complex structure acting on the pairs `(e_{2k-1}, e_{2k})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexStructure {
    signs: Vec<i8>,
}

impl ComplexStructure {
    pub fn standard(m: usize) -> Self {
        Self { signs: vec![1; m] }
    }

    /// `J e_{2k-1} = s_k e_{2k}`, `J e_{2k} = -s_k e_{2k-1}`.
    pub fn with_signs(signs: &[i8]) -> Result<Self> {
        if signs.is_empty() || signs.len() > MAX_COMPLEX_DIM {
            return Err(Error::ModelDimension(signs.len()));
        }
        if signs.iter().any(|s| s.abs() != 1) {
            return Err(Error::Invalid("complex structure signs must be ±1".into()));
        }
        Ok(Self { signs: signs.to_vec() })
    }

    pub fn m(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    fn sign<S: Scalar>(&self, k: usize) -> S {
        S::from_i64(self.signs[k - 1] as i64)
    }

    pub fn apply<S: Scalar>(&self, v: &Vector<S>) -> Vector<S> {
        let c = v.comps();
        let mut out = vec![S::zero(); c.len()];
        for k in 1..=self.m() {
            let s: S = self.sign(k);
            out[2 * k - 1] = s.clone() * c[2 * k - 2].clone();
            out[2 * k - 2] = -(s * c[2 * k - 1].clone());
        }
        Vector::new(out)
    }

    /// Complex-linear extension of `J`.
    pub fn apply_complex<S: Scalar>(&self, v: &ComplexVector<S>) -> ComplexVector<S> {
        ComplexVector::new(self.apply(&v.re), self.apply(&v.im))
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = 2 * self.m();
        let mut j = DMatrix::zeros(n, n);
        for k in 1..=self.m() {
            let s = self.signs[k - 1] as f64;
            j[(2 * k - 1, 2 * k - 2)] = s;
            j[(2 * k - 2, 2 * k - 1)] = -s;
        }
        j
    }

    /// `ω = Σ s_k dx_{2k-1} ∧ dx_{2k}`, so that `ω(a, b) = g(Ja, b)`.
    pub fn kahler_form<S: Scalar>(&self) -> Multivector<S> {
        let mut w = Multivector::zero(2 * self.m());
        for k in 1..=self.m() {
            w = &w + &Multivector::term(2 * self.m(), &[2 * k - 1, 2 * k], self.sign(k)).unwrap();
        }
        w
    }

    /// `dz_k = dx_{2k-1} + i s_k dx_{2k}`.
    pub fn dz<S: Scalar>(&self, k: usize) -> ComplexMultivector<S> {
        let n = 2 * self.m();
        ComplexMultivector::new(
            Multivector::basis(n, &[2 * k - 1]).unwrap(),
            Multivector::term(n, &[2 * k], self.sign(k)).unwrap(),
        )
    }

    pub fn dz_bar<S: Scalar>(&self, k: usize) -> ComplexMultivector<S> {
        self.dz(k).conj()
    }

    /// `∂/∂z_k = ½(e − iJe)` with `e = e_{2k-1}`.
    pub fn d_dz<S: Scalar>(&self, k: usize) -> ComplexVector<S> {
        let n = 2 * self.m();
        let e = Vector::<S>::basis(n, 2 * k - 1);
        let je = self.apply(&e);
        ComplexVector::new(e.scale(&S::half()), je.scale(&-S::half()))
    }

    /// `∂/∂z̄_k = ½(e + iJe)`.
    pub fn d_dz_bar<S: Scalar>(&self, k: usize) -> ComplexVector<S> {
        self.d_dz(k).conj()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorType {
    /// `Jv = iv`
    Holomorphic,
    /// `Jv = -iv`
    AntiHolomorphic,
}

impl VectorType {
    pub fn label(self) -> &'static str {
        match self {
            VectorType::Holomorphic => "(1,0)",
            VectorType::AntiHolomorphic => "(0,1)",
        }
    }
}

/// Complexified vector with a checked `(1,0)` or `(0,1)` type.
#[derive(Debug, Clone, PartialEq)]
pub struct TypedVector<S> {
    kind: VectorType,
    v: ComplexVector<S>,
}

impl<S: Scalar> TypedVector<S> {
    pub fn new(j: &ComplexStructure, v: ComplexVector<S>, kind: VectorType, tol: f64) -> Result<Self> {
        if type_residual(j, &v, kind) > tol || (S::BACKEND == crate::Backend::Exact && !has_type(j, &v, kind)) {
            return Err(Error::WrongType { expected: kind.label() });
        }
        Ok(Self { kind, v })
    }

    pub fn kind(&self) -> VectorType {
        self.kind
    }

    pub fn vector(&self) -> &ComplexVector<S> {
        &self.v
    }

    pub fn into_vector(self) -> ComplexVector<S> {
        self.v
    }
}

// Jv − (±i)v, the defect from being of the requested type.
fn type_defect<S: Scalar>(j: &ComplexStructure, v: &ComplexVector<S>, kind: VectorType) -> ComplexVector<S> {
    let jv = j.apply_complex(v);
    let iv = ComplexVector::new(-&v.im, v.re.clone());
    match kind {
        VectorType::Holomorphic => &jv - &iv,
        VectorType::AntiHolomorphic => &jv + &iv,
    }
}

fn has_type<S: Scalar>(j: &ComplexStructure, v: &ComplexVector<S>, kind: VectorType) -> bool {
    type_defect(j, v, kind).is_zero()
}

pub fn type_residual<S: Scalar>(j: &ComplexStructure, v: &ComplexVector<S>, kind: VectorType) -> f64 {
    type_defect(j, v, kind).max_abs()
}

/// Split `v = v^{1,0} + v^{0,1}` with `v^{1,0} = ½(v − iJv)`.
pub fn type_project<S: Scalar>(j: &ComplexStructure, v: &ComplexVector<S>) -> (TypedVector<S>, TypedVector<S>) {
    let jv = j.apply_complex(v);
    let h = S::half();
    // −iJv = J(im) − i J(re)
    let hol = ComplexVector::new((&v.re + &jv.im).scale(&h), (&v.im - &jv.re).scale(&h));
    let anti = v - &hol;
    (TypedVector { kind: VectorType::Holomorphic, v: hol }, TypedVector { kind: VectorType::AntiHolomorphic, v: anti })
}

/// Flat Calabi–Yau structure `(J, ω, Ω)` on ℂ^m with `Ω = e^{iφ} dz_1 ∧ … ∧ dz_m`.
#[derive(Debug, Clone)]
pub struct CalabiYauModel<S> {
    j: ComplexStructure,
    phase: Phase<S>,
    omega: Multivector<S>,
    holo: ComplexMultivector<S>,
}

impl<S: Scalar> CalabiYauModel<S> {
    pub fn new(m: usize, phase: Phase<S>) -> Result<Self> {
        if m == 0 || m > MAX_COMPLEX_DIM {
            return Err(Error::ModelDimension(m));
        }
        Ok(Self::with_structure(ComplexStructure::standard(m), phase))
    }

    pub fn with_structure(j: ComplexStructure, phase: Phase<S>) -> Self {
        let n = 2 * j.m();
        let mut holo = ComplexMultivector::scalar(n, phase.as_complex());
        for k in 1..=j.m() {
            holo = holo.wedge(&j.dz(k)).expect("same dimension");
        }
        Self { omega: j.kahler_form(), j, phase, holo }
    }

    pub fn m(&self) -> usize {
        self.j.m()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.j.m()
    }

    pub fn j(&self) -> &ComplexStructure {
        &self.j
    }

    pub fn phase(&self) -> &Phase<S> {
        &self.phase
    }

    /// Kähler form ω.
    pub fn omega(&self) -> &Multivector<S> {
        &self.omega
    }

    /// Holomorphic volume form Ω.
    pub fn holomorphic_volume(&self) -> &ComplexMultivector<S> {
        &self.holo
    }

    pub fn omega_eval(&self, a: &Vector<S>, b: &Vector<S>) -> S {
        self.j.apply(a).dot(b)
    }

    /// Max-norm of `ω^m/m! − (i/2)^m (−1)^{m(m−1)/2} Ω ∧ Ω̄`.
    pub fn verify_normalization(&self) -> S {
        let m = self.m();
        let n = 2 * m;
        let mut power = Multivector::scalar(n, S::one());
        let mut factorial = 1i64;
        for k in 1..=m {
            power = power.wedge(&self.omega).expect("same dimension");
            factorial *= k as i64;
        }
        let lhs = power.scale(&S::from_ratio(1, factorial));
        let half_i = Complex::new(S::zero(), S::half());
        let mut c = Complex::new(S::one(), S::zero());
        for _ in 0..m {
            c = c * half_i.clone();
        }
        if (m * (m - 1) / 2) % 2 == 1 {
            c = -c;
        }
        let rhs = self.holo.wedge(&self.holo.conj()).expect("same dimension").scale(&c);
        (&ComplexMultivector::real(lhs) - &rhs).max_abs()
    }

    /// Max residual of `e⌟Ω + i Je⌟Ω` and `e⌟Ω̄ − i Je⌟Ω̄` for `e = e_{2k-1}`.
    pub fn hook_identities_check(&self, k: usize) -> Result<S> {
        if k == 0 || k > self.m() {
            return Err(Error::IndexOutOfRange { index: k, dim: self.m() });
        }
        let e = Vector::basis(self.real_dim(), 2 * k - 1);
        let je = self.j.apply(&e);
        let i = Complex::new(S::zero(), S::one());
        let a = &self.holo.hook_real(&e)? + &self.holo.hook_real(&je)?.scale(&i);
        let bar = self.holo.conj();
        let b = &bar.hook_real(&e)? - &bar.hook_real(&je)?.scale(&i);
        let (x, y) = (a.max_abs(), b.max_abs());
        Ok(if x > y { x } else { y })
    }

    pub fn to_f64(&self) -> CalabiYauModel<f64> {
        CalabiYauModel::with_structure(
            self.j.clone(),
            Phase { cos: self.phase.cos.to_f64(), sin: self.phase.sin.to_f64() },
        )
    }

    pub fn describe(&self) -> Value {
        json!({ "m": self.m(), "phase": self.phase.radians(), "j_signs": self.j.signs() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = Rational;

    #[test]
    fn pythagorean_phase_on_floats() {
        // (−5/13)² + (12/13)² misses 1 by one ulp in f64
        let ph = Phase::<f64>::pythagorean(-5, 12, 13).unwrap();
        assert!((ph.cos() + 5.0 / 13.0).abs() < 1e-15);
        assert!(Phase::<f64>::pythagorean(1, 1, 1).is_err());
        assert!(Phase::<Q>::pythagorean(3, 4, 5).is_ok());
    }

    #[test]
    fn j_squares_to_minus_one() {
        for signs in [&[1i8, 1, 1, 1][..], &[1, 1, -1, -1]] {
            let j = ComplexStructure::with_signs(signs).unwrap();
            for i in 1..=8 {
                let e = Vector::<Q>::basis(8, i);
                assert_eq!(j.apply(&j.apply(&e)), -&e);
            }
        }
    }

    #[test]
    fn model_m1() {
        let model = CalabiYauModel::<Q>::new(1, Phase::zero()).unwrap();
        assert_eq!(*model.omega(), Multivector::basis(2, &[1, 2]).unwrap());
        let o = model.holomorphic_volume();
        assert_eq!(o.re, Multivector::basis(2, &[1]).unwrap());
        assert_eq!(o.im, Multivector::basis(2, &[2]).unwrap());
    }

    #[test]
    fn model_m4_term_counts() {
        let model = CalabiYauModel::<Q>::new(4, Phase::zero()).unwrap();
        assert_eq!(model.omega().len(), 4);
        assert_eq!(model.holomorphic_volume().real_term_count(), 16);
    }

    #[test]
    fn quarter_phase_multiplies_by_i() {
        let a = CalabiYauModel::<Q>::new(2, Phase::zero()).unwrap();
        let b = CalabiYauModel::<Q>::new(2, Phase::quarter_turns(1)).unwrap();
        let i = Complex::new(Q::from_i64(0), Q::from_i64(1));
        assert_eq!(*b.holomorphic_volume(), a.holomorphic_volume().scale(&i));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(CalabiYauModel::<Q>::new(5, Phase::zero()).is_err());
        assert!(CalabiYauModel::<Q>::new(0, Phase::zero()).is_err());
        assert!(Phase::<Q>::new(Q::from_i64(1), Q::from_i64(1), 0.0).is_err());
        assert!(Phase::<Q>::pythagorean(3, 4, 5).is_ok());
    }

    #[test]
    fn normalization_exact() {
        for m in 1..=4 {
            for phase in [Phase::<Q>::zero(), Phase::quarter_turns(1), Phase::pythagorean(3, 4, 5).unwrap()] {
                let model = CalabiYauModel::new(m, phase).unwrap();
                assert_eq!(model.verify_normalization(), Q::from_i64(0), "m = {m}");
            }
        }
        let twisted = CalabiYauModel::<Q>::with_structure(
            ComplexStructure::with_signs(&[1, 1, -1, -1]).unwrap(),
            Phase::quarter_turns(2),
        );
        assert_eq!(twisted.verify_normalization(), Q::from_i64(0));
    }

    #[test]
    fn hook_identities() {
        let m4 = CalabiYauModel::<Q>::new(4, Phase::zero()).unwrap();
        assert_eq!(m4.hook_identities_check(1).unwrap(), Q::from_i64(0));
        let m2 = CalabiYauModel::<f64>::new(2, Phase::from_radians(std::f64::consts::FRAC_PI_3)).unwrap();
        assert!(m2.hook_identities_check(2).unwrap() < 1e-15);
        let m1 = CalabiYauModel::<Q>::new(1, Phase::zero()).unwrap();
        assert_eq!(m1.hook_identities_check(1).unwrap(), Q::from_i64(0));
        assert!(m1.hook_identities_check(2).is_err());
    }

    #[test]
    fn type_projection_of_e1() {
        let j = ComplexStructure::standard(4);
        let e1 = ComplexVector::real(Vector::<Q>::basis(8, 1));
        let (h, a) = type_project(&j, &e1);
        let half = Q::from_ratio(1, 2);
        // (e1 − iJe1)/2 = (e1 − i e2)/2
        assert_eq!(*h.vector().re.get(1), half);
        assert_eq!(*h.vector().im.get(2), -half.clone());
        assert_eq!(*a.vector().im.get(2), half);
        assert!(TypedVector::new(&j, h.vector().clone(), VectorType::Holomorphic, 0.0).is_ok());
        assert!(TypedVector::new(&j, e1, VectorType::Holomorphic, 0.0).is_err());
        let (hh, aa) = type_project(&j, h.vector());
        assert_eq!(hh.vector(), h.vector());
        assert!(aa.vector().is_zero());
    }

    #[test]
    fn frames_have_their_types() {
        let j = ComplexStructure::with_signs(&[1, 1, -1, -1]).unwrap();
        for k in 1..=4 {
            assert_eq!(type_residual(&j, &j.d_dz::<Q>(k), VectorType::Holomorphic), 0.0);
            assert_eq!(type_residual(&j, &j.d_dz_bar::<Q>(k), VectorType::AntiHolomorphic), 0.0);
            // dz_k(∂_{z_k}) = 1
            let val = j.dz::<Q>(k).evaluate(&[j.d_dz(k)]).unwrap();
            assert_eq!(val, Complex::new(Q::from_i64(1), Q::from_i64(0)));
        }
    }
}
