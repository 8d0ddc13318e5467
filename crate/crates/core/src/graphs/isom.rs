//! Fiberwise bundle isomorphisms along the complex plane `N = span{e_1..e_4}`
//! in ℂ⁴ with normal space `span{e_5..e_8}`.

use num_complex::Complex;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{blade_indices, canonical_blade, ComplexMultivector, ComplexVector, Multivector, Vector};
use crate::kahler::{CalabiYauModel, TypedVector, VectorType};
use crate::linalg;
use crate::scalar::Scalar;
use crate::spin7::CayleyForm;

const N: usize = 8;
const TANGENT: usize = 4;

/// `Σ_j α_j ⊗ e_j` with `α_j` a complex 2-form on `N` and `e_j`, `j = 5..8`,
/// the real normal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleValuedForm<S> {
    parts: Vec<ComplexMultivector<S>>,
}

impl<S: Scalar> BundleValuedForm<S> {
    pub fn zero() -> Self {
        Self { parts: vec![ComplexMultivector::zero(N); N - TANGENT] }
    }

    /// `α ⊗ u` for a 2-form `α` on `N` and a normal vector `u`.
    pub fn decomposable(alpha: &ComplexMultivector<S>, u: &ComplexVector<S>) -> Result<Self> {
        check_tangent_form(alpha)?;
        check_normal(u)?;
        let parts = (TANGENT + 1..=N).map(|j| alpha.scale(&u.component(j))).collect();
        Ok(Self { parts })
    }

    /// Coefficient form of `e_j`, `j ∈ 5..=8`.
    pub fn part(&self, j: usize) -> &ComplexMultivector<S> {
        &self.parts[j - TANGENT - 1]
    }

    pub fn scale(&self, z: &Complex<S>) -> Self {
        Self { parts: self.parts.iter().map(|p| p.scale(z)).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { parts: self.parts.iter().zip(&other.parts).map(|(a, b)| a + b).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(ComplexMultivector::is_zero)
    }

    pub fn max_abs(&self) -> S {
        self.parts.iter().map(ComplexMultivector::max_abs).fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.parts
                .iter()
                .enumerate()
                .map(|(k, p)| json!({ "normal_index": k + TANGENT + 1, "form": p.to_json() }))
                .collect(),
        )
    }
}

fn check_model<S: Scalar>(model: &CalabiYauModel<S>) -> Result<()> {
    if model.m() != 4 {
        return Err(Error::WrongModelDimension { expected: 4, found: model.m() });
    }
    Ok(())
}

fn check_normal<S: Scalar>(v: &ComplexVector<S>) -> Result<()> {
    let r = (1..=TANGENT)
        .map(|i| {
            let c = v.component(i);
            if c.re.abs() > c.im.abs() {
                c.re.abs()
            } else {
                c.im.abs()
            }
        })
        .fold(S::zero(), |a, b| if b > a { b } else { a });
    if !r.is_zero() {
        return Err(Error::NotNormal { residual: r.to_f64() });
    }
    Ok(())
}

fn check_tangent_form<S: Scalar>(a: &ComplexMultivector<S>) -> Result<()> {
    if a.dim() != N {
        return Err(Error::DimensionMismatch { left: N, right: a.dim() });
    }
    for part in [&a.re, &a.im] {
        if let Some(k) = part.grade().filter(|&k| k != 2) {
            return Err(Error::GradeMismatch { expected: 2, found: k });
        }
        if part.terms().any(|(b, _)| blade_indices(b).iter().any(|&i| i > TANGENT)) {
            return Err(Error::Invalid("form must live on the tangent plane".into()));
        }
    }
    Ok(())
}

fn accumulate<S: Scalar>(target: &mut Multivector<S>, indices: &[usize], c: S) -> Result<()> {
    *target = &*target + &Multivector::term(N, indices, c)?;
    Ok(())
}

/// `v ↦ ¼ (v⌟Ω̄)^♯` from `(0,1)` normal vectors to `Λ^{0,2}N ⊗ ν^{1,0}`.
pub fn normal_isom<S: Scalar>(model: &CalabiYauModel<S>, v: &TypedVector<S>) -> Result<BundleValuedForm<S>> {
    check_model(model)?;
    if v.kind() != VectorType::AntiHolomorphic {
        return Err(Error::WrongType { expected: VectorType::AntiHolomorphic.label() });
    }
    check_normal(v.vector())?;
    let three = model.holomorphic_volume().conj().hook(v.vector())?;
    let quarter = S::from_ratio(1, 4);
    let mut out = BundleValuedForm::zero();
    for (part, is_im) in [(&three.re, false), (&three.im, true)] {
        for (blade, c) in part.terms() {
            let idx = blade_indices(blade);
            let tangent: Vec<usize> = idx.iter().copied().filter(|&i| i <= TANGENT).collect();
            let normal: Vec<usize> = idx.iter().copied().filter(|&i| i > TANGENT).collect();
            if tangent.len() != 2 || normal.len() != 1 {
                return Err(Error::Invalid("v⌟Ω̄ left the expected type".into()));
            }
            let j = normal[0];
            let (neg, _) = canonical_blade(&[tangent[0], tangent[1], j]).expect("distinct");
            let mut coeff = c.clone() * quarter.clone();
            if neg {
                coeff = -coeff;
            }
            let slot = &mut out.parts[j - TANGENT - 1];
            if is_im {
                accumulate(&mut slot.im, &tangent, coeff)?;
            } else {
                accumulate(&mut slot.re, &tangent, coeff)?;
            }
        }
    }
    Ok(out)
}

/// Which scalar multiplies `[*_N(α∧(v⌟Ω))]^♯` in the inverse map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseNormalization {
    /// `−¼`, the two-sided inverse of [`normal_isom`].
    Corrected,
    /// `−1`, which is four times the inverse.
    Unscaled,
}

/// `α⊗v ↦ c·[*_N(α∧(v⌟Ω))]^♯`, with `c` set by `normalization`.
pub fn normal_isom_inverse<S: Scalar>(
    model: &CalabiYauModel<S>,
    form: &BundleValuedForm<S>,
    normalization: InverseNormalization,
    tol: f64,
) -> Result<TypedVector<S>> {
    check_model(model)?;
    check_inverse_input(model, form, tol)?;
    let omega = model.holomorphic_volume();
    let mut five = ComplexMultivector::zero(N);
    for j in TANGENT + 1..=N {
        let alpha = form.part(j);
        if alpha.is_zero() {
            continue;
        }
        five = &five + &alpha.wedge(&omega.hook_real(&Vector::basis(N, j))?)?;
    }
    // *_N (vol_N ∧ dx_k) = dx_k; every other component must vanish.
    let mut re = vec![S::zero(); N];
    let mut im = vec![S::zero(); N];
    for (part, target) in [(&five.re, &mut re), (&five.im, &mut im)] {
        for (blade, c) in part.terms() {
            let idx = blade_indices(blade);
            if idx.len() != 5 || idx[..TANGENT] != [1, 2, 3, 4] {
                return Err(Error::Invalid("α∧(v⌟Ω) is not vol_N ∧ (normal 1-form)".into()));
            }
            target[idx[TANGENT] - 1] = c.clone();
        }
    }
    let factor = match normalization {
        InverseNormalization::Corrected => S::from_ratio(-1, 4),
        InverseNormalization::Unscaled => S::from_i64(-1),
    };
    let v = ComplexVector::new(Vector::new(re).scale(&factor), Vector::new(im).scale(&factor));
    TypedVector::new(model.j(), v, VectorType::AntiHolomorphic, tol)
}

// Every part must be a multiple of dz̄_1∧dz̄_2 and the resulting normal
// vector of type (1,0).
fn check_inverse_input<S: Scalar>(model: &CalabiYauModel<S>, form: &BundleValuedForm<S>, tol: f64) -> Result<()> {
    let j = model.j();
    let dzb12 = j.dz_bar::<S>(1).wedge(&j.dz_bar(2))?;
    let (d1, d2) = (j.d_dz_bar::<S>(1), j.d_dz_bar::<S>(2));
    let mut u = ComplexVector::zeros(N);
    for k in TANGENT + 1..=N {
        let alpha = form.part(k);
        check_tangent_form(alpha)?;
        let c = if alpha.is_zero() {
            Complex::new(S::zero(), S::zero())
        } else {
            alpha.evaluate(&[d1.clone(), d2.clone()])?
        };
        let rest = alpha - &dzb12.scale(&c);
        if !rest.max_abs().is_negligible(tol) {
            return Err(Error::WrongType { expected: "Λ^{0,2}N ⊗ ν^{1,0}" });
        }
        let mut e = vec![Complex::new(S::zero(), S::zero()); N];
        e[k - 1] = c;
        u = &u
            + &ComplexVector::new(
                Vector::new(e.iter().map(|z| z.re.clone()).collect()),
                Vector::new(e.iter().map(|z| z.im.clone()).collect()),
            );
    }
    TypedVector::new(j, u, VectorType::Holomorphic, tol).map(|_| ())
}

/// Residuals of the identities describing `π₇` along `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EIsomReport<S> {
    /// `π₇(v∧w) − v∧w − ¼Ω(v♯,w♯,·,·)` for `v ∈ Λ^{0,1}N`, `w ∈ ν^{*0,1}`.
    pub mixed_antiholomorphic: S,
    /// `π₇(v∧w) − v∧w − ¼Ω̄(v♯,w♯,·,·)` for `v ∈ Λ^{1,0}N`, `w ∈ ν^{*1,0}`.
    pub mixed_holomorphic: S,
    /// `π₇` on `Λ^{1,0}N⊗ν^{*0,1}` and `Λ^{0,1}N⊗ν^{*1,0}`.
    pub cross_terms: S,
    /// `π₇(v∧w)|_N − ½(v∧w + *_N(v∧w))` on (2,0), (0,2) and (1,1) forms.
    pub tangent_self_dual: S,
    /// Complex dimension of `π₇(Λ^{0,1}N ⊗ ν^{*0,1})`.
    pub image_rank: usize,
    /// Real dimension of `{π₇(β)|_N}` over the tangent 2-forms.
    pub tangent_image_rank: usize,
    pub samples: usize,
}

impl<S: Scalar> EIsomReport<S> {
    pub fn max_residual(&self) -> S {
        [&self.mixed_antiholomorphic, &self.mixed_holomorphic, &self.cross_terms, &self.tangent_self_dual]
            .into_iter()
            .cloned()
            .fold(S::zero(), |a, b| if b > a { b } else { a })
    }

    pub fn to_json(&self) -> Value {
        json!({
            "mixed_antiholomorphic": self.mixed_antiholomorphic.to_json(),
            "mixed_holomorphic": self.mixed_holomorphic.to_json(),
            "cross_terms": self.cross_terms.to_json(),
            "tangent_self_dual": self.tangent_self_dual.to_json(),
            "image_rank": self.image_rank,
            "tangent_image_rank": self.tangent_image_rank,
            "samples": self.samples,
        })
    }
}

fn pi7_complex<S: Scalar>(phi: &CayleyForm<S>, a: &ComplexMultivector<S>) -> Result<ComplexMultivector<S>> {
    Ok(ComplexMultivector::new(phi.pi7(&a.re)?, phi.pi7(&a.im)?))
}

fn small_complex<S: Scalar, R: Rng + ?Sized>(rng: &mut R) -> Complex<S> {
    let mut draw = || S::from_ratio(rng.random_range(-6..=6), rng.random_range(1..=5));
    Complex::new(draw(), draw())
}

fn combination<S: Scalar, R: Rng + ?Sized>(rng: &mut R, forms: &[ComplexMultivector<S>]) -> ComplexMultivector<S> {
    forms.iter().fold(ComplexMultivector::zero(N), |acc, f| &acc + &f.scale(&small_complex(rng)))
}

fn bigger<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

fn restrict_star<S: Scalar>(a: &Multivector<S>) -> Result<(Multivector<S>, Multivector<S>)> {
    let terms: Vec<(Vec<usize>, S)> =
        a.sorted_terms().into_iter().filter(|(idx, _)| idx.iter().all(|&i| i <= TANGENT)).collect();
    let on_n = Multivector::from_terms(TANGENT, terms.iter().map(|(i, c)| (&i[..], c.clone())))?;
    let star = on_n.hodge_star();
    Ok((on_n, star))
}

/// Check the π₇ identities along the standard complex plane on the basis
/// products and on `samples` random complex combinations.
pub fn e_isom_checks<S: Scalar, R: Rng + ?Sized>(
    model: &CalabiYauModel<S>,
    samples: usize,
    rng: &mut R,
) -> Result<EIsomReport<S>> {
    check_model(model)?;
    let phi = CayleyForm::from_cy(model)?;
    let j = model.j();
    let omega = model.holomorphic_volume();
    let omega_bar = omega.conj();
    let dz = |k: usize| j.dz::<S>(k);
    let dzb = |k: usize| j.dz_bar::<S>(k);
    let tan10 = [dz(1), dz(2)];
    let tan01 = [dzb(1), dzb(2)];
    let nor10 = [dz(3), dz(4)];
    let nor01 = [dzb(3), dzb(4)];

    let mut pairs_01: Vec<(ComplexMultivector<S>, ComplexMultivector<S>)> = Vec::new();
    let mut pairs_10 = Vec::new();
    let mut cross = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            pairs_01.push((tan01[a].clone(), nor01[b].clone()));
            pairs_10.push((tan10[a].clone(), nor10[b].clone()));
            cross.push((tan10[a].clone(), nor01[b].clone()));
            cross.push((tan01[a].clone(), nor10[b].clone()));
        }
    }
    for _ in 0..samples {
        pairs_01.push((combination(rng, &tan01), combination(rng, &nor01)));
        pairs_10.push((combination(rng, &tan10), combination(rng, &nor10)));
        cross.push((combination(rng, &tan10), combination(rng, &nor01)));
        cross.push((combination(rng, &tan01), combination(rng, &nor10)));
    }

    let quarter = S::from_ratio(1, 4);
    let mixed = |pairs: &[(ComplexMultivector<S>, ComplexMultivector<S>)], big: &ComplexMultivector<S>| -> Result<S> {
        let mut worst = S::zero();
        for (v, w) in pairs {
            let vw = v.wedge(w)?;
            let extra = big.hook(&v.sharp()?)?.hook(&w.sharp()?)?.scale_real(&quarter);
            let r = &(&pi7_complex(&phi, &vw)? - &vw) - &extra;
            worst = bigger(worst, r.max_abs());
        }
        Ok(worst)
    };
    let mixed_antiholomorphic = mixed(&pairs_01, omega)?;
    let mixed_holomorphic = mixed(&pairs_10, &omega_bar)?;

    let mut cross_terms = S::zero();
    for (v, w) in &cross {
        cross_terms = bigger(cross_terms, pi7_complex(&phi, &v.wedge(w)?)?.max_abs());
    }

    let mut tangent_forms = vec![tan10[0].wedge(&tan10[1])?, tan01[0].wedge(&tan01[1])?];
    for a in &tan10 {
        for b in &tan01 {
            tangent_forms.push(a.wedge(b)?);
        }
    }
    let half = S::half();
    let mut tangent_self_dual = S::zero();
    let mut tangent_rows: Vec<Vec<f64>> = Vec::new();
    for f in &tangent_forms {
        let p = pi7_complex(&phi, f)?;
        for (img, src) in [(&p.re, &f.re), (&p.im, &f.im)] {
            let (img_n, _) = restrict_star(img)?;
            let (src_n, src_star) = restrict_star(src)?;
            let expected = (&src_n + &src_star).scale(&half);
            tangent_self_dual = bigger(tangent_self_dual, (&img_n - &expected).max_abs());
            tangent_rows.push(img_n.two_form_coords().iter().map(Scalar::to_f64).collect());
        }
    }
    let tangent_image_rank = linalg::svd_rank(&linalg::to_dmatrix(&tangent_rows), 1e-9);

    // Complex rank via the realification (a, b) ↦ rows (a, b), (−b, a).
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for a in &tan01 {
        for b in &nor01 {
            let p = pi7_complex(&phi, &a.wedge(b)?)?;
            let re: Vec<f64> = p.re.two_form_coords().iter().map(Scalar::to_f64).collect();
            let im: Vec<f64> = p.im.two_form_coords().iter().map(Scalar::to_f64).collect();
            rows.push(re.iter().chain(&im).copied().collect());
            rows.push(im.iter().map(|x| -x).chain(re.iter().copied()).collect());
        }
    }
    let image_rank = linalg::svd_rank(&linalg::to_dmatrix(&rows), 1e-9) / 2;

    Ok(EIsomReport {
        mixed_antiholomorphic,
        mixed_holomorphic,
        cross_terms,
        tangent_self_dual,
        image_rank,
        tangent_image_rank,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::Phase;
    use crate::scalar::Rational;

    type Q = Rational;

    fn models() -> Vec<CalabiYauModel<Q>> {
        vec![
            CalabiYauModel::new(4, Phase::zero()).unwrap(),
            CalabiYauModel::new(4, Phase::pythagorean(3, 4, 5).unwrap()).unwrap(),
            crate::spin7::phi0_model(),
        ]
    }

    fn antiholomorphic_normal(model: &CalabiYauModel<Q>, a: (i64, i64), b: (i64, i64)) -> TypedVector<Q> {
        let j = model.j();
        let v = &j.d_dz_bar::<Q>(3).scale(&Complex::new(Q::from_i64(a.0), Q::from_i64(a.1)))
            + &j.d_dz_bar::<Q>(4).scale(&Complex::new(Q::from_i64(b.0), Q::from_i64(b.1)));
        TypedVector::new(j, v, VectorType::AntiHolomorphic, 0.0).unwrap()
    }

    #[test]
    fn round_trip_exact() {
        for model in models() {
            for (a, b) in [((1, 0), (0, 0)), ((0, 0), (0, 1)), ((2, -3), (5, 7))] {
                let v = antiholomorphic_normal(&model, a, b);
                let img = normal_isom(&model, &v).unwrap();
                assert!(!img.is_zero());
                let back = normal_isom_inverse(&model, &img, InverseNormalization::Corrected, 0.0).unwrap();
                assert_eq!(back.vector(), v.vector());
                let four = normal_isom_inverse(&model, &img, InverseNormalization::Unscaled, 0.0).unwrap();
                assert_eq!(four.vector(), &v.vector().scale(&Complex::new(Q::from_i64(4), Q::from_i64(0))));
            }
        }
    }

    #[test]
    fn forward_is_linear_and_zero_preserving() {
        let model = &models()[1];
        let zero = TypedVector::new(model.j(), ComplexVector::zeros(8), VectorType::AntiHolomorphic, 0.0).unwrap();
        assert!(normal_isom(model, &zero).unwrap().is_zero());
        let v = antiholomorphic_normal(model, (1, 2), (3, -1));
        let c = Complex::new(Q::from_ratio(2, 3), Q::from_i64(-1));
        let cv = TypedVector::new(model.j(), v.vector().scale(&c), VectorType::AntiHolomorphic, 0.0).unwrap();
        assert_eq!(normal_isom(model, &cv).unwrap(), normal_isom(model, &v).unwrap().scale(&c));
    }

    #[test]
    fn forward_image_is_dzbar12_times_holomorphic_normal() {
        let model = &models()[0];
        let j = model.j();
        let v = antiholomorphic_normal(model, (1, 0), (0, 0));
        let img = normal_isom(model, &v).unwrap();
        // check_inverse_input accepts exactly Λ^{0,2}N ⊗ ν^{1,0}
        check_inverse_input(model, &img, 0.0).unwrap();
        let bad = BundleValuedForm::decomposable(&j.dz::<Q>(1).wedge(&j.dz(2)).unwrap(), &j.d_dz::<Q>(3)).unwrap();
        assert!(normal_isom_inverse(model, &bad, InverseNormalization::Corrected, 0.0).is_err());
    }

    #[test]
    fn rejects_wrong_inputs() {
        let model = &models()[0];
        let j = model.j();
        let hol = TypedVector::new(j, j.d_dz::<Q>(3), VectorType::Holomorphic, 0.0).unwrap();
        assert!(matches!(normal_isom(model, &hol), Err(Error::WrongType { .. })));
        let tangent = TypedVector::new(j, j.d_dz_bar::<Q>(1), VectorType::AntiHolomorphic, 0.0).unwrap();
        assert!(matches!(normal_isom(model, &tangent), Err(Error::NotNormal { .. })));
        let m3 = CalabiYauModel::<Q>::new(3, Phase::zero()).unwrap();
        assert!(matches!(normal_isom(&m3, &hol), Err(Error::WrongModelDimension { .. })));
    }

    #[test]
    fn e_identities_exact() {
        for model in models() {
            let mut rng = linalg::seeded_rng(3, 0);
            let rep = e_isom_checks(&model, 4, &mut rng).unwrap();
            assert_eq!(rep.max_residual(), Q::from_i64(0), "{:?}", rep.to_json());
            assert_eq!(rep.image_rank, 4);
            assert_eq!(rep.tangent_image_rank, 3);
        }
    }
}
