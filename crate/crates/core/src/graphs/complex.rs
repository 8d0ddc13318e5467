//! Detecting complex planes through `σ = Re Ω(v_1, …, v_{p+1}, ·, …, ·)` and
//! the linear terms of σ on graphs over a complex plane.

use num_complex::Complex;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{ComplexMultivector, Multivector, Vector};
use crate::kahler::{CalabiYauModel, ComplexStructure};
use crate::plane::OrientedPlane;
use crate::scalar::Scalar;

/// `Re Ω(v_1, …, v_k, ·, …)` and, when `k = m`, the scalar `Im Ω(v_1, …, v_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaValue<S> {
    pub real_form: Multivector<S>,
    pub imaginary: Option<S>,
}

pub fn sigma_eval<S: Scalar>(model: &CalabiYauModel<S>, vectors: &[Vector<S>]) -> Result<SigmaValue<S>> {
    if vectors.len() > model.m() {
        return Err(Error::Invalid(format!("σ takes at most {} vectors, got {}", model.m(), vectors.len())));
    }
    let omega = model.holomorphic_volume();
    let real_form = omega.re.contract(vectors)?;
    let imaginary = if vectors.len() == model.m() { Some(omega.im.contract(vectors)?.coeff_blade(0)) } else { None };
    Ok(SigmaValue { real_form, imaginary })
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Max over all `(p+1)`-subsets of `vectors` of `|σ|` (and `|Im Ω|` when
/// `p + 1 = m`). Returns `(sigma, imaginary)` residuals.
pub fn sigma_residuals<S: Scalar>(
    model: &CalabiYauModel<S>,
    vectors: &[Vector<S>],
    p: usize,
) -> Result<(S, Option<S>)> {
    let mut worst = S::zero();
    let mut worst_im: Option<S> = None;
    if p + 1 > model.m() {
        return Ok((worst, None));
    }
    for idx in subsets(vectors.len(), p + 1) {
        let vs: Vec<Vector<S>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let s = sigma_eval(model, &vs)?;
        let r = s.real_form.max_abs();
        if r > worst {
            worst = r;
        }
        if let Some(im) = s.imaginary {
            let a = im.abs();
            worst_im = Some(match worst_im {
                Some(w) if w > a => w,
                _ => a,
            });
        }
    }
    Ok((worst, worst_im))
}

/// Max entry of `J f_a − P_V(J f_a)` over the orthonormal basis; zero iff the
/// plane is `J`-invariant.
pub fn j_invariance_residual<S: Scalar>(j: &ComplexStructure, plane: &OrientedPlane<S>) -> S {
    let mut worst = S::zero();
    for f in plane.basis() {
        let jf = j.apply(f);
        let proj = plane.basis().iter().fold(Vector::zeros(jf.dim()), |acc, b| &acc + &b.scale(&jf.dot(b)));
        for c in (&jf - &proj).comps() {
            let a = c.abs();
            if a > worst {
                worst = a;
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCheck {
    pub complex: bool,
    pub sigma_residual: f64,
    pub imaginary_residual: Option<f64>,
    pub j_invariance_residual: f64,
    pub j_invariant: bool,
}

impl ComplexCheck {
    pub fn agrees(&self) -> bool {
        self.complex == self.j_invariant
    }

    pub fn to_json(&self) -> Value {
        json!({
            "complex": self.complex,
            "sigma_residual": self.sigma_residual,
            "imaginary_residual": self.imaginary_residual,
            "j_invariance_residual": self.j_invariance_residual,
            "j_invariant": self.j_invariant,
        })
    }
}

/// Classify a `2p`-plane by σ on every `(p+1)`-subset of its basis, with
/// `Im Ω` also required to vanish when `p + 1 = m`. The `J`-invariance
/// residual is reported alongside as an independent check.
pub fn is_complex_plane<S: Scalar>(
    model: &CalabiYauModel<S>,
    plane: &OrientedPlane<S>,
    tol: f64,
) -> Result<ComplexCheck> {
    if plane.ambient_dim() != model.real_dim() {
        return Err(Error::DimensionMismatch { left: model.real_dim(), right: plane.ambient_dim() });
    }
    if plane.dim() % 2 == 1 {
        return Err(Error::Invalid("plane dimension must be even".into()));
    }
    let p = plane.dim() / 2;
    let (sigma, im) = sigma_residuals(model, plane.basis(), p)?;
    let jres = j_invariance_residual(model.j(), plane);
    let complex = sigma.is_negligible(tol) && im.as_ref().is_none_or(|x| x.is_negligible(tol));
    Ok(ComplexCheck {
        complex,
        sigma_residual: sigma.to_f64(),
        imaginary_residual: im.map(|x| x.to_f64()),
        j_invariance_residual: jres.to_f64(),
        j_invariant: jres.is_negligible(tol),
    })
}

/// Real coordinate of the complex-basis index: `i ≤ m` is `e_i`
/// (coordinate `2i − 1`), `i > m` is `J e_{i−m}` (coordinate `2(i − m)`).
pub fn complex_index_coordinate(i: usize, m: usize) -> usize {
    if i <= m {
        2 * i - 1
    } else {
        2 * (i - m)
    }
}

/// `v_j = e_j + Σ λ^j_i e_i`, `w_j = J e_j + Σ μ^j_i e_i` over the complex
/// `p`-plane `span{e_1, Je_1, …, e_p, Je_p}`; `i` runs over the normal indices
/// `p+1..=m` and `m+p+1..=2m` (with `e_{m+k} = Je_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraphCoefficients<S> {
    m: usize,
    p: usize,
    lambda: Vec<Vec<S>>,
    mu: Vec<Vec<S>>,
}

impl<S: Scalar> ComplexGraphCoefficients<S> {
    /// `lambda[j-1][i-1]`, `mu[j-1][i-1]` for `i ∈ 1..=2m`; tangent entries
    /// must be zero.
    pub fn new(m: usize, p: usize, lambda: Vec<Vec<S>>, mu: Vec<Vec<S>>) -> Result<Self> {
        if p == 0 || p >= m || m > 4 {
            return Err(Error::Invalid(format!("need 1 ≤ p < m ≤ 4, got p={p}, m={m}")));
        }
        for mat in [&lambda, &mu] {
            if mat.len() != p || mat.iter().any(|r| r.len() != 2 * m) {
                return Err(Error::Invalid(format!("coefficient blocks must be {p}×{}", 2 * m)));
            }
            for row in mat.iter() {
                for i in normal_complement(m, p, false) {
                    if !row[i - 1].is_zero() {
                        return Err(Error::Invalid(format!("tangent index {i} must have zero coefficient")));
                    }
                }
            }
        }
        Ok(Self { m, p, lambda, mu })
    }

    pub fn zero(m: usize, p: usize) -> Result<Self> {
        let z = vec![vec![S::zero(); 2 * m]; p];
        Self::new(m, p, z.clone(), z)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn lambda(&self, j: usize, i: usize) -> &S {
        &self.lambda[j - 1][i - 1]
    }

    pub fn mu(&self, j: usize, i: usize) -> &S {
        &self.mu[j - 1][i - 1]
    }

    /// Given λ, the μ solving the linear system: `μ^j_k = −λ^j_{k+m}`,
    /// `μ^j_{k+m} = λ^j_k`.
    pub fn complete_from_lambda(m: usize, p: usize, lambda: Vec<Vec<S>>) -> Result<Self> {
        let mut mu = vec![vec![S::zero(); 2 * m]; p];
        for j in 0..p.min(lambda.len()) {
            for k in p + 1..=m {
                if lambda[j].len() == 2 * m {
                    mu[j][k - 1] = -lambda[j][k + m - 1].clone();
                    mu[j][k + m - 1] = lambda[j][k - 1].clone();
                }
            }
        }
        Self::new(m, p, lambda, mu)
    }

    fn ambient(&self, coords: &[S]) -> Vector<S> {
        let mut c = vec![S::zero(); 2 * self.m];
        for (i, x) in coords.iter().enumerate() {
            let coord = complex_index_coordinate(i + 1, self.m);
            c[coord - 1] = c[coord - 1].clone() + x.clone();
        }
        Vector::new(c)
    }

    pub fn v(&self, j: usize) -> Vector<S> {
        let base = Vector::basis(2 * self.m, complex_index_coordinate(j, self.m));
        &base + &self.ambient(&self.lambda[j - 1])
    }

    pub fn w(&self, j: usize) -> Vector<S> {
        let base = Vector::basis(2 * self.m, complex_index_coordinate(j + self.m, self.m));
        &base + &self.ambient(&self.mu[j - 1])
    }

    /// `v_1, …, v_p, w_1, …, w_p`.
    pub fn graph_vectors(&self) -> Vec<Vector<S>> {
        (1..=self.p).map(|j| self.v(j)).chain((1..=self.p).map(|j| self.w(j))).collect()
    }
}

// Complex-basis indices that are normal (`normal = true`) or tangent to the base.
fn normal_complement(m: usize, p: usize, normal: bool) -> Vec<usize> {
    (1..=2 * m)
        .filter(|&i| {
            let k = if i > m { i - m } else { i };
            (k > p) == normal
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTermReport<S> {
    /// Max of `|Re[e^{iφ}(w_j⌟β − i v_j⌟β)]|` over `j`.
    pub real_part: S,
    /// Max of `|e^{iφ}(w_j⌟β − i v_j⌟β)|` (real and imaginary parts).
    pub full: S,
    /// Max of `|μ^j_k + λ^j_{k+m}|`, `|μ^j_{k+m} − λ^j_k|`.
    pub coefficient_conditions: S,
}

fn bigger<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

/// Linear terms of σ on the complex graph, with
/// `β = dz_{p+1} ∧ … ∧ dz_m`.
pub fn complex_graph_linear_system<S: Scalar>(
    model: &CalabiYauModel<S>,
    cg: &ComplexGraphCoefficients<S>,
) -> Result<LinearTermReport<S>> {
    if model.m() != cg.m {
        return Err(Error::WrongModelDimension { expected: cg.m, found: model.m() });
    }
    let n = 2 * cg.m;
    let mut beta = ComplexMultivector::scalar(n, Complex::new(S::one(), S::zero()));
    for k in cg.p + 1..=cg.m {
        beta = beta.wedge(&model.j().dz(k))?;
    }
    let phase = model.phase().as_complex();
    let minus_i = Complex::new(S::zero(), -S::one());
    let mut real_part = S::zero();
    let mut full = S::zero();
    let mut cond = S::zero();
    for j in 1..=cg.p {
        let wb = beta.hook_real(&cg.w(j))?;
        let vb = beta.hook_real(&cg.v(j))?.scale(&minus_i);
        let term = (&wb + &vb).scale(&phase);
        real_part = bigger(real_part, term.re.max_abs());
        full = bigger(full, term.max_abs());
        for k in cg.p + 1..=cg.m {
            let a = cg.mu(j, k).clone() + cg.lambda(j, k + cg.m).clone();
            let b = cg.mu(j, k + cg.m).clone() - cg.lambda(j, k).clone();
            cond = bigger(cond, bigger(a.abs(), b.abs()));
        }
    }
    Ok(LinearTermReport { real_part, full, coefficient_conditions: cond })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kahler::Phase;
    use crate::scalar::Rational;

    type Q = Rational;

    #[test]
    fn complex_plane_has_zero_sigma() {
        let model = CalabiYauModel::<Q>::new(4, Phase::pythagorean(3, 4, 5).unwrap()).unwrap();
        let plane = OrientedPlane::coordinate(8, &[1, 2, 3, 4]).unwrap();
        let c = is_complex_plane(&model, &plane, 0.0).unwrap();
        assert!(c.complex && c.j_invariant);
        let sl = OrientedPlane::coordinate(8, &[1, 3, 5, 7]).unwrap();
        let c = is_complex_plane(&model, &sl, 0.0).unwrap();
        assert!(!c.complex && !c.j_invariant);
    }

    #[test]
    fn m2_quarter_phase_needs_imaginary_part() {
        // σ(e1, cos θ Je1 + sin θ e2) = sin θ cos φ, Im Ω = sin θ sin φ
        let model = CalabiYauModel::<Q>::new(2, Phase::quarter_turns(1)).unwrap();
        let (c, s) = (Q::from_ratio(3, 5), Q::from_ratio(4, 5));
        let v1 = Vector::from_i64(&[1, 0, 0, 0]);
        let v2 = Vector::new(vec![Q::from_i64(0), c, s.clone(), Q::from_i64(0)]);
        let sig = sigma_eval(&model, &[v1.clone(), v2.clone()]).unwrap();
        assert!(sig.real_form.is_zero());
        assert_eq!(sig.imaginary, Some(s));
        let plane = OrientedPlane::new(vec![v1, v2], 0.0).unwrap();
        let check = is_complex_plane(&model, &plane, 0.0).unwrap();
        assert_eq!(check.sigma_residual, 0.0);
        assert!(!check.complex && check.agrees());
    }

    #[test]
    fn coordinate_map() {
        assert_eq!(complex_index_coordinate(1, 4), 1);
        assert_eq!(complex_index_coordinate(3, 4), 5);
        assert_eq!(complex_index_coordinate(5, 4), 2);
        assert_eq!(complex_index_coordinate(8, 4), 8);
    }

    #[test]
    fn completed_graph_is_complex() {
        let model = CalabiYauModel::<Q>::new(3, Phase::quarter_turns(1)).unwrap();
        let mut lambda = vec![vec![Q::from_i64(0); 6]];
        lambda[0][1] = Q::from_ratio(1, 3); // λ^1_2
        lambda[0][5] = Q::from_ratio(-2, 7); // λ^1_6
        let cg = ComplexGraphCoefficients::complete_from_lambda(3, 1, lambda).unwrap();
        let rep = complex_graph_linear_system(&model, &cg).unwrap();
        assert_eq!(rep.full, Q::from_i64(0));
        assert_eq!(rep.coefficient_conditions, Q::from_i64(0));
        let (s, im) = sigma_residuals(&model, &cg.graph_vectors(), 1).unwrap();
        assert_eq!(s, Q::from_i64(0));
        assert!(im.is_none());
        let j = model.j();
        assert_eq!(j.apply(&cg.v(1)), cg.w(1));
    }

    #[test]
    fn rejects_tangent_entries() {
        let mut lambda = vec![vec![Q::from_i64(0); 6]];
        lambda[0][0] = Q::from_i64(1);
        assert!(ComplexGraphCoefficients::complete_from_lambda(3, 1, lambda).is_err());
    }
}
