//! Normal graphs over the Cayley plane `span{e_1,…,e_4}` of the standard
//! Cayley form and the polynomial form of the projected τ equations.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{Multivector, Vector};
use crate::linalg;
use crate::scalar::Scalar;
use crate::spin7::CayleyForm;

/// Radius inside which Newton from the row-1 variable split is used.
pub const GRAPH_RADIUS: f64 = 0.3;
pub const NEWTON_MAX_ITERATIONS: usize = 50;

/// `λ^j_i`, tangent index `j ∈ 1..=4`, normal index `i ∈ 5..=8`; the graph
/// frame is `v_j = e_j + Σ_i λ^j_i e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphCoefficients<S> {
    lam: [[S; 4]; 4],
}

impl<S: Scalar> GraphCoefficients<S> {
    pub fn zero() -> Self {
        Self { lam: std::array::from_fn(|_| std::array::from_fn(|_| S::zero())) }
    }

    /// Rows are tangent indices, columns normal indices 5..8.
    pub fn from_rows(rows: [[S; 4]; 4]) -> Self {
        Self { lam: rows }
    }

    pub fn from_vec(rows: &[Vec<S>]) -> Result<Self> {
        if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
            return Err(Error::Invalid("graph coefficients must be 4×4".into()));
        }
        Ok(Self { lam: std::array::from_fn(|j| std::array::from_fn(|i| rows[j][i].clone())) })
    }

    /// `λ^j_i`.
    pub fn get(&self, j: usize, i: usize) -> &S {
        &self.lam[j - 1][i - 5]
    }

    pub fn set(&mut self, j: usize, i: usize, value: S) {
        self.lam[j - 1][i - 5] = value;
    }

    pub fn rows(&self) -> &[[S; 4]; 4] {
        &self.lam
    }

    pub fn norm(&self) -> f64 {
        self.lam.iter().flatten().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt()
    }

    pub fn to_f64(&self) -> GraphCoefficients<f64> {
        GraphCoefficients { lam: std::array::from_fn(|j| std::array::from_fn(|i| self.lam[j][i].to_f64())) }
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.lam.iter().map(|r| Value::Array(r.iter().map(Scalar::to_json).collect())).collect())
    }

    /// The four tangent vectors of the graphed plane.
    pub fn frame(&self) -> Vec<Vector<S>> {
        (1..=4)
            .map(|j| {
                let mut c = vec![S::zero(); 8];
                c[j - 1] = S::one();
                for i in 5..=8 {
                    c[i - 1] = self.get(j, i).clone();
                }
                Vector::new(c)
            })
            .collect()
    }

    /// Graph frame over a general base: `frame[0..4]` span the base plane,
    /// `frame[4..8]` its normal space.
    pub fn frame_in(&self, frame: &[Vector<S>]) -> Result<Vec<Vector<S>>> {
        if frame.len() != 8 {
            return Err(Error::Invalid("need a full frame of 8 vectors".into()));
        }
        Ok((1..=4)
            .map(|j| (5..=8).fold(frame[j - 1].clone(), |acc, i| &acc + &frame[i - 1].scale(self.get(j, i))))
            .collect())
    }
}

pub fn graph_frame<S: Scalar>(lam: &GraphCoefficients<S>) -> Vec<Vector<S>> {
    lam.frame()
}

/// `Σ ε_{pqr} λ^a_p λ^b_q λ^c_r` over orderings of `cols`: the 3×3 minor.
fn minor<S: Scalar>(lam: &GraphCoefficients<S>, rows: [usize; 3], cols: [usize; 3]) -> S {
    let m = |r: usize, c: usize| lam.get(rows[r], cols[c]).clone();
    m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
        + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
}

struct Equation {
    linear: [(i64, usize, usize); 4],
    cubic: [(i64, [usize; 3], [usize; 3]); 4],
}

const T234: [usize; 3] = [2, 3, 4];
const T134: [usize; 3] = [1, 3, 4];
const T124: [usize; 3] = [1, 2, 4];
const T123: [usize; 3] = [1, 2, 3];
const N678: [usize; 3] = [6, 7, 8];
const N578: [usize; 3] = [5, 7, 8];
const N568: [usize; 3] = [5, 6, 8];
const N567: [usize; 3] = [5, 6, 7];

const EQUATIONS: [Equation; 4] = [
    Equation {
        linear: [(1, 1, 5), (1, 2, 6), (1, 3, 7), (1, 4, 8)],
        cubic: [(-1, T234, N678), (-1, T134, N578), (-1, T124, N568), (-1, T123, N567)],
    },
    Equation {
        linear: [(1, 1, 6), (-1, 2, 5), (-1, 3, 8), (1, 4, 7)],
        cubic: [(1, T234, N578), (-1, T134, N678), (-1, T124, N567), (1, T123, N568)],
    },
    Equation {
        linear: [(1, 1, 7), (1, 2, 8), (-1, 3, 5), (-1, 4, 6)],
        cubic: [(-1, T234, N568), (-1, T134, N567), (1, T124, N678), (1, T123, N578)],
    },
    Equation {
        linear: [(1, 1, 8), (-1, 2, 7), (1, 3, 6), (-1, 4, 5)],
        cubic: [(1, T234, N567), (-1, T134, N568), (1, T124, N578), (-1, T123, N678)],
    },
];

/// The four polynomial equations (linear + cubic) whose vanishing is the
/// vanishing of the `E`-component of τ on the graph frame.
pub fn tau_system<S: Scalar>(lam: &GraphCoefficients<S>) -> [S; 4] {
    std::array::from_fn(|k| {
        let eq = &EQUATIONS[k];
        let lin = eq.linear.iter().fold(S::zero(), |acc, &(s, j, i)| acc + S::from_i64(s) * lam.get(j, i).clone());
        eq.cubic.iter().fold(lin, |acc, &(s, rows, cols)| acc + S::from_i64(s) * minor(lam, rows, cols))
    })
}

/// Jacobian of [`tau_system`] with respect to `λ^1_5, …, λ^1_8`.
pub fn tau_system_jacobian<S: Scalar>(lam: &GraphCoefficients<S>) -> Vec<Vec<S>> {
    EQUATIONS
        .iter()
        .map(|eq| {
            (5..=8)
                .map(|p| {
                    let mut d = S::zero();
                    for &(s, j, i) in &eq.linear {
                        if j == 1 && i == p {
                            d = d + S::from_i64(s);
                        }
                    }
                    for &(s, rows, cols) in &eq.cubic {
                        if rows[0] != 1 {
                            continue;
                        }
                        // expand the minor along its first row
                        if let Some(k) = cols.iter().position(|&c| c == p) {
                            let rest: Vec<usize> = cols.iter().copied().filter(|&c| c != p).collect();
                            let m = |r: usize, c: usize| lam.get(rows[r], rest[c]).clone();
                            let cof = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
                            let sign = if k % 2 == 0 { s } else { -s };
                            d = d + S::from_i64(sign) * cof;
                        }
                    }
                    d
                })
                .collect()
        })
        .collect()
}

fn eps2(i: usize, j: usize) -> i64 {
    const POS: [(usize, usize); 6] = [(7, 5), (6, 8), (5, 6), (6, 7), (7, 8), (5, 8)];
    if POS.contains(&(i, j)) {
        1
    } else if POS.contains(&(j, i)) {
        -1
    } else {
        0
    }
}

// Σ over both orderings of each listed unordered pair.
fn pair_sum<S: Scalar>(pairs: [(usize, usize); 2], mut f: impl FnMut(usize, usize) -> S) -> S {
    let mut acc = S::zero();
    for (a, b) in pairs {
        acc = acc + f(a, b) + f(b, a);
    }
    acc
}

fn quadratic_forms<S: Scalar>(lam: &GraphCoefficients<S>, third_uses_transposed_eps: bool) -> [S; 3] {
    let l = |j: usize, i: usize| lam.get(j, i).clone();
    let e = |i: usize, j: usize| S::from_i64(eps2(i, j));
    let q1 = pair_sum([(5, 7), (6, 8)], |i, j| e(i, j) * (l(1, i) * l(4, j) + l(2, i) * l(3, j)))
        + pair_sum([(6, 7), (5, 8)], |i, j| e(i, j) * (l(1, i) * l(3, j) - l(2, i) * l(4, j)));
    let q2 = pair_sum([(5, 6), (7, 8)], |i, j| e(i, j) * (l(1, i) * l(4, j) + l(2, i) * l(3, j)))
        - pair_sum([(5, 8), (6, 7)], |i, j| e(i, j) * (l(1, i) * l(2, j) + l(3, i) * l(4, j)));
    let first = pair_sum([(5, 6), (7, 8)], |i, j| {
        let eps = if third_uses_transposed_eps { e(j, i) } else { e(i, j) };
        eps * (l(2, i) * l(4, j) - l(1, i) * l(3, j))
    });
    let q3 = first - pair_sum([(5, 7), (6, 8)], |i, j| e(i, j) * (l(1, i) * l(2, j) + l(3, i) * l(4, j)));
    [q1, q2, q3]
}

/// The three quadratic expressions whose vanishing upgrades `π(τ) = 0` to
/// `τ = 0`. Each is twice a self-dual component of τ on the graph frame.
///
/// The third one uses `ε_{ij}` in its first sum; with `ε_{ji}` there (see
/// [`residual_quadratics_transposed`]) it does not vanish on solutions.
pub fn residual_quadratics<S: Scalar>(lam: &GraphCoefficients<S>) -> [S; 3] {
    quadratic_forms(lam, false)
}

/// Variant of [`residual_quadratics`] with `ε_{ji}` in the first sum of the
/// third expression.
pub fn residual_quadratics_transposed<S: Scalar>(lam: &GraphCoefficients<S>) -> [S; 3] {
    quadratic_forms(lam, true)
}

/// Orthonormal basis `π₇(e^1∧e^a)`, `a = 5..8`, of the part `E` of `Λ²₇`
/// made of mixed tangent/normal forms.
pub fn e_basis<S: Scalar>(phi: &CayleyForm<S>) -> Vec<Multivector<S>> {
    (5..=8).map(|a| phi.pi7(&Multivector::basis(8, &[1, a]).unwrap()).unwrap()).collect()
}

/// Orthogonal basis of the self-dual part: `π₇(e^{12}+e^{34})`,
/// `π₇(e^{13}−e^{24})`, `π₇(e^{14}+e^{23})`.
pub fn self_dual_basis<S: Scalar>(phi: &CayleyForm<S>) -> Vec<Multivector<S>> {
    let f = |a: [usize; 2], b: [usize; 2], s: i64| {
        let x = Multivector::basis(8, &a).unwrap();
        let y = Multivector::term(8, &b, S::from_i64(s)).unwrap();
        phi.pi7(&(&x + &y)).unwrap()
    };
    vec![f([1, 2], [3, 4], 1), f([1, 3], [2, 4], -1), f([1, 4], [2, 3], 1)]
}

fn coefficients<S: Scalar>(t: &Multivector<S>, basis: &[Multivector<S>]) -> Vec<S> {
    basis.iter().map(|b| t.dot_coeffs(b) / b.norm_sq()).collect()
}

/// Components of τ(graph frame) along [`e_basis`] and [`self_dual_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct TauComponents<S> {
    pub e_part: Vec<S>,
    pub self_dual: Vec<S>,
    pub tau_norm: f64,
}

pub fn tau_components<S: Scalar>(phi: &CayleyForm<S>, lam: &GraphCoefficients<S>) -> Result<TauComponents<S>> {
    let tau = phi.tau_on(&lam.frame())?;
    Ok(TauComponents {
        e_part: coefficients(tau.form(), &e_basis(phi)),
        self_dual: coefficients(tau.form(), &self_dual_basis(phi)),
        tau_norm: tau.norm(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome<S> {
    pub lambda: GraphCoefficients<S>,
    pub iterations: usize,
    pub residual: f64,
}

/// Newton's method on [`tau_system`] in the unknowns `λ^1_5, …, λ^1_8`, the
/// other twelve entries held fixed. The system is affine in these unknowns,
/// so on the exact backend one step lands on the solution.
pub fn solve_tau_system<S: Scalar>(seed: &GraphCoefficients<S>, tol: f64) -> Result<NewtonOutcome<S>> {
    let norm = seed.norm();
    if norm >= GRAPH_RADIUS {
        return Err(Error::OutsideRadius { norm, radius: GRAPH_RADIUS });
    }
    let mut lam = seed.clone();
    let mut residual = f64::INFINITY;
    for iteration in 0..=NEWTON_MAX_ITERATIONS {
        let f = tau_system(&lam);
        residual = f.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
        let done = if S::BACKEND == crate::Backend::Exact { f.iter().all(|x| x.is_zero()) } else { residual <= tol };
        if done {
            return Ok(NewtonOutcome { lambda: lam, iterations: iteration, residual });
        }
        if iteration == NEWTON_MAX_ITERATIONS || !residual.is_finite() {
            break;
        }
        let jac = tau_system_jacobian(&lam);
        let rhs: Vec<S> = f.iter().map(|x| -x.clone()).collect();
        let dx = linalg::solve(jac, rhs, 1e-14)?;
        for (k, d) in dx.into_iter().enumerate() {
            let cur = lam.get(1, 5 + k).clone();
            lam.set(1, 5 + k, cur + d);
        }
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITERATIONS, residual })
}

pub fn outcome_json<S: Scalar>(o: &NewtonOutcome<S>) -> Value {
    json!({ "lambda": o.lambda.to_json(), "iterations": o.iterations, "residual": o.residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    type Q = Rational;

    fn sample(seed: i64) -> GraphCoefficients<Q> {
        // small deterministic rationals
        GraphCoefficients::from_rows(std::array::from_fn(|j| {
            std::array::from_fn(|i| Q::from_ratio(((seed + 7 * j as i64 + 3 * i as i64) % 11) - 5, 97))
        }))
    }

    #[test]
    fn zero_graph() {
        let z = GraphCoefficients::<Q>::zero();
        assert!(tau_system(&z).iter().all(|x| *x == Q::from_i64(0)));
        assert!(residual_quadratics(&z).iter().all(|x| *x == Q::from_i64(0)));
        assert_eq!(z.frame(), (1..=4).map(|j| Vector::basis(8, j)).collect::<Vec<_>>());
    }

    #[test]
    fn polynomials_are_tau_components() {
        let phi = CayleyForm::<Q>::phi0();
        for s in 0..5 {
            let lam = sample(s);
            let comps = tau_components(&phi, &lam).unwrap();
            assert_eq!(comps.e_part, tau_system(&lam).to_vec());
            let q = residual_quadratics(&lam);
            for k in 0..3 {
                assert_eq!(q[k], comps.self_dual[k].clone() * Q::from_i64(2));
            }
        }
    }

    #[test]
    fn exact_newton_one_step() {
        let phi = CayleyForm::<Q>::phi0();
        let mut seed = sample(3);
        for i in 5..=8 {
            seed.set(1, i, Q::from_i64(0));
        }
        let out = solve_tau_system(&seed, 0.0).unwrap();
        assert_eq!(out.iterations, 1);
        assert!(tau_system(&out.lambda).iter().all(|x| *x == Q::from_i64(0)));
        assert!(residual_quadratics(&out.lambda).iter().all(|x| *x == Q::from_i64(0)));
        assert!(phi.tau_on(&out.lambda.frame()).unwrap().form().is_zero());
        // the transposed third quadratic does not vanish there
        assert_ne!(residual_quadratics_transposed(&out.lambda)[2], Q::from_i64(0));
    }

    #[test]
    fn jacobian_matches_difference_quotient() {
        let lam = sample(1).to_f64();
        let jac = tau_system_jacobian(&lam);
        let h = 1e-6;
        for p in 0..4 {
            let mut a = lam.clone();
            let mut b = lam.clone();
            a.set(1, 5 + p, lam.get(1, 5 + p) + h);
            b.set(1, 5 + p, lam.get(1, 5 + p) - h);
            let (fa, fb) = (tau_system(&a), tau_system(&b));
            for k in 0..4 {
                assert!(((fa[k] - fb[k]) / (2.0 * h) - jac[k][p]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn radius_guard() {
        let mut big = GraphCoefficients::<f64>::zero();
        big.set(2, 6, 0.5);
        assert!(matches!(solve_tau_system(&big, 1e-12), Err(Error::OutsideRadius { .. })));
    }

    #[test]
    fn e_and_self_dual_bases_are_orthogonal() {
        let phi = CayleyForm::<Q>::phi0();
        let e = e_basis(&phi);
        let sd = self_dual_basis(&phi);
        for (a, x) in e.iter().enumerate() {
            for (b, y) in e.iter().enumerate() {
                let want = if a == b { Q::from_i64(1) } else { Q::from_i64(0) };
                assert_eq!(x.dot_coeffs(y), want);
            }
            for y in &sd {
                assert_eq!(x.dot_coeffs(y), Q::from_i64(0));
            }
        }
    }
}
