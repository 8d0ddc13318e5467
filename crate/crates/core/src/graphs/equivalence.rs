//! Search for a signed coordinate permutation relating two 4-forms on ℝ⁸.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exterior::{canonical_blade, Multivector, Vector};
use crate::scalar::Scalar;

/// `e_i ↦ s_i e_{σ(i)}` (1-based `σ`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedPermutation {
    pub fn identity(n: usize) -> Self {
        Self { perm: (1..=n).collect(), signs: vec![1; n] }
    }

    pub fn apply<S: Scalar>(&self, v: &Vector<S>) -> Vector<S> {
        let mut out = vec![S::zero(); v.dim()];
        for (i, c) in v.comps().iter().enumerate() {
            let x = if self.signs[i] < 0 { -c.clone() } else { c.clone() };
            out[self.perm[i] - 1] = x;
        }
        Vector::new(out)
    }

    /// `(g^*β)(e_I) = β(g e_I)`.
    pub fn pull_back<S: Scalar>(&self, beta: &Multivector<S>) -> Result<Multivector<S>> {
        let n = beta.dim();
        let mut inv = vec![0usize; n];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p - 1] = i + 1;
        }
        let mut out = Multivector::zero(n);
        for (idx, c) in beta.sorted_terms() {
            let pre: Vec<usize> = idx.iter().map(|&k| inv[k - 1]).collect();
            let flips = pre.iter().filter(|&&i| self.signs[i - 1] < 0).count();
            let mut coeff = if flips % 2 == 1 { -c } else { c };
            let (neg, _) = canonical_blade(&pre).ok_or_else(|| Error::Invalid("not a permutation".into()))?;
            if neg {
                coeff = -coeff;
            }
            out = &out + &Multivector::term(n, &pre, coeff)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({ "perm": self.perm, "signs": self.signs })
    }
}

#[derive(Debug, Clone)]
pub struct EquivalenceSearch {
    pub found: Option<SignedPermutation>,
    pub nodes: u64,
}

/// Find `g` with `g^*b = a` by depth-first assignment of `σ(1), σ(2), …`,
/// pruning on every 4-subset of already-assigned indices. The overall sign
/// `−Id` preserves 4-forms, so `s_1 = +1` without loss.
pub fn find_equivalence<S: Scalar>(a: &Multivector<S>, b: &Multivector<S>) -> Result<EquivalenceSearch> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    let n = a.dim();
    let grade = match (a.grade(), b.grade()) {
        (Some(x), Some(y)) if x == y => x,
        (Some(x), Some(y)) => return Err(Error::GradeMismatch { expected: x, found: y }),
        _ => return Err(Error::Inhomogeneous),
    };
    if a.len() != b.len() {
        return Ok(EquivalenceSearch { found: None, nodes: 0 });
    }
    let coeff_a = |idx: &[usize]| a.coeff(idx);
    let coeff_b = |idx: &[usize]| b.coeff(idx);

    struct State {
        perm: Vec<usize>,
        signs: Vec<i8>,
        used: Vec<bool>,
        nodes: u64,
    }
    fn subsets_with_last(last: usize, grade: usize) -> Vec<Vec<usize>> {
        // grade-subsets of 1..=last containing `last`
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(start: usize, end: usize, need: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if need == 0 {
                out.push(cur.clone());
                return;
            }
            for i in start..=end {
                cur.push(i);
                rec(i + 1, end, need - 1, cur, out);
                cur.pop();
            }
        }
        if grade >= 1 && last >= grade {
            rec(1, last - 1, grade - 1, &mut cur, &mut out);
            for s in &mut out {
                s.push(last);
            }
        }
        out
    }
    let checks: Vec<Vec<Vec<usize>>> = (1..=n).map(|i| subsets_with_last(i, grade)).collect();

    fn consistent<S: Scalar>(
        st: &State,
        i: usize,
        checks: &[Vec<Vec<usize>>],
        ca: &dyn Fn(&[usize]) -> S,
        cb: &dyn Fn(&[usize]) -> S,
    ) -> bool {
        for sub in &checks[i - 1] {
            let image: Vec<usize> = sub.iter().map(|&k| st.perm[k - 1]).collect();
            let (neg, _) = canonical_blade(&image).expect("distinct");
            let flips = sub.iter().filter(|&&k| st.signs[k - 1] < 0).count();
            let mut target = cb(&image);
            if neg ^ (flips % 2 == 1) {
                target = -target;
            }
            if ca(sub) != target {
                return false;
            }
        }
        true
    }

    fn search<S: Scalar>(
        st: &mut State,
        i: usize,
        n: usize,
        checks: &[Vec<Vec<usize>>],
        ca: &dyn Fn(&[usize]) -> S,
        cb: &dyn Fn(&[usize]) -> S,
    ) -> bool {
        if i > n {
            return true;
        }
        for target in 1..=n {
            if st.used[target - 1] {
                continue;
            }
            let sign_choices: &[i8] = if i == 1 { &[1] } else { &[1, -1] };
            for &s in sign_choices {
                st.nodes += 1;
                st.perm[i - 1] = target;
                st.signs[i - 1] = s;
                st.used[target - 1] = true;
                if consistent(st, i, checks, ca, cb) && search(st, i + 1, n, checks, ca, cb) {
                    return true;
                }
                st.used[target - 1] = false;
            }
        }
        false
    }

    // Signed permutations preserve the multiset of |coefficients|.
    let mut abs_a: Vec<f64> = a.terms().map(|(_, c)| c.to_f64().abs()).collect();
    let mut abs_b: Vec<f64> = b.terms().map(|(_, c)| c.to_f64().abs()).collect();
    abs_a.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    abs_b.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
    if abs_a != abs_b {
        return Ok(EquivalenceSearch { found: None, nodes: 0 });
    }

    let mut st = State { perm: vec![0; n], signs: vec![1; n], used: vec![false; n], nodes: 0 };
    let found = search(&mut st, 1, n, &checks, &coeff_a, &coeff_b);
    let nodes = st.nodes;
    Ok(EquivalenceSearch { found: found.then_some(SignedPermutation { perm: st.perm, signs: st.signs }), nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::spin7::{phi0_model, CayleyForm};

    type Q = Rational;

    #[test]
    fn identity_relates_phi0_to_its_model() {
        let phi0 = CayleyForm::<Q>::phi0();
        let cy = CayleyForm::from_cy(&phi0_model::<Q>()).unwrap();
        let res = find_equivalence(phi0.phi(), cy.phi()).unwrap();
        let g = res.found.unwrap();
        assert_eq!(g.pull_back(cy.phi()).unwrap(), *phi0.phi());
    }

    #[test]
    fn recovers_a_hidden_signed_permutation() {
        let phi0 = CayleyForm::<Q>::phi0();
        let hidden = SignedPermutation { perm: vec![3, 7, 1, 8, 2, 5, 4, 6], signs: vec![1, -1, 1, 1, -1, -1, 1, -1] };
        let moved = hidden.pull_back(phi0.phi()).unwrap();
        let res = find_equivalence(&moved, phi0.phi()).unwrap();
        let g = res.found.expect("equivalent by construction");
        assert_eq!(g.pull_back(phi0.phi()).unwrap(), moved);
    }

    #[test]
    fn pull_back_matches_evaluation() {
        let phi0 = CayleyForm::<Q>::phi0();
        let g = SignedPermutation { perm: vec![2, 1, 4, 3, 6, 5, 8, 7], signs: vec![1, 1, -1, 1, 1, -1, 1, 1] };
        let pulled = g.pull_back(phi0.phi()).unwrap();
        let vs: Vec<Vector<Q>> = [1, 2, 5, 6].iter().map(|&i| Vector::basis(8, i)).collect();
        let gv: Vec<Vector<Q>> = vs.iter().map(|v| g.apply(v)).collect();
        assert_eq!(pulled.evaluate(&vs).unwrap(), phi0.phi().evaluate(&gv).unwrap());
    }

    #[test]
    fn inequivalent_forms_report_none() {
        let a = Multivector::<Q>::from_terms(8, [(&[1, 2, 3, 4][..], Q::from_i64(1))]).unwrap();
        let b = Multivector::<Q>::from_terms(8, [(&[1, 2, 3, 4][..], Q::from_i64(2))]).unwrap();
        assert!(find_equivalence(&a, &b).unwrap().found.is_none());
        let phi0 = CayleyForm::<Q>::phi0();
        let flipped = phi0.phi().scale(&Q::from_i64(-1));
        // −Φ₀ has the opposite orientation class; a signed permutation with
        // odd determinant may still relate them, so only check termination.
        let _ = find_equivalence(phi0.phi(), &flipped).unwrap();
    }
}
