//! Index of the deformation operator of a complex surface in a Calabi–Yau
//! fourfold, from topological or Chern-number input.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

/// `(∫c₁²(N), ∫c₂(N), ∫c₂(ν^{1,0}))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChernNumbers {
    pub c1_sq: i64,
    pub c2: i64,
    pub c2_nu: i64,
}

impl ChernNumbers {
    /// `c₁² + c₂ ≡ 0 (mod 6)` and `c₁² − 2c₂ ≡ 0 (mod 3)`: the triples for
    /// which both index formulas are defined and comparable.
    pub fn divisible(&self) -> bool {
        (self.c1_sq + self.c2).rem_euclid(6) == 0 && (self.c1_sq - 2 * self.c2).rem_euclid(3) == 0
    }

    /// Signature via `p₁ = c₁² − 2c₂ = 3σ`, Euler number `c₂`, and
    /// self-intersection `c₂(ν)`.
    pub fn to_topology(&self) -> Result<TopologicalInvariants> {
        let p1 = self.c1_sq - 2 * self.c2;
        if p1.rem_euclid(3) != 0 {
            return Err(Error::NonIntegral { numerator: p1, denominator: 3 });
        }
        Ok(TopologicalInvariants {
            signature: p1 / 3,
            euler: self.c2,
            self_intersection: self.c2_nu,
            chern: Some(*self),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologicalInvariants {
    pub signature: i64,
    pub euler: i64,
    pub self_intersection: i64,
    pub chern: Option<ChernNumbers>,
}

impl TopologicalInvariants {
    pub fn new(signature: i64, euler: i64, self_intersection: i64) -> Self {
        Self { signature, euler, self_intersection, chern: None }
    }

    /// Empty when there are no Chern numbers or they agree; otherwise one
    /// message per violated relation.
    pub fn consistency_violations(&self) -> Vec<String> {
        let Some(c) = self.chern else { return Vec::new() };
        let mut out = Vec::new();
        if 3 * self.signature != c.c1_sq - 2 * c.c2 {
            out.push(format!("3·signature = {} but c1^2 - 2c2 = {}", 3 * self.signature, c.c1_sq - 2 * c.c2));
        }
        if self.euler != c.c2 {
            out.push(format!("euler = {} but c2 = {}", self.euler, c.c2));
        }
        if self.self_intersection != c.c2_nu {
            out.push(format!("self-intersection = {} but c2(nu) = {}", self.self_intersection, c.c2_nu));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "signature": self.signature,
            "euler": self.euler,
            "self_intersection": self.self_intersection,
            "chern": self.chern,
        })
    }
}

/// `½σ(N) + ½χ(N) − [N]·[N]`.
pub fn index_from_topology(inv: &TopologicalInvariants) -> Result<i64> {
    let violations = inv.consistency_violations();
    if !violations.is_empty() {
        return Err(Error::Invalid(format!("inconsistent invariants: {}", violations.join("; "))));
    }
    let half = inv.signature + inv.euler;
    if half.rem_euclid(2) != 0 {
        return Err(Error::NonIntegral { numerator: half - 2 * inv.self_intersection, denominator: 2 });
    }
    Ok(half / 2 - inv.self_intersection)
}

/// `∫ ch(ν^{1,0}) td(N) = (c₁² + c₂)/6 − c₂(ν)`, using `c₁(ν) = −c₁(N)`.
pub fn index_from_chern(c: &ChernNumbers) -> Result<i64> {
    let num = c.c1_sq + c.c2;
    if num.rem_euclid(6) != 0 {
        return Err(Error::NonIntegral { numerator: num - 6 * c.c2_nu, denominator: 6 });
    }
    Ok(num / 6 - c.c2_nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn topology_examples() {
        assert_eq!(index_from_topology(&TopologicalInvariants::new(0, 0, 0)).unwrap(), 0);
        assert_eq!(index_from_topology(&TopologicalInvariants::new(-16, 24, 0)).unwrap(), 4);
        assert_eq!(index_from_topology(&TopologicalInvariants::new(0, 0, 5)).unwrap(), -5);
        assert!(matches!(
            index_from_topology(&TopologicalInvariants::new(1, 0, 0)),
            Err(Error::NonIntegral { denominator: 2, .. })
        ));
    }

    #[test]
    fn chern_examples() {
        assert_eq!(index_from_chern(&ChernNumbers { c1_sq: 0, c2: 0, c2_nu: 0 }).unwrap(), 0);
        let k3 = ChernNumbers { c1_sq: 0, c2: 24, c2_nu: 0 };
        assert_eq!(index_from_chern(&k3).unwrap(), 4);
        assert_eq!(k3.to_topology().unwrap().signature, -16);
        // P²: c₁² = 9, c₂ = 3.
        assert_eq!(index_from_chern(&ChernNumbers { c1_sq: 9, c2: 3, c2_nu: 0 }).unwrap(), 2);
        assert!(index_from_chern(&ChernNumbers { c1_sq: 1, c2: 0, c2_nu: 0 }).is_err());
    }

    #[test]
    fn inconsistent_chern_data_is_rejected() {
        let mut inv = TopologicalInvariants::new(-16, 24, 0);
        inv.chern = Some(ChernNumbers { c1_sq: 0, c2: 24, c2_nu: 1 });
        assert_eq!(inv.consistency_violations().len(), 1);
        assert!(index_from_topology(&inv).is_err());
    }

    #[test]
    fn formulas_agree_on_divisible_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 100 {
            let c = ChernNumbers {
                c1_sq: rng.random_range(-60..=60),
                c2: rng.random_range(-60..=60),
                c2_nu: rng.random_range(-20..=20),
            };
            if !c.divisible() {
                continue;
            }
            let topo = c.to_topology().unwrap();
            assert_eq!(index_from_chern(&c).unwrap(), index_from_topology(&topo).unwrap(), "{c:?}");
            checked += 1;
        }
    }
}
