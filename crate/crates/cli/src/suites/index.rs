//! The index `½σ(N) + ½χ(N) − [N]·[N]` from topological data and from Chern
//! numbers.

use cayley_core::linalg::seeded_rng;
use cayley_core::torus::{index_from_chern, index_from_topology, ChernNumbers, TopologicalInvariants};
use cayley_core::Error as CoreError;
use rand::Rng;
use serde_json::json;

use super::stream;
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::Check;

pub const DEFAULT_TRIPLES: usize = 100;

pub fn run(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (name, inv, expected, reference) in [
        ("index.flat", (0, 0, 0), 0, "a surface with σ = χ = [N]·[N] = 0, such as the flat torus, has index 0"),
        ("index.k3", (-16, 24, 0), 4, "σ = −16, χ = 24, [N]·[N] = 0 (a K3 surface) gives index 4"),
    ] {
        let got = index_from_topology(&TopologicalInvariants::new(inv.0, inv.1, inv.2))?;
        checks.push(
            Check::count(name, reference, (got - expected).unsigned_abs() as usize)
                .with_details(json!({ "signature": inv.0, "euler": inv.1, "self_intersection": inv.2, "index": got, "expected": expected })),
        );
    }

    // c₁² = 6a − c₂ satisfies both divisibility conditions.
    let mut rng = seeded_rng(cfg.seed, stream::INDEX);
    let n = cfg.samples_or(DEFAULT_TRIPLES);
    let mut disagreements = 0;
    let mut first = None;
    for _ in 0..n {
        let a = rng.random_range(-40i64..=40);
        let c2 = rng.random_range(-200i64..=200);
        let c = ChernNumbers { c1_sq: 6 * a - c2, c2, c2_nu: rng.random_range(-50i64..=50) };
        let from_chern = index_from_chern(&c)?;
        let from_topology = index_from_topology(&c.to_topology()?)?;
        if from_chern != from_topology {
            disagreements += 1;
            first.get_or_insert(json!({ "chern": c, "from_chern": from_chern, "from_topology": from_topology }));
        }
    }
    checks.push(
        Check::count(
            "index.chern_agreement",
            "(c₁² + c₂)/6 − c₂(ν) equals ½σ + ½χ − [N]·[N] with σ = (c₁² − 2c₂)/3, χ = c₂, [N]·[N] = c₂(ν)",
            disagreements,
        )
        .with_details(json!({ "triples": n, "first_disagreement": first })),
    );

    let odd = index_from_topology(&TopologicalInvariants::new(1, 0, 0));
    checks.push(Check::count(
        "index.rejects_half_integers",
        "σ + χ must be even; odd input is rejected rather than rounded",
        usize::from(!matches!(odd, Err(CoreError::NonIntegral { denominator: 2, .. }))),
    ));
    Ok(checks)
}
