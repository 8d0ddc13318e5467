//! Acceptance gate: one test per criterion, each printing a single
//! `PASS`/`FAIL criterion N` line with its pinned tolerances and time limit.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use cayley_cli::suites::{self, torus};
use cayley_cli::{Check, Status, Suite, SuiteConfig};
use cayley_core::torus::{index_from_topology, TopologicalInvariants};
use serde_json::Value;

const SEED: u64 = 42;

/// Pinned values match up to the rounding of products like `100 · 1e-9`.
fn same(a: &Value, b: &Value) -> bool {
    match (a.as_f64(), b.as_f64()) {
        (Some(x), Some(y)) => (x - y).abs() <= 1e-12 * y.abs(),
        _ => a == b,
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn checks(suite: Suite) -> (Vec<Check>, Duration) {
    let cfg = SuiteConfig::new(suite).with_seed(SEED);
    let (checks, elapsed) = timed(|| suites::suite_checks(suite, &cfg));
    (checks.unwrap_or_else(|e| panic!("{suite} suite errored: {e}")), elapsed)
}

/// Collects reasons a criterion is not met.
#[derive(Default)]
struct Gate {
    problems: Vec<String>,
}

impl Gate {
    fn find<'a>(&mut self, checks: &'a [Check], name: &str) -> Option<&'a Check> {
        let found = checks.iter().find(|c| c.name == name);
        if found.is_none() {
            self.problems.push(format!("{name} missing"));
        }
        found
    }

    /// `name` must pass with exactly the pinned tolerance (0 for exact checks).
    fn require(&mut self, checks: &[Check], name: &str, tol: f64) {
        let Some(c) = self.find(checks, name) else { return };
        if c.status != Status::Pass {
            self.problems.push(format!("{name}: {} (residual {})", c.status, c.residual));
        }
        if !same(&c.tolerance.into(), &tol.into()) {
            self.problems.push(format!("{name}: tolerance {} instead of {tol}", c.tolerance));
        }
    }

    fn detail(&mut self, checks: &[Check], name: &str, key: &str, expected: Value) {
        let Some(c) = self.find(checks, name) else { return };
        if !same(&c.details[key], &expected) {
            self.problems.push(format!("{name}: {key} = {} instead of {expected}", c.details[key]));
        }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.problems.push(what.into());
        }
    }

    fn finish(mut self, n: u32, what: &str, elapsed: Duration, limit: Duration) {
        if elapsed > limit {
            self.problems.push(format!("took {:.2} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()));
        }
        let status = if self.problems.is_empty() { "PASS" } else { "FAIL" };
        let line = format!(
            "{status} criterion {n}: {what} [{:.2} s / {} s]{}\n",
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if self.problems.is_empty() { String::new() } else { format!(" — {}", self.problems.join("; ")) }
        );
        // the raw handle bypasses the harness's output capture, so every
        // criterion reports even when its test passes
        let _ = std::io::stderr().write_all(line.as_bytes());
        assert!(self.problems.is_empty(), "criterion {n} failed: {}", self.problems.join("; "));
    }
}

#[test]
fn criterion_01_cayley_form() {
    let (checks, elapsed) = checks(Suite::Structure);
    let mut g = Gate::default();
    for name in ["structure.phi0.coefficients", "structure.phi0.self_dual", "structure.phi0.square"] {
        g.require(&checks, name, 0.0);
    }
    g.detail(&checks, "structure.phi0.coefficients", "nonzero_terms", 14.into());
    g.finish(1, "14 signed coefficients, *Φ = Φ, Φ∧Φ = 14 vol, exact", elapsed, Duration::from_secs(1));
}

#[test]
fn criterion_02_two_form_splitting() {
    let (checks, elapsed) = checks(Suite::Structure);
    let mut g = Gate::default();
    for name in ["structure.lambda2.pi7_rank", "structure.lambda2.complement_rank", "structure.lambda2.l27_span"] {
        g.require(&checks, name, 0.0);
    }
    g.detail(&checks, "structure.lambda2.pi7_rank", "rank", 7.into());
    g.detail(&checks, "structure.lambda2.complement_rank", "rank", 21.into());
    g.detail(&checks, "structure.lambda2.l27_span", "span_rank", 7.into());
    g.finish(2, "π₇ rank 7, complement rank 21, spanning set of rank 7, exact", elapsed, Duration::from_secs(1));
}

#[test]
fn criterion_03_cayley_tau_equivalence() {
    let (checks, elapsed) = checks(Suite::Planes);
    let mut g = Gate::default();
    g.require(&checks, "planes.cayley_tau_equivalence", 0.0);
    g.detail(&checks, "planes.cayley_tau_equivalence", "planes", 1000.into());
    g.detail(&checks, "planes.cayley_tau_equivalence", "phi_tolerance", 1e-9.into());
    g.detail(&checks, "planes.cayley_tau_equivalence", "tau_tolerance", 1e-7.into());
    g.require(&checks, "planes.standard_complex", 0.0);
    g.require(&checks, "planes.special_lagrangian", 0.0);
    g.finish(
        3,
        "|Φ−1| < 1e-9 ⟺ ‖τ‖ < 1e-7 on 1000 planes, ℂ² and special Lagrangian planes Cayley",
        elapsed,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_04_graph_equations() {
    let (checks, elapsed) = checks(Suite::Graphs);
    let mut g = Gate::default();
    g.require(&checks, "graphs.newton.residual_quadratics", 1e-8);
    g.require(&checks, "graphs.newton.tau", 1e-8);
    g.detail(&checks, "graphs.newton.tau", "solves", 50.into());
    g.detail(&checks, "graphs.newton.tau", "radius", 0.3.into());
    g.finish(4, "50 Newton solutions, quadratics < 1e-8 and ‖τ‖ < 1e-8", elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_05_bundle_isomorphisms() {
    let (checks, elapsed) = checks(Suite::Structure);
    let mut g = Gate::default();
    for name in [
        "structure.normal_isom.round_trip",
        "structure.pi7.mixed_antiholomorphic",
        "structure.pi7.mixed_holomorphic",
        "structure.pi7.cross_types",
        "structure.pi7.tangent_self_dual",
    ] {
        g.require(&checks, name, 0.0);
    }
    g.finish(5, "normal isomorphism round trip and π₇ identities, residual 0", elapsed, Duration::from_secs(5));
}

#[test]
fn criterion_06_canonical_angles() {
    let (checks, elapsed) = checks(Suite::Angles);
    let mut g = Gate::default();
    g.require(&checks, "angles.round_trip", 1e-9);
    g.detail(&checks, "angles.round_trip", "samples", 100.into());
    g.require(&checks, "angles.complex_planes", 1e-9);
    g.require(&checks, "angles.isotropic_planes", 1e-9);
    g.finish(6, "100 angle round trips within 1e-9, complex → 0, isotropic → π/2", elapsed, Duration::from_secs(10));
}

#[test]
fn criterion_07_complex_detector() {
    let (checks, elapsed) = checks(Suite::Angles);
    let mut g = Gate::default();
    g.require(&checks, "angles.detector_agreement", 0.0);
    g.detail(&checks, "angles.detector_agreement", "planes", 500.into());
    g.require(&checks, "angles.quarter_phase_counterexample", 0.0);
    g.detail(&checks, "angles.quarter_phase_counterexample", "expected_imaginary_residual", 0.8.into());
    if let Some(c) = checks.iter().find(|c| c.name == "angles.detector_agreement") {
        let branch = c.details["m_equals_p_plus_1"].as_u64().unwrap_or(0);
        g.expect(branch > 0, "no m = p + 1 planes sampled");
    }
    g.finish(
        7,
        "σ detector agrees with J-invariance on 500 planes; phase π/2 counterexample has Im Ω residual 0.8",
        elapsed,
        Duration::from_secs(30),
    );
}

#[test]
fn criterion_08_torus_kernels() {
    let mut g = Gate::default();
    let mut at_k3 = Duration::ZERO;
    for k in 0..=3 {
        let (check, elapsed) = timed(|| torus::kernel_check(k).expect("kernel check"));
        if k == 3 {
            at_k3 = elapsed;
        }
        let name = check.name.clone();
        g.require(&[check], &name, 0.0);
    }
    g.finish(
        8,
        "Ker ∂̄ = 2, Ker ∂̄* = 2, Ker(∂̄⊕∂̄*) = 4 for K = 0..3 with gap ≥ 6 orders (timed at K = 3)",
        at_k3,
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_09_quadratic_remainder() {
    let cfg = SuiteConfig::new(Suite::Torus).with_seed(SEED);
    let opts = torus::TorusOptions::default();
    let (checks, elapsed) = timed(|| {
        vec![
            torus::linearization_check(&cfg).expect("linearization check"),
            torus::remainder_check(&cfg, &opts).expect("remainder check"),
        ]
    });
    let mut g = Gate::default();
    g.require(&checks, "torus.linearization", 1e-6);
    g.require(&checks, "torus.quadratic_remainder", 0.05);
    g.detail(&checks, "torus.quadratic_remainder", "seeds", 50.into());
    g.finish(
        9,
        "finite-difference slope of ‖F(tv) − tLv‖ in [1.9, 2.1] for ≥ 95% of 50 seeds",
        elapsed,
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_10_index() {
    let (checks, elapsed) = checks(Suite::Index);
    let mut g = Gate::default();
    for name in ["index.flat", "index.k3", "index.chern_agreement"] {
        g.require(&checks, name, 0.0);
    }
    g.detail(&checks, "index.chern_agreement", "triples", 100.into());
    let flat = index_from_topology(&TopologicalInvariants::new(0, 0, 0)).ok();
    let k3 = index_from_topology(&TopologicalInvariants::new(-16, 24, 0)).ok();
    g.expect(flat == Some(0), format!("index(0, 0, 0) = {flat:?}"));
    g.expect(k3 == Some(4), format!("index(−16, 24, 0) = {k3:?}"));
    g.finish(
        10,
        "index(0,0,0) = 0, index(−16,24,0) = 4, Chern formula agrees on 100 triples",
        elapsed,
        Duration::from_secs(1),
    );
}

#[test]
fn criterion_11_determinism() {
    let run = |json: &std::path::Path| {
        let out = Command::new(env!("CARGO_BIN_EXE_cayley"))
            .args(["all", "--seed", "42", "--quiet", "--json"])
            .arg(json)
            .output()
            .expect("spawn cayley");
        // the quadratic-remainder check is expected to fail, which sets exit code 1
        assert!(matches!(out.status.code(), Some(0 | 1)), "unexpected exit {:?}", out.status);
        std::fs::read(json).expect("report written")
    };
    let dir = tempfile::tempdir().expect("tempdir");
    let ((a, b), elapsed) = timed(|| (run(&dir.path().join("a.json")), run(&dir.path().join("b.json"))));
    let mut g = Gate::default();
    g.expect(!a.is_empty(), "empty report");
    g.expect(a == b, "reports differ between runs");
    g.finish(11, "`all --seed 42` twice gives byte-identical JSON", elapsed, Duration::from_secs(600));
}
