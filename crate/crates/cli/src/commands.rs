//! Commands that act on input files or flags rather than seeded samples.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use cayley_core::graphs::complex::{complex_graph_linear_system, ComplexGraphCoefficients};
use cayley_core::graphs::system::{outcome_json, tau_components};
use cayley_core::graphs::{
    canonical_angles, is_complex_plane, residual_quadratics, solve_tau_system, tau_system, GraphCoefficients,
};
use cayley_core::plane::orthonormality_residual;
use cayley_core::spin7::phi0_model;
use cayley_core::torus::{index_from_chern, index_from_topology, ChernNumbers, TopologicalInvariants};
use cayley_core::{CalabiYauModel, CayleyForm, OrientedPlane, Phase, Rational, Scalar, Vector};
use serde_json::{json, Value};

use crate::config::SuiteConfig;
use crate::error::{CliError, Result};
use crate::input::{self, parse_blocks, PlaneFile, PlaneMode};
use crate::report::{Check, Report, Status};
use crate::suites::angles::DETECTOR_TOL_FACTOR;
use crate::suites::planes::TAU_TOL_FACTOR;

fn scalars<S: Scalar>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(Scalar::to_json).collect())
}

// ---------------------------------------------------------------------------
// classify-plane / angles

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneOptions {
    /// Phase of Ω for complex-mode planes, in radians.
    pub phase: f64,
    /// Reject rows that are not orthonormal instead of orthonormalizing.
    pub reject_nonorthonormal: bool,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self { phase: 0.0, reject_nonorthonormal: false }
    }
}

/// Multiple of π/2, if `phase` is one to within roundoff.
fn quarter_turns(phase: f64) -> Option<i64> {
    let k = (phase / FRAC_PI_2).round();
    ((phase - k * FRAC_PI_2).abs() < 1e-12).then_some(k as i64)
}

/// A general phase; only representable within roundoff, so the exact
/// backend rejects it.
fn float_phase<S: Scalar>(phase: f64) -> Result<Phase<S>> {
    let (c, s) = (S::from_f64(phase.cos()), S::from_f64(phase.sin()));
    match c.zip(s) {
        Some((c, s)) => Ok(Phase::new(c, s, 1e-12)?),
        None => Err(CliError::Usage(format!("phase {phase} is not finite"))),
    }
}

fn model_for<S: Scalar>(mode: PlaneMode, phase: f64) -> Result<CalabiYauModel<S>> {
    Ok(match mode {
        // Cayley mode: the structure whose Φ is the standard Cayley form.
        PlaneMode::Cayley => phi0_model(),
        PlaneMode::Complex { m, .. } => {
            let ph = match quarter_turns(phase) {
                Some(k) => Phase::quarter_turns(k),
                None => float_phase(phase)?,
            };
            CalabiYauModel::new(m, ph)?
        }
    })
}

pub fn classify_plane(cfg: &SuiteConfig, path: &Path, opts: PlaneOptions) -> Result<Report> {
    let text = input::read_text(path)?;
    let mut report = Report::new(cfg.clone());
    report.input("plane_file", path.display().to_string());
    report.input("phase", opts.phase);
    // The exact backend needs exactly orthonormal rows and a quarter-turn
    // phase; otherwise the float path is used and the report says so.
    let exact_ok = cfg.exact() && {
        let file = input::parse_plane::<Rational>(&text, path)?;
        let basis: Vec<Vector<Rational>> = file.rows.iter().cloned().map(Vector::new).collect();
        orthonormality_residual(&basis).is_negligible(0.0)
            && (file.mode == PlaneMode::Cayley || quarter_turns(opts.phase).is_some())
    };
    if exact_ok {
        classify_with::<Rational>(cfg, &mut report, input::parse_plane(&text, path)?, opts)?;
    } else {
        if cfg.exact() {
            report.push(
                Check::count(
                    "plane.backend",
                    "exact classification needs exactly orthonormal rational rows and a phase that is a multiple of π/2",
                    0,
                )
                .with_status(Status::Warn)
                .with_details(json!({ "used": "float" })),
            );
        }
        classify_with::<f64>(cfg, &mut report, input::parse_plane(&text, path)?, opts)?;
    }
    Ok(report.finish())
}

fn prepare_plane<S: Scalar>(
    cfg: &SuiteConfig,
    report: &mut Report,
    file: &PlaneFile<S>,
    opts: PlaneOptions,
) -> Result<OrientedPlane<S>> {
    let basis: Vec<Vector<S>> = file.rows.iter().cloned().map(Vector::new).collect();
    let residual = orthonormality_residual(&basis);
    if residual.is_negligible(cfg.tol) {
        report.push(Check::scalar("plane.orthonormal", "the basis rows are orthonormal", &residual, cfg.tol));
        return Ok(OrientedPlane::new(basis, cfg.tol)?);
    }
    if opts.reject_nonorthonormal {
        return Err(CliError::Malformed {
            path: file.path.clone(),
            message: format!("rows are not orthonormal (residual {:e})", residual.to_f64()),
        });
    }
    report.push(
        Check::scalar("plane.orthonormal", "the basis rows are orthonormal", &residual, cfg.tol)
            .with_status(Status::Warn)
            .with_details(json!({ "action": "Gram–Schmidt in row order (orientation kept)" })),
    );
    let rows = basis.iter().map(|v| v.to_f64()).collect();
    let plane = OrientedPlane::orthonormalize(rows, cfg.tol)?;
    // Back to S through the exact binary values of the orthonormalized rows.
    let converted: Option<Vec<Vector<S>>> = plane
        .basis()
        .iter()
        .map(|v| v.comps().iter().map(|&x| S::from_f64(x)).collect::<Option<Vec<S>>>().map(Vector::new))
        .collect();
    let converted = converted
        .ok_or_else(|| CliError::Malformed { path: file.path.clone(), message: "non-finite entries".into() })?;
    Ok(OrientedPlane::new(converted, f64::INFINITY)?)
}

fn classify_with<S: Scalar>(
    cfg: &SuiteConfig,
    report: &mut Report,
    file: PlaneFile<S>,
    opts: PlaneOptions,
) -> Result<()> {
    let plane = prepare_plane(cfg, report, &file, opts)?;
    let tol = cfg.identity_tol();
    let model = model_for::<S>(file.mode, opts.phase)?;
    let (m, p) = (model.m(), plane.dim() / 2);
    report.result("mode", if file.mode == PlaneMode::Cayley { "cayley" } else { "complex" });
    report.result("complex_dim", m);
    report.result("p", p);

    if file.mode == PlaneMode::Cayley {
        let phi = CayleyForm::<S>::phi0();
        let value = phi.evaluate_plane(&plane)?;
        let tau = phi.tau_on(plane.basis())?;
        let tau_tol = TAU_TOL_FACTOR * cfg.tol;
        let cayley = value.within(&S::one(), tol);
        let anti = value.within(&-S::one(), tol);
        let tau_zero = tau.is_zero_within(tau_tol);
        report.result("cayley", cayley);
        report.result("anti_cayley", anti);
        report.result("phi", value.to_json());
        report.result("tau_norm", tau.norm());
        report.push(
            Check::count(
                "plane.cayley_tau_consistency",
                "Φ(V) = ±1 exactly when τ vanishes on V",
                usize::from((cayley || anti) != tau_zero),
            )
            .with_details(json!({ "phi_tolerance": tol, "tau_tolerance": tau_tol })),
        );
    }

    let detector_tol = if S::BACKEND == cayley_core::Backend::Exact { 0.0 } else { DETECTOR_TOL_FACTOR * cfg.tol };
    let c = is_complex_plane(&model, &plane, detector_tol)?;
    report.result("complex", c.complex);
    report.result("sigma", c.to_json());
    report.push(Check::count(
        "plane.detector_consistency",
        "the σ classification agrees with J-invariance",
        usize::from(!c.agrees()),
    ));

    let ca = canonical_angles(&plane.to_f64(), model.j())?;
    report.result("angles", json!(ca.angles));
    report.result("canonical", ca.to_json());
    report.push(Check::count(
        "plane.angle_decomposition",
        "the canonical-angle decomposition reproduces the plane in a unitary frame",
        usize::from(ca.defective(cfg.tol.max(1e-9))),
    ));
    report.result("model", model.describe());
    Ok(())
}

// ---------------------------------------------------------------------------
// graph-verify / graph-solve

fn lambda_graph<S: Scalar>(rows: [[S; 4]; 4]) -> GraphCoefficients<S> {
    GraphCoefficients::from_rows(rows)
}

pub fn graph_verify(cfg: &SuiteConfig, path: &Path) -> Result<Report> {
    let text = input::read_text(path)?;
    let mut report = Report::new(cfg.clone());
    report.input("graph_file", path.display().to_string());
    // 4×4 single block: λ over the Cayley base plane; otherwise a complex graph.
    let blocks = parse_blocks::<f64>(&text, path)?;
    let is_lambda = blocks.len() == 1 && blocks[0].len() == 4 && blocks[0][0].len() == 4;
    if cfg.exact() {
        if is_lambda {
            verify_lambda::<Rational>(cfg, &mut report, &text, path)?;
        } else {
            verify_complex::<Rational>(cfg, &mut report, &text, path)?;
        }
    } else if is_lambda {
        verify_lambda::<f64>(cfg, &mut report, &text, path)?;
    } else {
        verify_complex::<f64>(cfg, &mut report, &text, path)?;
    }
    Ok(report.finish())
}

fn verify_lambda<S: Scalar>(cfg: &SuiteConfig, report: &mut Report, text: &str, path: &Path) -> Result<()> {
    let lam = lambda_graph(input::parse_lambda::<S>(text, path)?);
    let phi = CayleyForm::<S>::phi0();
    let eqs = tau_system(&lam);
    let q = residual_quadratics(&lam);
    let comps = tau_components(&phi, &lam)?;
    let tau = phi.tau_on(&lam.frame())?;
    let tol = cfg.identity_tol();
    let eqs_zero = eqs.iter().all(|x| x.is_negligible(tol));
    let q_zero = q.iter().all(|x| x.is_negligible(tol));
    let tau_zero = tau.is_zero_within(TAU_TOL_FACTOR * cfg.tol);
    report.result("lambda", lam.to_json());
    report.result("tau_equations", scalars(&eqs));
    report.result("residual_quadratics", scalars(&q));
    report.result("tau_norm", tau.norm());
    report.result("cayley", tau_zero);

    let two = S::from_i64(2);
    let mut normalization = S::zero();
    for (e, eq) in comps.e_part.iter().zip(&eqs) {
        normalization = crate::suites::larger(normalization, (e.clone() - eq.clone()).abs());
    }
    for (qk, sd) in q.iter().zip(&comps.self_dual) {
        normalization = crate::suites::larger(normalization, (qk.clone() - two.clone() * sd.clone()).abs());
    }
    report.push(Check::scalar(
        "graph.normalization",
        "the four τ equations and the halved residual quadratics are the components of τ(graph)",
        &normalization,
        cfg.tol,
    ));
    report.push(Check::count(
        "graph.cayley_consistency",
        "the graph is Cayley exactly when the four τ equations and the three quadratics vanish",
        usize::from((eqs_zero && q_zero) != tau_zero),
    ));
    Ok(())
}

fn verify_complex<S: Scalar>(cfg: &SuiteConfig, report: &mut Report, text: &str, path: &Path) -> Result<()> {
    let file = input::parse_complex_graph::<S>(text, path)?;
    let lambda = file.expand(&file.lambda);
    let cg = match &file.mu {
        Some(mu) => ComplexGraphCoefficients::new(file.m, file.p, lambda, file.expand(mu))?,
        None => ComplexGraphCoefficients::complete_from_lambda(file.m, file.p, lambda)?,
    };
    let model = CalabiYauModel::<S>::new(file.m, Phase::zero())?;
    let rep = complex_graph_linear_system(&model, &cg)?;
    let tol = cfg.identity_tol();
    report.result("complex_dim", file.m);
    report.result("p", file.p);
    report.result("mu_completed_from_lambda", file.mu.is_none());
    report.result("linear_terms", rep.full.to_json());
    report.result("coefficient_conditions", rep.coefficient_conditions.to_json());
    report.result("linear_terms_vanish", rep.full.is_negligible(tol));
    report.push(Check::count(
        "graph.complex_linear.equivalence",
        "the linear terms of σ on the complex graph vanish exactly when μ^j_k = −λ^j_{k+m} and μ^j_{k+m} = λ^j_k",
        usize::from(rep.full.is_negligible(tol) != rep.coefficient_conditions.is_negligible(tol)),
    ));
    Ok(())
}

pub fn graph_solve(cfg: &SuiteConfig, path: &Path) -> Result<Report> {
    let text = input::read_text(path)?;
    let mut report = Report::new(cfg.clone());
    report.input("seed_file", path.display().to_string());
    if cfg.exact() {
        solve_with::<Rational>(cfg, &mut report, &text, path)?;
    } else {
        solve_with::<f64>(cfg, &mut report, &text, path)?;
    }
    Ok(report.finish())
}

fn solve_with<S: Scalar>(cfg: &SuiteConfig, report: &mut Report, text: &str, path: &Path) -> Result<()> {
    let seed = lambda_graph(input::parse_lambda::<S>(text, path)?);
    let out = solve_tau_system(&seed, crate::suites::graphs::NEWTON_TOL)?;
    let phi = CayleyForm::<S>::phi0();
    let q = residual_quadratics(&out.lambda);
    let tau = phi.tau_on(&out.lambda.frame())?;
    let tol = crate::suites::graphs::RESIDUAL_TOL_FACTOR * cfg.tol;
    report.result("newton", outcome_json(&out));
    report.result("residual_quadratics", scalars(&q));
    report.result("tau_norm", tau.norm());
    report.push(Check::scalar(
        "graph.solve.residual_quadratics",
        "the Newton solution satisfies the three residual quadratics",
        &crate::suites::max_of(q),
        tol,
    ));
    let tau_check = Check::within("graph.solve.tau", "the Newton solution is a Cayley graph", tau.norm(), tol);
    let tau_check = if S::BACKEND == cayley_core::Backend::Exact {
        tau_check.with_status(Status::from_bool(tau.form().is_zero()))
    } else {
        tau_check
    };
    report.push(tau_check);
    Ok(())
}

// ---------------------------------------------------------------------------
// index

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexArgs {
    pub topology: Option<(i64, i64, i64)>,
    pub chern: Option<ChernNumbers>,
}

pub fn index(cfg: &SuiteConfig, args: IndexArgs) -> Result<Report> {
    let mut report = Report::new(cfg.clone());
    let inv = match (args.topology, args.chern) {
        (Some((s, e, n)), chern) => {
            let mut inv = TopologicalInvariants::new(s, e, n);
            inv.chern = chern;
            inv
        }
        (None, Some(c)) => c.to_topology()?,
        (None, None) => {
            return Err(CliError::Usage(
                "give --sign/--euler/--self-int or --c1sq/--c2/--c2nu (or run the index suite)".into(),
            ))
        }
    };
    report.input("invariants", inv.to_json());
    let violations = inv.consistency_violations();
    report.push(
        Check::count(
            "index.input_consistency",
            "signature, Euler number and self-intersection agree with the Chern numbers",
            violations.len(),
        )
        .with_details(json!({ "violations": violations })),
    );
    if !violations.is_empty() {
        return Ok(report.finish());
    }
    let from_topology = index_from_topology(&inv)?;
    report.result("index", from_topology);
    if let Some(c) = args.chern {
        let from_chern = index_from_chern(&c)?;
        report.result("index_from_chern", from_chern);
        report.push(
            Check::count(
                "index.formulas_agree",
                "the Chern-number and topological index formulas agree",
                usize::from(from_chern != from_topology),
            )
            .with_details(json!({ "from_chern": from_chern, "from_topology": from_topology })),
        );
    }
    Ok(report.finish())
}
