//! Graphs over the base Cayley plane: the four τ equations, their Newton
//! solutions, the three residual quadratics, and the linear system for
//! complex graphs.

use cayley_core::graphs::complex::{complex_graph_linear_system, ComplexGraphCoefficients};
use cayley_core::graphs::system::{residual_quadratics_transposed, tau_components};
use cayley_core::graphs::{residual_quadratics, solve_tau_system, tau_system, GraphCoefficients, GRAPH_RADIUS};
use cayley_core::linalg::{gaussian, seeded_rng};
use cayley_core::{CalabiYauModel, CayleyForm, Phase, Rational, Scalar};
use rand::Rng;
use serde_json::json;

use super::{larger, max_of, small_ratio, stream};
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::{Check, Status};

pub const DEFAULT_SOLVES: usize = 50;
pub const NORMALIZATION_SAMPLES: usize = 100;
pub const EXACT_SOLVES: usize = 5;
pub const COMPLEX_GRAPH_SAMPLES: usize = 40;
/// Newton stopping tolerance; the certified residuals use `RESIDUAL_TOL_FACTOR · tol`.
pub const NEWTON_TOL: f64 = 1e-13;
pub const RESIDUAL_TOL_FACTOR: f64 = 10.0;

/// Gaussian λ with the unknowns `λ^1_•` zeroed and `‖λ‖ < radius`.
pub fn random_seed<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> GraphCoefficients<f64> {
    loop {
        let mut lam = GraphCoefficients::<f64>::zero();
        for j in 2..=4 {
            for i in 5..=8 {
                lam.set(j, i, gaussian(rng));
            }
        }
        let scale = radius * rng.random_range(0.1..1.0) / lam.norm();
        let lam = GraphCoefficients::from_rows(lam.rows().map(|r| r.map(|x| x * scale)));
        if lam.norm() < radius {
            return lam;
        }
    }
}

fn random_rational_graph<S: Scalar, R: Rng + ?Sized>(rng: &mut R, den: i64) -> GraphCoefficients<S> {
    GraphCoefficients::from_rows(std::array::from_fn(|_| std::array::from_fn(|_| small_ratio::<S, _>(rng, 10, den))))
}

pub fn run(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let mut rng = seeded_rng(cfg.seed, stream::GRAPHS);
    let mut checks = newton_checks(cfg, &mut rng)?;
    checks.extend(if cfg.exact() {
        normalization_checks::<Rational, _>(cfg, &mut rng)?
    } else {
        normalization_checks::<f64, _>(cfg, &mut rng)?
    });
    if cfg.exact() {
        checks.push(exact_newton_check(&mut rng)?);
    }
    checks.extend(if cfg.exact() {
        complex_graph_checks::<Rational, _>(cfg, &mut rng)?
    } else {
        complex_graph_checks::<f64, _>(cfg, &mut rng)?
    });
    Ok(checks)
}

fn newton_checks<R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> Result<Vec<Check>> {
    let phi = CayleyForm::<f64>::phi0();
    let n = cfg.samples_or(DEFAULT_SOLVES);
    let tol = RESIDUAL_TOL_FACTOR * cfg.tol;
    let (mut q_max, mut tau_max, mut printed_q3, mut max_iter) = (0.0f64, 0.0f64, 0.0f64, 0);
    for _ in 0..n {
        let seed = random_seed(rng, GRAPH_RADIUS);
        let out = solve_tau_system(&seed, NEWTON_TOL)?;
        q_max = q_max.max(max_of(residual_quadratics(&out.lambda)));
        tau_max = tau_max.max(phi.tau_on(&out.lambda.frame())?.norm());
        printed_q3 = printed_q3.max(residual_quadratics_transposed(&out.lambda)[2].abs());
        max_iter = max_iter.max(out.iterations);
    }
    let details = json!({ "solves": n, "radius": GRAPH_RADIUS, "max_newton_iterations": max_iter });
    let printed = Check::within(
        "graphs.printed_third_quadratic",
        "with ε_ji in place of ε_ij in its first sum, the third residual quadratic does not vanish on solutions",
        printed_q3,
        tol,
    );
    // Expected to be nonzero: a warning documents the index order actually used.
    let printed_status = if printed.status == Status::Fail { Status::Warn } else { Status::Pass };
    Ok(vec![
        Check::within(
            "graphs.newton.residual_quadratics",
            "solutions of the four τ equations near the base plane satisfy the three residual quadratics",
            q_max,
            tol,
        )
        .with_details(details.clone()),
        Check::within(
            "graphs.newton.tau",
            "solutions of the four τ equations near the base plane are Cayley: τ(graph) = 0",
            tau_max,
            tol,
        )
        .with_details(details),
        printed.with_status(printed_status),
    ])
}

fn normalization_checks<S: Scalar, R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> Result<Vec<Check>> {
    let phi = CayleyForm::<S>::phi0();
    let (mut e_err, mut sd_err) = (S::zero(), S::zero());
    let two = S::from_i64(2);
    for _ in 0..NORMALIZATION_SAMPLES {
        let lam = random_rational_graph::<S, _>(rng, 20);
        let comps = tau_components(&phi, &lam)?;
        let poly = tau_system(&lam);
        for (e, eq) in comps.e_part.iter().zip(&poly) {
            e_err = larger(e_err, (e.clone() - eq.clone()).abs());
        }
        for (q, sd) in residual_quadratics(&lam).iter().zip(&comps.self_dual) {
            sd_err = larger(sd_err, (q.clone() - two.clone() * sd.clone()).abs());
        }
    }
    let details = json!({ "graphs": NORMALIZATION_SAMPLES });
    Ok(vec![
        Check::scalar(
            "graphs.normalization.e_components",
            "the four τ equations are the components of τ(graph) along π₇(e¹∧eᵃ), a = 5..8",
            &e_err,
            cfg.tol,
        )
        .with_details(details.clone()),
        Check::scalar(
            "graphs.normalization.self_dual",
            "the three residual quadratics are twice the self-dual components of τ(graph)",
            &sd_err,
            cfg.tol,
        )
        .with_details(details),
    ])
}

/// On rationals the system is affine in the unknowns: one Newton step lands
/// exactly on a Cayley graph.
fn exact_newton_check<R: Rng + ?Sized>(rng: &mut R) -> Result<Check> {
    let phi = CayleyForm::<Rational>::phi0();
    let mut violations = 0;
    let mut max_iter = 0;
    for _ in 0..EXACT_SOLVES {
        let mut seed = random_rational_graph::<Rational, _>(rng, 200);
        for i in 5..=8 {
            seed.set(1, i, Rational::from_i64(0));
        }
        let out = solve_tau_system(&seed, 0.0)?;
        max_iter = max_iter.max(out.iterations);
        let q_zero = residual_quadratics(&out.lambda).iter().all(|x| x.is_negligible(0.0));
        let tau_zero = phi.tau_on(&out.lambda.frame())?.form().is_zero();
        violations += usize::from(!(q_zero && tau_zero) || out.iterations > 1);
    }
    Ok(Check::count(
        "graphs.newton.exact",
        "on exact input one Newton step solves the four τ equations, and the quadratics and τ vanish exactly",
        violations,
    )
    .with_details(json!({ "solves": EXACT_SOLVES, "max_newton_iterations": max_iter })))
}

fn complex_graph_checks<S: Scalar, R: Rng + ?Sized>(cfg: &SuiteConfig, rng: &mut R) -> Result<Vec<Check>> {
    let shapes = [(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)];
    let mut solved_residual = S::zero();
    let mut disagreements = 0;
    for s in 0..COMPLEX_GRAPH_SAMPLES {
        let (m, p) = shapes[s % shapes.len()];
        let model = CalabiYauModel::<S>::new(m, Phase::pythagorean(3, 4, 5)?)?;
        let normal: Vec<usize> = (p + 1..=m).chain(m + p + 1..=2 * m).collect();
        let mut block = || -> Vec<Vec<S>> {
            (0..p)
                .map(|_| {
                    let mut row = vec![S::zero(); 2 * m];
                    for &i in &normal {
                        row[i - 1] = small_ratio(rng, 6, 5);
                    }
                    row
                })
                .collect()
        };
        let lambda = block();
        let solved = ComplexGraphCoefficients::complete_from_lambda(m, p, lambda.clone())?;
        solved_residual = larger(solved_residual, complex_graph_linear_system(&model, &solved)?.full);

        // An unrelated μ: the linear terms vanish exactly when the
        // coefficient conditions hold.
        let other = ComplexGraphCoefficients::new(m, p, lambda, block())?;
        let rep = complex_graph_linear_system(&model, &other)?;
        if rep.full.is_negligible(cfg.tol) != rep.coefficient_conditions.is_negligible(cfg.tol) {
            disagreements += 1;
        }
    }
    let details = json!({ "graphs": COMPLEX_GRAPH_SAMPLES, "shapes": shapes });
    Ok(vec![
        Check::scalar(
            "graphs.complex_linear.solution",
            "μ^j_k = −λ^j_{k+m}, μ^j_{k+m} = λ^j_k makes the linear terms of σ on the complex graph vanish",
            &solved_residual,
            cfg.tol,
        )
        .with_details(details.clone()),
        Check::count(
            "graphs.complex_linear.equivalence",
            "the linear terms of σ on a complex graph vanish if and only if μ is determined by λ as above",
            disagreements,
        )
        .with_details(details),
    ])
}
