//! Deformation operators of the complex 2-torus `z₃ = z₄ = 0` in the flat
//! model: kernel dimensions, adjointness, the Cayley kernel as a sum of the
//! complex kernels, and the finite-difference linearization test.

use cayley_core::linalg::seeded_rng;
use cayley_core::torus::nonlinear::{fd_linearization_check, linearization_error, DEFAULT_LADDER, SLOPE_RANGE};
use cayley_core::torus::operators::{
    adjointness_residual, dbar_forms_matrix, direct_sum, null_spaces, span_distance, DEFAULT_KERNEL_TOL,
};
use cayley_core::torus::{
    adjoint_matrix, dbar_matrix, dbar_star_matrix, dirac_matrix, index_from_topology, kernel_dim, TopologicalInvariants,
};
use cayley_core::{Bundle, Error as CoreError, FourierSection, Rational, Scalar, TorusModel};
use serde_json::{json, Value};

use super::stream;
use crate::config::SuiteConfig;
use crate::error::Result;
use crate::report::{json_f64, Check, Status};

pub const DEFAULT_FD_SEEDS: usize = 50;
pub const FD_TRUNCATION: usize = 1;
/// Largest fraction of seeds whose slope may fall outside the window.
pub const FD_MAX_OUT_FRACTION: f64 = 0.05;
pub const MIN_GAP_ORDERS: f64 = 6.0;
pub const EXPECTED_KERNELS: [(&str, usize); 4] = [("dbar", 2), ("dbar_star", 2), ("dirac", 4), ("dirac_adjoint", 4)];
const ADJOINT_TRUNCATION: usize = 2;
const ADJOINT_SAMPLES: usize = 5;
const SPAN_TOL: f64 = 1e-10;
const LINEARIZATION_T: f64 = 1e-5;
const LINEARIZATION_TOL: f64 = 1e-6;
const LINEARIZATION_SECTIONS: usize = 3;
/// Streams of the finite-difference seeds start here, one per seed.
const FD_STREAM_BASE: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TorusOptions {
    /// Fourier truncations at which kernel dimensions are checked.
    pub truncations: Vec<usize>,
    pub fd_truncation: usize,
    pub ladder: Vec<f64>,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self { truncations: (0..=3).collect(), fd_truncation: FD_TRUNCATION, ladder: DEFAULT_LADDER.to_vec() }
    }
}

pub fn run(cfg: &SuiteConfig, opts: &TorusOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for &k in &opts.truncations {
        checks.push(kernel_check(k)?);
    }
    checks.push(if cfg.exact() { adjointness_check::<Rational>(cfg)? } else { adjointness_check::<f64>(cfg)? });
    checks.push(direct_sum_check()?);
    checks.push(linearization_check(cfg)?);
    checks.push(remainder_check(cfg, opts)?);
    checks.push(flat_index_check()?);
    Ok(checks)
}

pub fn kernel_check(k: usize) -> Result<Check> {
    let model = TorusModel::<f64>::new(k)?;
    let ops = [dbar_matrix(&model)?, dbar_star_matrix(&model)?, dirac_matrix(&model)?, adjoint_matrix(&model)?];
    let mut off = 0;
    let mut gap_ok = true;
    let mut warned = false;
    let mut reports = serde_json::Map::new();
    for (op, (label, expected)) in ops.iter().zip(EXPECTED_KERNELS) {
        let rep = kernel_dim(op, DEFAULT_KERNEL_TOL);
        off += rep.complex_dim.abs_diff(expected);
        // At K = 0 only the constant mode is present and every singular
        // value is zero, so there is no gap to measure.
        if k > 0 {
            gap_ok &= rep.gap_orders.is_some_and(|g| g >= MIN_GAP_ORDERS);
        }
        warned |= rep.warning.is_some();
        reports.insert(label.to_string(), rep.to_json());
    }
    let status = Status::from_bool(off == 0 && gap_ok);
    Ok(Check::count(
        format!("torus.kernel.K{k}"),
        "on the flat torus dim_ℂ Ker ∂̄ = 2, dim_ℂ Ker ∂̄* = 2 and dim_ℂ Ker(∂̄ ⊕ ∂̄*) = 4 (and 4 for its adjoint), independent of the truncation, with a singular-value gap of at least 6 orders",
        off,
    )
    .with_status(status)
    .warn_if(warned)
    .with_details(json!({
        "truncation": k,
        "relative_threshold": DEFAULT_KERNEL_TOL,
        "min_gap_orders": MIN_GAP_ORDERS,
        "operators": Value::Object(reports),
    })))
}

fn adjointness_check<S: Scalar>(cfg: &SuiteConfig) -> Result<Check> {
    let model = TorusModel::<S>::new(ADJOINT_TRUNCATION)?;
    let mut rng = seeded_rng(cfg.seed, stream::TORUS);
    let d = dbar_forms_matrix(&model)?;
    let s = dbar_star_matrix(&model)?;
    let r1 = adjointness_residual(&model, &d, &s, ADJOINT_SAMPLES, &mut rng)?;
    let r2 = adjointness_residual(&model, &dirac_matrix(&model)?, &adjoint_matrix(&model)?, ADJOINT_SAMPLES, &mut rng)?;
    let worst = if r2 > r1 { r2 } else { r1 };
    Ok(Check::scalar(
        "torus.adjointness",
        "⟨∂̄v, w⟩ = ⟨v, ∂̄*w⟩ and ⟨Dv, u⟩ = ⟨v, D*u⟩ in L² for the Fourier discretization",
        &worst,
        cfg.tol,
    )
    .with_details(json!({ "truncation": ADJOINT_TRUNCATION, "samples": ADJOINT_SAMPLES })))
}

fn direct_sum_check() -> Result<Check> {
    let model = TorusModel::<f64>::new(ADJOINT_TRUNCATION)?;
    let tol = DEFAULT_KERNEL_TOL;
    let sum = direct_sum(&null_spaces(&dbar_matrix(&model)?, tol), &null_spaces(&dbar_star_matrix(&model)?, tol));
    let dist = span_distance(&null_spaces(&dirac_matrix(&model)?, tol), &sum)?;
    Ok(Check::within(
        "torus.cayley_kernel_direct_sum",
        "infinitesimal Cayley deformations are the direct sum of the kernels of ∂̄ and ∂̄*: the same as the infinitesimal complex deformations",
        dist,
        SPAN_TOL,
    )
    .with_details(json!({ "truncation": ADJOINT_TRUNCATION })))
}

fn random_pair(model: &TorusModel<f64>, seed: u64, stream: u64) -> (FourierSection<f64>, FourierSection<f64>) {
    let mut rng = seeded_rng(seed, stream);
    let v1 = FourierSection::random(model, Bundle::Normal, 1.0, &mut rng);
    let w = FourierSection::random(model, Bundle::Forms02, 1.0, &mut rng);
    (v1, w)
}

pub fn linearization_check(cfg: &SuiteConfig) -> Result<Check> {
    let model = TorusModel::<f64>::new(FD_TRUNCATION)?;
    let mut worst = 0.0f64;
    for s in 0..LINEARIZATION_SECTIONS as u64 {
        let (v1, w) = random_pair(&model, cfg.seed, stream::TORUS + 8 + s);
        worst = worst.max(linearization_error(&model, &v1, &w, LINEARIZATION_T)?);
    }
    Ok(Check::within(
        "torus.linearization",
        "the derivative at 0 of the Cayley operator on normal graphs over the torus is ∂̄ ⊕ ∂̄*",
        worst,
        LINEARIZATION_TOL,
    )
    .with_details(json!({ "t": LINEARIZATION_T, "sections": LINEARIZATION_SECTIONS, "truncation": FD_TRUNCATION })))
}

pub fn remainder_check(cfg: &SuiteConfig, opts: &TorusOptions) -> Result<Check> {
    let model = TorusModel::<f64>::new(opts.fd_truncation)?;
    let n = cfg.samples_or(DEFAULT_FD_SEEDS);
    let mut slopes = Vec::with_capacity(n);
    let (mut in_range, mut roundoff) = (0, Vec::new());
    for s in 0..n {
        let (v1, w) = random_pair(&model, cfg.seed, FD_STREAM_BASE + s as u64);
        match fd_linearization_check(&model, &v1, &w, &opts.ladder) {
            Ok(rep) if rep.vacuous => {
                roundoff.push(json!({ "seed": s, "reason": "every residual below the roundoff floor" }));
                slopes.push(Value::Null);
            }
            Ok(rep) => {
                in_range += usize::from(rep.pass);
                slopes.push(rep.slope.map_or(Value::Null, json_f64));
            }
            Err(CoreError::LadderTooShort { survivors }) => {
                roundoff.push(json!({ "seed": s, "reason": format!("{survivors} rungs above the roundoff floor") }));
                slopes.push(Value::Null);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let out_fraction = 1.0 - in_range as f64 / n as f64;
    Ok(Check::within(
        "torus.quadratic_remainder",
        "‖F(tv) − tLv‖ = O(t²): the finite-difference log–log slope lies in [1.9, 2.1] for at least 95% of seeds",
        out_fraction,
        FD_MAX_OUT_FRACTION,
    )
    .with_details(json!({
        "seeds": n,
        "in_range": in_range,
        "slope_range": [SLOPE_RANGE.0, SLOPE_RANGE.1],
        "ladder": opts.ladder,
        "truncation": opts.fd_truncation,
        "slopes": slopes,
        "roundoff_exceptions": roundoff,
    })))
}

fn flat_index_check() -> Result<Check> {
    let model = TorusModel::<f64>::new(FD_TRUNCATION)?;
    let kd = kernel_dim(&dirac_matrix(&model)?, DEFAULT_KERNEL_TOL).complex_dim as i64;
    let ka = kernel_dim(&adjoint_matrix(&model)?, DEFAULT_KERNEL_TOL).complex_dim as i64;
    let index = index_from_topology(&TopologicalInvariants::new(0, 0, 0))?;
    Ok(Check::count(
        "torus.index_flat",
        "dim Ker − dim Coker of ∂̄ ⊕ ∂̄* on the flat torus equals ½σ + ½χ − [N]·[N] = 0",
        (kd - ka - index).unsigned_abs() as usize,
    )
    .with_details(json!({ "kernel": kd, "cokernel": ka, "index": index })))
}
