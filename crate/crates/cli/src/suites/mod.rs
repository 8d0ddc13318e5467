//! Verification suites. Each returns its checks, named `<suite>.<property>`;
//! the report sorts them by name, so suites may run in any order.

pub mod angles;
pub mod graphs;
pub mod index;
pub mod planes;
pub mod structure;
pub mod torus;

use cayley_core::Scalar;
use rand::Rng;

use crate::config::{Suite, SuiteConfig};
use crate::error::Result;
use crate::report::{Check, Report};

/// Random-number stream of each suite, so that a suite gives the same
/// results alone and inside `all`.
pub(crate) mod stream {
    pub const STRUCTURE: u64 = 1;
    pub const PLANES: u64 = 2;
    pub const GRAPHS: u64 = 3;
    pub const ANGLES: u64 = 4;
    pub const DETECTOR: u64 = 5;
    pub const TORUS: u64 = 6;
    pub const INDEX: u64 = 7;
}

pub fn suite_checks(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<Check>> {
    match suite {
        Suite::Structure => structure::run(cfg),
        Suite::Planes => planes::run(cfg),
        Suite::Graphs => graphs::run(cfg),
        Suite::Angles => angles::run(cfg),
        Suite::Torus => torus::run(cfg, &torus::TorusOptions::default()),
        Suite::Index => index::run(cfg),
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::COMPONENTS {
                all.extend(suite_checks(s, cfg)?);
            }
            Ok(all)
        }
    }
}

/// Run the configured suite. Any error aborts without a partial report.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    cfg.validate()?;
    let mut report = Report::new(cfg.clone());
    report.extend(suite_checks(cfg.suite, cfg)?);
    Ok(report.finish())
}

pub(crate) fn larger<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn max_of<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    values.into_iter().map(|v| v.abs()).fold(S::zero(), larger)
}

/// A small rational `n/d` with `|n| ≤ num_bound`, exact on both backends.
pub(crate) fn small_ratio<S: Scalar, R: Rng + ?Sized>(rng: &mut R, num_bound: i64, den: i64) -> S {
    S::from_ratio(rng.random_range(-num_bound..=num_bound), den)
}
