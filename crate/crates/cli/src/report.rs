use std::collections::BTreeMap;
use std::fmt;

use cayley_core::Scalar;
use serde::Serialize;
use serde_json::Value;

use crate::config::SuiteConfig;

pub const TOOL: &str = "cayley";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Warn => "WARN",
            Status::Fail => "FAIL",
        })
    }
}

/// One certified property. `residual` is a JSON number on floats and a
/// rational string on the exact backend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub reference: String,
    pub status: Status,
    pub residual: Value,
    pub tolerance: f64,
    pub details: Value,
}

impl Check {
    /// Pass iff `residual <= tolerance` (NaN fails).
    pub fn within(name: impl Into<String>, reference: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            reference: reference.into(),
            status: Status::from_bool(residual <= tolerance),
            residual: json_f64(residual),
            tolerance,
            details: Value::Null,
        }
    }

    /// Pass iff the scalar is negligible: exactly zero on rationals, at most
    /// `tolerance` in absolute value on floats.
    pub fn scalar<S: Scalar>(
        name: impl Into<String>,
        reference: impl Into<String>,
        residual: &S,
        tolerance: f64,
    ) -> Self {
        let tolerance = if S::BACKEND == cayley_core::Backend::Exact { 0.0 } else { tolerance };
        Self {
            name: name.into(),
            reference: reference.into(),
            status: Status::from_bool(residual.abs().is_negligible(tolerance)),
            residual: residual.to_json(),
            tolerance,
            details: Value::Null,
        }
    }

    /// A yes/no property with no natural residual; the residual is the
    /// number of violations.
    pub fn count(name: impl Into<String>, reference: impl Into<String>, violations: usize) -> Self {
        Self {
            name: name.into(),
            reference: reference.into(),
            status: Status::from_bool(violations == 0),
            residual: Value::from(violations),
            tolerance: 0.0,
            details: Value::Null,
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = details;
        self
    }

    pub fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    /// Demote a pass to a warning, e.g. when a kernel gap is marginal.
    pub fn warn_if(mut self, cond: bool) -> Self {
        if cond && self.status == Status::Pass {
            self.status = Status::Warn;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

pub(crate) fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub pass: usize,
    pub warn: usize,
    pub fail: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: SuiteConfig,
    /// Command inputs (file names, model flags), echoed for reproducibility.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    /// Command results that are values rather than checks.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, Value>,
    pub summary: Summary,
}

impl Report {
    pub fn new(config: SuiteConfig) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config,
            inputs: BTreeMap::new(),
            checks: Vec::new(),
            results: BTreeMap::new(),
            summary: Summary::default(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    pub fn input(&mut self, key: &str, value: impl Into<Value>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    pub fn result(&mut self, key: &str, value: impl Into<Value>) {
        self.results.insert(key.to_string(), value.into());
    }

    /// Sort checks by name and recount. Check names are unique, so the order
    /// is independent of how the checks were produced.
    pub fn finish(mut self) -> Self {
        self.checks.sort_by(|a, b| a.name.cmp(&b.name));
        debug_assert!(self.checks.windows(2).all(|w| w[0].name != w[1].name), "duplicate check names");
        let mut s = Summary { total: self.checks.len(), ..Summary::default() };
        for c in &self.checks {
            match c.status {
                Status::Pass => s.pass += 1,
                Status::Warn => s.warn += 1,
                Status::Fail => s.fail += 1,
            }
        }
        self.summary = s;
        self
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed() {
            crate::error::exit::CHECKS_FAILED
        } else {
            crate::error::exit::OK
        }
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }

    /// One line per check plus a tally, for terminals.
    pub fn human(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let residual = match &c.residual {
                Value::String(s) => s.clone(),
                v => v.to_string(),
            };
            let tol = if c.tolerance == 0.0 { "0".to_string() } else { format!("{:e}", c.tolerance) };
            out.push_str(&format!("{:<4} {}  residual={residual} tol={tol}\n", c.status, c.name));
        }
        let s = &self.summary;
        out.push_str(&format!("{} checks: {} pass, {} warn, {} fail\n", s.total, s.pass, s.warn, s.fail));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Suite;

    #[test]
    fn summary_matches_tallies_and_order_is_by_name() {
        let mut r = Report::new(SuiteConfig::new(Suite::Index));
        r.push(Check::count("b", "", 1));
        r.push(Check::within("a", "", 0.5, 1.0));
        r.push(Check::within("c", "", 0.5, 1.0).warn_if(true));
        let r = r.finish();
        assert_eq!(r.checks.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
        assert_eq!(r.summary, Summary { total: 3, pass: 1, warn: 1, fail: 1 });
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn nan_residual_fails() {
        let c = Check::within("x", "", f64::NAN, 1.0);
        assert_eq!(c.status, Status::Fail);
        assert_eq!(c.residual, Value::Null);
    }

    #[test]
    fn exact_residuals_serialize_as_strings() {
        let r = cayley_core::Rational::from_ratio(1, 3);
        let c = Check::scalar("x", "", &r, 1e-9);
        assert_eq!(c.residual, Value::String("1/3".into()));
        assert_eq!(c.status, Status::Fail);
    }
}
