use std::fmt;
use std::path::PathBuf;

use cayley_core::Backend;
use clap::ValueEnum;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Structure,
    Planes,
    Graphs,
    Angles,
    Torus,
    Index,
    All,
}

impl Suite {
    /// The suites `all` runs, in report order.
    pub const COMPONENTS: [Suite; 6] =
        [Suite::Structure, Suite::Planes, Suite::Graphs, Suite::Angles, Suite::Torus, Suite::Index];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Planes => "planes",
            Suite::Graphs => "graphs",
            Suite::Angles => "angles",
            Suite::Torus => "torus",
            Suite::Index => "index",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        <Suite as ValueEnum>::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendArg {
    Exact,
    Float,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Exact => Backend::Exact,
            BackendArg::Float => Backend::Float,
        }
    }
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;

/// Run configuration. `output` is where the report goes and is not echoed
/// into it, so the same run written to two places gives identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub backend: Backend,
    pub tol: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip)]
    pub output: Option<PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: Suite) -> Self {
        Self { suite, backend: Backend::Exact, tol: DEFAULT_TOL, seed: DEFAULT_SEED, samples: None, output: None }
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = Some(samples);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.samples == Some(0) {
            return Err(CliError::Usage("--samples must be positive".into()));
        }
        Ok(())
    }

    /// `--samples` if given, else the suite's own default.
    pub fn samples_or(&self, default: usize) -> usize {
        self.samples.unwrap_or(default)
    }

    pub fn exact(&self) -> bool {
        self.backend == Backend::Exact
    }

    /// Tolerance for a residual computed on the configured backend: zero on
    /// the exact backend, `tol` on floats.
    pub fn identity_tol(&self) -> f64 {
        if self.exact() {
            0.0
        } else {
            self.tol
        }
    }
}
