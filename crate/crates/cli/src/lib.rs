//! Verification suites and file-driven classification behind the `cayley`
//! binary. Every entry point returns a [`Report`] whose JSON form depends
//! only on the configuration and the tool version.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod report;
pub mod suites;

pub use config::{Suite, SuiteConfig};
pub use error::{exit, CliError, Result};
pub use report::{Check, Report, Status, Summary};
pub use suites::run_suite;
