//! Command-line front end for `hamgap-core`: configuration files, the
//! scenario registry, CSV output and the invariant suite.

pub mod check;
pub mod config;
pub mod output;
pub mod polar;
pub mod runner;
pub mod scenarios;

pub use config::{parse_config, parse_with_overrides, ConfigError, RunConfig};
pub use runner::{run, RunOutcome};
pub use scenarios::list_scenarios;

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const CHECK_FAILED: i32 = 2;
}
