//! Config-driven runner behind the `decaylab` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, ConfigErrorKind, RunConfig, TaskKind};
pub use run::{run, Profile, RunError, RunSummary};
