//! Configuration, execution and output plumbing behind the `wasn-dmwf` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, serialize_config, ConfigError};
pub use run::{run, Overrides, RunError, RunManifest, RunSummary};
