//! Configuration, orchestration and output formats behind the `nca` binary.

pub mod config;
pub mod converge;
pub mod error;
pub mod oracle;
pub mod output;
pub mod presets;
pub mod run;
pub mod sweep;

pub use config::{parse_config_str, RunConfig};
pub use error::{CliError, Result};
