//! Batch experiment driver on top of the `fhgmc` library.

pub mod cli;
pub mod config;
pub mod run;

pub use cli::Args;
pub use config::{Command, ConfigError, ExperimentConfig};
pub use run::{run, RunOutput, TOOL_VERSION};

/// Exit status for a configuration rejected before dispatch.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a failure inside a numerical module.
pub const EXIT_NUMERICAL: i32 = 3;

/// Maps a run failure onto the process exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ConfigError>().is_some() {
        EXIT_CONFIG
    } else if err.downcast_ref::<fhgmc::error::Error>().is_some() {
        EXIT_NUMERICAL
    } else {
        1
    }
}
