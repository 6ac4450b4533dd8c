//! Scenario files, reproducible runs and output formats for the inertial
//! spin flocking model. The numerics live in `ism_core`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod init;
pub mod output;
pub mod scenario;
pub mod verify;

pub use config::{parse_config, ConfigError, ScenarioConfig};
pub use error::CliError;
pub use scenario::{run_scenario, RunReport};
pub use verify::{verify_summary, VerifyReport};

/// Caps the global worker pool at `ISM_THREADS` when that variable is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ISM_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(vec![ConfigError::global(format!("ISM_THREADS = `{raw}` is not a positive integer"))]))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Numerical(format!("cannot size the worker pool: {e}")))
}
