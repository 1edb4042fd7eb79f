//! Configuration, pipeline orchestration and report emission for the
//! `hodge-rsm` command-line tool.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{cmd_cover, cmd_decompose, cmd_generate, cmd_report, cmd_solve, cmd_verify};
pub use config::{MeshSource, Overrides, RunConfig, WeightSpec};
pub use report::{without_timestamp, Check, RunReport};

use hodge_rsm::HodgeError;

/// Exit code for an error: 2 for usage and input problems, 1 for numerical
/// failures inside the pipeline.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<HodgeError>() {
        Some(
            HodgeError::Stagnation { .. }
            | HodgeError::EigenNoConvergence { .. }
            | HodgeError::NeumannDivergence { .. }
            | HodgeError::NotPositiveDefinite { .. }
            | HodgeError::ProjectFirst { .. }
            | HodgeError::Ball { .. },
        ) => 1,
        _ => 2,
    }
}

/// Caps the worker pool from `HODGE_RSM_THREADS` when set.
pub fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("HODGE_RSM_THREADS") {
        let n: usize = v.parse().map_err(|_| anyhow::anyhow!("HODGE_RSM_THREADS must be a positive integer, got '{v}'"))?;
        if n == 0 {
            anyhow::bail!("HODGE_RSM_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
    }
    Ok(())
}
