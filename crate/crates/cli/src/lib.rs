//! Experiment configuration, validation and orchestration for the `frontlab` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod manifest;

pub use config::{validate, Discretization, Experiment, ExperimentConfig, MediumSpec, Normalized};
pub use manifest::{run_experiment, sha256_hex, Assertion, FileRecord, RunManifest};

/// Caps the worker pool at `FRONTLAB_THREADS` when set.
pub fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("FRONTLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow::anyhow!("FRONTLAB_THREADS = {v:?} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()?;
    }
    Ok(())
}
