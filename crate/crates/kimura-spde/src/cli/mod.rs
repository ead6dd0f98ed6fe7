//! Reproducible experiment runner: configuration parsing, command dispatch,
//! and CSV/ledger emission.  The binary is a thin wrapper over [`run`].

mod config;
mod runner;

pub use config::{parse_config, Command, ExperimentConfig, KernelKind, NoiseSpec};
pub use runner::{run, write_artifacts, RunArtifacts};
