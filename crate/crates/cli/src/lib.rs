//! Laboratory driver: flat key=value config handling, experiment dispatch,
//! and artifact emission for the `fracheat` binary.
//!
//! Exit-code contract (enforced in `main`): 0 on success, 2 when a checked
//! estimate's hypothesis is not met for the supplied parameters, 1 on any
//! other error.

pub mod commands;
pub mod config;

pub use commands::{
    moments, renewal, run_experiment, simulate, verify_correlation, verify_kernel, Outcome,
    RenewalArgs, RunManifest, VerifyCorrelationArgs, VerifyKernelArgs,
};
pub use config::{validate_config, ExperimentConfig, ExperimentKind};
