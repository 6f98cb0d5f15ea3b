//! Library surface of the batch front-end, exposed so integration tests can
//! drive runs in-process.

pub mod config;
pub mod manifest;
pub mod svg;
pub mod tasks;

pub use config::{ExperimentConfig, GridConfig, MotionConfig, Task};
pub use manifest::{Flag, RunManifest, TaskRecord, MANIFEST_FILE};
pub use tasks::{execute, run_to_dir, verify_bundle, RunOutput, VerifyReport};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "GERMKIT_OUT";
