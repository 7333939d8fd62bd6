//! Experiment orchestration for tinypull protocols: configs, trial batches,
//! sweeps, calibration and the JSON/CSV outputs.
//!
//! A batch is a pure function of its [`ExperimentConfig`]. Trial `i` runs
//! with seed `seed + i`, trials run on a rayon pool, and results are merged
//! by trial index.

mod batch;
pub mod config;
mod error;
pub mod legal;
pub mod registry;
pub mod report;

pub use batch::{
    calibrate, nearest_rank, run_batch, run_trial_with, sweep, BatchOutput, Calibration, TrialOutcome, TrialSetup,
};
pub use config::{ExperimentConfig, LegalKind, Validated};
pub use error::{ConfigError, HarnessError, Violation};
pub use registry::{dispatch, ProtocolKind, ProtocolVisitor};
pub use report::{write_trace_csv, TrialBatchReport, TrialDigest};
