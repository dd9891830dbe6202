//! File formats, batch experiments and plot data for `rucb-core`.
//!
//! - [`matrix_io`]: preference matrices as CSV or JSON
//! - [`trace_io`]: run traces, checkpoint snapshots, JSON sidecars
//! - [`config`]: the JSON experiment config
//! - [`experiment`]: seeded batches on a worker pool, aggregated in run order
//! - [`plot`]: regret and accuracy CSVs with optional bound overlays

pub mod config;
pub mod error;
pub mod experiment;
pub mod matrix_io;
pub mod plot;
pub mod trace_io;

pub use config::{CheckpointSchedule, ExperimentConfig, MatrixSource};
pub use error::HarnessError;
pub use experiment::{run_experiment, AggregateResult, CheckpointAggregate};
pub use plot::{emit_plot_data, BoundOverlay};
