//! File formats, reports, and the CLI for the monotone-matrix
//! classification pipeline. All numerics live in `monotone-core`; this
//! crate owns everything that touches the filesystem: the binary
//! dataset format, feature CSVs with schema sidecars, model
//! checkpoints, plot-ready diagnostic tables, run manifests, and the
//! `monotone-lab` binary itself.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod feature_io;
pub mod manifest;
pub mod parallel;
pub mod report;

pub use error::LabError;
