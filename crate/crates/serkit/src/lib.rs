//! Filesystem side of serkit: WAV decoding, dataset manifests, feature and
//! checkpoint files, experiment configs, reports, the synthetic corpus and
//! the command-line front end.

pub mod atomic;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod features_io;
pub mod manifest;
pub mod pipeline;
pub mod provenance;
pub mod report;
pub mod synth;
pub mod wav;

pub use error::{Error, Result};
