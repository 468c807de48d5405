//! File formats, trial discovery, suite running and reports on top of
//! `sciscore-core`.

pub mod dr;
pub mod error;
pub mod fixtures;
pub mod ingest;
pub mod literature;
pub mod manifest;
pub mod pipeline;
pub mod report;

pub use error::{Error, Result};
pub use manifest::Manifest;
pub use pipeline::{score_suite, score_trial, SuiteFilter, TrialScore};
pub use sciscore_core as core;
