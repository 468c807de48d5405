//! Scoring primitives for agent-generated scientific code.
//!
//! Everything in this crate works on in-memory data: curves, parameter
//! maps, source text and per-trial metric bundles. Reading files, walking
//! trial directories and writing reports live in the `sciscore` crate.
//!
//! The pipeline for one trial is
//!
//! 1. [`curve::parse_table`] turns the candidate output text into a [`Curve`];
//! 2. [`esr::check_esr`] decides the execution-success gate;
//! 3. [`extract::extract_parameters`] pulls solver parameters out of the
//!    generated source without running it;
//! 4. [`metrics`] computes PAS, the NAS sub-scores and the final score;
//! 5. [`classify::classify`] assigns one failure mode.
//!
//! Trials are then pooled by [`aggregate::aggregate`]. Literature-based
//! scoring of research-style runs lives in [`recovery`].

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod aggregate;
pub mod classify;
pub mod curve;
pub mod esr;
pub mod extract;
pub mod metrics;
pub mod pysyntax;
pub mod recovery;
pub mod registry;

pub use aggregate::{aggregate, SuiteReport, TrialRecord};
pub use classify::{classify, FailureMode, Mode, Thresholds};
pub use curve::{Curve, CurveError, ParsedOutput};
pub use esr::{check_esr, EsrFailure, EsrThresholds, EsrVerdict};
pub use extract::{extract_parameters, ExtractionConfig, ParameterExtraction, SourceFile};
pub use metrics::{final_score, nas_scores, param_accuracy, MetricBundle, NasScores};
pub use recovery::{recovery_score, DrTrialReport, Rating};
pub use registry::{LiteratureReference, ParameterSpec, Registry, TaskSpec};
