//! Locating the boundary between the valid and invalid inputs of a string
//! parser.
//!
//! A run has two steps. [`generators::nmcs_step1`] grows a small test set of
//! valid inputs that are as far apart as possible under a distance metric.
//! [`switchsearch::run_step2`] then mutates each of them back and forth
//! across the validity boundary, collecting a mutated valid set (MVS) and a
//! mutated invalid set (MIS). [`analysis`] checks that the two sets sit
//! closer to each other than the MVS sits to any other set.

pub mod analysis;
pub mod artifacts;
pub mod calendar;
pub mod candidate;
pub mod config;
pub mod distance;
pub mod generators;
pub mod mutation;
pub mod oracles;
pub mod pipeline;
pub mod rng;
pub mod switchsearch;

pub use analysis::{BoundaryVerdict, Comparison, ComparisonReport};
pub use candidate::{Candidate, Origin, Role, TestSet};
pub use config::{ConfigError, RunConfig};
pub use distance::{DistanceMetric, METRIC_NAMES};
pub use generators::{Generator, GENERATOR_NAMES};
pub use mutation::{MutationOperator, MutatorSet, PRESET_NAMES};
pub use oracles::{OracleVerdict, ValidityOracle, ORACLE_NAMES};
pub use pipeline::{run_pipeline, PipelineError, RunManifest};
pub use switchsearch::{BoundaryPair, SwitchBudget, WalkMode};
