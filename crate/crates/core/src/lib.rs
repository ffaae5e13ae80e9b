//! Joint community detection and binary matrix completion with a social graph
//! over users and a similarity graph over movies.
//!
//! The crate covers the generative model ([`model`]), exact likelihoods
//! ([`likelihood`]), estimators ([`estimators`]), closed-form sample
//! probability thresholds ([`thresholds`]), Chernoff and union bounds
//! ([`bounds`]) and the Monte Carlo sweep harness ([`experiments`]).

pub mod adjacency;
pub mod bounds;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod io;
pub mod likelihood;
pub mod model;
#[cfg(test)]
mod properties;
pub mod seed;
pub mod stats;
pub mod thresholds;

pub use adjacency::Adjacency;
pub use error::{Error, Result};
pub use model::{AtypicalCounts, GroundTruth, ModelKind, ModelParams, Observation, SbmParams};
pub use seed::Seed;
