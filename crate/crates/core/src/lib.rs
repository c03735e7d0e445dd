//! Game-based behavioral assessment: five instrumented puzzle/action games,
//! their telemetry pipeline, exhaustive-search level solvers, synthetic
//! players, feature extraction and a two-phase suitability classifier.

pub mod agents;
pub mod features;
pub mod game;
pub mod levels;
pub mod ml;
pub mod rng;
pub mod run;
pub mod solvers;
pub mod telemetry;
