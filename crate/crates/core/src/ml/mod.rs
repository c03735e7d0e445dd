//! Classifiers, feature selection and reduction, cross-validation and the
//! two-phase suitability pipeline.

pub mod cv;
pub mod metrics;
pub mod mlp;
pub mod models;
pub mod pipeline;
pub mod reduce;
pub mod report;
pub mod select;

use thiserror::Error;

use crate::features::FeatureError;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("leakage: {0}")]
    Leakage(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}
