//! Gait features: gait-phase, mobility, balance and strength measures per trial.

pub mod dataset;
pub mod extract;
pub mod gait;
pub mod vector;

pub use dataset::{build_dataset, Dataset};
pub use extract::{extract_feature_vector, BatchOutcome, FootArtifacts, Pipeline, PipelineConfig, DEFAULT_MIN_CYCLES, Rejection};
pub use gait::{balance_features, cadence, phase_symmetry, stance_ratio, strength_features, support_ratios};
pub use vector::{feature_names, FeatureVector, FootFeatures, NUM_FEATURES};
