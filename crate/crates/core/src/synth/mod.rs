//! Synthetic data with known ground truth.

pub mod cohort;
pub mod gcf;
pub mod multitask;

pub use cohort::{gen_cohort, Cohort, CohortDefaults, CohortSpec, GroupModel, ParamSpread};
pub use gcf::{gen_gcf_trial, FootEvents, FootTruth, PathologyKind, PathologyProfile, TrialTruth};
pub use multitask::{gen_multitask, support_f1, MultitaskTruth, SharingSpec};
