//! Multiplicative multi-task feature learning and single-task baselines.

pub mod loss;
pub mod mmtfl;
pub mod model;
pub mod prox;
pub mod stl;
pub mod task;

pub use loss::LossKind;
pub use mmtfl::{fit_mmtfl, objective, rebalance, solve_beta_step, solve_c_step, MmtflConfig, MmtflModel, RegularizerSpec};
pub use model::{sign_label, TrainedModel};
pub use prox::InnerConfig;
pub use stl::{fit_stl, fit_stl_all, StlConfig, StlModel, StlRegularizer};
pub use task::{Standardizer, TaskData};
