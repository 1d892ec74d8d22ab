//! Task construction, cross-validation protocols, metrics and reports.

pub mod metrics;
pub mod protocol;
pub mod report;
pub mod split;
pub mod tasks;

pub use metrics::{auc, auc_pairwise, confusion, mean_sd, Confusion};
pub use protocol::{Tuning, 
    all_task_auc, grid_search, leave_one_subject_out_eval, log_grid, random_partition_eval, GridCell, GridResult,
    DEFAULT_GRID,
};
pub use report::{auc_table_markdown, importance_report, AucSummary, EvalReport, ImportanceReport, SubjectCounts, TaskSummary};
pub use split::{derive_seed, stratified_kfold, stratified_split, Scheme, Split, SplitPlan};
pub use tasks::{make_tasks, TaskDefinition};
