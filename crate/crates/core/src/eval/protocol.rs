use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{add_confusion, auc, confusion, mean_sd, Confusion};
use super::report::{AucSummary, EvalReport, SubjectCounts, TaskSummary};
use super::split::{derive_seed, stratified_kfold, stratified_split, Scheme};
use super::tasks::{make_tasks, TaskDefinition};
use crate::error::{Error, Result};
use crate::features::Dataset;
use crate::methods::{FitOptions, Hyperparams, Method};
use crate::solver::{TaskData, TrainedModel};

/// Separates the fold seeds of nested grid searches from the split seeds.
const GRID_SALT: u64 = 0x6772_6964;

/// Seven log-spaced points from 1e-3 to 1e3.

pub const DEFAULT_GRID: [f64; 7] = [1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3];

/// `n` log-spaced points between `10^lo` and `10^hi`, rounded to 12 significant digits.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => (0..n)
            .map(|i| {
                let e = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                format!("{:.11e}", 10f64.powf(e)).parse().unwrap()
            })
            .collect(),
    }
}

/// Scores of one task's test rows under a fitted model.
#[derive(Debug, Clone)]
struct TaskScores {
    scores: Vec<f64>,
    labels: Vec<f64>,
    source_rows: Vec<usize>,
}

fn fit_and_score(
    method: &dyn Method,
    tasks: &[TaskData],
    splits: &[(Vec<usize>, Vec<usize>)],
    feature_names: &[String],
    hp: &Hyperparams,
    opts: &FitOptions,
) -> Result<(TrainedModel, Vec<TaskScores>)> {
    let train: Vec<TaskData> = tasks.iter().zip(splits).map(|(t, (tr, _))| t.subset(tr)).collect();
    let model = method.fit(&train, feature_names, hp, opts)?;
    let scored = tasks
        .iter()
        .zip(splits)
        .enumerate()
        .map(|(i, (t, (_, te)))| {
            let test = t.subset(te);
            let scores = model.scores(i, &test.x)?;
            Ok(TaskScores {
                scores: scores.to_vec(),
                labels: test.y.to_vec(),
                source_rows: test.source_rows,
            })
        })
        .collect::<Result<_>>()?;
    Ok((model, scored))
}

/// How each training round obtains its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Tuning {
    Fixed { hyperparams: Hyperparams },
    /// One grid search over all rows before evaluation; every round reuses its choice.
    GridOnce { axis: Vec<f64>, folds: usize },
    /// A grid search on each round's training rows.
    GridPerRound { axis: Vec<f64>, folds: usize },
}

impl Tuning {
    pub fn fixed(hp: Hyperparams) -> Self {
        Tuning::Fixed { hyperparams: hp }
    }

    pub fn default_grid() -> Self {
        Tuning::GridOnce {
            axis: DEFAULT_GRID.to_vec(),
            folds: 3,
        }
    }

    /// Replace a one-off grid search by its result on `tasks`.
    fn resolve(
        &self,
        tasks: &[TaskData],
        feature_names: &[String],
        method: &dyn Method,
        opts: &FitOptions,
        seed: u64,
    ) -> Result<Tuning> {
        match self {
            Tuning::GridOnce { axis, folds } => Ok(Tuning::fixed(
                grid_search(tasks, feature_names, method, axis, *folds, seed, opts)?.best,
            )),
            other => Ok(other.clone()),
        }
    }
}

/// Pick hyperparameters for one round, then fit on its training rows and score its test rows.
fn tuned_fit_and_score(
    method: &dyn Method,
    tasks: &[TaskData],
    splits: &[(Vec<usize>, Vec<usize>)],
    feature_names: &[String],
    tuning: &Tuning,
    opts: &FitOptions,
    seed: u64,
) -> Result<(Hyperparams, Vec<TaskScores>)> {
    let hp = match tuning {
        Tuning::Fixed { hyperparams } => *hyperparams,
        Tuning::GridOnce { .. } => unreachable!("resolved before the rounds"),
        Tuning::GridPerRound { axis, folds } => {
            let train: Vec<TaskData> = tasks.iter().zip(splits).map(|(t, (tr, _))| t.subset(tr)).collect();
            grid_search(&train, feature_names, method, axis, *folds, seed, opts)?.best
        }
    };
    Ok((hp, fit_and_score(method, tasks, splits, feature_names, &hp, opts)?.1))
}

fn predictions(scores: &[f64]) -> Vec<f64> {
    scores.iter().map(|s| crate::solver::sign_label(*s)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub hyperparams: Hyperparams,
    /// Mean validation AUC over folds and tasks; absent when the cell failed.
    pub score: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub method: String,
    pub folds: usize,
    pub seed: u64,
    pub best: Hyperparams,
    pub best_score: f64,
    pub cells: Vec<GridCell>,
}

/// Pick hyperparameters by stratified `folds`-fold cross-validation on the given tasks.
pub fn grid_search(
    tasks: &[TaskData],
    feature_names: &[String],
    method: &dyn Method,
    axis: &[f64],
    folds: usize,
    seed: u64,
    opts: &FitOptions,
) -> Result<GridResult> {
    let candidates = method.grid(axis);
    if candidates.is_empty() {
        return Err(Error::domain("grid is empty"));
    }
    let per_task: Vec<Vec<_>> = tasks
        .iter()
        .enumerate()
        .map(|(t, task)| stratified_kfold(task.y.as_slice().unwrap(), folds, derive_seed(seed, t as u64)))
        .collect::<Result<_>>()?;
    let fold_splits: Vec<Vec<(Vec<usize>, Vec<usize>)>> = (0..folds)
        .map(|f| per_task.iter().map(|s| (s[f].train.clone(), s[f].test.clone())).collect())
        .collect();

    let cells: Vec<GridCell> = candidates
        .par_iter()
        .map(|hp| {
            let score = (|| -> Result<f64> {
                let mut fold_scores = Vec::with_capacity(folds);
                for splits in &fold_splits {
                    let (_, scored) = fit_and_score(method, tasks, splits, feature_names, hp, opts)?;
                    let aucs = scored
                        .iter()
                        .map(|s| auc(&s.scores, &s.labels))
                        .collect::<Result<Vec<_>>>()?;
                    fold_scores.push(aucs.iter().sum::<f64>() / aucs.len() as f64);
                }
                Ok(fold_scores.iter().sum::<f64>() / folds as f64)
            })();
            match score {
                Ok(s) => GridCell {
                    hyperparams: *hp,
                    score: Some(s),
                    error: None,
                },
                Err(e) => GridCell {
                    hyperparams: *hp,
                    score: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();

    let best = cells
        .iter()
        .filter_map(|c| c.score.map(|s| (s, c.hyperparams)))
        .max_by(|(sa, ha), (sb, hb)| {
            sa.total_cmp(sb)
                .then(ha.tie_key().0.total_cmp(&hb.tie_key().0))
                .then(ha.tie_key().1.total_cmp(&hb.tie_key().1))
        });
    match best {
        Some((best_score, best)) => Ok(GridResult {
            method: method.name().to_string(),
            folds,
            seed,
            best,
            best_score,
            cells,
        }),
        None => {
            let msgs: BTreeSet<&str> = cells.iter().filter_map(|c| c.error.as_deref()).collect();
            Err(Error::domain(format!(
                "every grid cell failed: {}",
                msgs.into_iter().collect::<Vec<_>>().join("; ")
            )))
        }
    }
}

fn task_summaries(defs: &[TaskDefinition], aucs: &[Vec<f64>], conf: &[Confusion]) -> Vec<TaskSummary> {
    defs.iter()
        .zip(aucs)
        .zip(conf)
        .map(|((def, a), c)| TaskSummary {
            name: def.name.clone(),
            positive: def.positive,
            negative: def.negative,
            auc: AucSummary::from_values(a.clone()),
            confusion: *c,
        })
        .collect()
}

/// Repeated stratified random splits, training on a `ratio` share of every task.
#[allow(clippy::too_many_arguments)]
pub fn random_partition_eval(
    dataset: &Dataset,
    defs: &[TaskDefinition],
    method: &dyn Method,
    tuning: &Tuning,
    opts: &FitOptions,
    ratio: f64,
    repeats: usize,
    seed: u64,
) -> Result<EvalReport> {
    if repeats == 0 {
        return Err(Error::domain("at least one repeat is required"));
    }
    let tasks = make_tasks(dataset, defs)?;
    let tuning = &tuning.resolve(&tasks, &dataset.feature_names, method, opts, seed)?;
    let n_tasks = tasks.len() as u64;
    let rounds: Vec<(Hyperparams, Vec<TaskScores>)> = (0..repeats as u64)
        .into_par_iter()
        .map(|r| {
            let splits = tasks
                .iter()
                .enumerate()
                .map(|(t, task)| {
                    let s = stratified_split(task.y.as_slice().unwrap(), ratio, derive_seed(seed, r * n_tasks + t as u64))?;
                    Ok((s.train, s.test))
                })
                .collect::<Result<Vec<_>>>()?;
            let opts = FitOptions {
                seed: derive_seed(opts.seed, r),
                ..*opts
            };
            tuned_fit_and_score(method, &tasks, &splits, &dataset.feature_names, tuning, &opts, derive_seed(seed ^ GRID_SALT, r))
        })
        .collect::<Result<_>>()?;

    let mut aucs = vec![Vec::with_capacity(repeats); tasks.len()];
    let mut conf = vec![[[0u64; 2]; 2]; tasks.len()];
    let mut overall = Vec::with_capacity(repeats);
    for (_, round) in &rounds {
        let mut sum = 0.0;
        for (t, s) in round.iter().enumerate() {
            let a = auc(&s.scores, &s.labels)?;
            sum += a;
            aucs[t].push(a);
            add_confusion(&mut conf[t], &confusion(&predictions(&s.scores), &s.labels)?);
        }
        overall.push(sum / round.len() as f64);
    }
    Ok(EvalReport {
        method: method.name().to_string(),
        scheme: Scheme::RandomPartition,
        ratio: Some(ratio),
        repeats,
        seed,
        hyperparams: rounds.iter().map(|(hp, _)| *hp).collect(),
        tasks: task_summaries(defs, &aucs, &conf),
        all_tasks: AucSummary::from_values(overall),
        per_subject: Vec::new(),
        notices: Vec::new(),
        importance: None,
    })
}

/// One round per subject: that subject's rows are the test set of every task
/// involving their group. Scores are pooled per task before computing AUC.
pub fn leave_one_subject_out_eval(
    dataset: &Dataset,
    defs: &[TaskDefinition],
    method: &dyn Method,
    tuning: &Tuning,
    opts: &FitOptions,
) -> Result<EvalReport> {
    let tasks = make_tasks(dataset, defs)?;
    let tuning = &tuning.resolve(&tasks, &dataset.feature_names, method, opts, opts.seed)?;
    let subjects = dataset.subjects();
    let mut notices = Vec::new();
    for def in defs {
        for g in [def.positive, def.negative] {
            let n = subjects.iter().filter(|(_, sg)| *sg == g).count();
            if n < 2 {
                return Err(Error::domain(format!(
                    "leave-one-subject-out needs at least 2 subjects of group {g}, found {n}"
                )));
            }
        }
    }
    let mut rounds = Vec::new();
    for (id, g) in &subjects {
        if defs.iter().any(|d| d.involves(*g)) {
            rounds.push((id.clone(), *g));
        } else {
            let msg = format!("subject `{id}` (group {g}) is in no task; skipped");
            log::warn!("{msg}");
            notices.push(msg);
        }
    }

    let results: Vec<(Hyperparams, Vec<TaskScores>)> = rounds
        .par_iter()
        .enumerate()
        .map(|(r, (id, _))| {
            let splits: Vec<(Vec<usize>, Vec<usize>)> = tasks
                .iter()
                .map(|t| (0..t.n_samples()).partition(|&i| dataset.subject_ids[t.source_rows[i]] != *id))
                .collect();
            tuned_fit_and_score(method, &tasks, &splits, &dataset.feature_names, tuning, opts, derive_seed(opts.seed ^ GRID_SALT, r as u64))
        })
        .collect::<Result<_>>()?;

    let mut pooled_scores = vec![Vec::new(); tasks.len()];
    let mut pooled_labels = vec![Vec::new(); tasks.len()];
    let mut per_subject = Vec::new();
    for ((id, g), (_, round)) in rounds.iter().zip(&results) {
        for (t, s) in round.iter().enumerate() {
            if s.scores.is_empty() {
                continue;
            }
            debug_assert!(s.source_rows.iter().all(|&r| dataset.subject_ids[r] == *id));
            let pred = predictions(&s.scores);
            let pos = pred.iter().filter(|p| **p > 0.0).count() as u64;
            per_subject.push(SubjectCounts {
                subject: id.clone(),
                group: *g,
                task: defs[t].name.clone(),
                predicted_positive: pos,
                predicted_negative: pred.len() as u64 - pos,
            });
            pooled_scores[t].extend_from_slice(&s.scores);
            pooled_labels[t].extend_from_slice(&s.labels);
        }
    }
    let mut aucs = Vec::with_capacity(tasks.len());
    let mut conf = Vec::with_capacity(tasks.len());
    for (s, l) in pooled_scores.iter().zip(&pooled_labels) {
        aucs.push(vec![auc(s, l)?]);
        conf.push(confusion(&predictions(s), l)?);
    }
    let overall = aucs.iter().map(|a| a[0]).sum::<f64>() / aucs.len() as f64;
    Ok(EvalReport {
        method: method.name().to_string(),
        scheme: Scheme::LeaveOneSubjectOut,
        ratio: None,
        repeats: rounds.len(),
        seed: opts.seed,
        hyperparams: results.iter().map(|(hp, _)| *hp).collect(),
        tasks: task_summaries(defs, &aucs, &conf),
        all_tasks: AucSummary::from_values(vec![overall]),
        per_subject,
        notices,
        importance: None,
    })
}

/// Mean of the per-task AUC means.
pub fn all_task_auc(report: &EvalReport) -> f64 {
    mean_sd(&report.tasks.iter().map(|t| t.auc.mean).collect::<Vec<_>>()).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Group;
    use crate::methods::MethodRegistry;
    use ndarray::Array2;

    /// Well separated groups along the first feature.
    fn easy_dataset() -> Dataset {
        let mut rows = Vec::new();
        let mut ids = Vec::new();
        let mut groups = Vec::new();
        for (g, centre, n_subj) in [(Group::PD, 4.0, 3), (Group::ST, -4.0, 2), (Group::H, 0.0, 3)] {
            for s in 0..n_subj {
                for k in 0..6 {
                    let jitter = (k as f64 - 2.5) * 0.1 + s as f64 * 0.05;
                    rows.push([centre + jitter, 0.01 * (k % 2) as f64, centre * 0.5 + jitter]);
                    ids.push(format!("{g}{s}"));
                    groups.push(g);
                }
            }
        }
        let x = Array2::from_shape_fn((rows.len(), 3), |(i, j)| rows[i][j]);
        Dataset::new(x, ids, groups, vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn log_grid_points() {
        assert_eq!(log_grid(-3.0, 3.0, 7), DEFAULT_GRID.to_vec());
        assert_eq!(log_grid(0.0, 0.0, 1), vec![1.0]);
    }

    #[test]
    fn random_partition_easy_and_deterministic() {
        let d = easy_dataset();
        let reg = MethodRegistry::default();
        let m = reg.get("mmtfl21").unwrap();
        let hp = Hyperparams::Mmtfl { gamma1: 0.1, gamma2: 0.1 };
        let defs = TaskDefinition::canonical();
        let a = random_partition_eval(&d, &defs, m.as_ref(), &Tuning::fixed(hp), &FitOptions::default(), 0.5, 4, 11).unwrap();
        assert_eq!(a.all_tasks.mean, 1.0, "{:?}", a.tasks);
        assert_eq!(a.all_tasks.sd, 0.0);
        let b = random_partition_eval(&d, &defs, m.as_ref(), &Tuning::fixed(hp), &FitOptions::default(), 0.5, 4, 11).unwrap();
        assert_eq!(a, b);
        for t in &a.tasks {
            let total: u64 = t.confusion.iter().flatten().sum();
            assert!(total > 0);
        }
    }

    #[test]
    fn loso_partitions_rows() {
        let d = easy_dataset();
        let reg = MethodRegistry::default();
        let m = reg.get("stl_ridge").unwrap();
        let r = leave_one_subject_out_eval(&d, &TaskDefinition::canonical(), m.as_ref(), &Tuning::fixed(Hyperparams::Stl { lambda: 1.0 }), &FitOptions::default())
            .unwrap();
        assert_eq!(r.repeats, 8);
        // every subject appears in two tasks with all six of their trials
        assert_eq!(r.per_subject.len(), 16);
        assert!(r.per_subject.iter().all(|s| s.predicted_positive + s.predicted_negative == 6));
        for t in &r.tasks {
            let n: u64 = t.confusion.iter().flatten().sum();
            let expected = d.groups.iter().filter(|g| **g == t.positive || **g == t.negative).count();
            assert_eq!(n as usize, expected);
        }
    }

    #[test]
    fn loso_needs_two_subjects_per_group() {
        let mut d = easy_dataset();
        for (id, g) in d.subject_ids.iter_mut().zip(&d.groups) {
            if *g == Group::ST {
                *id = "st".into();
            }
        }
        let reg = MethodRegistry::default();
        let m = reg.get("stl_ridge").unwrap();
        assert!(leave_one_subject_out_eval(&d, &TaskDefinition::canonical(), m.as_ref(), &Tuning::fixed(Hyperparams::Stl { lambda: 1.0 }), &FitOptions::default()).is_err());
    }

    #[test]
    fn nested_grid_records_one_choice_per_round() {
        let d = easy_dataset();
        let reg = MethodRegistry::default();
        let m = reg.get("stl_ridge").unwrap();
        let tuning = Tuning::GridPerRound {
            axis: vec![1e-2, 1.0],
            folds: 2,
        };
        let r = random_partition_eval(&d, &TaskDefinition::canonical(), m.as_ref(), &tuning, &FitOptions::default(), 0.5, 3, 5).unwrap();
        assert_eq!(r.hyperparams.len(), 3);
        assert_eq!(r.all_tasks.mean, 1.0);
        let l = leave_one_subject_out_eval(&d, &TaskDefinition::canonical(), m.as_ref(), &tuning, &FitOptions::default()).unwrap();
        assert_eq!(l.hyperparams.len(), 8);
    }

    #[test]
    fn one_off_grid_is_shared_by_all_rounds() {
        let d = easy_dataset();
        let reg = MethodRegistry::default();
        let m = reg.get("stl_ridge").unwrap();
        let tuning = Tuning::GridOnce {
            axis: vec![1e-2, 1.0],
            folds: 2,
        };
        let r = random_partition_eval(&d, &TaskDefinition::canonical(), m.as_ref(), &tuning, &FitOptions::default(), 0.5, 3, 5).unwrap();
        let tasks = make_tasks(&d, &TaskDefinition::canonical()).unwrap();
        let best = grid_search(&tasks, &d.feature_names, m.as_ref(), &[1e-2, 1.0], 2, 5, &FitOptions::default()).unwrap().best;
        assert_eq!(r.hyperparams, vec![best; 3]);
    }

    #[test]
    fn grid_single_cell_and_ties() {
        let d = easy_dataset();
        let tasks = make_tasks(&d, &TaskDefinition::canonical()).unwrap();
        let reg = MethodRegistry::default();
        let m = reg.get("stl_ridge").unwrap();
        let g = grid_search(&tasks, &d.feature_names, m.as_ref(), &[0.5], 3, 1, &FitOptions::default()).unwrap();
        assert_eq!(g.best, Hyperparams::Stl { lambda: 0.5 });
        // all small lambdas separate perfectly, so the tie goes to the largest of them
        let g = grid_search(&tasks, &d.feature_names, m.as_ref(), &[1e-3, 1e-2, 1e-1], 3, 1, &FitOptions::default()).unwrap();
        assert_eq!(g.best_score, 1.0);
        assert_eq!(g.best, Hyperparams::Stl { lambda: 1e-1 });
    }
}
