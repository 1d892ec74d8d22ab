//! Independent per-task baselines with ridge or lasso penalties.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::prox::{proximal_gradient, InnerConfig, NonSmooth, Smooth};
use super::task::{Standardizer, TaskData};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StlRegularizer {
    /// `λ ‖α‖²`
    Ridge,
    /// `λ ‖α‖₁`
    Lasso,
}

impl StlRegularizer {
    pub fn as_str(self) -> &'static str {
        match self {
            StlRegularizer::Ridge => "ridge",
            StlRegularizer::Lasso => "lasso",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StlConfig {
    pub loss: LossKind,
    pub inner: InnerConfig,
    pub standardize: bool,
}

impl Default for StlConfig {
    fn default() -> Self {
        StlConfig {
            loss: LossKind::LeastSquares,
            inner: InnerConfig::default(),
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StlTaskFit {
    pub alpha: Array1<f64>,
    pub standardizer: Standardizer,
    pub objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StlModel {
    pub regularizer: StlRegularizer,
    pub lambda: f64,
    pub loss_kind: LossKind,
    pub feature_names: Vec<String>,
    pub task_names: Vec<String>,
    /// One per task, fitted on that task's training rows.
    pub standardizers: Vec<Standardizer>,
    /// `d × T`, column `t` is `alpha_t`.
    pub alphas: Vec<Vec<f64>>,
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl StlModel {
    pub fn alpha(&self, t: usize) -> Array1<f64> {
        self.alphas.iter().map(|row| row[t]).collect()
    }
}

struct PenalizedLoss<'a> {
    task: &'a TaskData,
    loss: LossKind,
    ridge: f64,
}

impl Smooth for PenalizedLoss<'_> {
    fn value(&self, x: &Array1<f64>) -> f64 {
        self.loss.eval(x.view(), self.task.x.view(), self.task.y.view()) + self.ridge * x.dot(x)
    }

    fn value_grad(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let (v, mut g) = self.loss.eval_grad(x.view(), self.task.x.view(), self.task.y.view());
        g.scaled_add(2.0 * self.ridge, x);
        (v + self.ridge * x.dot(x), g)
    }
}

pub fn fit_stl(task: &TaskData, lambda: f64, regularizer: StlRegularizer, config: &StlConfig) -> Result<StlTaskFit> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    task.check_trainable()?;
    let standardizer = if config.standardize {
        Standardizer::fit(std::slice::from_ref(task))?
    } else {
        Standardizer::identity(task.n_features())
    };
    let z = standardizer.transform_task(task)?;
    let (ridge, h) = match regularizer {
        StlRegularizer::Ridge => (lambda, NonSmooth::Zero),
        StlRegularizer::Lasso => (0.0, NonSmooth::L1(lambda)),
    };
    let f = PenalizedLoss {
        task: &z,
        loss: config.loss,
        ridge,
    };
    let r = proximal_gradient(&f, h, Array1::zeros(task.n_features()), &config.inner)?;
    if !r.objective.is_finite() || r.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "single-task fit of `{}` produced a non-finite value",
            task.name
        )));
    }
    Ok(StlTaskFit {
        alpha: r.x,
        standardizer,
        objective: r.objective,
        converged: r.converged,
    })
}

/// Fit every task independently with shared hyperparameters.
pub fn fit_stl_all(
    tasks: &[TaskData],
    feature_names: &[String],
    lambda: f64,
    regularizer: StlRegularizer,
    config: &StlConfig,
) -> Result<StlModel> {
    if tasks.is_empty() {
        return Err(Error::domain("at least one task is required"));
    }
    let d = feature_names.len();
    if tasks.iter().any(|t| t.n_features() != d) {
        return Err(Error::domain("feature names do not match task columns"));
    }
    let fits: Vec<StlTaskFit> = tasks
        .iter()
        .map(|t| fit_stl(t, lambda, regularizer, config))
        .collect::<Result<_>>()?;
    let warnings = tasks
        .iter()
        .zip(&fits)
        .filter(|(_, f)| !f.converged)
        .map(|(t, _)| format!("task `{}` hit the iteration limit", t.name))
        .collect::<Vec<_>>();
    Ok(StlModel {
        regularizer,
        lambda,
        loss_kind: config.loss,
        feature_names: feature_names.to_vec(),
        task_names: tasks.iter().map(|t| t.name.clone()).collect(),
        alphas: (0..d).map(|j| fits.iter().map(|f| f.alpha[j]).collect()).collect(),
        standardizers: fits.iter().map(|f| f.standardizer.clone()).collect(),
        converged: warnings.is_empty(),
        warnings,
    })
}
