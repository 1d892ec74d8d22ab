//! Named learning methods, selectable at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{
    fit_mmtfl, fit_stl_all, InnerConfig, LossKind, MmtflConfig, RegularizerSpec, StlConfig, StlRegularizer,
    TaskData, TrainedModel,
};

/// Regularization strengths for one fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Hyperparams {
    Mmtfl { gamma1: f64, gamma2: f64 },
    Stl { lambda: f64 },
}

impl Hyperparams {
    /// Ordering used to break ties between equally scored grid cells:
    /// larger `gamma2` first, then larger `gamma1`; larger `lambda` for single-task fits.
    pub fn tie_key(&self) -> (f64, f64) {
        match *self {
            Hyperparams::Mmtfl { gamma1, gamma2 } => (gamma2, gamma1),
            Hyperparams::Stl { lambda } => (lambda, 0.0),
        }
    }
}

impl fmt::Display for Hyperparams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hyperparams::Mmtfl { gamma1, gamma2 } => write!(f, "gamma1={gamma1} gamma2={gamma2}"),
            Hyperparams::Stl { lambda } => write!(f, "lambda={lambda}"),
        }
    }
}

/// Solver settings shared by every method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Overrides the method's default loss.
    pub loss: Option<LossKind>,
    pub inner: InnerConfig,
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        let m = MmtflConfig::default();
        FitOptions {
            loss: None,
            inner: m.inner,
            outer_tol: m.outer_tol,
            outer_max_iter: m.outer_max_iter,
            seed: 0,
        }
    }
}

pub trait Method: Send + Sync {
    fn name(&self) -> &'static str;
    fn default_loss(&self) -> LossKind;
    fn default_hyperparams(&self) -> Hyperparams;
    /// All candidate settings built from one axis of values.
    fn grid(&self, axis: &[f64]) -> Vec<Hyperparams>;
    fn fit(
        &self,
        tasks: &[TaskData],
        feature_names: &[String],
        hp: &Hyperparams,
        opts: &FitOptions,
    ) -> Result<TrainedModel>;
}

fn wrong_family(method: &str, hp: &Hyperparams) -> Error {
    Error::domain(format!("method `{method}` cannot use hyperparameters {hp}"))
}

pub struct MmtflMethod {
    pub name: &'static str,
    pub p: u8,
    pub k: u8,
}

impl Method for MmtflMethod {
    fn name(&self) -> &'static str {
        self.name
    }

    fn default_loss(&self) -> LossKind {
        LossKind::Logistic
    }

    fn default_hyperparams(&self) -> Hyperparams {
        Hyperparams::Mmtfl {
            gamma1: 1.0,
            gamma2: 1.0,
        }
    }

    fn grid(&self, axis: &[f64]) -> Vec<Hyperparams> {
        axis.iter()
            .flat_map(|&gamma1| axis.iter().map(move |&gamma2| Hyperparams::Mmtfl { gamma1, gamma2 }))
            .collect()
    }

    fn fit(&self, tasks: &[TaskData], feature_names: &[String], hp: &Hyperparams, opts: &FitOptions) -> Result<TrainedModel> {
        let Hyperparams::Mmtfl { gamma1, gamma2 } = *hp else {
            return Err(wrong_family(self.name, hp));
        };
        let spec = RegularizerSpec::new(self.p, self.k, gamma1, gamma2)?;
        let config = MmtflConfig {
            loss: opts.loss.unwrap_or(self.default_loss()),
            inner: opts.inner,
            outer_tol: opts.outer_tol,
            outer_max_iter: opts.outer_max_iter,
            seed: opts.seed,
            ..Default::default()
        };
        Ok(TrainedModel::Mmtfl(fit_mmtfl(tasks, feature_names, &spec, &config)?))
    }
}

pub struct StlMethod {
    pub name: &'static str,
    pub regularizer: StlRegularizer,
}

impl Method for StlMethod {
    fn name(&self) -> &'static str {
        self.name
    }

    fn default_loss(&self) -> LossKind {
        LossKind::LeastSquares
    }

    fn default_hyperparams(&self) -> Hyperparams {
        Hyperparams::Stl { lambda: 1.0 }
    }

    fn grid(&self, axis: &[f64]) -> Vec<Hyperparams> {
        axis.iter().map(|&lambda| Hyperparams::Stl { lambda }).collect()
    }

    fn fit(&self, tasks: &[TaskData], feature_names: &[String], hp: &Hyperparams, opts: &FitOptions) -> Result<TrainedModel> {
        let Hyperparams::Stl { lambda } = *hp else {
            return Err(wrong_family(self.name, hp));
        };
        let config = StlConfig {
            loss: opts.loss.unwrap_or(self.default_loss()),
            inner: opts.inner,
            standardize: true,
        };
        Ok(TrainedModel::Stl(fit_stl_all(tasks, feature_names, lambda, self.regularizer, &config)?))
    }
}

#[derive(Clone)]
pub struct MethodRegistry {
    methods: BTreeMap<&'static str, Arc<dyn Method>>,
}

impl MethodRegistry {
    pub fn empty() -> Self {
        MethodRegistry {
            methods: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, method: Arc<dyn Method>) {
        self.methods.insert(method.name(), method);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Method>> {
        self.methods.get(name).cloned().ok_or_else(|| Error::UnknownName {
            kind: "method",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.methods.keys().copied().collect()
    }
}

impl Default for MethodRegistry {
    fn default() -> Self {
        let mut r = MethodRegistry::empty();
        for (name, p, k) in [("mmtfl21", 2, 1), ("mmtfl12", 1, 2), ("mmtfl11", 1, 1), ("mmtfl22", 2, 2)] {
            r.register(Arc::new(MmtflMethod { name, p, k }));
        }
        r.register(Arc::new(StlMethod {
            name: "stl_ridge",
            regularizer: StlRegularizer::Ridge,
        }));
        r.register(Arc::new(StlMethod {
            name: "stl_lasso",
            regularizer: StlRegularizer::Lasso,
        }));
        r
    }
}
