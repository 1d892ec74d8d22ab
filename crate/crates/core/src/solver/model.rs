use std::io::{Read, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::mmtfl::MmtflModel;
use super::stl::StlModel;
use super::task::Standardizer;
use crate::error::{Error, Result};

/// A fitted linear multi-task classifier of either family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrainedModel {
    Mmtfl(MmtflModel),
    Stl(StlModel),
}

impl TrainedModel {
    pub fn task_names(&self) -> &[String] {
        match self {
            TrainedModel::Mmtfl(m) => &m.task_names,
            TrainedModel::Stl(m) => &m.task_names,
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            TrainedModel::Mmtfl(m) => &m.feature_names,
            TrainedModel::Stl(m) => &m.feature_names,
        }
    }

    pub fn task_index(&self, name: &str) -> Result<usize> {
        self.task_names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownName {
                kind: "task",
                name: name.to_string(),
            })
    }

    /// Weights of task `t` in standardized feature space.
    pub fn alpha(&self, t: usize) -> Array1<f64> {
        match self {
            TrainedModel::Mmtfl(m) => m.alpha(t),
            TrainedModel::Stl(m) => m.alpha(t),
        }
    }

    /// Shared non-negative feature weights, when the model has them.
    pub fn shared(&self) -> Option<&[f64]> {
        match self {
            TrainedModel::Mmtfl(m) => Some(&m.c),
            TrainedModel::Stl(_) => None,
        }
    }

    fn standardizer(&self, t: usize) -> &Standardizer {
        match self {
            TrainedModel::Mmtfl(m) => &m.standardizer,
            TrainedModel::Stl(m) => &m.standardizers[t],
        }
    }

    pub fn warnings(&self) -> &[String] {
        match self {
            TrainedModel::Mmtfl(m) => &m.warnings,
            TrainedModel::Stl(m) => &m.warnings,
        }
    }

    /// Raw rows in, linear scores `z · alpha_t` out.
    pub fn scores(&self, t: usize, x: &Array2<f64>) -> Result<Array1<f64>> {
        if t >= self.task_names().len() {
            return Err(Error::domain(format!("task index {t} out of range")));
        }
        let z = self.standardizer(t).transform(x)?;
        Ok(z.dot(&self.alpha(t)))
    }

    pub fn predict(&self, t: usize, x: &Array2<f64>) -> Result<(Array1<f64>, Array1<f64>)> {
        let s = self.scores(t, x)?;
        let labels = s.mapv(sign_label);
        Ok((s, labels))
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        Ok(serde_json::from_reader(input)?)
    }
}

/// `sign` with `sign(0) = +1`.
pub fn sign_label(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}
