use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples of one binary classification task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskData {
    pub name: String,
    pub x: Array2<f64>,
    /// Labels in {-1, +1}.
    pub y: Array1<f64>,
    /// Row index of each sample in the dataset it came from, when known.
    pub source_rows: Vec<usize>,
}

impl TaskData {
    pub fn new(name: impl Into<String>, x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        let name = name.into();
        if x.nrows() != y.len() {
            return Err(Error::domain(format!(
                "task `{name}`: {} rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(v) = y.iter().find(|v| **v != 1.0 && **v != -1.0) {
            return Err(Error::domain(format!("task `{name}`: label {v} is not ±1")));
        }
        let source_rows = (0..y.len()).collect();
        Ok(TaskData {
            name,
            x,
            y,
            source_rows,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|v| **v > 0.0).count();
        (pos, self.y.len() - pos)
    }

    /// Fail unless both classes are present.
    pub fn check_trainable(&self) -> Result<()> {
        let (pos, neg) = self.class_counts();
        if pos == 0 || neg == 0 {
            return Err(Error::domain(format!(
                "task `{}` needs both classes for training ({pos} positive, {neg} negative)",
                self.name
            )));
        }
        Ok(())
    }

    /// Sub-task made of the given local row positions.
    pub fn subset(&self, rows: &[usize]) -> TaskData {
        TaskData {
            name: self.name.clone(),
            x: self.x.select(Axis(0), rows),
            y: rows.iter().map(|&i| self.y[i]).collect(),
            source_rows: rows.iter().map(|&i| self.source_rows[i]).collect(),
        }
    }
}

/// Per-feature centering and scaling fitted on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Fit on the stacked rows of all tasks. Constant columns get scale 1.
    pub fn fit(tasks: &[TaskData]) -> Result<Self> {
        let d = tasks
            .first()
            .map(TaskData::n_features)
            .ok_or_else(|| Error::domain("no tasks to standardize"))?;
        let n: usize = tasks.iter().map(TaskData::n_samples).sum();
        if n == 0 {
            return Err(Error::domain("no rows to standardize"));
        }
        let mut mean = vec![0.0; d];
        for t in tasks {
            for row in t.x.rows() {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = vec![0.0; d];
        for t in tasks {
            for row in t.x.rows() {
                for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
                    *s += (v - m) * (v - m);
                }
            }
        }
        let scale = var
            .into_iter()
            .map(|s| {
                let sd = (s / n as f64).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Standardizer { mean, scale })
    }

    pub fn identity(d: usize) -> Self {
        Standardizer {
            mean: vec![0.0; d],
            scale: vec![1.0; d],
        }
    }

    pub fn transform(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.mean.len() {
            return Err(Error::domain(format!(
                "expected {} features, got {}",
                self.mean.len(),
                x.ncols()
            )));
        }
        let mut out = x.clone();
        for mut row in out.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn transform_task(&self, task: &TaskData) -> Result<TaskData> {
        Ok(TaskData {
            x: self.transform(&task.x)?,
            ..task.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_labels_and_shapes() {
        assert!(TaskData::new("t", Array2::zeros((2, 1)), array![1.0, 0.0]).is_err());
        assert!(TaskData::new("t", Array2::zeros((2, 1)), array![1.0]).is_err());
        let one_class = TaskData::new("t", Array2::zeros((2, 1)), array![1.0, 1.0]).unwrap();
        assert!(one_class.check_trainable().is_err());
    }

    #[test]
    fn standardizer_stats() {
        let a = TaskData::new("a", array![[1.0, 5.0], [3.0, 5.0]], array![1.0, -1.0]).unwrap();
        let b = TaskData::new("b", array![[5.0, 5.0]], array![1.0]).unwrap();
        let s = Standardizer::fit(&[a.clone(), b]).unwrap();
        assert_eq!(s.mean, vec![3.0, 5.0]);
        assert!((s.scale[0] - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(s.scale[1], 1.0);
        let z = s.transform(&a.x).unwrap();
        assert_eq!(z[[1, 0]], 0.0);
        assert_eq!(z[[0, 1]], 0.0);
        assert!(s.transform(&Array2::zeros((1, 3))).is_err());
    }

    #[test]
    fn subset_tracks_source_rows() {
        let mut t = TaskData::new("t", array![[1.0], [2.0], [3.0]], array![1.0, -1.0, 1.0]).unwrap();
        t.source_rows = vec![10, 11, 12];
        let s = t.subset(&[2, 0]);
        assert_eq!(s.source_rows, vec![12, 10]);
        assert_eq!(s.x, array![[3.0], [1.0]]);
    }
}
