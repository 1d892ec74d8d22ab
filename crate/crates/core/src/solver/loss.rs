use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Empirical loss of a linear scorer `x · alpha` against ±1 labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `Σ log(1 + exp(-y x·α))`
    Logistic,
    /// `Σ (y - x·α)²`
    LeastSquares,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Logistic => "logistic",
            LossKind::LeastSquares => "least_squares",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "logistic" => Ok(LossKind::Logistic),
            "least_squares" | "ls" => Ok(LossKind::LeastSquares),
            other => Err(Error::UnknownName {
                kind: "loss",
                name: other.to_string(),
            }),
        }
    }

    /// Loss value and gradient in `alpha`, with dimension checks.
    pub fn value_grad(
        self,
        alpha: ArrayView1<f64>,
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
    ) -> Result<(f64, Array1<f64>)> {
        check_dims(alpha, x, y)?;
        Ok(self.eval_grad(alpha, x, y))
    }

    pub fn value(self, alpha: ArrayView1<f64>, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<f64> {
        check_dims(alpha, x, y)?;
        Ok(self.eval(alpha, x, y))
    }

    pub(crate) fn eval(self, alpha: ArrayView1<f64>, x: ArrayView2<f64>, y: ArrayView1<f64>) -> f64 {
        let scores = x.dot(&alpha);
        self.eval_scores(scores.view(), y)
    }

    pub(crate) fn eval_scores(self, scores: ArrayView1<f64>, y: ArrayView1<f64>) -> f64 {
        match self {
            LossKind::Logistic => scores
                .iter()
                .zip(y)
                .map(|(s, yi)| softplus(-yi * s))
                .sum(),
            LossKind::LeastSquares => scores
                .iter()
                .zip(y)
                .map(|(s, yi)| (yi - s) * (yi - s))
                .sum(),
        }
    }

    pub(crate) fn eval_grad(
        self,
        alpha: ArrayView1<f64>,
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
    ) -> (f64, Array1<f64>) {
        let scores = x.dot(&alpha);
        let (value, dscore) = self.score_derivative(scores.view(), y);
        (value, x.t().dot(&dscore))
    }

    /// Loss value and its derivative in each score.
    fn score_derivative(self, scores: ArrayView1<f64>, y: ArrayView1<f64>) -> (f64, Array1<f64>) {
        let mut value = 0.0;
        let mut d = Array1::zeros(scores.len());
        for ((s, yi), di) in scores.iter().zip(y).zip(d.iter_mut()) {
            match self {
                LossKind::Logistic => {
                    let margin = yi * s;
                    value += softplus(-margin);
                    *di = -yi * sigmoid(-margin);
                }
                LossKind::LeastSquares => {
                    let r = yi - s;
                    value += r * r;
                    *di = -2.0 * r;
                }
            }
        }
        (value, d)
    }
}

/// `log(1 + exp(u))` without overflow.
pub fn softplus(u: f64) -> f64 {
    u.max(0.0) + (-u.abs()).exp().ln_1p()
}

/// `1 / (1 + exp(-u))` without overflow.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

fn check_dims(alpha: ArrayView1<f64>, x: ArrayView2<f64>, y: ArrayView1<f64>) -> Result<()> {
    if x.ncols() != alpha.len() || x.nrows() != y.len() {
        return Err(Error::domain(format!(
            "dimension mismatch: X is {}x{}, alpha has {}, y has {}",
            x.nrows(),
            x.ncols(),
            alpha.len(),
            y.len()
        )));
    }
    Ok(())
}

/// Convenience for owned inputs in tests and callers.
pub fn loss_value_grad(kind: LossKind, alpha: &Array1<f64>, x: &Array2<f64>, y: &Array1<f64>) -> Result<(f64, Array1<f64>)> {
    kind.value_grad(alpha.view(), x.view(), y.view())
}
