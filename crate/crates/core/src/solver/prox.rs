//! Monotone proximal gradient with backtracking.
//!
//! Minimizes `f(x) + h(x)` for smooth `f` and a simple `h` whose proximal
//! map is closed form. Each accepted step satisfies the sufficient-decrease
//! condition `F(x⁺) <= F(x) - (σ / t)·‖x⁺ - x‖²`, which for `h = 0` is the
//! Armijo rule `F(x - t∇f) <= F(x) - σ·t·‖∇f‖²`, so the objective never
//! increases from the starting point.

use ndarray::{Array1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SUFFICIENT_DECREASE: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    /// Stop when the relative objective decrease of a step falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub initial_step: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            tol: 1e-8,
            max_iter: 500,
            initial_step: 1.0,
        }
    }
}

/// Non-smooth part `h` of the objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NonSmooth {
    Zero,
    /// `w · ‖x‖₁`
    L1(f64),
    /// Indicator of `x >= 0`.
    NonNegative,
    /// `w · Σ x` restricted to `x >= 0`.
    NonNegativeL1(f64),
}

impl NonSmooth {
    pub fn value(&self, x: &Array1<f64>) -> f64 {
        match *self {
            NonSmooth::Zero | NonSmooth::NonNegative => 0.0,
            NonSmooth::L1(w) => w * x.iter().map(|v| v.abs()).sum::<f64>(),
            NonSmooth::NonNegativeL1(w) => w * x.sum(),
        }
    }

    /// `argmin_z h(z) + ‖z - v‖² / (2 step)`
    pub fn prox(&self, v: &Array1<f64>, step: f64) -> Array1<f64> {
        match *self {
            NonSmooth::Zero => v.clone(),
            NonSmooth::L1(w) => v.mapv(|z| soft_threshold(z, w * step)),
            NonSmooth::NonNegative => v.mapv(|z| z.max(0.0)),
            NonSmooth::NonNegativeL1(w) => v.mapv(|z| (z - w * step).max(0.0)),
        }
    }
}

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Smooth part `f` of the objective.
pub trait Smooth {
    fn value(&self, x: &Array1<f64>) -> f64;
    fn value_grad(&self, x: &Array1<f64>) -> (f64, Array1<f64>);
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    pub x: Array1<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Run proximal gradient from `x0`, which must be feasible for `h`.
pub fn proximal_gradient<S: Smooth + ?Sized>(
    f: &S,
    h: NonSmooth,
    x0: Array1<f64>,
    cfg: &InnerConfig,
) -> Result<InnerResult> {
    let mut x = x0;
    let (fx, mut grad) = f.value_grad(&x);
    let mut obj = fx + h.value(&x);
    if !obj.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "objective is {obj} at the starting point"
        )));
    }
    let mut step = cfg.initial_step;
    for it in 0..cfg.max_iter {
        let (x_new, obj_new) = loop {
            let mut trial = x.clone();
            Zip::from(&mut trial).and(&grad).for_each(|t, g| *t -= step * g);
            let candidate = h.prox(&trial, step);
            let dist2: f64 = Zip::from(&candidate)
                .and(&x)
                .fold(0.0, |acc, a, b| acc + (a - b) * (a - b));
            if dist2 == 0.0 {
                // fixed point of the prox-gradient map
                return Ok(InnerResult {
                    x,
                    objective: obj,
                    iterations: it,
                    converged: true,
                });
            }
            let f_new = f.value(&candidate);
            let o = f_new + h.value(&candidate);
            if o.is_finite() && o <= obj - SUFFICIENT_DECREASE / step * dist2 {
                break (candidate, o);
            }
            step *= 0.5;
            if step < MIN_STEP {
                return Ok(InnerResult {
                    x,
                    objective: obj,
                    iterations: it,
                    converged: true,
                });
            }
        };
        let decrease = (obj - obj_new) / obj.abs().max(f64::MIN_POSITIVE);
        x = x_new;
        obj = obj_new;
        grad = f.value_grad(&x).1;
        if decrease < cfg.tol {
            return Ok(InnerResult {
                x,
                objective: obj,
                iterations: it + 1,
                converged: true,
            });
        }
        step = (step * 2.0).min(cfg.initial_step);
    }
    Ok(InnerResult {
        x,
        objective: obj,
        iterations: cfg.max_iter,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    /// `f(x) = Σ a_i (x_i - b_i)²`
    struct Quad {
        a: Array1<f64>,
        b: Array1<f64>,
    }

    impl Smooth for Quad {
        fn value(&self, x: &Array1<f64>) -> f64 {
            Zip::from(x).and(&self.a).and(&self.b).fold(0.0, |s, x, a, b| s + a * (x - b) * (x - b))
        }
        fn value_grad(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
            let g = (x - &self.b) * &self.a * 2.0;
            (self.value(x), g)
        }
    }

    fn tight() -> InnerConfig {
        InnerConfig {
            tol: 1e-15,
            max_iter: 10_000,
            initial_step: 1.0,
        }
    }

    #[test]
    fn smooth_quadratic_minimum() {
        let f = Quad {
            a: array![1.0, 30.0],
            b: array![2.0, -1.0],
        };
        let r = proximal_gradient(&f, NonSmooth::Zero, Array1::zeros(2), &tight()).unwrap();
        assert!(r.converged);
        assert!((r.x[0] - 2.0).abs() < 1e-6 && (r.x[1] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn lasso_prox_matches_soft_threshold() {
        // min (x - b)² + w|x|  =>  x = S(b, w/2)
        let f = Quad {
            a: array![1.0, 1.0, 1.0],
            b: array![2.0, 0.2, -3.0],
        };
        let r = proximal_gradient(&f, NonSmooth::L1(1.0), Array1::zeros(3), &tight()).unwrap();
        let expected = [1.5, 0.0, -2.5];
        for (x, e) in r.x.iter().zip(expected) {
            assert!((x - e).abs() < 1e-9, "{x} vs {e}");
        }
    }

    #[test]
    fn nonnegative_projection() {
        let f = Quad {
            a: array![1.0, 1.0],
            b: array![-2.0, 0.7],
        };
        let r = proximal_gradient(&f, NonSmooth::NonNegativeL1(0.4), Array1::zeros(2), &tight()).unwrap();
        assert_eq!(r.x[0], 0.0);
        assert!((r.x[1] - 0.5).abs() < 1e-9);
        assert!(r.x.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn objective_never_increases() {
        let f = Quad {
            a: array![100.0, 0.01],
            b: array![1.0, 1.0],
        };
        let start = array![5.0, -5.0];
        let f0 = f.value(&start);
        let r = proximal_gradient(&f, NonSmooth::L1(0.1), start, &InnerConfig::default()).unwrap();
        assert!(r.objective <= f0);
    }

    #[test]
    fn reports_non_convergence() {
        let f = Quad {
            a: array![1.0],
            b: array![1e6],
        };
        let cfg = InnerConfig {
            max_iter: 1,
            tol: 0.0,
            initial_step: 1e-6,
        };
        let r = proximal_gradient(&f, NonSmooth::Zero, Array1::zeros(1), &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(5.0, 2.0), 3.0);
        assert_eq!(soft_threshold(1.0, 2.0), 0.0);
        assert_eq!(soft_threshold(-5.0, 2.0), -3.0);
    }
}
