//! Multiplicative multi-task feature learning.
//!
//! Each task weight vector is factorized as `alpha_t = c ⊙ beta_t` with a shared
//! non-negative `c`. The objective
//!
//! ```text
//! Σ_t L(X_t (c ⊙ beta_t), y_t) + γ1 Σ_t ‖beta_t‖_p^p + γ2 ‖c‖_k^k
//! ```
//!
//! is minimized by alternating between the `beta` block (one independent
//! problem per task) and the `c` block, each solved by proximal gradient.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::loss::LossKind;
use super::prox::{proximal_gradient, InnerConfig, InnerResult, NonSmooth, Smooth};
use super::task::{Standardizer, TaskData};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizerSpec {
    /// Power of the penalty on each `beta_t`, 1 or 2.
    pub p: u8,
    /// Power of the penalty on `c`, 1 or 2.
    pub k: u8,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl RegularizerSpec {
    pub fn new(p: u8, k: u8, gamma1: f64, gamma2: f64) -> Result<Self> {
        let spec = RegularizerSpec { p, k, gamma1, gamma2 };
        spec.validate(false)?;
        Ok(spec)
    }

    /// Zero penalties are only accepted when `allow_zero` is set.
    pub fn validate(&self, allow_zero: bool) -> Result<()> {
        if !matches!(self.p, 1 | 2) || !matches!(self.k, 1 | 2) {
            return Err(Error::domain(format!(
                "penalty powers must be 1 or 2, got p={} k={}",
                self.p, self.k
            )));
        }
        for (name, g) in [("gamma1", self.gamma1), ("gamma2", self.gamma2)] {
            let ok = g.is_finite() && (g > 0.0 || (allow_zero && g == 0.0));
            if !ok {
                return Err(Error::domain(format!("{name} must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmtflConfig {
    pub loss: LossKind,
    /// Multiplier on the loss term.
    pub loss_scale: f64,
    pub outer_tol: f64,
    pub outer_max_iter: usize,
    pub inner: InnerConfig,
    /// Fit a standardizer on the training rows before solving.
    pub standardize: bool,
    /// Accept zero penalties.
    pub allow_zero_penalty: bool,
    /// After each `c` step, rescale `c_j` and row `j` of the betas in opposite
    /// directions to minimize the penalties at unchanged `alpha`.
    pub rebalance: bool,
    pub seed: u64,
}

impl Default for MmtflConfig {
    fn default() -> Self {
        MmtflConfig {
            loss: LossKind::Logistic,
            loss_scale: 1.0,
            outer_tol: 1e-6,
            outer_max_iter: 200,
            inner: InnerConfig::default(),
            standardize: true,
            allow_zero_penalty: false,
            rebalance: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmtflModel {
    pub spec: RegularizerSpec,
    pub loss_kind: LossKind,
    pub feature_names: Vec<String>,
    pub task_names: Vec<String>,
    pub standardizer: Standardizer,
    pub c: Vec<f64>,
    /// `d × T`, column `t` is `beta_t`.
    pub betas: Vec<Vec<f64>>,
    /// `d × T`, `alphas[j][t] = c[j] * betas[j][t]`.
    pub alphas: Vec<Vec<f64>>,
    /// Objective before the first iteration (index 0) and after each outer iteration.
    pub diagnostics: Vec<IterationRecord>,
    pub converged: bool,
    pub warnings: Vec<String>,
    pub seed: u64,
}

impl MmtflModel {
    pub fn n_features(&self) -> usize {
        self.c.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.task_names.len()
    }

    pub fn alpha(&self, t: usize) -> Array1<f64> {
        self.alphas.iter().map(|row| row[t]).collect()
    }

    pub fn beta(&self, t: usize) -> Array1<f64> {
        self.betas.iter().map(|row| row[t]).collect()
    }

    /// Largest increase between consecutive diagnostic objectives, relative to
    /// `max(1, |previous|)`. Non-positive when the sequence is non-increasing.
    pub fn max_relative_increase(&self) -> f64 {
        self.diagnostics
            .windows(2)
            .map(|w| (w[1].objective - w[0].objective) / w[0].objective.abs().max(1.0))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn penalty(x: ArrayView1<f64>, power: u8) -> f64 {
    match power {
        1 => x.iter().map(|v| v.abs()).sum(),
        _ => x.iter().map(|v| v * v).sum(),
    }
}

/// Exact objective value for the given factors. `betas` holds one vector per task.
pub fn objective(
    c: &Array1<f64>,
    betas: &[Array1<f64>],
    tasks: &[TaskData],
    spec: &RegularizerSpec,
    loss: LossKind,
) -> Result<f64> {
    objective_scaled(c, betas, tasks, spec, loss, 1.0)
}

fn objective_scaled(
    c: &Array1<f64>,
    betas: &[Array1<f64>],
    tasks: &[TaskData],
    spec: &RegularizerSpec,
    loss: LossKind,
    loss_scale: f64,
) -> Result<f64> {
    if let Some(v) = c.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!("c must be non-negative, found {v}")));
    }
    if betas.len() != tasks.len() {
        return Err(Error::domain(format!(
            "{} beta vectors for {} tasks",
            betas.len(),
            tasks.len()
        )));
    }
    let mut total = spec.gamma2 * penalty(c.view(), spec.k);
    for (beta, task) in betas.iter().zip(tasks) {
        let alpha = c * beta;
        total += loss_scale * loss.value(alpha.view(), task.x.view(), task.y.view())?;
        total += spec.gamma1 * penalty(beta.view(), spec.p);
    }
    Ok(total)
}

/// `scale · Σ_i L(Z_i x, y_i) + ridge · ‖x‖²`
struct LinearBlock {
    parts: Vec<(Array2<f64>, Array1<f64>)>,
    loss: LossKind,
    scale: f64,
    ridge: f64,
}

impl Smooth for LinearBlock {
    fn value(&self, x: &Array1<f64>) -> f64 {
        let data: f64 = self
            .parts
            .iter()
            .map(|(z, y)| self.loss.eval(x.view(), z.view(), y.view()))
            .sum();
        self.scale * data + self.ridge * x.dot(x)
    }

    fn value_grad(&self, x: &Array1<f64>) -> (f64, Array1<f64>) {
        let mut value = 0.0;
        let mut grad = Array1::zeros(x.len());
        for (z, y) in &self.parts {
            let (v, g) = self.loss.eval_grad(x.view(), z.view(), y.view());
            value += v;
            grad += &g;
        }
        value *= self.scale;
        grad *= self.scale;
        value += self.ridge * x.dot(x);
        grad.scaled_add(2.0 * self.ridge, x);
        (value, grad)
    }
}

/// Columns of `x` scaled by `w`.
fn scale_columns(x: &Array2<f64>, w: &Array1<f64>) -> Array2<f64> {
    x * &w.view().insert_axis(Axis(0))
}

fn block_terms(power: u8, gamma: f64, nonnegative: bool) -> (f64, NonSmooth) {
    match (power, nonnegative) {
        (1, false) => (0.0, NonSmooth::L1(gamma)),
        (1, true) => (0.0, NonSmooth::NonNegativeL1(gamma)),
        (_, false) => (gamma, NonSmooth::Zero),
        (_, true) => (gamma, NonSmooth::NonNegative),
    }
}

fn check_finite(r: &InnerResult, what: &str) -> Result<()> {
    if r.objective.is_finite() && r.x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericalFailure(format!("{what} produced a non-finite value")))
    }
}

/// Minimize over `beta_t` with `c` fixed, starting from `beta0`.
pub fn solve_beta_step(
    c: &Array1<f64>,
    task: &TaskData,
    beta0: Array1<f64>,
    spec: &RegularizerSpec,
    loss: LossKind,
    inner: &InnerConfig,
) -> Result<InnerResult> {
    beta_step_scaled(c, task, beta0, spec, loss, 1.0, inner)
}

fn beta_step_scaled(
    c: &Array1<f64>,
    task: &TaskData,
    beta0: Array1<f64>,
    spec: &RegularizerSpec,
    loss: LossKind,
    loss_scale: f64,
    inner: &InnerConfig,
) -> Result<InnerResult> {
    if c.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::domain("c must be non-negative"));
    }
    let (ridge, h) = block_terms(spec.p, spec.gamma1, false);
    let block = LinearBlock {
        parts: vec![(scale_columns(&task.x, c), task.y.clone())],
        loss,
        scale: loss_scale,
        ridge,
    };
    let r = proximal_gradient(&block, h, beta0, inner)?;
    check_finite(&r, "beta step")?;
    Ok(r)
}

/// Minimize over `c >= 0` with every `beta_t` fixed, starting from `c0`.
pub fn solve_c_step(
    betas: &[Array1<f64>],
    tasks: &[TaskData],
    c0: Array1<f64>,
    spec: &RegularizerSpec,
    loss: LossKind,
    inner: &InnerConfig,
) -> Result<InnerResult> {
    c_step_scaled(betas, tasks, c0, spec, loss, 1.0, inner)
}

fn c_step_scaled(
    betas: &[Array1<f64>],
    tasks: &[TaskData],
    c0: Array1<f64>,
    spec: &RegularizerSpec,
    loss: LossKind,
    loss_scale: f64,
    inner: &InnerConfig,
) -> Result<InnerResult> {
    if betas.len() != tasks.len() {
        return Err(Error::domain("one beta vector per task is required"));
    }
    let (ridge, h) = block_terms(spec.k, spec.gamma2, true);
    let block = LinearBlock {
        parts: tasks
            .iter()
            .zip(betas)
            .map(|(t, b)| (scale_columns(&t.x, b), t.y.clone()))
            .collect(),
        loss,
        scale: loss_scale,
        ridge,
    };
    let c0 = c0.mapv(|v| v.max(0.0));
    let r = proximal_gradient(&block, h, c0, inner)?;
    check_finite(&r, "c step")?;
    Ok(r)
}

/// Penalty-optimal per-feature rescaling `c_j · s`, `beta_jt / s`.
///
/// With `B = Σ_t |beta_jt|^p`, `γ2 (c s)^k + γ1 B s^-p` is minimized at
/// `s^(k+p) = p γ1 B / (k γ2 c^k)`. The products `c_j beta_jt` are unchanged
/// up to rounding, so the objective can only decrease.
pub fn rebalance(c: &mut Array1<f64>, betas: &mut [Array1<f64>], spec: &RegularizerSpec) {
    if spec.gamma1 <= 0.0 || spec.gamma2 <= 0.0 {
        return;
    }
    let (p, k) = (f64::from(spec.p), f64::from(spec.k));
    for j in 0..c.len() {
        let cj = c[j];
        let b: f64 = betas.iter().map(|beta| beta[j].abs().powf(p)).sum();
        if cj <= 0.0 || b <= 0.0 {
            continue;
        }
        let s = (p * spec.gamma1 * b / (k * spec.gamma2 * cj.powf(k))).powf(1.0 / (k + p));
        if !s.is_finite() || s <= 0.0 {
            continue;
        }
        let before = spec.gamma2 * cj.powf(k) + spec.gamma1 * b;
        let after = spec.gamma2 * (cj * s).powf(k) + spec.gamma1 * b * s.powf(-p);
        if after < before {
            c[j] = cj * s;
            for beta in betas.iter_mut() {
                beta[j] /= s;
            }
        }
    }
}

pub fn fit_mmtfl(
    tasks: &[TaskData],
    feature_names: &[String],
    spec: &RegularizerSpec,
    config: &MmtflConfig,
) -> Result<MmtflModel> {
    spec.validate(config.allow_zero_penalty)?;
    if tasks.is_empty() {
        return Err(Error::domain("at least one task is required"));
    }
    let d = tasks[0].n_features();
    if tasks.iter().any(|t| t.n_features() != d) {
        return Err(Error::domain("tasks have different feature counts"));
    }
    if feature_names.len() != d {
        return Err(Error::domain(format!(
            "{} feature names for {d} features",
            feature_names.len()
        )));
    }
    for t in tasks {
        t.check_trainable()?;
    }
    if !(config.loss_scale > 0.0 && config.loss_scale.is_finite()) {
        return Err(Error::domain("loss_scale must be positive"));
    }

    let standardizer = if config.standardize {
        Standardizer::fit(tasks)?
    } else {
        Standardizer::identity(d)
    };
    let tasks: Vec<TaskData> = tasks
        .iter()
        .map(|t| standardizer.transform_task(t))
        .collect::<Result<_>>()?;
    let n_tasks = tasks.len();
    let scale = config.loss_scale;

    let mut c = Array1::from_elem(d, 1.0);
    let mut betas: Vec<Array1<f64>> = vec![Array1::zeros(d); n_tasks];
    let mut obj = objective_scaled(&c, &betas, &tasks, spec, config.loss, scale)?;
    let mut diagnostics = vec![IterationRecord {
        iteration: 0,
        objective: obj,
    }];
    let mut warnings = Vec::new();
    let mut converged = false;

    for it in 1..=config.outer_max_iter {
        let results: Vec<InnerResult> = tasks
            .par_iter()
            .zip(betas.par_iter())
            .map(|(task, b)| beta_step_scaled(&c, task, b.clone(), spec, config.loss, scale, &config.inner))
            .collect::<Result<_>>()?;
        for (t, r) in results.into_iter().enumerate() {
            if !r.converged {
                warnings.push(format!(
                    "iteration {it}: beta step for task `{}` hit {} inner iterations",
                    tasks[t].name, r.iterations
                ));
            }
            betas[t] = r.x;
        }

        let r = c_step_scaled(&betas, &tasks, c, spec, config.loss, scale, &config.inner)?;
        if !r.converged {
            warnings.push(format!("iteration {it}: c step hit {} inner iterations", r.iterations));
        }
        c = r.x;
        if config.rebalance {
            rebalance(&mut c, &mut betas, spec);
        }

        let new_obj = objective_scaled(&c, &betas, &tasks, spec, config.loss, scale)?;
        if !new_obj.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "objective is {new_obj} at outer iteration {it}"
            )));
        }
        diagnostics.push(IterationRecord {
            iteration: it,
            objective: new_obj,
        });
        let rel = (obj - new_obj) / obj.abs().max(f64::MIN_POSITIVE);
        obj = new_obj;
        if rel < config.outer_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warnings.push(format!(
            "outer loop stopped at {} iterations without meeting tolerance",
            config.outer_max_iter
        ));
    }

    let betas_rows: Vec<Vec<f64>> = (0..d)
        .map(|j| betas.iter().map(|b| b[j]).collect())
        .collect();
    let alphas: Vec<Vec<f64>> = (0..d)
        .map(|j| betas.iter().map(|b| c[j] * b[j]).collect())
        .collect();

    Ok(MmtflModel {
        spec: *spec,
        loss_kind: config.loss,
        feature_names: feature_names.to_vec(),
        task_names: tasks.iter().map(|t| t.name.clone()).collect(),
        standardizer,
        c: c.to_vec(),
        betas: betas_rows,
        alphas,
        diagnostics,
        converged,
        warnings,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("f{j}")).collect()
    }

    fn tight() -> InnerConfig {
        InnerConfig {
            tol: 1e-15,
            max_iter: 100_000,
            initial_step: 1.0,
        }
    }

    fn toy_task(name: &str) -> TaskData {
        TaskData::new(
            name,
            array![[1.0, 0.2], [0.8, -0.1], [-1.0, 0.3], [-0.7, -0.4], [0.1, 0.9]],
            array![1.0, 1.0, -1.0, -1.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn objective_zero_case_and_pure_loss() {
        let t = toy_task("a");
        let spec = RegularizerSpec { p: 2, k: 1, gamma1: 3.0, gamma2: 4.0 };
        let z = Array1::zeros(2);
        let o = objective(&z, &[z.clone()], &[t.clone()], &spec, LossKind::Logistic).unwrap();
        assert!((o - 5.0 * 2f64.ln()).abs() < 1e-12);

        let free = RegularizerSpec { gamma1: 0.0, gamma2: 0.0, ..spec };
        let c = array![0.5, 2.0];
        let b = array![1.0, -1.0];
        let o = objective(&c, &[b.clone()], &[t.clone()], &free, LossKind::Logistic).unwrap();
        let l = LossKind::Logistic.value((&c * &b).view(), t.x.view(), t.y.view()).unwrap();
        assert_eq!(o, l);
    }

    #[test]
    fn objective_hand_computed() {
        // X = [[1, 2], [0, 1]], y = (1, -1), c = (1, 2), beta = (1, 1)
        // alpha = (1, 2), Xα = (5, 2), residuals (-4, -3) → loss 25
        // p = 2: γ1·2 = 1.0 with γ1 = 0.5; k = 1: γ2·3 = 0.3 with γ2 = 0.1
        let t = TaskData::new("h", array![[1.0, 2.0], [0.0, 1.0]], array![1.0, -1.0]).unwrap();
        let spec = RegularizerSpec { p: 2, k: 1, gamma1: 0.5, gamma2: 0.1 };
        let o = objective(&array![1.0, 2.0], &[array![1.0, 1.0]], &[t.clone()], &spec, LossKind::LeastSquares).unwrap();
        assert!((o - 26.3).abs() < 1e-12);
        let spec = RegularizerSpec { p: 1, k: 2, gamma1: 0.5, gamma2: 0.1 };
        let o = objective(&array![1.0, 2.0], &[array![1.0, -1.0]], &[t], &spec, LossKind::LeastSquares).unwrap();
        // alpha = (1, -2), Xα = (-3, -2), residuals (4, 1) → 17; γ1·2 = 1; γ2·5 = 0.5
        assert!((o - 18.5).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_negative_c() {
        let t = toy_task("a");
        let spec = RegularizerSpec::new(2, 2, 1.0, 1.0).unwrap();
        let r = objective(&array![-1.0, 0.0], &[Array1::zeros(2)], &[t], &spec, LossKind::Logistic);
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn beta_step_degenerate_cases() {
        let t = toy_task("a");
        let spec = RegularizerSpec::new(2, 1, 1.0, 1.0).unwrap();
        let r = solve_beta_step(&Array1::zeros(2), &t, Array1::zeros(2), &spec, LossKind::Logistic, &tight()).unwrap();
        assert!(r.x.iter().all(|v| *v == 0.0));

        let spec = RegularizerSpec::new(1, 1, 1e6, 1.0).unwrap();
        let r = solve_beta_step(&Array1::ones(2), &t, Array1::zeros(2), &spec, LossKind::Logistic, &tight()).unwrap();
        assert!(r.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn c_step_degenerate_cases() {
        let t = toy_task("a");
        let spec = RegularizerSpec::new(2, 2, 1.0, 1.0).unwrap();
        let r = solve_c_step(&[Array1::zeros(2)], &[t.clone()], Array1::ones(2), &spec, LossKind::Logistic, &tight()).unwrap();
        assert!(r.x.iter().all(|v| v.abs() < 1e-7), "{:?}", r.x);

        let spec = RegularizerSpec::new(2, 1, 1.0, 1e6).unwrap();
        let r = solve_c_step(&[array![1.0, -2.0]], &[t], Array1::ones(2), &spec, LossKind::Logistic, &tight()).unwrap();
        assert!(r.x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn full_shrinkage_on_c() {
        let tasks = [toy_task("a"), toy_task("b")];
        for (p, k) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let spec = RegularizerSpec::new(p, k, 1.0, 1e6).unwrap();
            let m = fit_mmtfl(&tasks, &names(2), &spec, &MmtflConfig::default()).unwrap();
            assert!(m.c.iter().all(|v| v.abs() < 1e-6), "p={p} k={k} c={:?}", m.c);
            assert!(m.alphas.iter().flatten().all(|v| v.abs() < 1e-6));
        }
    }

    #[test]
    fn factorization_and_monotonicity() {
        let tasks = [toy_task("a"), toy_task("b")];
        for loss in [LossKind::Logistic, LossKind::LeastSquares] {
            let spec = RegularizerSpec::new(2, 1, 0.1, 0.1).unwrap();
            let cfg = MmtflConfig { loss, ..Default::default() };
            let m = fit_mmtfl(&tasks, &names(2), &spec, &cfg).unwrap();
            for j in 0..2 {
                assert!(m.c[j] >= 0.0);
                for t in 0..2 {
                    assert_eq!(m.alphas[j][t], m.c[j] * m.betas[j][t]);
                }
            }
            assert!(m.max_relative_increase() <= 1e-9);
            assert!(m.diagnostics.len() >= 2);
        }
    }

    #[test]
    fn rebalance_keeps_products_and_lowers_penalty() {
        let spec = RegularizerSpec::new(2, 1, 0.5, 0.01).unwrap();
        let mut c = array![3.0, 0.0, 0.2];
        let mut betas = vec![array![0.1, 1.0, 2.0], array![-0.3, 0.0, 1.0]];
        let before: Vec<f64> = (0..3).map(|j| c[j] * betas[0][j]).collect();
        let pen = |c: &Array1<f64>, b: &[Array1<f64>]| {
            spec.gamma2 * c.sum() + spec.gamma1 * b.iter().map(|v| v.dot(v)).sum::<f64>()
        };
        let p0 = pen(&c, &betas);
        rebalance(&mut c, &mut betas, &spec);
        assert!(pen(&c, &betas) < p0);
        for j in 0..3 {
            assert!((c[j] * betas[0][j] - before[j]).abs() < 1e-12);
        }
        assert_eq!(c[1], 0.0);
        assert_eq!(betas[0][1], 1.0);
    }

    #[test]
    fn rebalanced_and_plain_fits_agree() {
        let tasks = [toy_task("a"), toy_task("b")];
        let spec = RegularizerSpec::new(2, 2, 0.3, 0.2).unwrap();
        let tight_cfg = |rebalance| MmtflConfig {
            rebalance,
            outer_tol: 1e-12,
            outer_max_iter: 5000,
            inner: tight(),
            ..Default::default()
        };
        let a = fit_mmtfl(&tasks, &names(2), &spec, &tight_cfg(true)).unwrap();
        let b = fit_mmtfl(&tasks, &names(2), &spec, &tight_cfg(false)).unwrap();
        for (x, y) in a.alphas.iter().flatten().zip(b.alphas.iter().flatten()) {
            assert!((x - y).abs() < 1e-4, "{x} vs {y}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = RegularizerSpec::new(2, 1, 1.0, 1.0).unwrap();
        let cfg = MmtflConfig::default();
        assert!(fit_mmtfl(&[], &[], &spec, &cfg).is_err());
        let one_class = TaskData::new("x", array![[1.0], [2.0]], array![1.0, 1.0]).unwrap();
        assert!(matches!(fit_mmtfl(&[one_class], &names(1), &spec, &cfg), Err(Error::Domain(_))));
        assert!(RegularizerSpec::new(3, 1, 1.0, 1.0).is_err());
        assert!(RegularizerSpec::new(2, 1, 0.0, 1.0).is_err());
        assert!(RegularizerSpec { p: 2, k: 1, gamma1: 0.0, gamma2: 0.0 }.validate(true).is_ok());
    }

    #[test]
    fn deterministic_diagnostics() {
        let tasks = [toy_task("a"), toy_task("b")];
        let spec = RegularizerSpec::new(1, 2, 0.05, 0.2).unwrap();
        let a = fit_mmtfl(&tasks, &names(2), &spec, &MmtflConfig::default()).unwrap();
        let b = fit_mmtfl(&tasks, &names(2), &spec, &MmtflConfig::default()).unwrap();
        assert_eq!(a, b);
    }
}
