//! Feature-space tasks with a planted sharing structure.

use std::collections::BTreeSet;

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{sign_label, TaskData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingSpec {
    pub d: usize,
    pub n_tasks: usize,
    pub shared_support: BTreeSet<usize>,
    pub private_supports: Vec<BTreeSet<usize>>,
    pub noise_sd: f64,
    pub n_per_task: usize,
    pub seed: u64,
}

impl SharingSpec {
    /// Draw a shared support of `n_shared` features and, per task, `n_private`
    /// further features outside it.
    pub fn random(
        d: usize,
        n_tasks: usize,
        n_shared: usize,
        n_private: usize,
        n_per_task: usize,
        noise_sd: f64,
        seed: u64,
    ) -> Result<Self> {
        if n_shared + n_private > d {
            return Err(Error::domain(format!(
                "{n_shared} shared + {n_private} private features exceed d = {d}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a11);
        let shared: BTreeSet<usize> = sample(&mut rng, d, n_shared).into_iter().collect();
        let rest: Vec<usize> = (0..d).filter(|j| !shared.contains(j)).collect();
        let private_supports = (0..n_tasks)
            .map(|_| {
                sample(&mut rng, rest.len(), n_private)
                    .into_iter()
                    .map(|i| rest[i])
                    .collect()
            })
            .collect();
        Ok(SharingSpec {
            d,
            n_tasks,
            shared_support: shared,
            private_supports,
            noise_sd,
            n_per_task,
            seed,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n_tasks == 0 || self.n_per_task == 0 {
            return Err(Error::domain("d, task count and samples per task must be at least 1"));
        }
        if self.private_supports.len() != self.n_tasks {
            return Err(Error::domain("one private support per task is required"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::domain(format!("noise_sd must be non-negative, got {}", self.noise_sd)));
        }
        let out_of_range = self
            .shared_support
            .iter()
            .chain(self.private_supports.iter().flatten())
            .any(|&j| j >= self.d);
        if out_of_range {
            return Err(Error::domain("support index out of range"));
        }
        if self.union_support().is_empty() {
            return Err(Error::domain("the union of all supports is empty"));
        }
        Ok(())
    }

    pub fn union_support(&self) -> BTreeSet<usize> {
        self.shared_support
            .iter()
            .chain(self.private_supports.iter().flatten())
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultitaskTruth {
    pub spec: SharingSpec,
    /// Non-zero exactly on the union of all supports.
    pub c: Vec<f64>,
    /// One vector per task, non-zero exactly on shared ∪ private_t.
    pub betas: Vec<Vec<f64>>,
    pub alphas: Vec<Vec<f64>>,
    /// Noise added to each task's linear predictor before taking signs.
    pub noise: Vec<Vec<f64>>,
}

impl MultitaskTruth {
    pub fn c_support(&self) -> BTreeSet<usize> {
        (0..self.c.len()).filter(|&j| self.c[j] != 0.0).collect()
    }
}

fn magnitude<R: Rng>(rng: &mut R) -> f64 {
    let m = rng.random_range(0.5..1.5);
    if rng.random::<bool>() {
        m
    } else {
        -m
    }
}

pub fn gen_multitask(spec: &SharingSpec) -> Result<(Vec<TaskData>, MultitaskTruth)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let union = spec.union_support();
    let c: Vec<f64> = (0..spec.d)
        .map(|j| if union.contains(&j) { rng.random_range(0.5..1.5) } else { 0.0 })
        .collect();
    let noise_dist = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::domain(e.to_string()))?;

    let mut tasks = Vec::with_capacity(spec.n_tasks);
    let mut betas = Vec::with_capacity(spec.n_tasks);
    let mut alphas = Vec::with_capacity(spec.n_tasks);
    let mut noises = Vec::with_capacity(spec.n_tasks);
    for (t, private) in spec.private_supports.iter().enumerate() {
        let beta: Vec<f64> = (0..spec.d)
            .map(|j| {
                if spec.shared_support.contains(&j) || private.contains(&j) {
                    magnitude(&mut rng)
                } else {
                    0.0
                }
            })
            .collect();
        let alpha: Array1<f64> = beta.iter().zip(&c).map(|(b, c)| b * c).collect();
        let x = Array2::from_shape_simple_fn((spec.n_per_task, spec.d), || StandardNormal.sample(&mut rng));
        let noise: Vec<f64> = (0..spec.n_per_task).map(|_| noise_dist.sample(&mut rng)).collect();
        let y: Array1<f64> = x
            .dot(&alpha)
            .iter()
            .zip(&noise)
            .map(|(s, e)| sign_label(s + e))
            .collect();
        tasks.push(TaskData::new(format!("task{t}"), x, y)?);
        betas.push(beta);
        alphas.push(alpha.to_vec());
        noises.push(noise);
    }
    Ok((
        tasks,
        MultitaskTruth {
            spec: spec.clone(),
            c,
            betas,
            alphas,
            noise: noises,
        },
    ))
}

/// Precision, recall and F1 of an estimated support against the truth.
pub fn support_f1(estimated: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> (f64, f64, f64) {
    let tp = estimated.intersection(truth).count() as f64;
    let precision = if estimated.is_empty() { 0.0 } else { tp / estimated.len() as f64 };
    let recall = if truth.is_empty() { 0.0 } else { tp / truth.len() as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    (precision, recall, f1)
}
