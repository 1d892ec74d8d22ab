#![allow(dead_code)]

use gaitmtl::solver::{InnerConfig, TaskData};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.sample(StandardNormal))
}

pub fn normal_vector(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    Array1::from_shape_fn(n, |_| rng.sample(StandardNormal))
}

/// Labels in {-1, +1} from a random linear rule plus noise, with both classes present.
pub fn random_task(rng: &mut ChaCha8Rng, name: &str, n: usize, d: usize) -> TaskData {
    loop {
        let x = normal_matrix(rng, n, d);
        let w = normal_vector(rng, d);
        let y: Array1<f64> = x
            .dot(&w)
            .iter()
            .map(|v| if v + 0.5 * rng.sample::<f64, _>(StandardNormal) >= 0.0 { 1.0 } else { -1.0 })
            .collect();
        let pos = y.iter().filter(|v| **v > 0.0).count();
        if pos > 0 && pos < n {
            return TaskData::new(name, x, y).unwrap();
        }
    }
}

pub fn names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("f{j}")).collect()
}

/// Inner settings that iterate until the proximal map stalls, for closed-form
/// and grid comparisons.
pub fn tight_inner() -> InnerConfig {
    InnerConfig {
        tol: 0.0,
        max_iter: 200_000,
        ..InnerConfig::default()
    }
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = b.len();
    let mut m = a.clone();
    let mut r = b.clone();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[[i, col]].abs().total_cmp(&m[[j, col]].abs())).unwrap();
        for k in 0..n {
            m.swap([col, k], [piv, k]);
        }
        r.swap(col, piv);
        for row in col + 1..n {
            let f = m[[row, col]] / m[[col, col]];
            for k in col..n {
                m[[row, k]] -= f * m[[col, k]];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[[row, k]] * x[k]).sum();
        x[row] = (r[row] - s) / m[[row, row]];
    }
    x
}
