use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    RandomPartition,
    LeaveOneSubjectOut,
    KFold,
}

/// How to split data for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub scheme: Scheme,
    pub ratio: Option<f64>,
    pub folds: Option<usize>,
    pub seed: u64,
}

impl SplitPlan {
    pub fn new(scheme: Scheme, ratio: Option<f64>, folds: Option<usize>, seed: u64) -> Result<Self> {
        match (scheme, ratio, folds) {
            (Scheme::RandomPartition, Some(r), None) if r > 0.0 && r < 1.0 => {}
            (Scheme::KFold, None, Some(k)) if k >= 2 => {}
            (Scheme::LeaveOneSubjectOut, None, None) => {}
            _ => {
                return Err(Error::domain(format!(
                    "invalid split plan: {scheme:?} with ratio {ratio:?} and folds {folds:?}"
                )))
            }
        }
        Ok(SplitPlan {
            scheme,
            ratio,
            folds,
            seed,
        })
    }
}

/// Train and test positions into some index space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Independent seed for a numbered sub-stream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    // splitmix64 finalizer over the combined input
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn class_positions(labels: &[f64]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, l) in labels.iter().enumerate() {
        by_class[usize::from(*l <= 0.0)].push(i);
    }
    by_class
}

/// Draw a training subset holding `round(ratio · n_c)` members of each class.
pub fn stratified_split(labels: &[f64], ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::domain(format!("ratio must lie in (0, 1), got {ratio}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split {
        train: Vec::new(),
        test: Vec::new(),
    };
    for (class, mut members) in class_positions(labels).into_iter().enumerate() {
        let n = members.len();
        let n_train = (ratio * n as f64).round() as usize;
        if n_train == 0 || n_train >= n {
            return Err(Error::domain(format!(
                "ratio {ratio} leaves an empty {} part for the {} class ({n} samples)",
                if n_train == 0 { "training" } else { "test" },
                if class == 0 { "positive" } else { "negative" },
            )));
        }
        members.shuffle(&mut rng);
        split.train.extend_from_slice(&members[..n_train]);
        split.test.extend_from_slice(&members[n_train..]);
    }
    split.train.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Stratified `k`-fold partition; every class needs at least `k` members.
pub fn stratified_kfold(labels: &[f64], k: usize, seed: u64) -> Result<Vec<Split>> {
    if k < 2 {
        return Err(Error::domain(format!("need at least 2 folds, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0usize; labels.len()];
    for mut members in class_positions(labels) {
        if members.len() < k {
            return Err(Error::domain(format!(
                "a class has {} samples, fewer than {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            fold_of[i] = pos % k;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Split { train, test }
        })
        .collect())
}
