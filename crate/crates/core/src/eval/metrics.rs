use crate::error::{Error, Result};

/// Area under the ROC curve as the fraction of (positive, negative) pairs
/// ranked correctly, ties counting one half.
///
/// Computed from midranks in `O(n log n)`; the result is exact for the
/// pair-counting definition because every term is a multiple of one half.
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::domain(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if let Some(s) = scores.iter().find(|s| s.is_nan()) {
        return Err(Error::domain(format!("score {s} is not comparable")));
    }
    let n_pos = labels.iter().filter(|l| **l > 0.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::domain(format!(
            "AUC needs both classes ({n_pos} positive, {n_neg} negative)"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the rank sum of positives, with tied groups getting the doubled midrank.
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let doubled_midrank = (i + 1 + j + 1) as u128;
        let pos_in_group = order[i..=j].iter().filter(|&&k| labels[k] > 0.0).count() as u128;
        doubled_rank_sum += doubled_midrank * pos_in_group;
        i = j + 1;
    }
    let np = n_pos as u128;
    // 2·U = 2·R - n_pos (n_pos + 1)
    let doubled_u = doubled_rank_sum - np * (np + 1);
    Ok(doubled_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

/// Reference implementation by direct pair counting.
pub fn auc_pairwise(scores: &[f64], labels: &[f64]) -> Result<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] <= 0.0 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] > 0.0 {
                continue;
            }
            pairs += 1;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::domain("AUC needs both classes"));
    }
    Ok(wins / pairs as f64)
}

/// 2×2 counts with true class in rows and predicted class in columns,
/// positive class first.
pub type Confusion = [[u64; 2]; 2];

pub fn confusion(pred: &[f64], truth: &[f64]) -> Result<Confusion> {
    if pred.len() != truth.len() {
        return Err(Error::domain(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    let mut m = [[0u64; 2]; 2];
    for (p, t) in pred.iter().zip(truth) {
        let row = usize::from(*t <= 0.0);
        let col = usize::from(*p <= 0.0);
        m[row][col] += 1;
    }
    Ok(m)
}

pub fn add_confusion(a: &mut Confusion, b: &Confusion) {
    for r in 0..2 {
        for c in 0..2 {
            a[r][c] += b[r][c];
        }
    }
}

/// Mean and sample standard deviation; the deviation of a single value is 0.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.9, 0.8, 0.3], &[1.0, 1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.2, 0.8], &[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(auc(&[0.5, 0.5, 0.1], &[1.0, -1.0, -1.0]).unwrap(), 0.75);
        assert!(auc(&[0.1, 0.2], &[1.0, 1.0]).is_err());
        assert!(auc(&[0.1], &[1.0, -1.0]).is_err());
    }

    #[test]
    fn confusion_examples() {
        let truth = [1.0, 1.0, 1.0, -1.0, -1.0];
        assert_eq!(confusion(&truth, &truth).unwrap(), [[3, 0], [0, 2]]);
        assert_eq!(confusion(&[1.0; 5], &truth).unwrap(), [[3, 0], [2, 0]]);
        assert!(confusion(&[1.0], &truth).is_err());
    }

    #[test]
    fn mean_sd_cases() {
        assert_eq!(mean_sd(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    fn scored() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..=8)
            .prop_flat_map(|n| {
                (
                    prop::collection::vec(0i32..5, n),
                    prop::collection::vec(any::<bool>(), n),
                )
            })
            .prop_filter("both classes", |(_, l)| l.iter().any(|b| *b) && l.iter().any(|b| !*b))
            .prop_map(|(s, l)| {
                (
                    s.into_iter().map(f64::from).collect(),
                    l.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect(),
                )
            })
    }

    proptest! {
        #[test]
        fn auc_matches_pair_counting((s, l) in scored()) {
            prop_assert_eq!(auc(&s, &l).unwrap(), auc_pairwise(&s, &l).unwrap());
        }

        #[test]
        fn auc_monotone_invariance((s, l) in scored()) {
            let t: Vec<f64> = s.iter().map(|v| (v * 0.7).exp() - 3.0).collect();
            prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        }

        #[test]
        fn auc_negation_without_ties(l in prop::collection::vec(any::<bool>(), 2..8)) {
            prop_assume!(l.iter().any(|b| *b) && l.iter().any(|b| !*b));
            let labels: Vec<f64> = l.iter().map(|b| if *b { 1.0 } else { -1.0 }).collect();
            let s: Vec<f64> = (0..labels.len()).map(|i| (i * 7 % 11) as f64).collect();
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            let a = auc(&s, &labels).unwrap();
            prop_assert!((a - (1.0 - auc(&neg, &labels).unwrap())).abs() < 1e-15);
        }

        #[test]
        fn confusion_row_sums((s, l) in scored()) {
            let pred: Vec<f64> = s.iter().map(|v| if *v >= 2.0 { 1.0 } else { -1.0 }).collect();
            let m = confusion(&pred, &l).unwrap();
            let pos = l.iter().filter(|v| **v > 0.0).count() as u64;
            prop_assert_eq!(m[0][0] + m[0][1], pos);
            prop_assert_eq!(m[1][0] + m[1][1], l.len() as u64 - pos);
        }
    }
}
