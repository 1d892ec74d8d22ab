use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Share of a foot's observations the merged swing phase must exceed.
pub const SWING_SHARE_THRESHOLD: f64 = 0.10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwingAssignment {
    pub swing_phase_ids: BTreeSet<usize>,
    pub num_swing_phases: usize,
    pub swing_share: f64,
    /// Swing phases in merge order (ascending mean norm).
    pub merge_order: Vec<usize>,
}

/// Pick the phases that make up the swing phase.
///
/// Phases are sorted by the mean Euclidean norm of their samples (ties by
/// phase id) and merged one at a time until the merged set holds more than
/// 10% of all samples.
pub fn identify_swing(labels: &[usize], samples: &[[f64; 4]]) -> Result<SwingAssignment> {
    if labels.is_empty() {
        return Err(Error::domain("swing identification needs at least one sample"));
    }
    if labels.len() != samples.len() {
        return Err(Error::domain(format!(
            "{} labels for {} samples",
            labels.len(),
            samples.len()
        )));
    }
    let mut stats: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (&id, x) in labels.iter().zip(samples) {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let e = stats.entry(id).or_insert((0.0, 0));
        e.0 += norm;
        e.1 += 1;
    }
    let mut phases: Vec<(usize, f64, usize)> = stats
        .into_iter()
        .map(|(id, (sum, count))| (id, sum / count as f64, count))
        .collect();
    phases.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let total = labels.len() as f64;
    let mut merged = 0usize;
    let mut order = Vec::new();
    for (id, _, count) in phases {
        order.push(id);
        merged += count;
        if merged as f64 / total > SWING_SHARE_THRESHOLD {
            break;
        }
    }
    Ok(SwingAssignment {
        swing_phase_ids: order.iter().copied().collect(),
        num_swing_phases: order.len(),
        swing_share: merged as f64 / total,
        merge_order: order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Build labels/samples with `count` samples per phase at norm `norm`.
    fn build(phases: &[(usize, f64, usize)]) -> (Vec<usize>, Vec<[f64; 4]>) {
        let mut labels = Vec::new();
        let mut samples = Vec::new();
        for &(id, norm, count) in phases {
            for _ in 0..count {
                labels.push(id);
                samples.push([norm, 0.0, 0.0, 0.0]);
            }
        }
        (labels, samples)
    }

    #[test]
    fn merges_until_share_exceeds_ten_percent() {
        let (l, s) = build(&[(0, 0.1, 8), (1, 0.3, 5), (2, 5.0, 87)]);
        let a = identify_swing(&l, &s).unwrap();
        assert_eq!(a.swing_phase_ids, BTreeSet::from([0, 1]));
        assert_eq!(a.num_swing_phases, 2);
        assert!((a.swing_share - 0.13).abs() < 1e-12);
    }

    #[test]
    fn single_phase() {
        let (l, s) = build(&[(4, 0.5, 20)]);
        let a = identify_swing(&l, &s).unwrap();
        assert_eq!(a.swing_phase_ids, BTreeSet::from([4]));
        assert_eq!(a.num_swing_phases, 1);
        assert_eq!(a.swing_share, 1.0);
    }

    #[test]
    fn first_phase_already_exceeds() {
        let (l, s) = build(&[(0, 0.1, 40), (1, 2.0, 60)]);
        let a = identify_swing(&l, &s).unwrap();
        assert_eq!(a.swing_phase_ids, BTreeSet::from([0]));
        assert!((a.swing_share - 0.4).abs() < 1e-12);
    }

    #[test]
    fn exactly_ten_percent_is_not_enough() {
        let (l, s) = build(&[(0, 0.1, 10), (1, 0.2, 5), (2, 3.0, 85)]);
        let a = identify_swing(&l, &s).unwrap();
        assert_eq!(a.num_swing_phases, 2);
    }

    #[test]
    fn ties_broken_by_phase_id() {
        let (l, s) = build(&[(7, 0.1, 6), (3, 0.1, 6), (1, 1.0, 88)]);
        let a = identify_swing(&l, &s).unwrap();
        assert_eq!(a.merge_order, vec![3, 7]);
    }

    #[test]
    fn empty_and_mismatched_inputs() {
        assert!(identify_swing(&[], &[]).is_err());
        assert!(identify_swing(&[0, 1], &[[0.0; 4]]).is_err());
    }

    proptest! {
        #[test]
        fn renaming_and_minimality(
            phases in prop::collection::vec((0.0f64..5.0, 1usize..30), 1..8),
            shift in 1usize..100,
        ) {
            // distinct norms so renaming cannot change tie order
            let spec: Vec<(usize, f64, usize)> = phases.iter().enumerate()
                .map(|(i, &(n, c))| (i, n + i as f64 * 1e-3, c)).collect();
            let (l, s) = build(&spec);
            let a = identify_swing(&l, &s).unwrap();

            let renamed: Vec<usize> = l.iter().map(|&id| id * 3 + shift).collect();
            let b = identify_swing(&renamed, &s).unwrap();
            prop_assert_eq!(a.num_swing_phases, b.num_swing_phases);
            prop_assert_eq!(a.swing_share, b.swing_share);
            let mapped: BTreeSet<usize> = a.swing_phase_ids.iter().map(|&id| id * 3 + shift).collect();
            prop_assert_eq!(&mapped, &b.swing_phase_ids);

            prop_assert!(a.swing_share > SWING_SHARE_THRESHOLD);
            if a.num_swing_phases > 1 {
                let last = *a.merge_order.last().unwrap();
                let last_count = l.iter().filter(|&&id| id == last).count() as f64;
                let without = a.swing_share - last_count / l.len() as f64;
                prop_assert!(without <= SWING_SHARE_THRESHOLD + 1e-12);
            }
        }
    }
}
