//! Per-cycle and per-trial gait measures.

use crate::error::{Error, Result};
use crate::segmentation::{ContactSeries, GaitCycle};

/// Cosine between a per-phase count vector and the all-ones vector.
///
/// Equals 1 exactly when every phase holds the same number of observations
/// and falls toward `1/sqrt(K)` as the counts concentrate in one phase.
pub fn phase_symmetry(counts: &[usize]) -> Result<f64> {
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::domain("phase symmetry needs at least one positive count"));
    }
    let k = counts.len() as f64;
    let sum: f64 = counts.iter().map(|&c| c as f64).sum();
    let norm = counts.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
    Ok((sum / (norm * k.sqrt())).min(1.0))
}

/// Steps per minute.
pub fn cadence(num_stance_phases: usize, duration_minutes: f64) -> Result<f64> {
    if !(duration_minutes > 0.0) {
        return Err(Error::domain(format!(
            "trial duration must be positive, got {duration_minutes} min"
        )));
    }
    Ok(num_stance_phases as f64 / duration_minutes)
}

pub fn stance_ratio(cycle: &GaitCycle) -> f64 {
    cycle.stance_len() as f64 / cycle.len() as f64
}

/// Mean double- and single-support fractions over the given cycles.
pub fn support_ratios(
    left: &ContactSeries,
    right: &ContactSeries,
    cycles: &[GaitCycle],
) -> Result<(f64, f64)> {
    if left.len() != right.len() {
        return Err(Error::domain("contact series are not aligned"));
    }
    if cycles.is_empty() {
        return Err(Error::TrialRejected("no complete gait cycle for support ratios".into()));
    }
    let mut double = 0.0;
    let mut single = 0.0;
    for cycle in cycles {
        let (mut both, mut one) = (0usize, 0usize);
        for i in cycle.indices() {
            match (left.is_contact(i), right.is_contact(i)) {
                (true, true) => both += 1,
                (true, false) | (false, true) => one += 1,
                _ => {}
            }
        }
        double += both as f64 / cycle.len() as f64;
        single += one as f64 / cycle.len() as f64;
    }
    let n = cycles.len() as f64;
    Ok((double / n, single / n))
}

/// Maximum and minimum of `Meta12 - Meta45` over one cycle.
pub fn balance_features(meta12: &[f64], meta45: &[f64]) -> Result<(f64, f64)> {
    if meta12.is_empty() || meta12.len() != meta45.len() {
        return Err(Error::domain("balance features need a non-empty, aligned cycle"));
    }
    let (mut max, mut min) = (f64::NEG_INFINITY, f64::INFINITY);
    for (a, b) in meta12.iter().zip(meta45) {
        let d = a - b;
        max = max.max(d);
        min = min.min(d);
    }
    Ok((max, min))
}

/// Peak heel force over the first half of stance and peak toe force over
/// the last half. Both slices cover the stance samples of one cycle.
pub fn strength_features(heel: &[f64], toe: &[f64]) -> Result<(f64, f64)> {
    let m = heel.len();
    if m == 0 || toe.len() != m {
        return Err(Error::domain("strength features need a non-empty stance"));
    }
    let first_half = &heel[..m.div_ceil(2)];
    let last_half = &toe[m / 2..];
    let heel_max = first_half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let toe_max = last_half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((heel_max, toe_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Foot;
    use crate::segmentation::ContactState::{self, Airborne, Contact};
    use proptest::prelude::*;

    #[test]
    fn symmetry_examples() {
        assert!((phase_symmetry(&[5, 5, 5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((phase_symmetry(&[10, 0, 0]).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let expected = 4.0 / (10f64.sqrt() * 2f64.sqrt());
        assert!((phase_symmetry(&[3, 1]).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.89443).abs() < 1e-5);
        assert!(phase_symmetry(&[0, 0]).is_err());
        assert!(phase_symmetry(&[]).is_err());
    }

    #[test]
    fn cadence_examples() {
        assert_eq!(cadence(60, 0.5).unwrap(), 120.0);
        assert_eq!(cadence(0, 3.0).unwrap(), 0.0);
        assert_eq!(cadence(50, 1.0).unwrap(), 50.0);
        assert!(cadence(10, 0.0).is_err());
    }

    fn cycle(start: usize, stance_end: usize, end: usize) -> GaitCycle {
        GaitCycle {
            foot: Foot::Left,
            start_idx: start,
            end_idx: end,
            stance_end_idx: stance_end,
        }
    }

    #[test]
    fn stance_ratio_examples() {
        assert!((stance_ratio(&cycle(0, 60, 100)) - 0.6).abs() < 1e-15);
        assert_eq!(stance_ratio(&cycle(0, 1, 2)), 0.5);
        assert!((stance_ratio(&cycle(0, 99, 100)) - 0.99).abs() < 1e-15);
    }

    fn series(foot: Foot, states: &[ContactState]) -> ContactSeries {
        ContactSeries::new(foot, states.to_vec())
    }

    #[test]
    fn support_examples() {
        let all = vec![Contact; 10];
        let cy = [cycle(0, 10, 10)];
        let (d, s) = support_ratios(&series(Foot::Left, &all), &series(Foot::Right, &all), &cy).unwrap();
        assert_eq!((d, s), (1.0, 0.0));

        // left contact 0..6, right contact 4..10 -> overlap 4..6 = 20%
        let l: Vec<_> = (0..10).map(|i| if i < 6 { Contact } else { Airborne }).collect();
        let r: Vec<_> = (0..10).map(|i| if i >= 4 { Contact } else { Airborne }).collect();
        let (d, s) = support_ratios(&series(Foot::Left, &l), &series(Foot::Right, &r), &[cycle(0, 6, 10)]).unwrap();
        assert!((d - 0.2).abs() < 1e-15);
        assert!((s - 0.8).abs() < 1e-15);

        let l: Vec<_> = (0..10).map(|i| if i < 5 { Contact } else { Airborne }).collect();
        let r: Vec<_> = (0..10).map(|i| if i >= 5 { Contact } else { Airborne }).collect();
        let (d, s) = support_ratios(&series(Foot::Left, &l), &series(Foot::Right, &r), &[cycle(0, 5, 10)]).unwrap();
        assert_eq!((d, s), (0.0, 1.0));

        assert!(matches!(
            support_ratios(&series(Foot::Left, &l), &series(Foot::Right, &r), &[]),
            Err(Error::TrialRejected(_))
        ));
    }

    #[test]
    fn balance_examples() {
        assert_eq!(balance_features(&[2.0, 3.0], &[1.0, 5.0]).unwrap(), (1.0, -2.0));
        assert_eq!(balance_features(&[0.7, 0.2], &[0.7, 0.2]).unwrap(), (0.0, 0.0));
        let (mx, mn) = balance_features(&[0.4], &[0.1]).unwrap();
        assert!((mx - 0.3).abs() < 1e-15 && (mn - 0.3).abs() < 1e-15);
        assert!(balance_features(&[], &[]).is_err());
    }

    #[test]
    fn strength_examples() {
        let heel = [0.3, 1.2, 0.8, 0.2, 0.0, 0.0];
        let toe = [0.0, 0.0, 0.1, 0.4, 0.9, 0.5];
        assert_eq!(strength_features(&heel, &toe).unwrap(), (1.2, 0.9));
        let (_, t) = strength_features(&heel, &[0.0; 6]).unwrap();
        assert_eq!(t, 0.0);
        // ramp toe: peak at the last sample
        let ramp: Vec<f64> = (0..10).map(|i| 0.1 * i as f64).collect();
        let (_, t) = strength_features(&[0.0; 10], &ramp).unwrap();
        assert!((t - 0.9).abs() < 1e-15);
        // a late heel peak is outside the heel-strike window
        let (h, _) = strength_features(&[0.1, 0.1, 0.1, 2.0], &[0.0; 4]).unwrap();
        assert_eq!(h, 0.1);
        assert!(strength_features(&[], &[]).is_err());
    }

    proptest! {
        #[test]
        fn symmetry_scale_and_permutation_invariant(
            counts in prop::collection::vec(0usize..50, 1..12),
            scale in 1usize..9,
            rot in 0usize..12,
        ) {
            prop_assume!(counts.iter().any(|&c| c > 0));
            let base = phase_symmetry(&counts).unwrap();
            prop_assert!(base > 0.0 && base <= 1.0);
            let scaled: Vec<usize> = counts.iter().map(|c| c * scale).collect();
            prop_assert!((phase_symmetry(&scaled).unwrap() - base).abs() < 1e-12);
            let mut rotated = counts.clone();
            let n = rotated.len();
            rotated.rotate_left(rot % n);
            prop_assert!((phase_symmetry(&rotated).unwrap() - base).abs() < 1e-12);
        }

        #[test]
        fn support_ratios_sum_at_most_one(
            l in prop::collection::vec(any::<bool>(), 20),
            r in prop::collection::vec(any::<bool>(), 20),
        ) {
            let to = |v: &Vec<bool>| v.iter().map(|&b| if b { Contact } else { Airborne }).collect::<Vec<_>>();
            let (d, s) = support_ratios(&series(Foot::Left, &to(&l)), &series(Foot::Right, &to(&r)), &[cycle(0, 1, 10), cycle(10, 11, 20)]).unwrap();
            prop_assert!(d >= 0.0 && s >= 0.0 && d + s <= 1.0 + 1e-15);
        }
    }
}
