//! Trial-level feature extraction.
//!
//! Per-cycle measures (stance ratio, balance, strength, phase symmetry) are
//! averaged over a trial's complete cycles. Features derived from phase
//! hypotheses are weighted by hypothesis weight, so a single-hypothesis
//! detector reduces to plain per-labeling values.

use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gait::{balance_features, cadence, phase_symmetry, stance_ratio, strength_features, support_ratios};
use super::vector::{FeatureVector, FootFeatures};
use crate::data::{channel, normalize_by_weight, Foot, Subject, Trial};
use crate::error::{Error, Result};
use crate::segmentation::{
    detect_contact, expected_num_phases, identify_swing, segment_cycles, ContactSeries, DetectContext,
    DetectorRegistry, GaitCycle, GmmOptions, PhaseDetector, PhaseHypothesis, PhaseHypothesisSet,
    SwingAssignment, DEFAULT_HYSTERESIS, DEFAULT_THRESHOLD,
};

pub const DEFAULT_MIN_CYCLES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub threshold: f64,
    pub hysteresis: f64,
    pub min_cycles: usize,
    pub detector: String,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            threshold: DEFAULT_THRESHOLD,
            hysteresis: DEFAULT_HYSTERESIS,
            min_cycles: DEFAULT_MIN_CYCLES,
            detector: "gmm-bic".into(),
            k_min: 2,
            k_max: 12,
            restarts: 20,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn gmm_options(&self) -> GmmOptions {
        GmmOptions {
            k_min: self.k_min,
            k_max: self.k_max,
            restarts: self.restarts,
            seed: self.seed,
            ..GmmOptions::default()
        }
    }
}

/// Everything segmentation produced for one foot of one trial.
#[derive(Debug, Clone)]
pub struct FootArtifacts {
    pub contact: ContactSeries,
    pub cycles: Vec<GaitCycle>,
    pub phases: PhaseHypothesisSet,
    /// One swing assignment per hypothesis, in hypothesis order.
    pub swings: Vec<SwingAssignment>,
}

/// Count of each of `ids` among `labels[range]`.
fn phase_counts(labels: &[usize], ids: &[usize], range: std::ops::Range<usize>) -> Vec<usize> {
    let mut counts = vec![0usize; ids.len()];
    for &l in &labels[range] {
        if let Ok(pos) = ids.binary_search(&l) {
            counts[pos] += 1;
        }
    }
    counts
}

fn mean<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    sum / n as f64
}

fn hypothesis_phase_symmetry(h: &PhaseHypothesis, cycles: &[GaitCycle]) -> Result<f64> {
    let ids = h.phase_ids();
    let per_cycle = cycles
        .iter()
        .map(|c| phase_symmetry(&phase_counts(&h.labels, &ids, c.indices())))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean(per_cycle))
}

fn hypothesis_swing_symmetry(h: &PhaseHypothesis, swing: &SwingAssignment) -> Result<f64> {
    let ids: Vec<usize> = swing.swing_phase_ids.iter().copied().collect();
    phase_symmetry(&phase_counts(&h.labels, &ids, 0..h.labels.len()))
}

fn foot_features(trial: &Trial, art: &FootArtifacts) -> Result<FootFeatures> {
    let foot = art.contact.foot;
    let cycles = &art.cycles;

    let mut phase_sym = 0.0;
    let mut swing_sym = 0.0;
    let mut num_swing = 0.0;
    for (h, swing) in art.phases.hypotheses.iter().zip(&art.swings) {
        phase_sym += h.weight * hypothesis_phase_symmetry(h, cycles)?;
        swing_sym += h.weight * hypothesis_swing_symmetry(h, swing)?;
        num_swing += h.weight * swing.num_swing_phases as f64;
    }

    let channel_of = |range: std::ops::Range<usize>, ch: usize| -> Vec<f64> {
        trial.samples[range].iter().map(|s| s.foot(foot)[ch]).collect()
    };
    let mut balance = Vec::with_capacity(cycles.len());
    let mut strength = Vec::with_capacity(cycles.len());
    for c in cycles {
        balance.push(balance_features(
            &channel_of(c.indices(), channel::META12),
            &channel_of(c.indices(), channel::META45),
        )?);
        strength.push(strength_features(
            &channel_of(c.stance_indices(), channel::HEEL),
            &channel_of(c.stance_indices(), channel::TOE),
        )?);
    }

    Ok(FootFeatures {
        expected_num_phases: expected_num_phases(&art.phases)?,
        phase_symmetry: phase_sym,
        num_swing_phases: num_swing,
        swing_symmetry: swing_sym,
        stance_ratio: mean(cycles.iter().map(stance_ratio)),
        balance_max_diff: mean(balance.iter().map(|b| b.0)),
        balance_min_diff: mean(balance.iter().map(|b| b.1)),
        strength_heel_max: mean(strength.iter().map(|s| s.0)),
        strength_toe_max: mean(strength.iter().map(|s| s.1)),
    })
}

/// Assemble the feature vector of a weight-normalized trial from its
/// per-foot segmentation artifacts.
pub fn extract_feature_vector(
    trial: &Trial,
    left: &FootArtifacts,
    right: &FootArtifacts,
    min_cycles: usize,
) -> Result<FeatureVector> {
    for art in [left, right] {
        check_cycles(trial, art.contact.foot, &art.cycles, min_cycles)?;
        if art.swings.len() != art.phases.hypotheses.len() {
            return Err(Error::domain("one swing assignment per hypothesis is required"));
        }
    }
    let stance_phases = left.contact.onsets().len() + right.contact.onsets().len();
    let all_cycles: Vec<GaitCycle> = left.cycles.iter().chain(&right.cycles).copied().collect();
    let (double, single) = support_ratios(&left.contact, &right.contact, &all_cycles)?;
    let fv = FeatureVector {
        left: foot_features(trial, left)?,
        right: foot_features(trial, right)?,
        cadence: cadence(stance_phases, trial.duration_secs() / 60.0)?,
        double_support_ratio: double,
        single_support_ratio: single,
    };
    fv.validate()?;
    Ok(fv)
}

fn check_cycles(trial: &Trial, foot: Foot, cycles: &[GaitCycle], min_cycles: usize) -> Result<()> {
    if cycles.len() < min_cycles {
        return Err(Error::TrialRejected(format!(
            "trial `{}` has {} complete {foot} cycles, need {min_cycles}",
            trial.trial_id,
            cycles.len()
        )));
    }
    Ok(())
}

/// Stable 64-bit FNV-1a hash, used to derive per-trial seeds.
pub(crate) fn fnv1a(parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for p in parts {
        for b in p.bytes().chain(std::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h
}

/// Normalization, segmentation, phase detection and feature extraction for
/// one trial at a time.
pub struct Pipeline {
    pub config: PipelineConfig,
    detector: Arc<dyn PhaseDetector>,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        Self::with_registry(config, &DetectorRegistry::default())
    }

    pub fn with_registry(config: PipelineConfig, registry: &DetectorRegistry) -> Result<Self> {
        let detector = registry.build(&config.detector, &config.gmm_options())?;
        Ok(Pipeline { config, detector })
    }

    pub fn with_detector(config: PipelineConfig, detector: Arc<dyn PhaseDetector>) -> Self {
        Pipeline { config, detector }
    }

    /// Contact detection and cycle segmentation of one foot.
    pub fn segment(&self, trial: &Trial, foot: Foot) -> Result<(ContactSeries, Vec<GaitCycle>)> {
        let contact = detect_contact(trial, foot, self.config.threshold, self.config.hysteresis)?;
        let cycles = segment_cycles(&contact);
        Ok((contact, cycles))
    }

    fn foot_artifacts(
        &self,
        trial: &Trial,
        contact: ContactSeries,
        cycles: Vec<GaitCycle>,
        source: Option<PathBuf>,
    ) -> Result<FootArtifacts> {
        let foot = contact.foot;
        let ctx = DetectContext {
            seed: fnv1a(&[&trial.subject_id, &trial.trial_id, foot.as_str()]),
            source,
        };
        let phases = self.detector.detect(trial, foot, &ctx)?;
        let samples = trial.foot_channels(foot);
        let swings = phases
            .hypotheses
            .iter()
            .map(|h| identify_swing(&h.labels, &samples))
            .collect::<Result<Vec<_>>>()?;
        Ok(FootArtifacts {
            contact,
            cycles,
            phases,
            swings,
        })
    }

    /// Run the full chain on a raw trial of `subject`.
    pub fn process(&self, trial: &Trial, subject: &Subject, source: Option<PathBuf>) -> Result<FeatureVector> {
        let normalized = normalize_by_weight(trial, subject)?;
        self.process_normalized(&normalized, source)
    }

    /// Run the chain on a trial already divided by body weight.
    pub fn process_normalized(&self, trial: &Trial, source: Option<PathBuf>) -> Result<FeatureVector> {
        let (lc, lcy) = self.segment(trial, Foot::Left)?;
        let (rc, rcy) = self.segment(trial, Foot::Right)?;
        // reject before the expensive phase detection
        check_cycles(trial, Foot::Left, &lcy, self.config.min_cycles)?;
        check_cycles(trial, Foot::Right, &rcy, self.config.min_cycles)?;
        let left = self.foot_artifacts(trial, lc, lcy, source.clone())?;
        let right = self.foot_artifacts(trial, rc, rcy, source)?;
        extract_feature_vector(trial, &left, &right, self.config.min_cycles)
    }

    /// Process many trials in parallel. Trials that fail are reported in
    /// `rejected` and left out; an unknown subject fails the whole batch.
    pub fn process_batch(&self, trials: &[(Trial, Option<PathBuf>)], subjects: &[Subject]) -> Result<BatchOutcome> {
        let results: Vec<(usize, Result<FeatureVector>)> = trials
            .par_iter()
            .enumerate()
            .map(|(i, (trial, source))| {
                let subject = subjects
                    .iter()
                    .find(|s| s.id == trial.subject_id)
                    .ok_or_else(|| Error::Join(trial.subject_id.clone()))?;
                Ok((i, self.process(trial, subject, source.clone())))
            })
            .collect::<Result<_>>()?;
        let mut outcome = BatchOutcome::default();
        for (i, r) in results {
            let trial = &trials[i].0;
            match r {
                Ok(fv) => outcome.rows.push((trial.subject_id.clone(), fv)),
                Err(e) => outcome.rejected.push(Rejection {
                    subject_id: trial.subject_id.clone(),
                    trial_id: trial.trial_id.clone(),
                    reason: e.to_string(),
                }),
            }
        }
        Ok(outcome)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub subject_id: String,
    pub trial_id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct BatchOutcome {
    /// Subject id and features of each accepted trial, in input order.
    pub rows: Vec<(String, FeatureVector)>,
    pub rejected: Vec<Rejection>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::GcfSample;
    use crate::segmentation::ContactState;

    /// Periodic two-foot trial built from a per-cycle stance length per foot.
    fn periodic_trial(cycle_len: usize, stance: &[usize], offset: usize, n_cycles: usize) -> Trial {
        let n = cycle_len * n_cycles + 1;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let mut s = GcfSample {
                t: i as f64 * 0.05,
                left: [0.0; 4],
                right: [0.0; 4],
            };
            let k = i / cycle_len;
            let j = i % cycle_len;
            if j < stance[k % stance.len()] {
                s.left = [0.1, 0.3, 0.2, 0.4];
            }
            if i >= offset {
                let jr = (i - offset) % cycle_len;
                if jr < stance[0] {
                    s.right = [0.1, 0.3, 0.2, 0.4];
                }
            }
            samples.push(s);
        }
        Trial {
            subject_id: "s".into(),
            trial_id: "t".into(),
            sampling_rate: 20.0,
            samples,
        }
    }

    fn artifacts(trial: &Trial, foot: Foot) -> FootArtifacts {
        let contact = detect_contact(trial, foot, 0.05, 0.01).unwrap();
        let cycles = segment_cycles(&contact);
        let labels: Vec<usize> = contact
            .states
            .iter()
            .map(|s| if *s == ContactState::Contact { 1 } else { 0 })
            .collect();
        let phases =
            PhaseHypothesisSet::new(foot, vec![PhaseHypothesis::new(1.0, labels.clone())], trial.len()).unwrap();
        let swings = vec![identify_swing(&labels, &trial.foot_channels(foot)).unwrap()];
        FootArtifacts {
            contact,
            cycles,
            phases,
            swings,
        }
    }

    #[test]
    fn identical_cycles_give_per_cycle_values() {
        let trial = periodic_trial(20, &[12], 10, 6);
        let fv = extract_feature_vector(&trial, &artifacts(&trial, Foot::Left), &artifacts(&trial, Foot::Right), 3)
            .unwrap();
        assert!((fv.left.stance_ratio - 0.6).abs() < 1e-12);
        assert_eq!(fv.left.expected_num_phases, 2.0);
        assert_eq!(fv.left.num_swing_phases, 1.0);
        assert_eq!(fv.left.swing_symmetry, 1.0);
        assert!((fv.left.balance_max_diff - 0.1).abs() < 1e-12);
        assert_eq!(fv.left.balance_min_diff, 0.0);
        assert!((fv.left.strength_heel_max - 0.4).abs() < 1e-12);
        // counts 12 contact / 8 swing per cycle
        let sym = (20.0) / ((144.0f64 + 64.0).sqrt() * 2f64.sqrt());
        assert!((fv.left.phase_symmetry - sym).abs() < 1e-12);
        // 2-sample overlaps at both ends of every cycle, except the first left
        // cycle where the right foot is still in its initial swing
        assert_eq!(fv.left.stance_ratio, fv.right.stance_ratio);
        assert!((fv.double_support_ratio - (0.1 + 10.0 * 0.2) / 11.0).abs() < 1e-12);
        assert!((fv.single_support_ratio - (0.9 + 10.0 * 0.8) / 11.0).abs() < 1e-12);
        // 7 left + 6 right onsets over 121 samples at 20 Hz
        assert!((fv.cadence - 13.0 / (121.0 / 20.0 / 60.0)).abs() < 1e-9);
    }

    #[test]
    fn stance_ratio_is_mean_of_cycles() {
        // alternating 10/20 and 14/20 stance: 0.5 and 0.7
        let trial = periodic_trial(20, &[10, 14], 10, 3);
        let left = artifacts(&trial, Foot::Left);
        assert_eq!(left.cycles.len(), 3);
        let right = artifacts(&trial, Foot::Right);
        let fv = extract_feature_vector(&trial, &left, &right, 2).unwrap();
        let expected = (0.5 + 0.7 + 0.5) / 3.0;
        assert!((fv.left.stance_ratio - expected).abs() < 1e-12);

        let two = FootArtifacts {
            cycles: left.cycles[..2].to_vec(),
            ..left.clone()
        };
        let fv = extract_feature_vector(&trial, &two, &right, 2).unwrap();
        assert!((fv.left.stance_ratio - 0.6).abs() < 1e-12);
    }

    #[test]
    fn too_few_cycles_rejected() {
        let trial = periodic_trial(20, &[12], 10, 2);
        let err = extract_feature_vector(&trial, &artifacts(&trial, Foot::Left), &artifacts(&trial, Foot::Right), 3)
            .unwrap_err();
        assert!(matches!(err, Error::TrialRejected(_)));
    }

    #[test]
    fn fnv_is_stable() {
        assert_eq!(fnv1a(&["a", "b"]), fnv1a(&["a", "b"]));
        assert_ne!(fnv1a(&["ab", ""]), fnv1a(&["a", "b"]));
    }
}
