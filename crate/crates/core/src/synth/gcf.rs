//! Four-channel plantar force waveforms with pathology signatures.
//!
//! Timing is integral: every stride and stance spans a whole number of
//! samples, so the constructed values of timing, balance and strength
//! features have closed forms that the generator reports as truth.
//!
//! Per stance of `m` samples, with `j` the sample offset and
//! `g(j, μ, w) = exp(-((j - μ) / w)²)`:
//!
//! - heel  = `H · g(j, round(0.15 m), 0.1 m)`
//! - toe   = `T · g(j, min(round(0.85 m), m - 1), 0.1 m)`
//! - load  = `0.8 · g(j, round(m / 2), 0.25 m)`
//! - Meta12 = `0.1 + (0.5 - b / 2) · load`, Meta45 = `0.1 + (0.5 + b / 2) · load`
//!
//! Swing samples are zero except for an optional toe drag below the contact
//! threshold. Noise is added per channel and clamped at zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::{channel, Foot, GcfSample, Trial};
use crate::error::{Error, Result};
use crate::segmentation::{DEFAULT_HYSTERESIS, DEFAULT_THRESHOLD};

pub const MIN_DURATION_S: f64 = 10.0;
const MAX_AMPLITUDE: f64 = 2.0;
const LOAD_PEAK: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathologyKind {
    Healthy,
    Parkinsonian,
    Hemiplegic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathologyProfile {
    pub kind: PathologyKind,
    /// Steps per minute over both feet.
    pub cadence_spm: f64,
    /// Stance share of each stride.
    pub stance_duty: f64,
    /// Heel peak in body weights; on the affected foot only for hemiplegic gait.
    pub heel_strike_amplitude: f64,
    pub toe_off_amplitude: f64,
    /// Shift of mid-stance load from Meta12 towards Meta45.
    pub lateral_bias: f64,
    /// Standard deviation of additive force noise.
    pub jitter_sd: f64,
    /// Standard deviation of stride length, as a share of the mean stride.
    pub timing_jitter: f64,
    pub affected_foot: Foot,
    /// Heel peak of the unaffected foot in hemiplegic gait.
    pub unaffected_heel_amplitude: f64,
    /// Constant toe force on the affected foot during swing.
    pub toe_drag: f64,
    pub seed: u64,
}

impl PathologyProfile {
    pub fn healthy() -> Self {
        PathologyProfile {
            kind: PathologyKind::Healthy,
            cadence_spm: 110.0,
            stance_duty: 0.6,
            heel_strike_amplitude: 1.2,
            toe_off_amplitude: 1.0,
            lateral_bias: -0.1,
            jitter_sd: 0.0,
            timing_jitter: 0.0,
            affected_foot: Foot::Left,
            unaffected_heel_amplitude: 1.2,
            toe_drag: 0.0,
            seed: 0,
        }
    }

    pub fn parkinsonian() -> Self {
        PathologyProfile {
            kind: PathologyKind::Parkinsonian,
            cadence_spm: 100.0,
            stance_duty: 0.65,
            heel_strike_amplitude: 0.8,
            toe_off_amplitude: 0.75,
            lateral_bias: 0.3,
            unaffected_heel_amplitude: 0.8,
            ..Self::healthy()
        }
    }

    pub fn hemiplegic() -> Self {
        PathologyProfile {
            kind: PathologyKind::Hemiplegic,
            cadence_spm: 80.0,
            stance_duty: 0.7,
            heel_strike_amplitude: 0.15,
            toe_off_amplitude: 0.6,
            lateral_bias: 0.05,
            unaffected_heel_amplitude: 0.9,
            toe_drag: 0.02,
            ..Self::healthy()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::domain(format!("{what} out of bounds: {v}")));
        if !(self.cadence_spm > 0.0 && self.cadence_spm <= 300.0) {
            return bad("cadence_spm", self.cadence_spm);
        }
        if !(self.stance_duty > 0.0 && self.stance_duty < 1.0) {
            return bad("stance_duty", self.stance_duty);
        }
        for (what, v) in [
            ("heel_strike_amplitude", self.heel_strike_amplitude),
            ("toe_off_amplitude", self.toe_off_amplitude),
            ("unaffected_heel_amplitude", self.unaffected_heel_amplitude),
        ] {
            if !(0.0..=MAX_AMPLITUDE).contains(&v) {
                return bad(what, v);
            }
        }
        if !(-1.0..=1.0).contains(&self.lateral_bias) {
            return bad("lateral_bias", self.lateral_bias);
        }
        if !(self.jitter_sd >= 0.0 && self.jitter_sd <= 0.5) {
            return bad("jitter_sd", self.jitter_sd);
        }
        if !(0.0..=0.2).contains(&self.timing_jitter) {
            return bad("timing_jitter", self.timing_jitter);
        }
        if !(self.toe_drag >= 0.0 && self.toe_drag < DEFAULT_THRESHOLD - DEFAULT_HYSTERESIS) {
            return bad("toe_drag", self.toe_drag);
        }
        Ok(())
    }

    fn heel_for(&self, foot: Foot) -> f64 {
        if self.kind == PathologyKind::Hemiplegic && foot != self.affected_foot {
            self.unaffected_heel_amplitude
        } else {
            self.heel_strike_amplitude
        }
    }

    fn drag_for(&self, foot: Foot) -> f64 {
        if self.kind == PathologyKind::Hemiplegic && foot == self.affected_foot {
            self.toe_drag
        } else {
            0.0
        }
    }
}

/// Stance intervals of one foot, as (onset, stance length) in samples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FootEvents {
    pub onsets: Vec<usize>,
    pub stance_lens: Vec<usize>,
}

impl FootEvents {
    fn in_contact(&self, n: usize) -> Vec<bool> {
        let mut c = vec![false; n];
        for (&o, &m) in self.onsets.iter().zip(&self.stance_lens) {
            for v in c.iter_mut().take((o + m).min(n)).skip(o) {
                *v = true;
            }
        }
        c
    }

    /// Complete cycles `[onset_k, onset_{k+1})` inside a trial of `n` samples.
    fn cycles(&self, n: usize) -> Vec<(usize, usize, usize)> {
        self.onsets
            .windows(2)
            .zip(&self.stance_lens)
            .filter(|(w, _)| w[1] < n)
            .map(|(w, &m)| (w[0], w[1], m))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootTruth {
    pub events: FootEvents,
    pub stance_ratio: f64,
    pub balance_max_diff: f64,
    pub balance_min_diff: f64,
    pub strength_heel_max: f64,
    pub strength_toe_max: f64,
}

/// Constructed feature values of a generated trial. Force-derived values are
/// those of the noise-free signal and are exact only when `noise_free`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTruth {
    pub left: FootTruth,
    pub right: FootTruth,
    /// Stance onsets of both feet per minute of trial.
    pub cadence: f64,
    pub double_support_ratio: f64,
    pub single_support_ratio: f64,
    pub noise_free: bool,
}

impl TrialTruth {
    pub fn foot(&self, foot: Foot) -> &FootTruth {
        match foot {
            Foot::Left => &self.left,
            Foot::Right => &self.right,
        }
    }
}

fn bump(j: f64, centre: f64, width: f64) -> f64 {
    let z = (j - centre) / width;
    (-z * z).exp()
}

/// Normalized four-channel stance profile at offset `j` of `m` samples.
fn stance_channels(j: usize, m: usize, heel: f64, toe: f64, bias: f64) -> [f64; 4] {
    let mf = m as f64;
    let jf = j as f64;
    let heel_centre = (0.15 * mf).round();
    let toe_centre = (0.85 * mf).round().min(mf - 1.0);
    let load = LOAD_PEAK * bump(jf, (mf / 2.0).round(), 0.25 * mf);
    let mut ch = [0.0; 4];
    ch[channel::HEEL] = heel * bump(jf, heel_centre, 0.1 * mf);
    ch[channel::TOE] = toe * bump(jf, toe_centre, 0.1 * mf);
    ch[channel::META12] = 0.1 + (0.5 - bias / 2.0) * load;
    ch[channel::META45] = 0.1 + (0.5 + bias / 2.0) * load;
    ch
}

fn schedule(profile: &PathologyProfile, n: usize, sampling_rate: f64, rng: &mut ChaCha8Rng) -> Result<(FootEvents, FootEvents)> {
    let stride = 120.0 * sampling_rate / profile.cadence_spm;
    let timing = Normal::new(0.0, profile.timing_jitter).map_err(|e| Error::domain(e.to_string()))?;
    let mut left = FootEvents {
        onsets: Vec::new(),
        stance_lens: Vec::new(),
    };
    let mut right = left.clone();
    let mut halves = Vec::new();
    // onsets follow the unrounded stride so the realized cadence does not drift
    let mut pos = 0.0f64;
    let mut a = 0usize;
    while a < n {
        let eps: f64 = if profile.timing_jitter > 0.0 { timing.sample(rng) } else { 0.0 };
        pos += stride * (1.0 + eps);
        let len = ((pos.round() as usize).saturating_sub(a)).max(4);
        let m = ((profile.stance_duty * len as f64).round() as usize).clamp(2, len - 2);
        left.onsets.push(a);
        left.stance_lens.push(m);
        halves.push((a + len / 2, m));
        a += len;
        pos = pos.max(a as f64);
    }
    if left.onsets.len() < 2 || stride < 4.0 {
        return Err(Error::domain(format!(
            "cadence {} at {sampling_rate} Hz leaves too few samples per stride",
            profile.cadence_spm
        )));
    }
    for (k, &(r, m)) in halves.iter().enumerate() {
        if r >= n {
            break;
        }
        let m = match halves.get(k + 1) {
            Some(&(next, _)) => m.min(next - r - 1),
            None => m,
        };
        right.onsets.push(r);
        right.stance_lens.push(m);
    }
    Ok((left, right))
}

fn foot_truth(profile: &PathologyProfile, foot: Foot, events: FootEvents, n: usize) -> FootTruth {
    let cycles = events.cycles(n);
    let k = cycles.len().max(1) as f64;
    let stance_ratio = cycles.iter().map(|&(s, e, m)| m as f64 / (e - s) as f64).sum::<f64>() / k;
    let shift = -LOAD_PEAK * profile.lateral_bias;
    FootTruth {
        events,
        stance_ratio,
        balance_max_diff: shift.max(0.0),
        balance_min_diff: shift.min(0.0),
        strength_heel_max: profile.heel_for(foot),
        strength_toe_max: profile.toe_off_amplitude,
    }
}

/// Generate one trial at `body_weight`; channel values are raw forces.
pub fn gen_gcf_trial(
    profile: &PathologyProfile,
    duration_s: f64,
    sampling_rate: f64,
    body_weight: f64,
) -> Result<(Trial, TrialTruth)> {
    profile.validate()?;
    if !(duration_s >= MIN_DURATION_S) {
        return Err(Error::domain(format!(
            "duration must be at least {MIN_DURATION_S} s, got {duration_s}"
        )));
    }
    if !(sampling_rate > 0.0 && sampling_rate.is_finite()) || !(body_weight > 0.0 && body_weight.is_finite()) {
        return Err(Error::domain("sampling rate and body weight must be positive"));
    }
    let n = (duration_s * sampling_rate).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let (left_ev, right_ev) = schedule(profile, n, sampling_rate, &mut rng)?;

    let mut feet = [vec![[0.0f64; 4]; n], vec![[0.0f64; 4]; n]];
    for (fi, (foot, ev)) in [(Foot::Left, &left_ev), (Foot::Right, &right_ev)].into_iter().enumerate() {
        let drag = profile.drag_for(foot);
        if drag > 0.0 {
            for s in feet[fi].iter_mut() {
                s[channel::TOE] = drag;
            }
        }
        let heel = profile.heel_for(foot);
        for (&o, &m) in ev.onsets.iter().zip(&ev.stance_lens) {
            for j in 0..m {
                if o + j >= n {
                    break;
                }
                feet[fi][o + j] = stance_channels(j, m, heel, profile.toe_off_amplitude, profile.lateral_bias);
            }
        }
    }
    if profile.jitter_sd > 0.0 {
        let noise = Normal::new(0.0, profile.jitter_sd).map_err(|e| Error::domain(e.to_string()))?;
        for foot in feet.iter_mut() {
            for s in foot.iter_mut() {
                for v in s.iter_mut() {
                    *v = (*v + noise.sample(&mut rng)).max(0.0);
                }
            }
        }
    }
    let samples = (0..n)
        .map(|i| GcfSample {
            t: i as f64 / sampling_rate,
            left: feet[0][i].map(|v| v * body_weight),
            right: feet[1][i].map(|v| v * body_weight),
        })
        .collect();
    let trial = Trial {
        subject_id: "synthetic".into(),
        trial_id: format!("seed{}", profile.seed),
        sampling_rate,
        samples,
    };

    let lc = left_ev.in_contact(n);
    let rc = right_ev.in_contact(n);
    let all_cycles: Vec<(usize, usize, usize)> = left_ev.cycles(n).into_iter().chain(right_ev.cycles(n)).collect();
    let (mut double, mut single) = (0.0, 0.0);
    for &(s, e, _) in &all_cycles {
        let len = (e - s) as f64;
        double += (s..e).filter(|&i| lc[i] && rc[i]).count() as f64 / len;
        single += (s..e).filter(|&i| lc[i] != rc[i]).count() as f64 / len;
    }
    let k = all_cycles.len().max(1) as f64;
    let steps = left_ev.onsets.len() + right_ev.onsets.len();
    let truth = TrialTruth {
        cadence: steps as f64 / (n as f64 / sampling_rate / 60.0),
        double_support_ratio: double / k,
        single_support_ratio: single / k,
        left: foot_truth(profile, Foot::Left, left_ev, n),
        right: foot_truth(profile, Foot::Right, right_ev, n),
        noise_free: profile.jitter_sd == 0.0,
    };
    Ok((trial, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn healthy_timing() {
        let (trial, truth) = gen_gcf_trial(&PathologyProfile::healthy(), 60.0, 20.0, 70.0).unwrap();
        assert_eq!(trial.len(), 1200);
        // stride = round(120 · 20 / 110) = 22 samples, stance = round(0.6 · 22) = 13
        assert_eq!(truth.left.events.onsets[1], 22);
        assert_eq!(truth.left.events.stance_lens[0], 13);
        assert!((truth.left.stance_ratio - 13.0 / 22.0).abs() < 1e-15);
        assert!((truth.cadence - 110.0).abs() <= 2.0);
        assert!((truth.double_support_ratio + truth.single_support_ratio - 1.0).abs() < 1e-12);
        assert!(trial.samples.iter().all(|s| s.left.iter().chain(&s.right).all(|v| *v >= 0.0)));
    }

    #[test]
    fn noiseless_is_periodic() {
        let (trial, truth) = gen_gcf_trial(&PathologyProfile::healthy(), 30.0, 20.0, 1.0).unwrap();
        let on = &truth.left.events.onsets;
        let period = on[1] - on[0];
        for i in on[1]..on[1] + period {
            assert_eq!(trial.samples[i].left, trial.samples[i - period].left);
        }
    }

    #[test]
    fn channel_peaks_match_truth() {
        let mut p = PathologyProfile::parkinsonian();
        p.lateral_bias = 0.4;
        let (trial, truth) = gen_gcf_trial(&p, 20.0, 20.0, 1.0).unwrap();
        let o = truth.left.events.onsets[0];
        let m = truth.left.events.stance_lens[0];
        let stance: Vec<[f64; 4]> = trial.samples[o..o + m].iter().map(|s| s.left).collect();
        let heel = stance.iter().map(|s| s[channel::HEEL]).fold(0.0, f64::max);
        let min_diff = stance
            .iter()
            .map(|s| s[channel::META12] - s[channel::META45])
            .fold(f64::INFINITY, f64::min);
        assert_eq!(heel, p.heel_strike_amplitude);
        assert!((min_diff - truth.left.balance_min_diff).abs() < 1e-15);
        assert!((truth.left.balance_min_diff + 0.32).abs() < 1e-15);
    }

    #[test]
    fn hemiplegic_sides() {
        let mut p = PathologyProfile::hemiplegic();
        p.heel_strike_amplitude = 0.0;
        p.affected_foot = Foot::Right;
        let (trial, truth) = gen_gcf_trial(&p, 30.0, 20.0, 60.0).unwrap();
        assert!(trial.samples.iter().all(|s| s.right[channel::HEEL] == 0.0));
        assert_eq!(truth.right.strength_heel_max, 0.0);
        assert_eq!(truth.left.strength_heel_max, p.unaffected_heel_amplitude);
        let swing = trial.samples.iter().find(|s| s.right[channel::META12] == 0.0).unwrap();
        assert!((swing.right[channel::TOE] - 0.02 * 60.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_checked() {
        let mut p = PathologyProfile::healthy();
        p.heel_strike_amplitude = 2.5;
        assert!(gen_gcf_trial(&p, 30.0, 20.0, 70.0).is_err());
        assert!(gen_gcf_trial(&PathologyProfile::healthy(), 5.0, 20.0, 70.0).is_err());
        let mut p = PathologyProfile::hemiplegic();
        p.toe_drag = 0.05;
        assert!(p.validate().is_err());
    }

    #[test]
    fn deterministic_with_noise() {
        let mut p = PathologyProfile::healthy();
        p.jitter_sd = 0.01;
        p.timing_jitter = 0.05;
        p.seed = 4;
        let a = gen_gcf_trial(&p, 20.0, 20.0, 70.0).unwrap();
        let b = gen_gcf_trial(&p, 20.0, 20.0, 70.0).unwrap();
        assert_eq!(a, b);
        assert!(!a.1.noise_free);
    }
}
