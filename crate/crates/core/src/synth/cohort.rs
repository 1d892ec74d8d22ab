//! Subjects and trials for the three gait groups.
//!
//! Each subject draws profile parameters around its group mean; each trial
//! adds a smaller trial-level perturbation. The group means are synthetic
//! defaults, not clinical estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gcf::{gen_gcf_trial, PathologyKind, PathologyProfile, TrialTruth};
use crate::data::{Foot, Group, Subject, Trial};
use crate::error::{Error, Result};

/// Mean profile of a group and the spread of subjects around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub mean: PathologyProfile,
    /// Between-subject standard deviations.
    pub subject_sd: ParamSpread,
    /// Within-subject, between-trial standard deviations.
    pub trial_sd: ParamSpread,
    pub age_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSpread {
    pub cadence_spm: f64,
    pub stance_duty: f64,
    pub heel_strike_amplitude: f64,
    pub toe_off_amplitude: f64,
    pub lateral_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortDefaults {
    pub pd: GroupModel,
    pub st: GroupModel,
    pub h: GroupModel,
}

impl Default for CohortDefaults {
    fn default() -> Self {
        let subject_sd = ParamSpread {
            cadence_spm: 5.0,
            stance_duty: 0.015,
            heel_strike_amplitude: 0.1,
            toe_off_amplitude: 0.08,
            lateral_bias: 0.06,
        };
        let trial_sd = ParamSpread {
            cadence_spm: 4.0,
            stance_duty: 0.016,
            heel_strike_amplitude: 0.08,
            toe_off_amplitude: 0.08,
            lateral_bias: 0.06,
        };
        let noisy = |p: PathologyProfile| PathologyProfile {
            jitter_sd: 0.02,
            timing_jitter: 0.03,
            ..p
        };
        CohortDefaults {
            pd: GroupModel {
                mean: noisy(PathologyProfile::parkinsonian()),
                subject_sd,
                trial_sd,
                age_mean: 66.0,
            },
            st: GroupModel {
                mean: noisy(PathologyProfile::hemiplegic()),
                subject_sd: ParamSpread {
                    heel_strike_amplitude: 0.05,
                    ..subject_sd
                },
                trial_sd,
                age_mean: 61.0,
            },
            h: GroupModel {
                mean: noisy(PathologyProfile::healthy()),
                subject_sd,
                trial_sd,
                age_mean: 55.0,
            },
        }
    }
}

impl CohortDefaults {
    pub fn group(&self, g: Group) -> &GroupModel {
        match g {
            Group::PD => &self.pd,
            Group::ST => &self.st,
            Group::H => &self.h,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CohortSpec {
    /// Subjects per group, in the order PD, ST, H.
    pub groups: [usize; 3],
    pub trials_per_subject: usize,
    pub duration_s: f64,
    pub sampling_rate: f64,
    pub seed: u64,
    pub defaults: CohortDefaults,
}

impl Default for CohortSpec {
    fn default() -> Self {
        CohortSpec {
            groups: [5, 3, 3],
            trials_per_subject: 16,
            duration_s: 30.0,
            sampling_rate: 20.0,
            seed: 0,
            defaults: CohortDefaults::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    pub subjects: Vec<Subject>,
    /// Subject-level profile of each subject, same order as `subjects`.
    pub profiles: Vec<PathologyProfile>,
    pub trials: Vec<Trial>,
    pub truths: Vec<TrialTruth>,
}

fn perturb<R: Rng>(p: &PathologyProfile, sd: &ParamSpread, rng: &mut R) -> PathologyProfile {
    let mut draw = |mean: f64, s: f64| -> f64 {
        if s > 0.0 {
            mean + Normal::new(0.0, s).unwrap().sample(rng)
        } else {
            mean
        }
    };
    PathologyProfile {
        cadence_spm: draw(p.cadence_spm, sd.cadence_spm).clamp(40.0, 200.0),
        stance_duty: draw(p.stance_duty, sd.stance_duty).clamp(0.3, 0.85),
        heel_strike_amplitude: draw(p.heel_strike_amplitude, sd.heel_strike_amplitude).clamp(0.0, 2.0),
        toe_off_amplitude: draw(p.toe_off_amplitude, sd.toe_off_amplitude).clamp(0.0, 2.0),
        lateral_bias: draw(p.lateral_bias, sd.lateral_bias).clamp(-1.0, 1.0),
        ..p.clone()
    }
}

pub fn subject_id(group: Group, index: usize) -> String {
    format!("{}{:02}", group.as_str().to_lowercase(), index + 1)
}

pub fn gen_cohort(spec: &CohortSpec) -> Result<Cohort> {
    if spec.groups.iter().any(|&n| n < 2) {
        return Err(Error::domain(format!("need at least 2 subjects per group, got {:?}", spec.groups)));
    }
    if spec.trials_per_subject == 0 {
        return Err(Error::domain("need at least one trial per subject"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut subjects = Vec::new();
    let mut profiles = Vec::new();
    for (g, &n) in Group::ALL.iter().zip(&spec.groups) {
        let model = spec.defaults.group(*g);
        for i in 0..n {
            let mut p = perturb(&model.mean, &model.subject_sd, &mut rng);
            if p.kind == PathologyKind::Hemiplegic {
                p.affected_foot = if rng.random::<bool>() { Foot::Left } else { Foot::Right };
            }
            p.seed = rng.random();
            let weight = rng.random_range(55.0..95.0);
            let age = model.age_mean + rng.random_range(-6.0..6.0);
            subjects.push(Subject::new(subject_id(*g, i), *g, weight, Some(age))?);
            profiles.push(p);
        }
    }

    let per_subject: Vec<Vec<(Trial, TrialTruth)>> = subjects
        .par_iter()
        .zip(&profiles)
        .map(|(s, p)| {
            let model = spec.defaults.group(s.group);
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            (0..spec.trials_per_subject)
                .map(|k| {
                    let mut tp = perturb(p, &model.trial_sd, &mut rng);
                    tp.seed = rng.random();
                    let (mut trial, truth) = gen_gcf_trial(&tp, spec.duration_s, spec.sampling_rate, s.body_weight)?;
                    trial.subject_id = s.id.clone();
                    trial.trial_id = format!("t{:02}", k + 1);
                    Ok((trial, truth))
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let (trials, truths) = per_subject.into_iter().flatten().unzip();
    Ok(Cohort {
        subjects,
        profiles,
        trials,
        truths,
    })
}
