use serde::{Deserialize, Serialize};

use crate::data::{Foot, Trial};
use crate::error::{Error, Result};

pub const DEFAULT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_HYSTERESIS: f64 = 0.01;

/// Any normalized channel above this is taken as a sign the trial was not
/// divided by body weight.
const MAX_NORMALIZED_FORCE: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContactState {
    Contact,
    Airborne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactSeries {
    pub foot: Foot,
    pub states: Vec<ContactState>,
}

impl ContactSeries {
    pub fn new(foot: Foot, states: Vec<ContactState>) -> Self {
        ContactSeries { foot, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_contact(&self, idx: usize) -> bool {
        self.states[idx] == ContactState::Contact
    }

    /// Sample indices where a stance phase begins. Sample 0 counts when it is
    /// already in contact.
    pub fn onsets(&self) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&i| self.is_contact(i) && (i == 0 || !self.is_contact(i - 1)))
            .collect()
    }
}

/// Contact detection with a hysteresis band on the summed four-channel force.
///
/// A sample enters contact once the total rises above `threshold + hysteresis`
/// and leaves it once the total falls below `threshold - hysteresis`.
pub fn detect_contact(
    trial: &Trial,
    foot: Foot,
    threshold: f64,
    hysteresis: f64,
) -> Result<ContactSeries> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!(
            "contact threshold must be in (0, 1), got {threshold}"
        )));
    }
    if !(hysteresis >= 0.0 && hysteresis < threshold) {
        return Err(Error::domain(format!(
            "hysteresis must be in [0, threshold), got {hysteresis}"
        )));
    }
    if let Some(s) = trial
        .samples
        .iter()
        .find(|s| s.foot(foot).iter().any(|&v| v > MAX_NORMALIZED_FORCE))
    {
        return Err(Error::domain(format!(
            "trial `{}` looks unnormalized (force > {MAX_NORMALIZED_FORCE} at t = {})",
            trial.trial_id, s.t
        )));
    }

    let rise = threshold + hysteresis;
    let fall = threshold - hysteresis;
    let mut in_contact = false;
    let states = trial
        .total_force(foot)
        .into_iter()
        .map(|total| {
            if in_contact {
                if total < fall {
                    in_contact = false;
                }
            } else if total > rise {
                in_contact = true;
            }
            if in_contact {
                ContactState::Contact
            } else {
                ContactState::Airborne
            }
        })
        .collect();
    Ok(ContactSeries { foot, states })
}
