use serde::{Deserialize, Serialize};

use crate::data::Foot;
use crate::error::{Error, Result};

/// Unilateral feature names, each expanded with a `_left` / `_right` suffix.
pub const UNILATERAL_FEATURES: [&str; 9] = [
    "expected_num_phases",
    "phase_symmetry",
    "num_swing_phases",
    "swing_symmetry",
    "stance_ratio",
    "balance_max_diff",
    "balance_min_diff",
    "strength_heel_max",
    "strength_toe_max",
];

pub const BILATERAL_FEATURES: [&str; 3] = ["cadence", "double_support_ratio", "single_support_ratio"];

pub const NUM_FEATURES: usize = 2 * UNILATERAL_FEATURES.len() + BILATERAL_FEATURES.len();

/// Column names in dataset order: left-foot features, right-foot features,
/// then the bilateral ones.
pub fn feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(NUM_FEATURES);
    for foot in Foot::BOTH {
        for f in UNILATERAL_FEATURES {
            names.push(format!("{f}_{foot}"));
        }
    }
    names.extend(BILATERAL_FEATURES.iter().map(|s| s.to_string()));
    names
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FootFeatures {
    pub expected_num_phases: f64,
    pub phase_symmetry: f64,
    pub num_swing_phases: f64,
    pub swing_symmetry: f64,
    pub stance_ratio: f64,
    pub balance_max_diff: f64,
    pub balance_min_diff: f64,
    pub strength_heel_max: f64,
    pub strength_toe_max: f64,
}

impl FootFeatures {
    fn values(&self) -> [f64; 9] {
        [
            self.expected_num_phases,
            self.phase_symmetry,
            self.num_swing_phases,
            self.swing_symmetry,
            self.stance_ratio,
            self.balance_max_diff,
            self.balance_min_diff,
            self.strength_heel_max,
            self.strength_toe_max,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub left: FootFeatures,
    pub right: FootFeatures,
    pub cadence: f64,
    pub double_support_ratio: f64,
    pub single_support_ratio: f64,
}

impl FeatureVector {
    pub fn foot(&self, foot: Foot) -> &FootFeatures {
        match foot {
            Foot::Left => &self.left,
            Foot::Right => &self.right,
        }
    }

    pub fn to_array(&self) -> [f64; NUM_FEATURES] {
        let mut out = [0.0; NUM_FEATURES];
        out[..9].copy_from_slice(&self.left.values());
        out[9..18].copy_from_slice(&self.right.values());
        out[18] = self.cadence;
        out[19] = self.double_support_ratio;
        out[20] = self.single_support_ratio;
        out
    }

    /// Check finiteness and the documented value ranges.
    pub fn validate(&self) -> Result<()> {
        let names = feature_names();
        for (name, v) in names.iter().zip(self.to_array()) {
            if !v.is_finite() {
                return Err(Error::domain(format!("feature `{name}` is {v}")));
            }
        }
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::domain(format!("ratio `{name}` = {v} outside [0, 1]")))
            }
        };
        for foot in Foot::BOTH {
            let f = self.foot(foot);
            unit("stance_ratio", f.stance_ratio)?;
            for (name, s) in [("phase_symmetry", f.phase_symmetry), ("swing_symmetry", f.swing_symmetry)] {
                if !(s > 0.0 && s <= 1.0) {
                    return Err(Error::domain(format!("`{name}_{foot}` = {s} outside (0, 1]")));
                }
            }
        }
        unit("double_support_ratio", self.double_support_ratio)?;
        unit("single_support_ratio", self.single_support_ratio)?;
        if self.cadence < 0.0 {
            return Err(Error::domain("cadence is negative"));
        }
        Ok(())
    }
}
