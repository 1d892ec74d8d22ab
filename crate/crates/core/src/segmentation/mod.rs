//! Gait-cycle segmentation, phase hypotheses and swing-phase identification.

pub mod contact;
pub mod cycles;
pub mod gmm;
pub mod phases;
pub mod swing;

pub use contact::{detect_contact, ContactSeries, ContactState, DEFAULT_HYSTERESIS, DEFAULT_THRESHOLD};
pub use cycles::{segment_cycles, GaitCycle};
pub use gmm::{detect_phases_baseline, GmmOptions};
pub use phases::{
    expected_num_phases, DetectContext, DetectorRegistry, PhaseDetector, PhaseHypothesis,
    PhaseHypothesisSet,
};
pub use swing::{identify_swing, SwingAssignment, SWING_SHARE_THRESHOLD};
