use serde::{Deserialize, Serialize};

use super::contact::ContactSeries;
use crate::data::Foot;

/// One gait cycle of one foot: the half-open sample range `[start_idx, end_idx)`
/// from a contact onset to the next onset, with stance ending at
/// `stance_end_idx` (the first airborne sample).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaitCycle {
    pub foot: Foot,
    pub start_idx: usize,
    pub end_idx: usize,
    pub stance_end_idx: usize,
}

impl GaitCycle {
    pub fn len(&self) -> usize {
        self.end_idx - self.start_idx
    }

    pub fn is_empty(&self) -> bool {
        self.end_idx == self.start_idx
    }

    pub fn stance_len(&self) -> usize {
        self.stance_end_idx - self.start_idx
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start_idx..self.end_idx
    }

    pub fn stance_indices(&self) -> std::ops::Range<usize> {
        self.start_idx..self.stance_end_idx
    }
}

/// Split a contact series into onset-to-onset cycles. Partial cycles before
/// the first onset and after the last one are dropped.
pub fn segment_cycles(contact: &ContactSeries) -> Vec<GaitCycle> {
    let onsets = contact.onsets();
    onsets
        .windows(2)
        .map(|w| {
            let (start, end) = (w[0], w[1]);
            let stance_end = (start..end)
                .find(|&i| !contact.is_contact(i))
                .unwrap_or(end);
            GaitCycle {
                foot: contact.foot,
                start_idx: start,
                end_idx: end,
                stance_end_idx: stance_end,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::contact::ContactState::{self, Airborne, Contact};
    use proptest::prelude::*;

    fn series(pattern: &[(ContactState, usize)]) -> ContactSeries {
        let states = pattern
            .iter()
            .flat_map(|&(s, n)| std::iter::repeat_n(s, n))
            .collect();
        ContactSeries::new(Foot::Left, states)
    }

    #[test]
    fn two_cycles_from_three_onsets() {
        let c = series(&[(Contact, 10), (Airborne, 10), (Contact, 10), (Airborne, 10), (Contact, 1)]);
        let cycles = segment_cycles(&c);
        assert_eq!(cycles.len(), 2);
        assert_eq!((cycles[0].start_idx, cycles[0].end_idx, cycles[0].stance_end_idx), (0, 20, 10));
        assert_eq!((cycles[1].start_idx, cycles[1].end_idx, cycles[1].stance_end_idx), (20, 40, 30));
    }

    #[test]
    fn all_contact_has_no_cycles() {
        assert!(segment_cycles(&series(&[(Contact, 50)])).is_empty());
    }

    #[test]
    fn leading_swing_and_trailing_partial_dropped() {
        let c = series(&[
            (Airborne, 4),
            (Contact, 6),
            (Airborne, 4),
            (Contact, 6),
            (Airborne, 4),
            (Contact, 6),
            (Airborne, 2),
        ]);
        let cycles = segment_cycles(&c);
        assert_eq!(cycles.len(), 2);
        assert_eq!(cycles[0].start_idx, 4);
        assert_eq!(cycles[1].end_idx, 24);
    }

    proptest! {
        #[test]
        fn cycles_are_disjoint_ordered_and_start_at_onsets(bits in prop::collection::vec(any::<bool>(), 0..200)) {
            let states: Vec<ContactState> = bits.iter().map(|&b| if b { Contact } else { Airborne }).collect();
            let c = ContactSeries::new(Foot::Right, states.clone());
            let cycles = segment_cycles(&c);
            for w in cycles.windows(2) {
                prop_assert_eq!(w[0].end_idx, w[1].start_idx);
            }
            for cy in &cycles {
                prop_assert!(cy.start_idx < cy.stance_end_idx && cy.stance_end_idx <= cy.end_idx);
                prop_assert_eq!(states[cy.start_idx], Contact);
                prop_assert!(cy.start_idx == 0 || states[cy.start_idx - 1] == Airborne);
                prop_assert!(cy.stance_indices().all(|i| states[i] == Contact));
                prop_assert!(cy.stance_end_idx == cy.end_idx || states[cy.stance_end_idx] == Airborne);
            }
        }
    }
}
