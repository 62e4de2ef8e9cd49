//! Progression: detach, discharge, expire and violate until nothing fires.

use crate::commitment::{CommitmentError, CommitmentId};
use crate::eval::{evaluate, evaluate_with_witness, TruthStatus};
use crate::lifecycle::{CommitmentState, Stimulus};
use crate::proposition::Proposition;
use crate::state::SocialState;

impl SocialState {
    /// Apply the progression rules in simultaneous passes until a fixpoint.
    pub fn progress(&self) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.progress_in_place()?;
        Ok(next)
    }

    pub(crate) fn progress_in_place(&mut self) -> Result<(), CommitmentError> {
        let order: Vec<CommitmentId> = self.commitments.keys().copied().collect();
        self.progress_ordered(&order)
    }

    /// Every rule firing moves a commitment forward in a lifecycle of
    /// depth two, so a pass without firings comes within `2n + 1` passes.
    /// The bound is deliberately loose.
    fn pass_bound(&self) -> usize {
        let n = self.commitments.len();
        (n * n).max(2 * n) + 1
    }

    /// Each pass decides every commitment against the state as it stood at
    /// the start of the pass, then applies the decisions together, so the
    /// outcome does not depend on `order`.
    pub(crate) fn progress_ordered(&mut self, order: &[CommitmentId]) -> Result<(), CommitmentError> {
        let bound = self.pass_bound();
        for _ in 0..bound {
            let mut decisions = Vec::new();
            for &id in order {
                if let Some(d) = self.decide(id)? {
                    decisions.push((id, d));
                }
            }
            if decisions.is_empty() {
                return Ok(());
            }
            for (id, (stimulus, consequent)) in decisions {
                let cause = self
                    .current_cause()
                    .unwrap_or_else(|| self.commitments[&id].created_by.clone());
                self.apply_stimulus(id, stimulus, cause)?;
                if let (Some(p), Some(c)) = (consequent, self.commitments.get_mut(&id)) {
                    c.consequent = p;
                }
            }
        }
        Err(CommitmentError::FixpointOverflow(bound))
    }

    /// The rule that fires for `id`, if any, with the consequent a detach
    /// materializes.
    fn decide(&self, id: CommitmentId) -> Result<Option<(Stimulus, Option<Proposition>)>, CommitmentError> {
        let Some(c) = self.commitments.get(&id) else {
            return Ok(None);
        };
        Ok(match c.state {
            CommitmentState::Conditional => {
                if c.consequent.is_ground() && evaluate(&c.consequent, self)? == TruthStatus::Satisfied {
                    return Ok(Some((Stimulus::Discharge, None)));
                }
                let (status, witness) = evaluate_with_witness(&c.antecedent, self)?;
                match status {
                    TruthStatus::Satisfied => Some((Stimulus::Detach, Some(c.consequent.instantiate(&witness)))),
                    TruthStatus::Violated => Some((Stimulus::Expire, None)),
                    TruthStatus::Pending => None,
                }
            }
            CommitmentState::Detached => match evaluate(&c.consequent, self)? {
                TruthStatus::Satisfied => Some((Stimulus::Discharge, None)),
                TruthStatus::Violated => Some((Stimulus::Violate, None)),
                TruthStatus::Pending => None,
            },
            _ => None,
        })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::commitment::{Principal, Provenance};
    use crate::event::Event;
    use crate::proposition::{EventAtom, Term};

    fn atom(i: u8) -> EventAtom {
        EventAtom::new(format!("e{i}"), Vec::<Term>::new())
    }

    fn prop() -> impl Strategy<Value = Proposition> {
        prop_oneof![
            Just(Proposition::Top),
            (0..4u8).prop_map(|i| Proposition::Event(atom(i))),
            (0..4u8, 0..4u8).prop_map(|(i, j)| Proposition::Before(atom(i), atom(j))),
            (0..4u8, 0..4u8).prop_map(|(i, j)| Proposition::And(vec![
                Proposition::Event(atom(i)),
                Proposition::Event(atom(j))
            ])),
            (0..4u8).prop_map(|i| Proposition::commitment(
                Term::atom("B"),
                Term::atom("A"),
                Proposition::Top,
                Proposition::Event(atom(i))
            )),
        ]
    }

    fn state() -> impl Strategy<Value = SocialState> {
        let commitments = prop::collection::vec((any::<bool>(), prop(), prop()), 1..7);
        let events = prop::collection::vec(0..4u8, 0..6);
        (commitments, events).prop_map(|(cs, es)| {
            let mut s = SocialState::new();
            for (i, (flip, ante, cons)) in cs.into_iter().enumerate() {
                let (d, c) = if flip { ("B", "A") } else { ("A", "B") };
                let cons = if cons == Proposition::Top { Proposition::Event(atom(0)) } else { cons };
                s.create_in(
                    Principal::new(d),
                    Principal::new(c),
                    ante,
                    cons,
                    Provenance::Setup(format!("s{i}")),
                )
                .unwrap();
            }
            for (seq, e) in es.into_iter().enumerate() {
                s.history.push(Event::domain(seq as u64 + 1, format!("e{e}"), Vec::new(), seq as u64));
            }
            s
        })
    }

    /// What progression decides; the path taken to it may differ by order.
    fn outcome(s: &SocialState) -> Vec<(CommitmentId, CommitmentState, Proposition)> {
        s.commitments().map(|c| (c.id, c.state, c.consequent.clone())).collect()
    }

    proptest! {
        #[test]
        fn progression_is_confluent(s in state(), seed in any::<u64>()) {
            let mut order: Vec<CommitmentId> = s.commitments.keys().copied().collect();
            let mut forward = s.clone();
            forward.progress_ordered(&order).unwrap();
            order.reverse();
            let mut backward = s.clone();
            backward.progress_ordered(&order).unwrap();
            let n = order.len();
            order.rotate_left(seed as usize % n);
            let mut rotated = s.clone();
            rotated.progress_ordered(&order).unwrap();
            prop_assert_eq!(outcome(&forward), outcome(&backward));
            prop_assert_eq!(outcome(&forward), outcome(&rotated));
        }

        #[test]
        fn progression_is_idempotent(s in state()) {
            let once = s.progress().unwrap();
            prop_assert_eq!(once.progress().unwrap(), once);
        }
    }
}
