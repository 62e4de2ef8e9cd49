//! The elementary commitment operations: create, release, cancel,
//! delegate and assign.
//!
//! Each public operation is pure: it returns a new state and leaves the
//! input untouched. Progression is not run here; see
//! [`SocialState::progress`].

use crate::commitment::{Commitment, CommitmentError, CommitmentId, Principal, Provenance, Transition};
use crate::eval::{evaluate_with_witness, TruthStatus};
use crate::lifecycle::{transition, CommitmentState, Stimulus};
use crate::proposition::Proposition;
use crate::state::SocialState;

impl SocialState {
    /// Add `C(debtor, creditor, antecedent, consequent)`, detached at once
    /// if the antecedent already holds.
    ///
    /// The cause must be a message sent by the debtor or a setup
    /// declaration.
    pub fn create(
        &self,
        debtor: Principal,
        creditor: Principal,
        antecedent: Proposition,
        consequent: Proposition,
        cause: Provenance,
    ) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.create_in(debtor, creditor, antecedent, consequent, cause)?;
        Ok(next)
    }

    pub fn release(&self, id: CommitmentId, by: &Principal, cause: Provenance) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.release_in(id, by, cause)?;
        Ok(next)
    }

    /// A detached commitment that is cancelled is violated.
    pub fn cancel(&self, id: CommitmentId, by: &Principal, cause: Provenance) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.cancel_in(id, by, cause)?;
        Ok(next)
    }

    pub fn delegate(
        &self,
        id: CommitmentId,
        new_debtor: Principal,
        by: &Principal,
        cause: Provenance,
    ) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.delegate_in(id, new_debtor, by, cause)?;
        Ok(next)
    }

    pub fn assign(
        &self,
        id: CommitmentId,
        new_creditor: Principal,
        by: &Principal,
        cause: Provenance,
    ) -> Result<SocialState, CommitmentError> {
        let mut next = self.clone();
        next.assign_in(id, new_creditor, by, cause)?;
        Ok(next)
    }

    pub(crate) fn create_in(
        &mut self,
        debtor: Principal,
        creditor: Principal,
        antecedent: Proposition,
        consequent: Proposition,
        cause: Provenance,
    ) -> Result<CommitmentId, CommitmentError> {
        if debtor == creditor {
            return Err(CommitmentError::SelfCommitment(debtor));
        }
        if let Provenance::Event(_) = cause {
            let event = self
                .event_for(&cause)
                .ok_or_else(|| CommitmentError::UnknownCause(cause.clone()))?;
            if event.sender.as_ref() != Some(&debtor) {
                return Err(CommitmentError::DebtorNotSender { debtor, cause });
            }
        }
        if antecedent.contains_wildcard() || consequent.contains_wildcard() {
            return Err(CommitmentError::FreeVariable("_".into()));
        }
        if let Some(v) = antecedent.free_vars().into_iter().next() {
            return Err(CommitmentError::FreeVariable(v));
        }
        let scoped = antecedent.existential_vars();
        if let Some(v) = consequent
            .free_vars()
            .into_iter()
            .find(|v| !scoped.contains(v))
        {
            return Err(CommitmentError::FreeVariable(v));
        }

        let (status, witness) = evaluate_with_witness(&antecedent, self)?;
        let (state, consequent) = if status == TruthStatus::Satisfied {
            (CommitmentState::Detached, consequent.instantiate(&witness))
        } else {
            (CommitmentState::Conditional, consequent)
        };
        Ok(self.insert(debtor, creditor, antecedent, consequent, state, cause, None))
    }

    #[allow(clippy::too_many_arguments)]
    fn insert(
        &mut self,
        debtor: Principal,
        creditor: Principal,
        antecedent: Proposition,
        consequent: Proposition,
        state: CommitmentState,
        cause: Provenance,
        parent: Option<CommitmentId>,
    ) -> CommitmentId {
        let id = CommitmentId(self.next_id);
        self.next_id += 1;
        let ordinal = self
            .commitments
            .values()
            .filter(|c| c.created_by == cause)
            .count() as u32;
        self.commitments.insert(
            id,
            Commitment {
                id,
                debtor,
                creditor,
                antecedent,
                consequent,
                state,
                created_by: cause.clone(),
                ordinal,
                parent,
                history: vec![Transition { cause, state }],
            },
        );
        id
    }

    fn lookup(&self, id: CommitmentId) -> Result<&Commitment, CommitmentError> {
        self.commitments
            .get(&id)
            .ok_or(CommitmentError::UnknownCommitment(id))
    }

    pub(crate) fn apply_stimulus(
        &mut self,
        id: CommitmentId,
        stimulus: Stimulus,
        cause: Provenance,
    ) -> Result<CommitmentState, CommitmentError> {
        let c = self
            .commitments
            .get_mut(&id)
            .ok_or(CommitmentError::UnknownCommitment(id))?;
        let next = transition(c.state, stimulus).map_err(|e| CommitmentError::lifecycle(id, e))?;
        c.push(cause, next);
        Ok(next)
    }

    pub(crate) fn release_in(&mut self, id: CommitmentId, by: &Principal, cause: Provenance) -> Result<(), CommitmentError> {
        let c = self.lookup(id)?;
        if c.creditor != *by {
            return Err(CommitmentError::NotCreditor { id, by: by.clone() });
        }
        self.apply_stimulus(id, Stimulus::Release, cause).map(drop)
    }

    pub(crate) fn cancel_in(&mut self, id: CommitmentId, by: &Principal, cause: Provenance) -> Result<(), CommitmentError> {
        let c = self.lookup(id)?;
        if c.debtor != *by {
            return Err(CommitmentError::NotDebtor { id, by: by.clone() });
        }
        self.apply_stimulus(id, Stimulus::Cancel, cause).map(drop)
    }

    pub(crate) fn delegate_in(
        &mut self,
        id: CommitmentId,
        new_debtor: Principal,
        by: &Principal,
        cause: Provenance,
    ) -> Result<CommitmentId, CommitmentError> {
        let c = self.lookup(id)?;
        if c.debtor != *by {
            return Err(CommitmentError::NotDebtor { id, by: by.clone() });
        }
        transition(c.state, Stimulus::Delegate).map_err(|e| CommitmentError::lifecycle(id, e))?;
        if new_debtor == c.creditor {
            return Err(CommitmentError::SelfCommitment(new_debtor));
        }
        let (creditor, antecedent, consequent, state) =
            (c.creditor.clone(), c.antecedent.clone(), c.consequent.clone(), c.state);
        self.apply_stimulus(id, Stimulus::Delegate, cause.clone())?;
        Ok(self.insert(new_debtor, creditor, antecedent, consequent, state, cause, Some(id)))
    }

    pub(crate) fn assign_in(
        &mut self,
        id: CommitmentId,
        new_creditor: Principal,
        by: &Principal,
        cause: Provenance,
    ) -> Result<CommitmentId, CommitmentError> {
        let c = self.lookup(id)?;
        if c.creditor != *by {
            return Err(CommitmentError::NotCreditor { id, by: by.clone() });
        }
        transition(c.state, Stimulus::Assign).map_err(|e| CommitmentError::lifecycle(id, e))?;
        if new_creditor == c.debtor {
            return Err(CommitmentError::SelfCommitment(new_creditor));
        }
        let (debtor, antecedent, consequent, state) =
            (c.debtor.clone(), c.antecedent.clone(), c.consequent.clone(), c.state);
        self.apply_stimulus(id, Stimulus::Assign, cause.clone())?;
        Ok(self.insert(debtor, new_creditor, antecedent, consequent, state, cause, Some(id)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::Event;
    use crate::proposition::Term;

    fn p(s: &str) -> Principal {
        Principal::new(s)
    }

    fn show_up(who: &str, slot: &str) -> Proposition {
        Proposition::event("showUp", vec![Term::atom(who), Term::atom(slot)])
    }

    fn setup(label: &str) -> Provenance {
        Provenance::Setup(label.into())
    }

    /// c5-shaped: C(Alessia, Bianca, T, showUp(Alessia, 1400)), detached.
    fn with_c5() -> (SocialState, CommitmentId) {
        let s = SocialState::new();
        let s = s
            .create(p("Alessia"), p("Bianca"), Proposition::Top, show_up("Alessia", "1400"), setup("c5"))
            .unwrap();
        (s, CommitmentId(0))
    }

    #[test]
    fn create_with_top_antecedent_is_detached() {
        let (s, id) = with_c5();
        assert_eq!(s.get(id).unwrap().state, CommitmentState::Detached);
    }

    #[test]
    fn self_commitment_rejected() {
        let err = SocialState::new()
            .create(p("A"), p("A"), Proposition::Top, show_up("A", "1"), setup("x"))
            .unwrap_err();
        assert_eq!(err, CommitmentError::SelfCommitment(p("A")));
    }

    #[test]
    fn debtor_must_be_sender() {
        let mut s = SocialState::new();
        s.history.push(Event::sent(1, "selectSlot", p("Bianca"), p("Alessia"), vec![], 0));
        let err = s
            .create(p("Alessia"), p("Bianca"), Proposition::Top, show_up("Alessia", "1400"), Provenance::Event(1))
            .unwrap_err();
        assert!(matches!(err, CommitmentError::DebtorNotSender { .. }));
        assert!(s
            .create(p("Bianca"), p("Alessia"), Proposition::Top, show_up("Bianca", "1400"), Provenance::Event(1))
            .is_ok());
    }

    #[test]
    fn domain_events_cannot_create() {
        let mut s = SocialState::new();
        s.history.push(Event::domain(1, "rain", vec![], 0));
        let err = s
            .create(p("A"), p("B"), Proposition::Top, show_up("A", "1"), Provenance::Event(1))
            .unwrap_err();
        assert!(matches!(err, CommitmentError::DebtorNotSender { .. }));
    }

    #[test]
    fn release_requires_creditor_and_live_commitment() {
        let (s, id) = with_c5();
        let released = s.release(id, &p("Bianca"), setup("r")).unwrap();
        assert_eq!(released.get(id).unwrap().state, CommitmentState::Released);
        assert_eq!(
            s.release(id, &p("Alessia"), setup("r")).unwrap_err(),
            CommitmentError::NotCreditor { id, by: p("Alessia") }
        );
        let err = released.release(id, &p("Bianca"), setup("r")).unwrap_err();
        assert!(matches!(err, CommitmentError::TerminalState { .. }));
    }

    #[test]
    fn cancel_detached_violates_and_conditional_cancels() {
        let (s, id) = with_c5();
        let v = s.cancel(id, &p("Alessia"), setup("x")).unwrap();
        assert_eq!(v.get(id).unwrap().state, CommitmentState::Violated);
        assert_eq!(
            s.cancel(id, &p("Bianca"), setup("x")).unwrap_err(),
            CommitmentError::NotDebtor { id, by: p("Bianca") }
        );

        let cond = SocialState::new()
            .create(
                p("Alessia"),
                p("Bianca"),
                Proposition::event("never", vec![]),
                show_up("Alessia", "1400"),
                setup("c2"),
            )
            .unwrap();
        let c = cond.cancel(CommitmentId(0), &p("Alessia"), setup("x")).unwrap();
        assert_eq!(c.get(CommitmentId(0)).unwrap().state, CommitmentState::Cancelled);
    }

    #[test]
    fn delegate_preserves_state_class() {
        let (s, id) = with_c5();
        let d = s.delegate(id, p("Carla"), &p("Alessia"), setup("d")).unwrap();
        assert_eq!(d.get(id).unwrap().state, CommitmentState::Delegated);
        let fresh = d.get(CommitmentId(1)).unwrap();
        assert_eq!(fresh.debtor, p("Carla"));
        assert_eq!(fresh.state, CommitmentState::Detached);
        assert_eq!(fresh.parent, Some(id));
        assert_eq!(fresh.consequent, show_up("Alessia", "1400"));

        assert!(matches!(
            s.delegate(id, p("Carla"), &p("Bianca"), setup("d")),
            Err(CommitmentError::NotDebtor { .. })
        ));
        assert_eq!(
            s.delegate(id, p("Bianca"), &p("Alessia"), setup("d")).unwrap_err(),
            CommitmentError::SelfCommitment(p("Bianca"))
        );
    }

    #[test]
    fn assign_mirrors_delegate() {
        let s = SocialState::new()
            .create(p("Bianca"), p("Alessia"), Proposition::Top, show_up("Bianca", "1400"), setup("c4"))
            .unwrap();
        let id = CommitmentId(0);
        let a = s.assign(id, p("Carla"), &p("Alessia"), setup("a")).unwrap();
        assert_eq!(a.get(id).unwrap().state, CommitmentState::Assigned);
        assert_eq!(a.get(CommitmentId(1)).unwrap().creditor, p("Carla"));
        assert!(matches!(
            s.assign(id, p("Carla"), &p("Bianca"), setup("a")),
            Err(CommitmentError::NotCreditor { .. })
        ));
        let mut done = s.clone();
        done.apply_stimulus(id, Stimulus::Discharge, setup("x")).unwrap();
        assert!(matches!(
            done.assign(id, p("Carla"), &p("Alessia"), setup("a")),
            Err(CommitmentError::TerminalState { .. })
        ));
    }

    #[test]
    fn operations_do_not_touch_input() {
        let (s, id) = with_c5();
        let before = s.clone();
        let _ = s.cancel(id, &p("Alessia"), setup("x")).unwrap();
        assert_eq!(s, before);
    }
}
