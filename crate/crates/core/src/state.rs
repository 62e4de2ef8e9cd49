use std::collections::BTreeMap;

use crate::commitment::{Commitment, CommitmentId, CommitmentKey, Principal, Provenance};
use crate::event::Event;
use crate::lifecycle::CommitmentState;

/// The commitments in force plus the event history that justifies them.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SocialState {
    pub(crate) commitments: BTreeMap<CommitmentId, Commitment>,
    pub(crate) history: Vec<Event>,
    pub(crate) next_id: u32,
}

impl SocialState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn commitments(&self) -> impl Iterator<Item = &Commitment> {
        self.commitments.values()
    }

    pub fn get(&self, id: CommitmentId) -> Option<&Commitment> {
        self.commitments.get(&id)
    }

    pub fn len(&self) -> usize {
        self.commitments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commitments.is_empty()
    }

    pub fn history(&self) -> &[Event] {
        &self.history
    }

    /// Look up by view-independent identity.
    pub fn by_key(&self, key: &CommitmentKey) -> Option<&Commitment> {
        self.commitments
            .values()
            .find(|c| c.ordinal == key.ordinal && c.created_by == key.created_by)
    }

    /// Conditional or detached commitments, by id.
    pub fn active(&self) -> Vec<&Commitment> {
        self.commitments.values().filter(|c| c.is_active()).collect()
    }

    pub fn query(&self, filter: &CommitmentFilter) -> Vec<&Commitment> {
        self.commitments
            .values()
            .filter(|c| filter.accepts(c))
            .collect()
    }

    /// The event a provenance points at, if it is in this history.
    pub fn event_for(&self, cause: &Provenance) -> Option<&Event> {
        match cause {
            Provenance::Setup(_) => None,
            Provenance::Event(seq) => self.history.iter().find(|e| e.origin_seq() == *seq),
        }
    }

    /// One line per commitment: id, state, commitment, provenance chain.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in self.commitments() {
            let causes: Vec<String> = c.history.iter().map(|t| t.cause.to_string()).collect();
            out.push_str(&format!("{c} [{}]\n", causes.join(", ")));
        }
        if self.is_empty() {
            out.push_str("(no commitments)\n");
        }
        out
    }

    /// One JSON object per commitment.
    pub fn to_records(&self) -> String {
        let mut out = String::new();
        for c in self.commitments() {
            let history: Vec<serde_json::Value> = c
                .history
                .iter()
                .map(|t| serde_json::json!({"cause": t.cause.to_string(), "state": t.state}))
                .collect();
            let r = serde_json::json!({
                "id": c.id.0,
                "state": c.state,
                "debtor": c.debtor,
                "creditor": c.creditor,
                "commitment": c.atom().to_string(),
                "history": history,
            });
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }

    pub(crate) fn last_seq(&self) -> Option<u64> {
        self.history.last().map(|e| e.seq)
    }

    pub(crate) fn current_cause(&self) -> Option<Provenance> {
        self.history
            .last()
            .map(|e| Provenance::Event(e.origin_seq()))
    }
}

/// Selects commitments by party and state. Empty filter selects everything.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CommitmentFilter {
    pub debtor: Option<Principal>,
    pub creditor: Option<Principal>,
    /// Either debtor or creditor.
    pub involving: Option<Principal>,
    pub state: Option<CommitmentState>,
    pub active_only: bool,
}

impl CommitmentFilter {
    pub fn debtor(mut self, p: impl Into<String>) -> Self {
        self.debtor = Some(Principal::new(p));
        self
    }

    pub fn creditor(mut self, p: impl Into<String>) -> Self {
        self.creditor = Some(Principal::new(p));
        self
    }

    pub fn involving(mut self, p: impl Into<String>) -> Self {
        self.involving = Some(Principal::new(p));
        self
    }

    pub fn state(mut self, state: CommitmentState) -> Self {
        self.state = Some(state);
        self
    }

    pub fn active(mut self) -> Self {
        self.active_only = true;
        self
    }

    pub fn accepts(&self, c: &Commitment) -> bool {
        self.debtor.as_ref().is_none_or(|d| *d == c.debtor)
            && self.creditor.as_ref().is_none_or(|d| *d == c.creditor)
            && self
                .involving
                .as_ref()
                .is_none_or(|p| *p == c.debtor || *p == c.creditor)
            && self.state.is_none_or(|s| s == c.state)
            && (!self.active_only || c.is_active())
    }
}
