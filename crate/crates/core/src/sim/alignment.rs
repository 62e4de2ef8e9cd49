use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::commitment::{CommitmentKey, Principal};
use crate::lifecycle::CommitmentState;
use crate::state::SocialState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MisalignmentKind {
    /// The creditor holds it detached; the debtor holds it neither
    /// detached nor discharged.
    UnmetExpectation,
    /// One party's view lacks the commitment.
    Existence,
    /// Both views have it in different states.
    State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Misalignment {
    pub key: CommitmentKey,
    pub kind: MisalignmentKind,
    pub debtor: Principal,
    pub creditor: Principal,
    pub debtor_state: Option<CommitmentState>,
    pub creditor_state: Option<CommitmentState>,
}

impl fmt::Display for Misalignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: Option<CommitmentState>| s.map_or("absent", |s| s.as_str());
        write!(
            f,
            "{} {:?}: debtor {} has {}, creditor {} has {}",
            self.key,
            self.kind,
            self.debtor,
            show(self.debtor_state),
            self.creditor,
            show(self.creditor_state)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AlignmentReport {
    pub misalignments: Vec<Misalignment>,
}

impl AlignmentReport {
    pub fn aligned(&self) -> bool {
        self.misalignments.is_empty()
    }
}

/// Compare the views of each commitment's debtor and creditor.
/// Commitments whose parties are not both among `views` are skipped.
pub fn check_alignment<'a, I>(views: I) -> AlignmentReport
where
    I: IntoIterator<Item = (&'a Principal, &'a SocialState)>,
{
    let views: BTreeMap<&Principal, &SocialState> = views.into_iter().collect();
    let mut parties: BTreeMap<CommitmentKey, BTreeSet<(Principal, Principal)>> = BTreeMap::new();
    for view in views.values() {
        for c in view.commitments() {
            parties
                .entry(c.key())
                .or_default()
                .insert((c.debtor.clone(), c.creditor.clone()));
        }
    }
    let mut out = Vec::new();
    for (key, pairs) in parties {
        for (debtor, creditor) in pairs {
            let (Some(dv), Some(cv)) = (views.get(&debtor), views.get(&creditor)) else {
                continue;
            };
            let debtor_state = dv.by_key(&key).map(|c| c.state);
            let creditor_state = cv.by_key(&key).map(|c| c.state);
            let kind = if creditor_state == Some(CommitmentState::Detached)
                && !matches!(
                    debtor_state,
                    Some(CommitmentState::Detached | CommitmentState::Discharged)
                ) {
                MisalignmentKind::UnmetExpectation
            } else if debtor_state.is_none() || creditor_state.is_none() {
                MisalignmentKind::Existence
            } else if debtor_state != creditor_state {
                MisalignmentKind::State
            } else {
                continue;
            };
            out.push(Misalignment {
                key: key.clone(),
                kind,
                debtor,
                creditor,
                debtor_state,
                creditor_state,
            });
        }
    }
    AlignmentReport { misalignments: out }
}
