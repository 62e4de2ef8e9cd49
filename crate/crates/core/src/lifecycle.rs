//! Commitment lifecycle: states, stimuli and the transition relation.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommitmentState {
    Conditional,
    Detached,
    Discharged,
    Released,
    Cancelled,
    Violated,
    Expired,
    Delegated,
    Assigned,
}

impl CommitmentState {
    pub const ALL: [CommitmentState; 9] = [
        CommitmentState::Conditional,
        CommitmentState::Detached,
        CommitmentState::Discharged,
        CommitmentState::Released,
        CommitmentState::Cancelled,
        CommitmentState::Violated,
        CommitmentState::Expired,
        CommitmentState::Delegated,
        CommitmentState::Assigned,
    ];

    /// Conditional or Detached.
    pub fn is_active(self) -> bool {
        matches!(self, CommitmentState::Conditional | CommitmentState::Detached)
    }

    pub fn is_terminal(self) -> bool {
        !self.is_active()
    }

    /// States in which a commitment counts as existing for a commitment atom.
    pub fn is_standing(self) -> bool {
        matches!(
            self,
            CommitmentState::Conditional | CommitmentState::Detached | CommitmentState::Discharged
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CommitmentState::Conditional => "conditional",
            CommitmentState::Detached => "detached",
            CommitmentState::Discharged => "discharged",
            CommitmentState::Released => "released",
            CommitmentState::Cancelled => "cancelled",
            CommitmentState::Violated => "violated",
            CommitmentState::Expired => "expired",
            CommitmentState::Delegated => "delegated",
            CommitmentState::Assigned => "assigned",
        }
    }
}

impl fmt::Display for CommitmentState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CommitmentState::Conditional => "Conditional",
            CommitmentState::Detached => "Detached",
            CommitmentState::Discharged => "Discharged",
            CommitmentState::Released => "Released",
            CommitmentState::Cancelled => "Cancelled",
            CommitmentState::Violated => "Violated",
            CommitmentState::Expired => "Expired",
            CommitmentState::Delegated => "Delegated",
            CommitmentState::Assigned => "Assigned",
        };
        f.write_str(s)
    }
}

/// Anything that can move a commitment between states: the four
/// progression rules and the four principal-initiated operations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stimulus {
    /// Antecedent came to hold.
    Detach,
    /// Consequent came to hold.
    Discharge,
    /// Antecedent can no longer hold.
    Expire,
    /// Consequent can no longer hold.
    Violate,
    Release,
    Cancel,
    Delegate,
    Assign,
}

impl Stimulus {
    pub const ALL: [Stimulus; 8] = [
        Stimulus::Detach,
        Stimulus::Discharge,
        Stimulus::Expire,
        Stimulus::Violate,
        Stimulus::Release,
        Stimulus::Cancel,
        Stimulus::Delegate,
        Stimulus::Assign,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LifecycleError {
    #[error("commitment is in terminal state {0}")]
    Terminal(CommitmentState),
    #[error("{stimulus:?} does not apply to a {state} commitment")]
    Inapplicable {
        state: CommitmentState,
        stimulus: Stimulus,
    },
}

/// The transition relation. Cancelling a detached commitment violates it.
pub fn transition(from: CommitmentState, stimulus: Stimulus) -> Result<CommitmentState, LifecycleError> {
    use CommitmentState::*;
    use Stimulus::*;
    let next = match (from, stimulus) {
        (Conditional, Detach) => Detached,
        (Conditional, Discharge) => Discharged,
        (Conditional, Expire) => Expired,
        (Conditional, Release) => Released,
        (Conditional, Cancel) => Cancelled,
        (Conditional, Delegate) => Delegated,
        (Conditional, Assign) => Assigned,
        (Detached, Discharge) => Discharged,
        (Detached, Violate) => Violated,
        (Detached, Release) => Released,
        (Detached, Cancel) => Violated,
        (Detached, Delegate) => Delegated,
        (Detached, Assign) => Assigned,
        (Conditional | Detached, stimulus) => {
            return Err(LifecycleError::Inapplicable { state: from, stimulus })
        }
        (terminal, _) => return Err(LifecycleError::Terminal(terminal)),
    };
    Ok(next)
}
