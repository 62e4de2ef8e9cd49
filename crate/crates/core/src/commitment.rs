//! Commitments `C(debtor, creditor, antecedent, consequent)` and the
//! identities that tie them to the events that created them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::event::Seq;
use crate::lifecycle::{CommitmentState, LifecycleError, Stimulus};
use crate::proposition::{CommitmentAtom, Proposition, Term, Value};

/// A social participant enacting one or more roles.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Principal(pub String);

impl Principal {
    pub fn new(name: impl Into<String>) -> Self {
        Principal(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn to_term(&self) -> Term {
        Term::Lit(Value::Atom(self.0.clone()))
    }
}

impl fmt::Display for Principal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A named interaction position in a protocol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Role(pub String);

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CommitmentId(pub u32);

impl fmt::Display for CommitmentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// What a commitment or a transition is owed to.
///
/// Message events are referenced by the sequence number of the *send*, so
/// the sender's and the receiver's views name the same cause.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Declared at scenario setup (established by some earlier enactment).
    Setup(String),
    Event(Seq),
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Setup(label) => write!(f, "setup {label}"),
            Provenance::Event(seq) => write!(f, "event {seq}"),
        }
    }
}

/// View-independent identity: the creating cause plus the position among
/// commitments it created.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommitmentKey {
    pub created_by: Provenance,
    pub ordinal: u32,
}

impl fmt::Display for CommitmentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.created_by, self.ordinal)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub cause: Provenance,
    pub state: CommitmentState,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub id: CommitmentId,
    pub debtor: Principal,
    pub creditor: Principal,
    pub antecedent: Proposition,
    /// Once detached, existential witnesses from the antecedent are
    /// substituted here.
    pub consequent: Proposition,
    pub state: CommitmentState,
    pub created_by: Provenance,
    pub ordinal: u32,
    /// The commitment this one was delegated or assigned from.
    pub parent: Option<CommitmentId>,
    /// Append-only; the first entry is the creation.
    pub history: Vec<Transition>,
}

impl Commitment {
    pub fn key(&self) -> CommitmentKey {
        CommitmentKey {
            created_by: self.created_by.clone(),
            ordinal: self.ordinal,
        }
    }

    pub fn is_active(&self) -> bool {
        self.state.is_active()
    }

    pub fn atom(&self) -> CommitmentAtom {
        CommitmentAtom::new(
            self.debtor.to_term(),
            self.creditor.to_term(),
            self.antecedent.clone(),
            self.consequent.clone(),
        )
    }

    /// `C(x, y, T, u)` once the antecedent has held, otherwise the
    /// commitment as created.
    pub fn detached_form(&self) -> CommitmentAtom {
        let detached = self
            .history
            .iter()
            .any(|t| t.state == CommitmentState::Detached);
        let antecedent = if detached || self.antecedent == Proposition::Top {
            Proposition::Top
        } else {
            self.antecedent.clone()
        };
        CommitmentAtom::new(
            self.debtor.to_term(),
            self.creditor.to_term(),
            antecedent,
            self.consequent.clone(),
        )
    }

    /// Does `pattern` describe this commitment? `_` matches anything and a
    /// `T` antecedent also matches the detached form.
    pub fn matches(&self, pattern: &CommitmentAtom) -> bool {
        if !pattern.debtor.accepts(&Value::Atom(self.debtor.0.clone()))
            || !pattern.creditor.accepts(&Value::Atom(self.creditor.0.clone()))
            || !pattern.consequent.accepts(&self.consequent)
        {
            return false;
        }
        pattern.antecedent.accepts(&self.antecedent)
            || (pattern.antecedent == Proposition::Top
                && matches!(
                    self.state,
                    CommitmentState::Detached | CommitmentState::Discharged
                ))
    }

    pub(crate) fn push(&mut self, cause: Provenance, state: CommitmentState) {
        self.state = state;
        self.history.push(Transition { cause, state });
    }
}

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.id, self.state, self.atom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CommitmentError {
    #[error("{debtor} cannot become a debtor through an event it did not send ({cause})")]
    DebtorNotSender { debtor: Principal, cause: Provenance },
    #[error("{0} cannot commit to itself")]
    SelfCommitment(Principal),
    #[error("{by} is not the creditor of {id}")]
    NotCreditor { id: CommitmentId, by: Principal },
    #[error("{by} is not the debtor of {id}")]
    NotDebtor { id: CommitmentId, by: Principal },
    #[error("{id} is in terminal state {state}")]
    TerminalState { id: CommitmentId, state: CommitmentState },
    #[error("{stimulus:?} does not apply to {id} in state {state}")]
    Inapplicable {
        id: CommitmentId,
        state: CommitmentState,
        stimulus: Stimulus,
    },
    #[error("unknown commitment {0}")]
    UnknownCommitment(CommitmentId),
    #[error("cause {0} is not in the event history")]
    UnknownCause(Provenance),
    #[error("free variable `{0}` in a proposition that must be ground")]
    FreeVariable(String),
    #[error("expected a principal name, found `{0}`")]
    NotAPrincipal(String),
    #[error("progression did not reach a fixpoint within {0} passes")]
    FixpointOverflow(usize),
}

impl CommitmentError {
    pub(crate) fn lifecycle(id: CommitmentId, err: LifecycleError) -> Self {
        match err {
            LifecycleError::Terminal(state) => CommitmentError::TerminalState { id, state },
            LifecycleError::Inapplicable { state, stimulus } => CommitmentError::Inapplicable {
                id,
                state,
                stimulus,
            },
        }
    }
}
