//! Applying protocol events to a social state.

use crate::commitment::{CommitmentError, CommitmentId, Principal, Provenance};
use crate::event::{Event, EventKind, Seq};
use crate::protocol::{Casting, MeaningClause, ParamType, Protocol};
use crate::proposition::{CommitmentAtom, Term, Value};
use crate::state::SocialState;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ApplyError {
    #[error("message `{0}` is not declared by the protocol")]
    UnknownMessage(String),
    #[error("message `{message}` must be {role} `{expected}`, found `{found}`")]
    RoleMismatch {
        message: String,
        role: &'static str,
        expected: String,
        found: String,
    },
    #[error("message `{message}` takes {expected} argument(s), found {found}")]
    BindingArityMismatch {
        message: String,
        expected: usize,
        found: usize,
    },
    #[error("argument `{param}` of message `{message}` must be a {expected}")]
    BindingTypeMismatch {
        message: String,
        param: String,
        expected: ParamType,
    },
    #[error("event {seq} is not after the last event {last}")]
    OutOfOrder { seq: Seq, last: Seq },
    #[error("expected a {expected} event, found {found:?}")]
    WrongKind {
        expected: &'static str,
        found: EventKind,
    },
    #[error(transparent)]
    Commitment(#[from] CommitmentError),
}

fn principal_of(t: &Term) -> Result<Principal, CommitmentError> {
    match t {
        Term::Lit(Value::Atom(a)) => Ok(Principal::new(a.clone())),
        other => Err(CommitmentError::NotAPrincipal(other.to_string())),
    }
}

/// Instantiate a role-level commitment with a casting.
pub fn cast_commitment(atom: &CommitmentAtom, casting: &Casting) -> Result<(Principal, Principal, CommitmentAtom), CommitmentError> {
    let ground = atom.instantiate(&casting.env());
    let debtor = principal_of(&ground.debtor)?;
    let creditor = principal_of(&ground.creditor)?;
    Ok((debtor, creditor, ground))
}

impl SocialState {
    fn check_order(&self, event: &Event) -> Result<(), ApplyError> {
        match self.last_seq() {
            Some(last) if event.seq <= last => Err(ApplyError::OutOfOrder { seq: event.seq, last }),
            _ => Ok(()),
        }
    }

    /// Record a setup commitment, stated in role terms, then progress.
    pub fn setup(&self, label: &str, atom: &CommitmentAtom, casting: &Casting) -> Result<SocialState, CommitmentError> {
        let (debtor, creditor, ground) = cast_commitment(atom, casting)?;
        let mut next = self.clone();
        next.create_in(
            debtor,
            creditor,
            ground.antecedent,
            ground.consequent,
            Provenance::Setup(label.to_string()),
        )?;
        next.progress_in_place()?;
        Ok(next)
    }

    /// Record a message event and fire its meaning, then progress.
    ///
    /// Both the send and the delivery of a message fire its meaning; the
    /// provenance names the send in either case.
    pub fn apply_message(&self, protocol: &Protocol, casting: &Casting, event: &Event) -> Result<SocialState, ApplyError> {
        if !event.kind.is_message() {
            return Err(ApplyError::WrongKind {
                expected: "message",
                found: event.kind,
            });
        }
        self.check_order(event)?;
        let schema = protocol
            .message(&event.name)
            .ok_or_else(|| ApplyError::UnknownMessage(event.name.clone()))?;

        for (role, who, label) in [
            (&schema.sender, &event.sender, "sent by"),
            (&schema.receiver, &event.receiver, "received by"),
        ] {
            let expected = casting.principal(role);
            if expected.is_none() || expected != who.as_ref() {
                return Err(ApplyError::RoleMismatch {
                    message: event.name.clone(),
                    role: label,
                    expected: format!("{role} ({})", expected.map_or("uncast", |p| p.as_str())),
                    found: who.as_ref().map_or("nobody", |p| p.as_str()).to_string(),
                });
            }
        }
        if event.args.len() != schema.params.len() {
            return Err(ApplyError::BindingArityMismatch {
                message: event.name.clone(),
                expected: schema.params.len(),
                found: event.args.len(),
            });
        }
        let mut env = casting.env();
        for (name, value) in schema.params.iter().zip(&event.args) {
            let ty = protocol.param(name).map_or(ParamType::Value, |p| p.ty);
            let ok = matches!(
                (ty, value),
                (ParamType::Value, Value::Atom(_)) | (ParamType::Set, Value::Set(_))
            );
            if !ok {
                return Err(ApplyError::BindingTypeMismatch {
                    message: event.name.clone(),
                    param: name.clone(),
                    expected: ty,
                });
            }
            env.insert(name.clone(), value.clone());
        }

        let sender = event.sender.clone().expect("checked above");
        let cause = Provenance::Event(event.origin_seq());
        let mut next = self.clone();
        next.history.push(event.clone());
        for clause in &schema.meaning {
            let atom = clause.atom().instantiate(&env);
            match clause {
                MeaningClause::Create(_) => {
                    let debtor = principal_of(&atom.debtor)?;
                    let creditor = principal_of(&atom.creditor)?;
                    next.create_in(debtor, creditor, atom.antecedent, atom.consequent, cause.clone())?;
                }
                MeaningClause::Release(_) => {
                    for id in next.live_matching(&atom) {
                        next.release_in(id, &sender, cause.clone())?;
                    }
                }
                MeaningClause::Cancel(_) => {
                    for id in next.live_matching(&atom) {
                        next.cancel_in(id, &sender, cause.clone())?;
                    }
                }
                MeaningClause::Delegate { to, .. } => {
                    let to = principal_of(&to.instantiate(&env))?;
                    for id in next.live_matching(&atom) {
                        next.delegate_in(id, to.clone(), &sender, cause.clone())?;
                    }
                }
                MeaningClause::Assign { to, .. } => {
                    let to = principal_of(&to.instantiate(&env))?;
                    for id in next.live_matching(&atom) {
                        next.assign_in(id, to.clone(), &sender, cause.clone())?;
                    }
                }
            }
        }
        next.progress_in_place()?;
        Ok(next)
    }

    /// Append a delivery to the history without firing its meaning again.
    /// Used for the global state, where the send already fired it.
    pub fn record_delivery(&self, event: &Event) -> Result<SocialState, ApplyError> {
        if event.kind != EventKind::MessageReceived {
            return Err(ApplyError::WrongKind {
                expected: "received",
                found: event.kind,
            });
        }
        self.observe(event)
    }

    /// Record a domain event or clock tick, then progress.
    pub fn observe_domain_event(&self, event: &Event) -> Result<SocialState, ApplyError> {
        if !matches!(event.kind, EventKind::DomainEvent | EventKind::ClockTick) {
            return Err(ApplyError::WrongKind {
                expected: "domain or tick",
                found: event.kind,
            });
        }
        self.observe(event)
    }

    fn observe(&self, event: &Event) -> Result<SocialState, ApplyError> {
        self.check_order(event)?;
        let mut next = self.clone();
        next.history.push(event.clone());
        next.progress_in_place()?;
        Ok(next)
    }

    fn live_matching(&self, pattern: &CommitmentAtom) -> Vec<CommitmentId> {
        self.commitments
            .values()
            .filter(|c| c.is_active() && c.matches(pattern))
            .map(|c| c.id)
            .collect()
    }
}
