//! Three-valued evaluation of propositions over a social state.
//!
//! Histories are finite prefixes of an enactment, so a proposition is
//! `Pending` until it is either established or ruled out for good.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commitment::CommitmentError;
use crate::proposition::{EventAtom, Env, Proposition, Term, Value};
use crate::state::SocialState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthStatus {
    Satisfied,
    Pending,
    Violated,
}

impl fmt::Display for TruthStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TruthStatus::Satisfied => "satisfied",
            TruthStatus::Pending => "pending",
            TruthStatus::Violated => "violated",
        })
    }
}

/// Evaluate a ground proposition.
pub fn evaluate(prop: &Proposition, state: &SocialState) -> Result<TruthStatus, CommitmentError> {
    eval(prop, state, &Env::new()).map(|(status, _)| status)
}

/// Evaluate and also return the existential bindings that made a
/// `Satisfied` outcome true (the first witness in domain order).
pub fn evaluate_with_witness(
    prop: &Proposition,
    state: &SocialState,
) -> Result<(TruthStatus, Env), CommitmentError> {
    eval(prop, state, &Env::new())
}

fn ground_event(atom: &EventAtom, env: &Env) -> Result<EventAtom, CommitmentError> {
    let atom = atom.instantiate(env);
    if let Some(Term::Var(v)) = atom.args.iter().find(|t| matches!(t, Term::Var(_))) {
        return Err(CommitmentError::FreeVariable(v.clone()));
    }
    Ok(atom)
}

fn first_occurrence(state: &SocialState, atom: &EventAtom) -> Option<usize> {
    state.history.iter().position(|e| e.matches(atom))
}

fn eval(
    prop: &Proposition,
    state: &SocialState,
    env: &Env,
) -> Result<(TruthStatus, Env), CommitmentError> {
    use TruthStatus::*;
    let status = match prop {
        Proposition::Top => Satisfied,
        Proposition::Wildcard => return Err(CommitmentError::FreeVariable("_".into())),
        Proposition::Event(atom) => {
            let atom = ground_event(atom, env)?;
            if first_occurrence(state, &atom).is_some() {
                Satisfied
            } else {
                Pending
            }
        }
        Proposition::Commitment(atom) => {
            let atom = atom.instantiate(env);
            if let Some(v) = atom.free_vars().into_iter().next() {
                return Err(CommitmentError::FreeVariable(v));
            }
            let exists = state
                .commitments
                .values()
                .any(|c| c.state.is_standing() && c.matches(&atom));
            if exists {
                Satisfied
            } else {
                Pending
            }
        }
        Proposition::And(parts) => {
            let mut witness = Env::new();
            let mut all = true;
            for part in parts {
                let (s, w) = eval(part, state, env)?;
                match s {
                    Violated => return Ok((Violated, Env::new())),
                    Pending => all = false,
                    Satisfied => witness.extend(w),
                }
            }
            if all {
                return Ok((Satisfied, witness));
            }
            Pending
        }
        Proposition::ExistsIn { var, domain, body } => {
            let mut values = Vec::with_capacity(domain.len());
            for term in domain {
                match term {
                    Term::Var(v) => match env.get(v) {
                        Some(Value::Set(items)) => values.extend(items.iter().cloned()),
                        Some(Value::Atom(a)) => values.push(a.clone()),
                        None => return Err(CommitmentError::FreeVariable(v.clone())),
                    },
                    Term::Lit(Value::Atom(a)) => values.push(a.clone()),
                    Term::Lit(Value::Set(items)) => values.extend(items.iter().cloned()),
                    Term::Any => return Err(CommitmentError::FreeVariable("_".into())),
                }
            }
            let mut all_violated = true;
            for value in values {
                let mut inner = env.clone();
                inner.insert(var.clone(), Value::Atom(value.clone()));
                let (s, w) = eval(body, state, &inner)?;
                match s {
                    Satisfied => {
                        let mut witness = w;
                        witness.insert(var.clone(), Value::Atom(value));
                        return Ok((Satisfied, witness));
                    }
                    Pending => all_violated = false,
                    Violated => {}
                }
            }
            if all_violated {
                Violated
            } else {
                Pending
            }
        }
        Proposition::Before(first, second) => {
            let first = ground_event(first, env)?;
            let second = ground_event(second, env)?;
            match first_occurrence(state, &second) {
                None => Pending,
                Some(at) => {
                    if state.history[..at].iter().any(|e| e.matches(&first)) {
                        Satisfied
                    } else {
                        Violated
                    }
                }
            }
        }
    };
    Ok((status, Env::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commitment::Principal;
    use crate::event::Event;

    fn state_with(names: &[&str]) -> SocialState {
        let mut s = SocialState::new();
        for (i, n) in names.iter().enumerate() {
            s.history.push(Event::domain(i as u64 + 1, *n, vec![], i as u64));
        }
        s
    }

    #[test]
    fn top_is_satisfied() {
        assert_eq!(
            evaluate(&Proposition::Top, &SocialState::new()).unwrap(),
            TruthStatus::Satisfied
        );
    }

    // Oracle: over every ordering of two distinct events (and their
    // proper prefixes) occurs-before is decided by the position of the
    // first `b`.
    #[test]
    fn before_over_all_two_event_orderings() {
        let before = Proposition::Before(
            EventAtom::new("requestAppointment", vec![]),
            EventAtom::new("availableSlots", vec![]),
        );
        let cases: [(&[&str], TruthStatus); 6] = [
            (&[], TruthStatus::Pending),
            (&["requestAppointment"], TruthStatus::Pending),
            (&["availableSlots"], TruthStatus::Violated),
            (&["requestAppointment", "availableSlots"], TruthStatus::Satisfied),
            (&["availableSlots", "requestAppointment"], TruthStatus::Violated),
            (&["availableSlots", "availableSlots"], TruthStatus::Violated),
        ];
        for (names, expected) in cases {
            assert_eq!(evaluate(&before, &state_with(names)).unwrap(), expected, "{names:?}");
        }
    }

    #[test]
    fn exists_reports_first_witness() {
        let s = state_with(&["pick1600", "pick1400"]);
        let p = Proposition::exists_in(
            "s",
            vec![Term::atom("1400"), Term::atom("1600")],
            Proposition::Event(EventAtom::new("pick", vec![])),
        );
        // Body has no reference to s; both bindings hold, first wins.
        let s2 = state_with(&["pick"]);
        let (status, w) = evaluate_with_witness(&p, &s2).unwrap();
        assert_eq!(status, TruthStatus::Satisfied);
        assert_eq!(w.get("s"), Some(&Value::atom("1400")));
        assert_eq!(evaluate(&p, &s).unwrap(), TruthStatus::Pending);
    }

    #[test]
    fn exists_is_violated_only_when_every_binding_is() {
        let mut s = SocialState::new();
        s.history.push(Event::sent(
            1,
            "confirm",
            Principal::new("A"),
            Principal::new("B"),
            vec![],
            0,
        ));
        let p = Proposition::exists_in(
            "x",
            vec![Term::atom("1"), Term::atom("2")],
            Proposition::Before(
                EventAtom::new("offer", vec![Term::var("x")]),
                EventAtom::new("confirm", vec![]),
            ),
        );
        assert_eq!(evaluate(&p, &s).unwrap(), TruthStatus::Violated);
    }

    #[test]
    fn free_variable_is_an_error() {
        let p = Proposition::event("showUp", vec![Term::var("t")]);
        assert_eq!(
            evaluate(&p, &SocialState::new()),
            Err(CommitmentError::FreeVariable("t".into()))
        );
    }
}
