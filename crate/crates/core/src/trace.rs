//! Enactment traces as JSON Lines, and replaying them into social states.
//!
//! A trace file holds three kinds of record, one per line:
//!
//! ```text
//! {"role":"PHY","principal":"Alessia"}
//! {"label":"c0","commitment":"C(PHY, PAT, requestAppointment(PAT, PHY), availableSlots(PHY, PAT, _))"}
//! {"seq":1,"kind":"sent","name":"requestAppointment","sender":"Bianca","receiver":"Alessia","args":[],"time":0}
//! ```
//!
//! Setup commitments are written in role terms.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::commitment::{CommitmentError, Principal, Role};
use crate::dsl::parse_commitment;
use crate::event::{Event, EventKind, Seq};
use crate::protocol::{Casting, Protocol};
use crate::proposition::CommitmentAtom;
use crate::social::{cast_commitment, ApplyError};
use crate::state::SocialState;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setup {
    pub label: String,
    pub commitment: CommitmentAtom,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub casting: Casting,
    pub setups: Vec<Setup>,
    pub events: Vec<Event>,
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("principal `{0}` does not appear in the trace")]
    UnknownPrincipal(Principal),
    #[error("setup `{label}`: {source}")]
    Setup { label: String, source: CommitmentError },
    #[error("event {seq}: {source}")]
    Apply { seq: Seq, source: ApplyError },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Record {
    Event(Event),
    Cast {
        role: Role,
        principal: Principal,
    },
    Setup {
        label: String,
        commitment: String,
    },
}

impl Trace {
    pub fn new(casting: Casting) -> Self {
        Trace {
            casting,
            ..Trace::default()
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let mut line = |r: &Record| {
            let _ = writeln!(out, "{}", serde_json::to_string(r).expect("records serialize"));
        };
        for (role, principal) in self.casting.iter() {
            line(&Record::Cast {
                role: role.clone(),
                principal: principal.clone(),
            });
        }
        for s in &self.setups {
            line(&Record::Setup {
                label: s.label.clone(),
                commitment: s.commitment.to_source(),
            });
        }
        for e in &self.events {
            line(&Record::Event(e.clone()));
        }
        out
    }

    pub fn from_jsonl(src: &str) -> Result<Trace, TraceError> {
        let mut trace = Trace::default();
        for (i, raw) in src.lines().enumerate() {
            let line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            let err = |message: String| TraceError::Parse { line, message };
            let record: Record = serde_json::from_str(raw).map_err(|e| err(e.to_string()))?;
            match record {
                Record::Event(e) => trace.events.push(e),
                Record::Cast { role, principal } => {
                    if let Some(prev) = trace.casting.insert(role.clone(), principal) {
                        return Err(err(format!("role `{role}` is already cast to `{prev}`")));
                    }
                }
                Record::Setup { label, commitment } => {
                    let commitment = parse_commitment(&commitment).map_err(|d| {
                        err(d.first().map_or_else(|| "malformed commitment".into(), |d| d.message.clone()))
                    })?;
                    trace.setups.push(Setup { label, commitment });
                }
            }
        }
        Ok(trace)
    }

    /// Every principal named by the casting or by an event.
    pub fn principals(&self) -> Vec<Principal> {
        let mut out = self.casting.principals();
        for e in &self.events {
            out.extend(e.sender.iter().cloned());
            out.extend(e.receiver.iter().cloned());
        }
        out.sort();
        out.dedup();
        out
    }

    /// The global state: sends fire meanings, deliveries are recorded.
    pub fn replay(&self, protocol: &Protocol) -> Result<SocialState, TraceError> {
        self.replay_until(protocol, None)
    }

    /// As [`Trace::replay`], keeping only events at or before `horizon`.
    pub fn replay_until(&self, protocol: &Protocol, horizon: Option<u64>) -> Result<SocialState, TraceError> {
        let mut state = self.setup_state(|_| true)?;
        for e in self.events.iter().filter(|e| horizon.is_none_or(|h| e.time <= h)) {
            state = match e.kind {
                EventKind::MessageSent => state.apply_message(protocol, &self.casting, e),
                EventKind::MessageReceived => state.record_delivery(e),
                EventKind::DomainEvent | EventKind::ClockTick => state.observe_domain_event(e),
            }
            .map_err(|source| TraceError::Apply { seq: e.seq, source })?;
        }
        Ok(state)
    }

    /// What `principal` can know: setups it is party to, its own sends,
    /// deliveries to it, and domain events and ticks.
    pub fn local_view(&self, protocol: &Protocol, principal: &Principal) -> Result<SocialState, TraceError> {
        if !self.principals().contains(principal) {
            return Err(TraceError::UnknownPrincipal(principal.clone()));
        }
        let cast = self.casting.contains_principal(principal);
        let mut state = self.setup_state(|(d, c)| d == principal || c == principal)?;
        for e in &self.events {
            let next = match e.kind {
                EventKind::MessageSent if e.sender.as_ref() == Some(principal) => {
                    state.apply_message(protocol, &self.casting, e)
                }
                EventKind::MessageReceived if e.receiver.as_ref() == Some(principal) => {
                    state.apply_message(protocol, &self.casting, e)
                }
                EventKind::DomainEvent | EventKind::ClockTick if cast => state.observe_domain_event(e),
                _ => continue,
            };
            state = next.map_err(|source| TraceError::Apply { seq: e.seq, source })?;
        }
        Ok(state)
    }

    fn setup_state(&self, keep: impl Fn((&Principal, &Principal)) -> bool) -> Result<SocialState, TraceError> {
        let mut state = SocialState::new();
        for s in &self.setups {
            let wrap = |source| TraceError::Setup {
                label: s.label.clone(),
                source,
            };
            let (debtor, creditor, _) = cast_commitment(&s.commitment, &self.casting).map_err(wrap)?;
            if keep((&debtor, &creditor)) {
                state = state.setup(&s.label, &s.commitment, &self.casting).map_err(wrap)?;
            }
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proposition::Value;

    fn sample() -> Trace {
        let mut t = Trace::new(Casting::new().cast("PHY", "Alessia").cast("PAT", "Bianca"));
        t.setups.push(Setup {
            label: "c0".into(),
            commitment: parse_commitment("C(PHY, PAT, requestAppointment(PAT, PHY), availableSlots(PHY, PAT, _))")
                .unwrap(),
        });
        let sent = Event::sent(
            1,
            "selectSlot",
            Principal::new("Bianca"),
            Principal::new("Alessia"),
            vec![Value::atom("1400")],
            3,
        );
        t.events.push(Event::received(2, &sent, 5));
        t.events.insert(0, sent);
        t.events.push(Event::domain(3, "showUp", vec![Value::atom("Bianca"), Value::atom("1400")], 9));
        t.events.push(Event::tick(4, 10));
        t
    }

    #[test]
    fn jsonl_round_trips() {
        let t = sample();
        let text = t.to_jsonl();
        assert_eq!(Trace::from_jsonl(&text).unwrap(), t);
        assert!(text.lines().next().unwrap().starts_with(r#"{"role":"PAT","principal":"Bianca"}"#));
    }

    #[test]
    fn parse_errors_name_the_line() {
        let err = Trace::from_jsonl("{\"role\":\"A\",\"principal\":\"x\"}\n{oops}\n").unwrap_err();
        assert!(matches!(err, TraceError::Parse { line: 2, .. }));
    }

    #[test]
    fn unknown_principal_has_no_view() {
        let p = crate::dsl::parse("protocol P\n roles PHY, PAT\n param s: value\n message selectSlot: PAT -> PHY (s)\n").unwrap();
        let t = sample();
        assert!(matches!(
            t.local_view(&p, &Principal::new("Carol")),
            Err(TraceError::UnknownPrincipal(_))
        ));
        let view = t.local_view(&p, &Principal::new("Alessia")).unwrap();
        assert_eq!(view.history().len(), 3);
        assert_eq!(view.len(), 1);
    }
}
