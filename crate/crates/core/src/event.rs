//! Enactment events: message sends and deliveries, domain events and
//! clock ticks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commitment::Principal;
use crate::proposition::{EventAtom, Term, Value};

/// Global sequence number.
pub type Seq = u64;

/// Name under which clock ticks are matched by event atoms.
pub const TICK: &str = "tick";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EventKind {
    #[serde(rename = "sent")]
    MessageSent,
    #[serde(rename = "received")]
    MessageReceived,
    #[serde(rename = "domain")]
    DomainEvent,
    #[serde(rename = "tick")]
    ClockTick,
}

impl EventKind {
    pub fn is_message(self) -> bool {
        matches!(self, EventKind::MessageSent | EventKind::MessageReceived)
    }
}

/// One record of an enactment. Field order is the canonical trace order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub seq: Seq,
    pub kind: EventKind,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sender: Option<Principal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<Principal>,
    /// Message parameters in schema order, or domain event arguments.
    #[serde(default)]
    pub args: Vec<Value>,
    pub time: u64,
    /// For deliveries: the sequence number of the matching send.
    #[serde(rename = "ref", default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<Seq>,
}

impl Event {
    pub fn sent(
        seq: Seq,
        name: impl Into<String>,
        sender: Principal,
        receiver: Principal,
        args: Vec<Value>,
        time: u64,
    ) -> Self {
        Event {
            seq,
            kind: EventKind::MessageSent,
            name: name.into(),
            sender: Some(sender),
            receiver: Some(receiver),
            args,
            time,
            origin: None,
        }
    }

    /// The delivery of `sent` to its receiver.
    pub fn received(seq: Seq, sent: &Event, time: u64) -> Self {
        Event {
            seq,
            kind: EventKind::MessageReceived,
            origin: Some(sent.seq),
            time,
            ..sent.clone()
        }
    }

    pub fn domain(seq: Seq, name: impl Into<String>, args: Vec<Value>, time: u64) -> Self {
        Event {
            seq,
            kind: EventKind::DomainEvent,
            name: name.into(),
            sender: None,
            receiver: None,
            args,
            time,
            origin: None,
        }
    }

    pub fn tick(seq: Seq, time: u64) -> Self {
        Event {
            seq,
            kind: EventKind::ClockTick,
            name: TICK.to_string(),
            sender: None,
            receiver: None,
            args: Vec::new(),
            time,
            origin: None,
        }
    }

    /// The send this event stands for: its own seq, or the origin of a delivery.
    pub fn origin_seq(&self) -> Seq {
        self.origin.unwrap_or(self.seq)
    }

    /// Positional arguments an event atom is matched against: sender and
    /// receiver come first for messages.
    pub fn occurrence_args(&self) -> Vec<Value> {
        let mut out = Vec::with_capacity(self.args.len() + 2);
        if self.kind.is_message() {
            if let Some(s) = &self.sender {
                out.push(Value::Atom(s.0.clone()));
            }
            if let Some(r) = &self.receiver {
                out.push(Value::Atom(r.0.clone()));
            }
        }
        out.extend(self.args.iter().cloned());
        out
    }

    /// Does this event count as an occurrence of `atom`?
    ///
    /// Atom arguments match a prefix of the occurrence arguments, so
    /// `requestAppointment` matches every request. A tick atom `tick(t)`
    /// is matched by any clock tick at time `t` or later.
    pub fn matches(&self, atom: &EventAtom) -> bool {
        if self.name != atom.name {
            return false;
        }
        if self.kind == EventKind::ClockTick {
            return match atom.args.as_slice() {
                [] | [Term::Any] => true,
                [Term::Lit(Value::Atom(t))] => t.parse::<u64>().is_ok_and(|t| self.time >= t),
                _ => false,
            };
        }
        let occ = self.occurrence_args();
        atom.args.len() <= occ.len() && atom.args.iter().zip(&occ).all(|(t, v)| t.accepts(v))
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(ToString::to_string).collect();
        match self.kind {
            EventKind::MessageSent | EventKind::MessageReceived => {
                let verb = if self.kind == EventKind::MessageSent {
                    "sent"
                } else {
                    "received"
                };
                write!(
                    f,
                    "{}({}) {} -> {} [{verb}]",
                    self.name,
                    args.join(", "),
                    self.sender.as_ref().map_or("?", |p| p.as_str()),
                    self.receiver.as_ref().map_or("?", |p| p.as_str()),
                )
            }
            EventKind::DomainEvent => write!(f, "{}({})", self.name, args.join(", ")),
            EventKind::ClockTick => write!(f, "tick@{}", self.time),
        }
    }
}
