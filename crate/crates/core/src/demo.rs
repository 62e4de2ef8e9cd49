//! The bundled appointment-scheduling enactment, printed as the sequence
//! of active commitment sets after each message.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::commitment::{Commitment, CommitmentId};
use crate::dsl;
use crate::event::EventKind;
use crate::lifecycle::CommitmentState;
use crate::proposition::Proposition;
use crate::protocol::Protocol;
use crate::sim::{self, Scenario};
use crate::state::SocialState;
use crate::trace::Trace;

pub const APPOINTMENT_PROTOCOL: &str = include_str!("../assets/appointment.cp");
pub const APPOINTMENT_SCENARIO: &str = include_str!("../assets/appointment.scn");
pub const APPOINTMENT_SHOWUP_SCENARIO: &str = include_str!("../assets/appointment-showup.scn");
pub const BAD_ORDERING_PROTOCOL: &str = include_str!("../assets/bad-ordering.cp");
pub const WRAPPED_ORDERING_PROTOCOL: &str = include_str!("../assets/wrapped-ordering.cp");

pub fn appointment_protocol() -> Protocol {
    dsl::load(APPOINTMENT_PROTOCOL).expect("bundled protocol is valid")
}

pub fn appointment_scenario() -> Scenario {
    Scenario::parse(APPOINTMENT_SCENARIO).expect("bundled scenario is valid")
}

/// The scripted enactment of the bundled scenario.
pub fn demo_trace() -> Trace {
    sim::run(&appointment_protocol(), &appointment_scenario())
        .expect("bundled scenario runs")
        .trace
}

/// One box of the progression: the label of the message that led to it
/// and the active commitments, labelled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub after: Option<String>,
    pub active: Vec<(String, Commitment)>,
}

/// Names commitments `c0, c1, ...` in creation order. A commitment created
/// conditional on something other than `T` takes two names: one for the
/// conditional form and the next for its detached form.
#[derive(Clone, Debug, Default)]
pub struct Labels {
    base: BTreeMap<CommitmentId, (usize, bool)>,
    next: usize,
}

impl Labels {
    fn observe(&mut self, state: &SocialState) {
        for c in state.commitments() {
            if self.base.contains_key(&c.id) {
                continue;
            }
            let first = &c.history[0];
            let two = first.state == CommitmentState::Conditional && c.antecedent != Proposition::Top;
            self.base.insert(c.id, (self.next, two));
            self.next += if two { 2 } else { 1 };
        }
    }

    pub fn label(&self, c: &Commitment) -> String {
        let (n, two) = self.base.get(&c.id).copied().unwrap_or((usize::MAX, false));
        let detached = c.history.iter().any(|t| t.state == CommitmentState::Detached);
        if two && detached {
            format!("c{}", n + 1)
        } else {
            format!("c{n}")
        }
    }
}

/// The global state before the first message and after each send.
pub fn progression(protocol: &Protocol, trace: &Trace) -> Vec<Snapshot> {
    let mut labels = Labels::default();
    let mut out = Vec::new();
    let mut snapshot = |state: &SocialState, after: Option<String>, labels: &mut Labels| {
        labels.observe(state);
        let mut active: Vec<(String, Commitment)> = state
            .active()
            .into_iter()
            .map(|c| (labels.label(c), c.clone()))
            .collect();
        active.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out.push(Snapshot { after, active });
    };

    let mut prefix = Trace {
        casting: trace.casting.clone(),
        setups: trace.setups.clone(),
        events: Vec::new(),
    };
    let state = prefix.replay(protocol).expect("demo trace replays");
    snapshot(&state, None, &mut labels);
    for e in &trace.events {
        prefix.events.push(e.clone());
        if e.kind == EventKind::MessageSent {
            let state = prefix.replay(protocol).expect("demo trace replays");
            let args: Vec<String> = e.args.iter().map(ToString::to_string).collect();
            let who = |p: &Option<crate::commitment::Principal>| p.as_ref().map_or(String::new(), ToString::to_string);
            let after = format!("{}({}) {} -> {}", e.name, args.join(", "), who(&e.sender), who(&e.receiver));
            snapshot(&state, Some(after), &mut labels);
        }
    }
    out
}

/// Plain-ASCII rendering of [`progression`].
pub fn render(protocol: &Protocol, trace: &Trace) -> String {
    let mut out = String::new();
    let cast: Vec<String> = trace.casting.iter().map(|(r, p)| format!("{r} = {p}")).collect();
    let _ = writeln!(out, "protocol {} ({})", protocol.name, cast.join(", "));
    let boxes = progression(protocol, trace);
    for (i, b) in boxes.iter().enumerate() {
        match &b.after {
            None => {
                let _ = writeln!(out, "({}) initial", i + 1);
            }
            Some(m) => {
                let _ = writeln!(out, "({}) after {m}", i + 1);
            }
        }
        if b.active.is_empty() {
            let _ = writeln!(out, "    (no active commitments)");
        }
        for (label, c) in &b.active {
            let _ = writeln!(out, "    {label} {} {}", c.state.as_str(), c.detached_form());
        }
    }
    let last: Vec<&str> = boxes
        .last()
        .map(|b| b.active.iter().map(|(l, _)| l.as_str()).collect())
        .unwrap_or_default();
    let _ = writeln!(out, "final active: {}", last.join(", "));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_assets_load() {
        for src in [APPOINTMENT_PROTOCOL, BAD_ORDERING_PROTOCOL, WRAPPED_ORDERING_PROTOCOL] {
            assert!(dsl::parse(src).is_ok());
        }
        Scenario::parse(APPOINTMENT_SHOWUP_SCENARIO).unwrap();
        appointment_scenario();
    }

    #[test]
    fn five_boxes_ending_with_both_showups() {
        let p = appointment_protocol();
        let boxes = progression(&p, &demo_trace());
        let labels: Vec<Vec<&str>> = boxes
            .iter()
            .map(|b| b.active.iter().map(|(l, _)| l.as_str()).collect())
            .collect();
        assert_eq!(labels, [vec!["c0"], vec!["c1"], vec!["c2"], vec!["c3", "c4"], vec!["c4", "c5"]]);
    }
}
