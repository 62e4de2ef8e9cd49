//! The discrete-event loop.
//!
//! The queue holds deliveries and principal activations keyed by
//! `(time, tiebreak, counter)`; the tiebreak is drawn from the run's RNG so
//! simultaneous items are ordered randomly but reproducibly.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::policy::{GroundAction, Policy, PolicyError};
use super::scenario::{Network, PolicyKind, PolicySpec, Scenario};
use crate::commitment::{CommitmentError, Principal};
use crate::event::{Event, Seq};
use crate::protocol::Protocol;
use crate::social::{cast_commitment, ApplyError};
use crate::state::SocialState;
use crate::trace::Trace;

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("setup `{label}`: {source}")]
    Setup { label: String, source: CommitmentError },
    #[error("policy of {principal}: {source}")]
    Policy { principal: Principal, source: PolicyError },
    #[error("{principal} at time {time}: {source}")]
    Apply {
        principal: Principal,
        time: u64,
        source: ApplyError,
    },
}

/// The outcome of a run.
#[derive(Clone, Debug)]
pub struct Enactment {
    pub trace: Trace,
    pub global: SocialState,
    pub views: BTreeMap<Principal, SocialState>,
    /// No message in flight and no principal with an action pending.
    pub quiescent: bool,
    pub end_time: u64,
}

#[derive(Clone, Debug)]
enum Item {
    Deliver(Event),
    Activate(Principal),
}

struct Engine<'a> {
    protocol: &'a Protocol,
    scenario: &'a Scenario,
    rng: ChaCha8Rng,
    queue: BTreeMap<(u64, u64, u64), Item>,
    counter: u64,
    pending: BTreeSet<Principal>,
    channels: BTreeMap<(Principal, Principal), u64>,
    policies: BTreeMap<Principal, Policy>,
    trace: Trace,
    global: SocialState,
    views: BTreeMap<Principal, SocialState>,
    seq: Seq,
    now: u64,
}

/// Check a scenario against a protocol: every role cast, every cast role
/// declared, every policy owner cast.
pub fn validate_scenario(protocol: &Protocol, scenario: &Scenario) -> Result<(), SimError> {
    for role in &protocol.roles {
        if scenario.casting.principal(role).is_none() {
            return Err(SimError::Config(format!("role `{role}` is not cast")));
        }
    }
    for (role, _) in scenario.casting.iter() {
        if !protocol.has_role(role) {
            return Err(SimError::Config(format!(
                "`{role}` is not a role of protocol `{}`",
                protocol.name
            )));
        }
    }
    for who in scenario.policies.keys() {
        if !scenario.casting.contains_principal(who) {
            return Err(SimError::Config(format!("policy for `{who}`, who plays no role")));
        }
    }
    Ok(())
}

/// Simulate `scenario` under `protocol`. Deterministic in the scenario seed.
pub fn run(protocol: &Protocol, scenario: &Scenario) -> Result<Enactment, SimError> {
    validate_scenario(protocol, scenario)?;
    let principals = scenario.casting.principals();
    let mut policies = BTreeMap::new();
    for (i, who) in principals.iter().enumerate() {
        let spec = scenario.policies.get(who).cloned().unwrap_or(PolicySpec {
            kind: PolicyKind::Silent,
            seed: None,
            rules: Vec::new(),
        });
        let seed = spec
            .seed
            .unwrap_or_else(|| scenario.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64 + 1));
        policies.insert(who.clone(), Policy::new(spec, ChaCha8Rng::seed_from_u64(seed)));
    }

    let mut trace = Trace::new(scenario.casting.clone());
    trace.setups = scenario.setups.clone();
    let mut global = SocialState::new();
    let mut views: BTreeMap<Principal, SocialState> =
        principals.iter().map(|p| (p.clone(), SocialState::new())).collect();
    for s in &scenario.setups {
        let wrap = |source| SimError::Setup {
            label: s.label.clone(),
            source,
        };
        let (debtor, creditor, _) = cast_commitment(&s.commitment, &scenario.casting).map_err(wrap)?;
        global = global.setup(&s.label, &s.commitment, &scenario.casting).map_err(wrap)?;
        for party in [&debtor, &creditor] {
            if let Some(v) = views.get_mut(party) {
                *v = v.setup(&s.label, &s.commitment, &scenario.casting).map_err(wrap)?;
            }
        }
    }

    let mut engine = Engine {
        protocol,
        scenario,
        rng: ChaCha8Rng::seed_from_u64(scenario.seed),
        queue: BTreeMap::new(),
        counter: 0,
        pending: BTreeSet::new(),
        channels: BTreeMap::new(),
        policies,
        trace,
        global,
        views,
        seq: 0,
        now: 0,
    };
    for who in &principals {
        engine.activate(who);
    }
    engine.run()
}

impl Engine<'_> {
    fn push(&mut self, time: u64, item: Item) {
        let tiebreak = self.rng.gen();
        self.counter += 1;
        self.queue.insert((time, tiebreak, self.counter), item);
    }

    fn activate(&mut self, who: &Principal) {
        if self.pending.insert(who.clone()) {
            let at = self.now + self.scenario.latency.sample(&mut self.rng);
            self.push(at, Item::Activate(who.clone()));
        }
    }

    fn next_seq(&mut self) -> Seq {
        self.seq += 1;
        self.seq
    }

    fn run(mut self) -> Result<Enactment, SimError> {
        let mut quiescent = true;
        while let Some(((time, _, _), item)) = self.queue.pop_first() {
            if time > self.scenario.max_time {
                quiescent = false;
                break;
            }
            self.now = time;
            match item {
                Item::Deliver(sent) => self.deliver(&sent)?,
                Item::Activate(who) => {
                    self.pending.remove(&who);
                    self.step(&who)?;
                }
            }
        }
        Ok(Enactment {
            trace: self.trace,
            global: self.global,
            views: self.views,
            quiescent,
            end_time: self.now,
        })
    }

    fn apply_err(&self, principal: &Principal) -> impl Fn(ApplyError) -> SimError {
        let principal = principal.clone();
        let time = self.now;
        move |source| SimError::Apply {
            principal: principal.clone(),
            time,
            source,
        }
    }

    fn deliver(&mut self, sent: &Event) -> Result<(), SimError> {
        let seq = self.next_seq();
        let received = Event::received(seq, sent, self.now);
        let receiver = received.receiver.clone().expect("messages have receivers");
        let err = self.apply_err(&receiver);
        self.global = self.global.record_delivery(&received).map_err(&err)?;
        let view = &self.views[&receiver];
        let next = view
            .apply_message(self.protocol, &self.scenario.casting, &received)
            .map_err(&err)?;
        self.views.insert(receiver.clone(), next);
        self.trace.events.push(received);
        self.activate(&receiver);
        Ok(())
    }

    fn step(&mut self, who: &Principal) -> Result<(), SimError> {
        let view = &self.views[who];
        let policy = self.policies.get_mut(who).expect("every principal has a policy");
        let choice = policy
            .choose(who, view, self.protocol, &self.scenario.casting)
            .map_err(|source| SimError::Policy {
                principal: who.clone(),
                source,
            })?;
        let Some(action) = choice else {
            return Ok(());
        };
        let err = self.apply_err(who);
        match action {
            GroundAction::Send { name, receiver, args } => {
                let seq = self.next_seq();
                let event = Event::sent(seq, name, who.clone(), receiver.clone(), args, self.now);
                self.global = self
                    .global
                    .apply_message(self.protocol, &self.scenario.casting, &event)
                    .map_err(&err)?;
                let next = self.views[who]
                    .apply_message(self.protocol, &self.scenario.casting, &event)
                    .map_err(&err)?;
                self.views.insert(who.clone(), next);
                let mut at = self.now + self.scenario.delay.sample(&mut self.rng);
                if self.scenario.network == Network::Fifo {
                    let channel = self.channels.entry((who.clone(), receiver)).or_insert(0);
                    at = at.max(*channel + 1);
                    *channel = at;
                }
                self.trace.events.push(event.clone());
                self.push(at, Item::Deliver(event));
            }
            GroundAction::Do { name, args } => {
                let seq = self.next_seq();
                let event = Event::domain(seq, name, args, self.now);
                self.global = self.global.observe_domain_event(&event).map_err(&err)?;
                let everyone: Vec<Principal> = self.views.keys().cloned().collect();
                for p in &everyone {
                    let next = self.views[p].observe_domain_event(&event).map_err(&err)?;
                    self.views.insert(p.clone(), next);
                }
                self.trace.events.push(event);
                for p in &everyone {
                    if p != who {
                        self.activate(p);
                    }
                }
            }
        }
        self.activate(who);
        Ok(())
    }
}
