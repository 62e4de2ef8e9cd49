//! Scenario files (`.scn`): casting, setup commitments, network model and
//! per-principal policies.
//!
//! ```text
//! scenario fig3
//! protocol "appointment.cp"
//! cast PHY Alessia
//! cast PAT Bianca
//! setup c0 C(PHY, PAT, requestAppointment(PAT, PHY), availableSlots(PHY, PAT, _))
//! network fifo
//! delay uniform 1 5
//! seed 7
//! policy Bianca scripted
//!   on T send requestAppointment()
//!   on availableSlots(PHY, PAT, _) send selectSlot(1400) | selectSlot(1600)
//! ```

use std::collections::BTreeMap;

use rand::Rng;

use crate::commitment::{Principal, Role};
use crate::dsl::parser::{PResult, Parser};
use crate::dsl::lexer::Tok;
use crate::dsl::Diagnostic;
use crate::proposition::{EventAtom, Proposition};
use crate::protocol::Casting;
use crate::trace::Setup;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Network {
    /// Messages between one sender and one receiver arrive in send order.
    Fifo,
    Unordered,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Delay {
    Fixed(u64),
    /// Inclusive bounds.
    Uniform { min: u64, max: u64 },
}

impl Delay {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> u64 {
        match self {
            Delay::Fixed(d) => d,
            Delay::Uniform { min, max } => rng.gen_range(min..=max),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    /// Never acts.
    Silent,
    /// Fires the first enabled rule, first alternative.
    Scripted,
    /// Picks at random among enabled rule alternatives and the actions that
    /// would discharge its detached commitments.
    RandomCompliant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action {
    /// Send a protocol message; arguments are its parameters.
    Send(EventAtom),
    /// Bring about a domain event.
    Do(EventAtom),
}

impl Action {
    pub fn atom(&self) -> &EventAtom {
        match self {
            Action::Send(a) | Action::Do(a) => a,
        }
    }
}

/// `on <trigger> send a(..) | b(..)`. Fires at most once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub trigger: Proposition,
    pub alternatives: Vec<Action>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub seed: Option<u64>,
    pub rules: Vec<Rule>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    /// Path of the protocol source, relative to the scenario file.
    pub protocol: Option<String>,
    pub casting: Casting,
    pub setups: Vec<Setup>,
    pub network: Network,
    pub delay: Delay,
    /// Time a principal takes to react to a change in its view.
    pub latency: Delay,
    pub seed: u64,
    pub max_time: u64,
    pub policies: BTreeMap<Principal, PolicySpec>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: String::new(),
            protocol: None,
            casting: Casting::new(),
            setups: Vec::new(),
            network: Network::Fifo,
            delay: Delay::Fixed(1),
            latency: Delay::Fixed(0),
            seed: 0,
            max_time: 10_000,
            policies: BTreeMap::new(),
        }
    }
}

impl Scenario {
    pub fn parse(src: &str) -> Result<Scenario, Vec<Diagnostic>> {
        let mut p = Parser::new(src);
        let mut scn = Scenario::default();
        let mut current: Option<Principal> = None;
        p.skip_newlines();
        while !p.at_eof() {
            let result = line(&mut p, &mut scn, &mut current).and_then(|()| p.end_of_line());
            if result.is_err() {
                p.recover_line();
            }
        }
        if p.diags.iter().any(Diagnostic::is_error) {
            Err(p.diags)
        } else {
            Ok(scn)
        }
    }
}

fn number(p: &mut Parser, what: &str) -> PResult<u64> {
    match p.peek().clone() {
        Tok::Number(n) => {
            let span = p.bump().span;
            match n.parse() {
                Ok(v) => Ok(v),
                Err(_) => p.error(span, format!("{what} must be a non-negative integer")),
            }
        }
        _ => p.unexpected(what),
    }
}

fn delay(p: &mut Parser) -> PResult<Delay> {
    match p.current_word() {
        Some("fixed") => {
            p.bump();
            Ok(Delay::Fixed(number(p, "a delay")?))
        }
        Some("uniform") => {
            p.bump();
            let start = p.span();
            let min = number(p, "a minimum delay")?;
            let max = number(p, "a maximum delay")?;
            if min > max {
                let span = start.to(p.prev_span());
                return p.error(span, "minimum delay exceeds maximum");
            }
            Ok(Delay::Uniform { min, max })
        }
        _ => p.unexpected("`fixed` or `uniform`"),
    }
}

fn action(p: &mut Parser, verb: &mut Option<String>) -> PResult<Action> {
    if let Some(w @ ("send" | "do")) = p.current_word() {
        *verb = Some(w.to_string());
        p.bump();
    }
    let atom = p.event_atom()?;
    match verb.as_deref() {
        Some("send") => Ok(Action::Send(atom)),
        Some("do") => Ok(Action::Do(atom)),
        _ => {
            let span = p.prev_span();
            p.error(span, "expected `send` or `do`")
        }
    }
}

fn line(p: &mut Parser, scn: &mut Scenario, current: &mut Option<Principal>) -> PResult<()> {
    let start = p.span();
    let Some(word) = p.current_word().map(str::to_string) else {
        return p.unexpected("a scenario declaration");
    };
    p.bump();
    match word.as_str() {
        "scenario" => scn.name = p.name("a scenario name")?.0,
        "protocol" => match p.peek().clone() {
            Tok::Str(path) => {
                p.bump();
                scn.protocol = Some(path);
            }
            _ => return p.unexpected("a quoted protocol path"),
        },
        "cast" => {
            let (role, _) = p.name("a role")?;
            let (principal, span) = p.name("a principal")?;
            if let Some(prev) = scn.casting.insert(Role::new(role.clone()), Principal::new(principal)) {
                return p.error(span, format!("role `{role}` is already cast to `{prev}`"));
            }
        }
        "setup" => {
            let (label, span) = p.name("a setup label")?;
            if scn.setups.iter().any(|s| s.label == label) {
                return p.error(span, format!("setup `{label}` is declared twice"));
            }
            let commitment = p.commitment_atom()?;
            scn.setups.push(Setup { label, commitment });
        }
        "network" => {
            scn.network = match p.current_word() {
                Some("fifo") => Network::Fifo,
                Some("unordered") => Network::Unordered,
                _ => return p.unexpected("`fifo` or `unordered`"),
            };
            p.bump();
        }
        "delay" => scn.delay = delay(p)?,
        "latency" => scn.latency = delay(p)?,
        "seed" => scn.seed = number(p, "a seed")?,
        "max_time" => scn.max_time = number(p, "a time bound")?,
        "policy" => {
            let (who, span) = p.name("a principal")?;
            let kind = match p.current_word() {
                Some("scripted") => PolicyKind::Scripted,
                Some("silent") => PolicyKind::Silent,
                Some("random") => PolicyKind::RandomCompliant,
                _ => return p.unexpected("`scripted`, `silent` or `random`"),
            };
            p.bump();
            let seed = if p.is_word("seed") {
                p.bump();
                Some(number(p, "a seed")?)
            } else {
                None
            };
            let who = Principal::new(who);
            if scn.policies.contains_key(&who) {
                return p.error(span, format!("principal `{who}` already has a policy"));
            }
            scn.policies.insert(
                who.clone(),
                PolicySpec {
                    kind,
                    seed,
                    rules: Vec::new(),
                },
            );
            *current = Some(who);
        }
        "on" => {
            let Some(who) = current.clone() else {
                return p.error(start, "rule outside a policy");
            };
            let trigger = p.proposition()?;
            let mut verb = None;
            let mut alternatives = vec![action(p, &mut verb)?];
            while *p.peek() == Tok::Pipe {
                p.bump();
                alternatives.push(action(p, &mut verb)?);
            }
            if let Some(policy) = scn.policies.get_mut(&who) {
                policy.rules.push(Rule { trigger, alternatives });
            }
        }
        other => {
            return p.error(start, format!("unknown scenario declaration `{other}`"));
        }
    }
    Ok(())
}

/// Resolve the protocol path of a scenario against the scenario's location.
pub fn protocol_path(scenario_path: &std::path::Path, scenario: &Scenario) -> Option<std::path::PathBuf> {
    let rel = scenario.protocol.as_ref()?;
    Some(match scenario_path.parent() {
        Some(dir) => dir.join(rel),
        None => rel.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r#"
scenario fig3
protocol "appointment.cp"
cast PHY Alessia
cast PAT Bianca
setup c0 C(PHY, PAT, requestAppointment(PAT, PHY), availableSlots(PHY, PAT, _))
network unordered
delay uniform 1 5
latency fixed 2
seed 7
max_time 500
policy Bianca random seed 3
  on T send requestAppointment()
  on availableSlots(PHY, PAT, _) send selectSlot(1400) | selectSlot(1600)
policy Alessia silent
"#;

    #[test]
    fn parses_every_declaration() {
        let s = Scenario::parse(SRC).unwrap();
        assert_eq!(s.name, "fig3");
        assert_eq!(s.protocol.as_deref(), Some("appointment.cp"));
        assert_eq!(s.casting.principals().len(), 2);
        assert_eq!(s.setups[0].label, "c0");
        assert_eq!(s.network, Network::Unordered);
        assert_eq!(s.delay, Delay::Uniform { min: 1, max: 5 });
        assert_eq!(s.latency, Delay::Fixed(2));
        assert_eq!((s.seed, s.max_time), (7, 500));
        let bianca = &s.policies[&Principal::new("Bianca")];
        assert_eq!(bianca.kind, PolicyKind::RandomCompliant);
        assert_eq!(bianca.seed, Some(3));
        assert_eq!(bianca.rules[1].alternatives.len(), 2);
        assert!(matches!(&bianca.rules[1].alternatives[1], Action::Send(a) if a.name == "selectSlot"));
    }

    #[test]
    fn errors_are_positioned() {
        let diags = Scenario::parse("cast PHY Alessia\ndelay uniform 5 1\non T send x()\nwibble\n").unwrap_err();
        let lines: Vec<u32> = diags.iter().map(|d| d.span.line).collect();
        assert_eq!(lines, [2, 3, 4]);
    }
}
