//! Principal policies. A policy reads only its owner's local view.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::scenario::{Action, PolicyKind, PolicySpec};
use crate::commitment::Principal;
use crate::eval::{evaluate, TruthStatus};
use crate::event::TICK;
use crate::lifecycle::CommitmentState;
use crate::proposition::{CommitmentAtom, Env, EventAtom, Proposition, Term, Value};
use crate::protocol::{Casting, MeaningClause, ParamType, Protocol};
use crate::state::SocialState;

/// An action with every argument resolved to a value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroundAction {
    Send {
        name: String,
        receiver: Principal,
        args: Vec<Value>,
    },
    Do {
        name: String,
        args: Vec<Value>,
    },
}

/// An action a policy may take now, and the rule it would use up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub rule: Option<usize>,
    pub action: GroundAction,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct PolicyError(pub String);

/// Resolve a scenario action for `who`.
pub fn ground(action: &Action, who: &Principal, protocol: &Protocol, casting: &Casting) -> Result<GroundAction, PolicyError> {
    let atom = action.atom().instantiate(&casting.env());
    let args = literal_args(&atom).ok_or_else(|| PolicyError(format!("`{atom}` has unresolved arguments")))?;
    match action {
        Action::Do(_) => Ok(GroundAction::Do { name: atom.name, args }),
        Action::Send(_) => {
            let schema = protocol
                .message(&atom.name)
                .ok_or_else(|| PolicyError(format!("`{}` is not a message of the protocol", atom.name)))?;
            if casting.principal(&schema.sender) != Some(who) {
                return Err(PolicyError(format!("{who} does not play `{}`, the sender of `{}`", schema.sender, atom.name)));
            }
            let receiver = casting
                .principal(&schema.receiver)
                .ok_or_else(|| PolicyError(format!("role `{}` is not cast", schema.receiver)))?
                .clone();
            Ok(GroundAction::Send {
                name: atom.name,
                receiver,
                args,
            })
        }
    }
}

fn literal_args(atom: &EventAtom) -> Option<Vec<Value>> {
    atom.args
        .iter()
        .map(|t| match t {
            Term::Lit(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

/// Enabled actions under `spec`, given which rules have fired.
///
/// Scripted yields at most the first enabled rule's first alternative.
/// RandomCompliant yields every alternative of every enabled rule, then
/// the actions that would discharge its detached commitments.
pub fn enabled(
    spec: &PolicySpec,
    fired: &[bool],
    who: &Principal,
    view: &SocialState,
    protocol: &Protocol,
    casting: &Casting,
) -> Result<Vec<Candidate>, PolicyError> {
    let mut out = Vec::new();
    if spec.kind == PolicyKind::Silent {
        return Ok(out);
    }
    let env = casting.env();
    for (i, rule) in spec.rules.iter().enumerate() {
        if fired.get(i).copied().unwrap_or(false) {
            continue;
        }
        let trigger = rule.trigger.instantiate(&env);
        let status = evaluate(&trigger, view).map_err(|e| PolicyError(e.to_string()))?;
        if status != TruthStatus::Satisfied {
            continue;
        }
        let alternatives = match spec.kind {
            PolicyKind::Scripted => &rule.alternatives[..1.min(rule.alternatives.len())],
            _ => &rule.alternatives[..],
        };
        for alt in alternatives {
            out.push(Candidate {
                rule: Some(i),
                action: ground(alt, who, protocol, casting)?,
            });
        }
        if spec.kind == PolicyKind::Scripted {
            return Ok(out);
        }
    }
    if spec.kind == PolicyKind::RandomCompliant {
        let mut derived = BTreeSet::new();
        for c in view.commitments() {
            if c.state == CommitmentState::Detached && c.debtor == *who {
                derive(&c.consequent, who, view, protocol, casting, &mut derived);
            }
        }
        out.extend(derived.into_iter().map(|action| Candidate { rule: None, action }));
    }
    Ok(out)
}

/// Actions by `who` that would make `goal` hold.
fn derive(
    goal: &Proposition,
    who: &Principal,
    view: &SocialState,
    protocol: &Protocol,
    casting: &Casting,
    out: &mut BTreeSet<GroundAction>,
) {
    if !matches!(evaluate(goal, view), Ok(TruthStatus::Pending)) {
        return;
    }
    match goal {
        Proposition::Event(atom) => out.extend(event_action(atom, who, protocol, casting)),
        Proposition::Commitment(atom) => out.extend(create_actions(atom, who, protocol, casting)),
        Proposition::And(parts) => parts.iter().for_each(|p| derive(p, who, view, protocol, casting, out)),
        Proposition::Before(a, b) => {
            if evaluate(&Proposition::Event(a.clone()), view) == Ok(TruthStatus::Satisfied) {
                out.extend(event_action(b, who, protocol, casting));
            }
        }
        Proposition::ExistsIn { var, domain, body } => {
            for t in domain {
                if let Term::Lit(v) = t {
                    let env = Env::from([(var.clone(), v.clone())]);
                    derive(&body.instantiate(&env), who, view, protocol, casting, out);
                }
            }
        }
        Proposition::Top | Proposition::Wildcard => {}
    }
}

fn event_action(atom: &EventAtom, who: &Principal, protocol: &Protocol, casting: &Casting) -> Option<GroundAction> {
    if atom.name == TICK {
        return None;
    }
    let args = literal_args(atom)?;
    // A domain event's first argument names the principal bringing it about.
    let Some(schema) = protocol.message(&atom.name) else {
        let own = args.first().and_then(Value::as_atom) == Some(who.as_str());
        return own.then(|| GroundAction::Do {
            name: atom.name.clone(),
            args,
        });
    };
    let sender = casting.principal(&schema.sender)?;
    let receiver = casting.principal(&schema.receiver)?;
    let [s, r, params @ ..] = args.as_slice() else {
        return None;
    };
    let typed = params.len() == schema.params.len()
        && params.iter().zip(&schema.params).all(|(v, name)| {
            let ty = protocol.param(name).map_or(ParamType::Value, |p| p.ty);
            matches!((ty, v), (ParamType::Value, Value::Atom(_)) | (ParamType::Set, Value::Set(_)))
        });
    (sender == who && s.as_atom() == Some(who.as_str()) && r.as_atom() == Some(receiver.as_str()) && typed).then(|| {
        GroundAction::Send {
            name: schema.name.clone(),
            receiver: receiver.clone(),
            args: params.to_vec(),
        }
    })
}

/// Messages `who` may send whose meaning creates `target`.
fn create_actions(target: &CommitmentAtom, who: &Principal, protocol: &Protocol, casting: &Casting) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for schema in &protocol.messages {
        if casting.principal(&schema.sender) != Some(who) {
            continue;
        }
        let Some(receiver) = casting.principal(&schema.receiver) else {
            continue;
        };
        for clause in &schema.meaning {
            let MeaningClause::Create(pattern) = clause else {
                continue;
            };
            let mut env = casting.env();
            if !unify_commitment(pattern, target, &mut env, &BTreeSet::new()) {
                continue;
            }
            let args: Option<Vec<Value>> = schema.params.iter().map(|p| env.get(p).cloned()).collect();
            if let Some(args) = args {
                out.push(GroundAction::Send {
                    name: schema.name.clone(),
                    receiver: receiver.clone(),
                    args,
                });
            }
        }
    }
    out
}

fn unify_term(p: &Term, t: &Term, env: &mut Env, bound: &BTreeSet<String>) -> bool {
    match (p, t) {
        (Term::Var(v), Term::Var(w)) => bound.contains(v) && v == w,
        (Term::Var(v), Term::Lit(val)) if !bound.contains(v) => match env.get(v) {
            Some(x) => x == val,
            None => {
                env.insert(v.clone(), val.clone());
                true
            }
        },
        (Term::Lit(a), Term::Lit(b)) => a == b,
        (Term::Any, Term::Any) => true,
        _ => false,
    }
}

fn unify_event(p: &EventAtom, t: &EventAtom, env: &mut Env, bound: &BTreeSet<String>) -> bool {
    p.name == t.name && p.args.len() == t.args.len() && p.args.iter().zip(&t.args).all(|(a, b)| unify_term(a, b, env, bound))
}

fn unify_commitment(p: &CommitmentAtom, t: &CommitmentAtom, env: &mut Env, bound: &BTreeSet<String>) -> bool {
    unify_term(&p.debtor, &t.debtor, env, bound)
        && unify_term(&p.creditor, &t.creditor, env, bound)
        && unify(&p.antecedent, &t.antecedent, env, bound)
        && {
            // Existentials of the antecedent scope over the consequent.
            let mut inner = bound.clone();
            inner.extend(p.antecedent.existential_vars());
            unify(&p.consequent, &t.consequent, env, &inner)
        }
}

fn unify(p: &Proposition, t: &Proposition, env: &mut Env, bound: &BTreeSet<String>) -> bool {
    match (p, t) {
        (Proposition::Top, Proposition::Top) => true,
        (Proposition::Event(a), Proposition::Event(b)) => unify_event(a, b, env, bound),
        (Proposition::Commitment(a), Proposition::Commitment(b)) => unify_commitment(a, b, env, bound),
        (Proposition::And(a), Proposition::And(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| unify(x, y, env, bound))
        }
        (Proposition::Before(a1, a2), Proposition::Before(b1, b2)) => {
            unify_event(a1, b1, env, bound) && unify_event(a2, b2, env, bound)
        }
        (
            Proposition::ExistsIn { var: va, domain: da, body: ba },
            Proposition::ExistsIn { var: vb, domain: db, body: bb },
        ) => {
            if va != vb {
                return false;
            }
            let items: Option<Vec<String>> = db.iter().map(lit_atom).collect();
            let domain_ok = match (da.as_slice(), items) {
                // A set parameter, spliced into literals on instantiation.
                ([Term::Var(v)], Some(items)) if !bound.contains(v) => {
                    let set = Value::Set(items);
                    match env.get(v) {
                        Some(x) => *x == set,
                        None => {
                            env.insert(v.clone(), set);
                            true
                        }
                    }
                }
                _ => da.len() == db.len() && da.iter().zip(db).all(|(x, y)| unify_term(x, y, env, bound)),
            };
            let mut inner = bound.clone();
            inner.insert(va.clone());
            domain_ok && unify(ba, bb, env, &inner)
        }
        _ => false,
    }
}

fn lit_atom(t: &Term) -> Option<String> {
    match t {
        Term::Lit(Value::Atom(a)) => Some(a.clone()),
        _ => None,
    }
}

/// A policy with its run-time state.
#[derive(Clone, Debug)]
pub struct Policy {
    pub spec: PolicySpec,
    pub fired: Vec<bool>,
    rng: ChaCha8Rng,
}

impl Policy {
    pub fn new(spec: PolicySpec, rng: ChaCha8Rng) -> Self {
        let fired = vec![false; spec.rules.len()];
        Policy { spec, fired, rng }
    }

    /// Pick an action, if any is enabled, and use up its rule.
    pub fn choose(
        &mut self,
        who: &Principal,
        view: &SocialState,
        protocol: &Protocol,
        casting: &Casting,
    ) -> Result<Option<GroundAction>, PolicyError> {
        let mut candidates = enabled(&self.spec, &self.fired, who, view, protocol, casting)?;
        if candidates.is_empty() {
            return Ok(None);
        }
        let pick = match self.spec.kind {
            PolicyKind::RandomCompliant => self.rng.gen_range(0..candidates.len()),
            _ => 0,
        };
        let chosen = candidates.swap_remove(pick);
        if let Some(i) = chosen.rule {
            self.fired[i] = true;
        }
        Ok(Some(chosen.action))
    }
}
