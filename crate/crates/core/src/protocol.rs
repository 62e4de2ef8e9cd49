//! Protocols: roles, parameters and message schemas whose meanings are
//! commitment operations.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::commitment::{Principal, Role};
use crate::dsl::Span;
use crate::proposition::{CommitmentAtom, Env, EventAtom, Term, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamType {
    /// A single opaque literal.
    Value,
    /// A finite set of literals.
    Set,
}

impl fmt::Display for ParamType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamType::Value => "value",
            ParamType::Set => "set",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub ty: ParamType,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MeaningClause {
    Create(CommitmentAtom),
    /// Release every live commitment matching the pattern; by the creditor.
    Release(CommitmentAtom),
    /// Cancel every live commitment matching the pattern; by the debtor.
    Cancel(CommitmentAtom),
    Delegate { target: CommitmentAtom, to: Term },
    Assign { target: CommitmentAtom, to: Term },
}

impl MeaningClause {
    pub fn keyword(&self) -> &'static str {
        match self {
            MeaningClause::Create(_) => "create",
            MeaningClause::Release(_) => "release",
            MeaningClause::Cancel(_) => "cancel",
            MeaningClause::Delegate { .. } => "delegate",
            MeaningClause::Assign { .. } => "assign",
        }
    }

    pub fn atom(&self) -> &CommitmentAtom {
        match self {
            MeaningClause::Create(a) | MeaningClause::Release(a) | MeaningClause::Cancel(a) => a,
            MeaningClause::Delegate { target, .. } | MeaningClause::Assign { target, .. } => target,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageSchema {
    pub name: String,
    pub sender: Role,
    pub receiver: Role,
    /// Names of protocol parameters, in argument order.
    pub params: Vec<String>,
    pub meaning: Vec<MeaningClause>,
}

/// A standalone ordering requirement, `order a < b`. Nobody is
/// accountable for it; the linter flags it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrderingConstraint {
    pub before: EventAtom,
    pub after: EventAtom,
}

/// Source locations recorded by the parser. Not part of protocol equality.
#[derive(Clone, Debug, Default)]
pub struct SourceMap {
    pub header: Span,
    pub roles: Vec<Span>,
    pub params: Vec<Span>,
    pub messages: Vec<Span>,
    pub clauses: Vec<Vec<Span>>,
    pub orderings: Vec<Span>,
}

#[derive(Clone, Debug, Default)]
pub struct Protocol {
    pub name: String,
    pub roles: Vec<Role>,
    pub params: Vec<ParamDecl>,
    pub messages: Vec<MessageSchema>,
    pub orderings: Vec<OrderingConstraint>,
    pub source: SourceMap,
}

impl PartialEq for Protocol {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.roles == other.roles
            && self.params == other.params
            && self.messages == other.messages
            && self.orderings == other.orderings
    }
}

impl Eq for Protocol {}

impl Protocol {
    pub fn message(&self, name: &str) -> Option<&MessageSchema> {
        self.messages.iter().find(|m| m.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn has_role(&self, role: &Role) -> bool {
        self.roles.contains(role)
    }

    pub(crate) fn message_span(&self, index: usize) -> Span {
        self.source.messages.get(index).copied().unwrap_or_default()
    }

    pub(crate) fn clause_span(&self, message: usize, clause: usize) -> Span {
        self.source
            .clauses
            .get(message)
            .and_then(|c| c.get(clause))
            .copied()
            .unwrap_or_else(|| self.message_span(message))
    }
}

/// Which principal plays which role in an enactment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Casting(BTreeMap<Role, Principal>);

impl Casting {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cast(mut self, role: impl Into<String>, principal: impl Into<String>) -> Self {
        self.insert(Role::new(role), Principal::new(principal));
        self
    }

    pub fn insert(&mut self, role: Role, principal: Principal) -> Option<Principal> {
        self.0.insert(role, principal)
    }

    pub fn principal(&self, role: &Role) -> Option<&Principal> {
        self.0.get(role)
    }

    pub fn roles_of<'a>(&'a self, principal: &'a Principal) -> impl Iterator<Item = &'a Role> + 'a {
        self.0
            .iter()
            .filter(move |(_, p)| *p == principal)
            .map(|(r, _)| r)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Role, &Principal)> {
        self.0.iter()
    }

    /// Distinct principals, sorted.
    pub fn principals(&self) -> Vec<Principal> {
        let mut out: Vec<Principal> = self.0.values().cloned().collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn contains_principal(&self, p: &Principal) -> bool {
        self.0.values().any(|q| q == p)
    }

    /// Role names bound to principal names.
    pub fn env(&self) -> Env {
        self.0
            .iter()
            .map(|(r, p)| (r.0.clone(), Value::Atom(p.0.clone())))
            .collect()
    }
}
