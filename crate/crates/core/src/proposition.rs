//! Content language for commitment antecedents and consequents.
//!
//! Propositions are built from event atoms (`showUp(pat, s)`), commitment
//! atoms (`C(x, y, r, u)`), the constant `T`, conjunction, existentials
//! over finite domains and the occurs-before operator (`a . b`).
//!
//! Terms are variables until instantiated against an [`Env`]; a
//! proposition without variables is *ground* and can be evaluated.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// An opaque literal. Parameters carry either a single atom or a finite set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Atom(String),
    Set(Vec<String>),
}

impl Value {
    pub fn atom(s: impl Into<String>) -> Self {
        Value::Atom(s.into())
    }

    pub fn set<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Value::Set(items.into_iter().map(Into::into).collect())
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Value::Atom(a) => Some(a),
            Value::Set(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(a) => f.write_str(a),
            Value::Set(items) => write!(f, "{{{}}}", items.join(", ")),
        }
    }
}

/// Variable bindings used during instantiation and evaluation.
pub type Env = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Lit(Value),
    /// `_`: matches any value.
    Any,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn atom(value: impl Into<String>) -> Self {
        Term::Lit(Value::Atom(value.into()))
    }

    pub fn instantiate(&self, env: &Env) -> Term {
        match self {
            Term::Var(v) => env.get(v).cloned().map(Term::Lit).unwrap_or_else(|| self.clone()),
            other => other.clone(),
        }
    }

    /// Does this (pattern) term accept `value`? Variables accept nothing.
    pub fn accepts(&self, value: &Value) -> bool {
        match self {
            Term::Any => true,
            Term::Lit(v) => v == value,
            Term::Var(_) => false,
        }
    }

    fn accepts_term(&self, other: &Term) -> bool {
        match (self, other) {
            (Term::Any, _) => true,
            (a, b) => a == b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventAtom {
    pub name: String,
    pub args: Vec<Term>,
}

impl EventAtom {
    pub fn new(name: impl Into<String>, args: Vec<Term>) -> Self {
        EventAtom {
            name: name.into(),
            args,
        }
    }

    pub fn instantiate(&self, env: &Env) -> EventAtom {
        EventAtom {
            name: self.name.clone(),
            args: self.args.iter().map(|t| t.instantiate(env)).collect(),
        }
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        for t in &self.args {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommitmentAtom {
    pub debtor: Term,
    pub creditor: Term,
    pub antecedent: Proposition,
    pub consequent: Proposition,
}

impl CommitmentAtom {
    pub fn new(debtor: Term, creditor: Term, antecedent: Proposition, consequent: Proposition) -> Self {
        CommitmentAtom {
            debtor,
            creditor,
            antecedent,
            consequent,
        }
    }

    pub fn instantiate(&self, env: &Env) -> CommitmentAtom {
        let consequent_env = without(env, &self.antecedent.existential_vars());
        CommitmentAtom {
            debtor: self.debtor.instantiate(env),
            creditor: self.creditor.instantiate(env),
            antecedent: self.antecedent.instantiate(env),
            consequent: self.consequent.instantiate(&consequent_env),
        }
    }

    /// Variables not bound by `env`-independent scoping: the antecedent's
    /// top-level existentials scope over the consequent.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for t in [&self.debtor, &self.creditor] {
            if let Term::Var(v) = t {
                out.insert(v.clone());
            }
        }
        out.extend(self.antecedent.free_vars());
        let scoped = self.antecedent.existential_vars();
        out.extend(
            self.consequent
                .free_vars()
                .into_iter()
                .filter(|v| !scoped.contains(v)),
        );
        out
    }
}

fn without(env: &Env, shadowed: &BTreeSet<String>) -> Env {
    if shadowed.is_empty() {
        return env.clone();
    }
    env.iter()
        .filter(|(k, _)| !shadowed.contains(*k))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Proposition {
    Top,
    /// `_` in a pattern: accepts any proposition. Never evaluated.
    Wildcard,
    Event(EventAtom),
    Commitment(Box<CommitmentAtom>),
    And(Vec<Proposition>),
    ExistsIn {
        var: String,
        domain: Vec<Term>,
        body: Box<Proposition>,
    },
    /// `first . second`: `first` occurs before `second`.
    Before(EventAtom, EventAtom),
}

impl Proposition {
    pub fn event(name: impl Into<String>, args: Vec<Term>) -> Self {
        Proposition::Event(EventAtom::new(name, args))
    }

    pub fn commitment(debtor: Term, creditor: Term, antecedent: Proposition, consequent: Proposition) -> Self {
        Proposition::Commitment(Box::new(CommitmentAtom::new(
            debtor, creditor, antecedent, consequent,
        )))
    }

    pub fn exists_in(var: impl Into<String>, domain: Vec<Term>, body: Proposition) -> Self {
        Proposition::ExistsIn {
            var: var.into(),
            domain,
            body: Box::new(body),
        }
    }

    /// Substitute bound variables. Set-valued literals in an existential's
    /// domain are spliced into individual atoms.
    pub fn instantiate(&self, env: &Env) -> Proposition {
        match self {
            Proposition::Top => Proposition::Top,
            Proposition::Wildcard => Proposition::Wildcard,
            Proposition::Event(e) => Proposition::Event(e.instantiate(env)),
            Proposition::Commitment(c) => Proposition::Commitment(Box::new(c.instantiate(env))),
            Proposition::And(parts) => {
                Proposition::And(parts.iter().map(|p| p.instantiate(env)).collect())
            }
            Proposition::ExistsIn { var, domain, body } => {
                let mut domain_out = Vec::with_capacity(domain.len());
                for t in domain {
                    match t.instantiate(env) {
                        Term::Lit(Value::Set(items)) => {
                            domain_out.extend(items.into_iter().map(Term::atom))
                        }
                        other => domain_out.push(other),
                    }
                }
                let mut inner = env.clone();
                inner.remove(var);
                Proposition::ExistsIn {
                    var: var.clone(),
                    domain: domain_out,
                    body: Box::new(body.instantiate(&inner)),
                }
            }
            Proposition::Before(a, b) => Proposition::Before(a.instantiate(env), b.instantiate(env)),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Proposition::Top | Proposition::Wildcard => {}
            Proposition::Event(e) => e.collect_vars(out),
            Proposition::Commitment(c) => out.extend(c.free_vars()),
            Proposition::And(parts) => parts.iter().for_each(|p| p.collect_free(out)),
            Proposition::ExistsIn { var, domain, body } => {
                for t in domain {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
                let mut inner = body.free_vars();
                inner.remove(var);
                out.extend(inner);
            }
            Proposition::Before(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn is_ground(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Variables introduced by existentials at the top of the proposition or
    /// directly under a conjunction. These scope over a commitment's consequent.
    pub fn existential_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_existentials(&mut out);
        out
    }

    fn collect_existentials(&self, out: &mut BTreeSet<String>) {
        match self {
            Proposition::ExistsIn { var, body, .. } => {
                out.insert(var.clone());
                body.collect_existentials(out);
            }
            Proposition::And(parts) => parts.iter().for_each(|p| p.collect_existentials(out)),
            _ => {}
        }
    }

    /// Structural match where `_` in `self` accepts any term in `other`.
    pub fn accepts(&self, other: &Proposition) -> bool {
        match (self, other) {
            (Proposition::Wildcard, _) => true,
            (Proposition::Top, Proposition::Top) => true,
            (Proposition::Event(a), Proposition::Event(b)) => event_accepts(a, b),
            (Proposition::Commitment(a), Proposition::Commitment(b)) => {
                a.debtor.accepts_term(&b.debtor)
                    && a.creditor.accepts_term(&b.creditor)
                    && a.antecedent.accepts(&b.antecedent)
                    && a.consequent.accepts(&b.consequent)
            }
            (Proposition::And(a), Proposition::And(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.accepts(y))
            }
            (
                Proposition::ExistsIn { var: va, domain: da, body: ba },
                Proposition::ExistsIn { var: vb, domain: db, body: bb },
            ) => {
                va == vb
                    && da.len() == db.len()
                    && da.iter().zip(db).all(|(x, y)| x.accepts_term(y))
                    && ba.accepts(bb)
            }
            (Proposition::Before(a1, a2), Proposition::Before(b1, b2)) => {
                event_accepts(a1, b1) && event_accepts(a2, b2)
            }
            _ => false,
        }
    }

    /// Source form: non-numeric literals are quoted so the text re-parses to
    /// an equal value.
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        write_prop(&mut s, self, Style::Source, false);
        s
    }

    /// True if `_` appears as a proposition anywhere inside.
    pub fn contains_wildcard(&self) -> bool {
        match self {
            Proposition::Wildcard => true,
            Proposition::And(parts) => parts.iter().any(Proposition::contains_wildcard),
            Proposition::ExistsIn { body, .. } => body.contains_wildcard(),
            Proposition::Commitment(c) => c.antecedent.contains_wildcard() || c.consequent.contains_wildcard(),
            _ => false,
        }
    }

    pub fn contains_before(&self) -> bool {
        match self {
            Proposition::Before(..) => true,
            Proposition::And(parts) => parts.iter().any(Proposition::contains_before),
            Proposition::ExistsIn { body, .. } => body.contains_before(),
            Proposition::Commitment(c) => {
                c.antecedent.contains_before() || c.consequent.contains_before()
            }
            _ => false,
        }
    }
}

fn event_accepts(a: &EventAtom, b: &EventAtom) -> bool {
    a.name == b.name
        && a.args.len() == b.args.len()
        && a.args.iter().zip(&b.args).all(|(x, y)| x.accepts_term(y))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Style {
    Display,
    Source,
}

fn is_numeric(s: &str) -> bool {
    let digits = s.strip_prefix('-').unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

/// Quote `s` as a string literal unless it is numeric.
pub fn quote_atom(s: &str) -> String {
    if is_numeric(s) {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_value(out: &mut String, v: &Value, style: Style) {
    let atom = |out: &mut String, a: &str| match style {
        Style::Display => out.push_str(a),
        Style::Source => out.push_str(&quote_atom(a)),
    };
    match v {
        Value::Atom(a) => atom(out, a),
        Value::Set(items) => {
            out.push('{');
            for (i, a) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                atom(out, a);
            }
            out.push('}');
        }
    }
}

fn write_term(out: &mut String, t: &Term, style: Style) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Lit(v) => write_value(out, v, style),
        Term::Any => out.push('_'),
    }
}

fn write_event(out: &mut String, e: &EventAtom, style: Style) {
    out.push_str(&e.name);
    out.push('(');
    for (i, t) in e.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_term(out, t, style);
    }
    out.push(')');
}

fn write_commitment(out: &mut String, c: &CommitmentAtom, style: Style) {
    out.push_str("C(");
    write_term(out, &c.debtor, style);
    out.push_str(", ");
    write_term(out, &c.creditor, style);
    out.push_str(", ");
    write_prop(out, &c.antecedent, style, false);
    out.push_str(", ");
    write_prop(out, &c.consequent, style, false);
    out.push(')');
}

// `nested` is set for conjunct positions, where an existential must be
// parenthesized because its body would otherwise swallow later conjuncts.
fn write_prop(out: &mut String, p: &Proposition, style: Style, nested: bool) {
    match p {
        Proposition::Top => out.push('T'),
        Proposition::Wildcard => out.push('_'),
        Proposition::Event(e) => write_event(out, e, style),
        Proposition::Commitment(c) => write_commitment(out, c, style),
        Proposition::And(parts) => {
            if parts.is_empty() {
                // An empty conjunction has no surface syntax of its own.
                out.push_str("(T & T)");
                return;
            }
            if nested {
                out.push('(');
            }
            for (i, part) in parts.iter().enumerate() {
                if i > 0 {
                    out.push_str(" & ");
                }
                let wrap = matches!(part, Proposition::And(_));
                if wrap {
                    out.push('(');
                }
                write_prop(out, part, style, true);
                if wrap {
                    out.push(')');
                }
            }
            if nested {
                out.push(')');
            }
        }
        Proposition::ExistsIn { var, domain, body } => {
            if nested {
                out.push('(');
            }
            out.push_str("exists ");
            out.push_str(var);
            out.push_str(" in ");
            match domain.as_slice() {
                [t @ Term::Var(_)] => write_term(out, t, style),
                _ => {
                    out.push('{');
                    for (i, t) in domain.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        write_term(out, t, style);
                    }
                    out.push('}');
                }
            }
            out.push_str(": ");
            write_prop(out, body, style, false);
            if nested {
                out.push(')');
            }
        }
        Proposition::Before(a, b) => {
            write_event(out, a, style);
            out.push_str(" . ");
            write_event(out, b, style);
        }
    }
}

impl Term {
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        write_term(&mut s, self, Style::Source);
        s
    }
}

impl CommitmentAtom {
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        write_commitment(&mut s, self, Style::Source);
        s
    }
}

impl EventAtom {
    pub fn to_source(&self) -> String {
        let mut s = String::new();
        write_event(&mut s, self, Style::Source);
        s
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_term(&mut s, self, Style::Display);
        f.write_str(&s)
    }
}

impl fmt::Display for EventAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_event(&mut s, self, Style::Display);
        f.write_str(&s)
    }
}

impl fmt::Display for CommitmentAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_commitment(&mut s, self, Style::Display);
        f.write_str(&s)
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_prop(&mut s, self, Style::Display, false);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1_available_slots() -> Proposition {
        Proposition::commitment(
            Term::var("PHY"),
            Term::var("PAT"),
            Proposition::exists_in(
                "s",
                vec![Term::var("slots")],
                Proposition::commitment(
                    Term::var("PAT"),
                    Term::var("PHY"),
                    Proposition::Top,
                    Proposition::event("showUp", vec![Term::var("PAT"), Term::var("s")]),
                ),
            ),
            Proposition::commitment(
                Term::var("PHY"),
                Term::var("PAT"),
                Proposition::Top,
                Proposition::event("showUp", vec![Term::var("PHY"), Term::var("s")]),
            ),
        )
    }

    #[test]
    fn existential_scopes_over_consequent() {
        let p = table1_available_slots();
        let free = p.free_vars();
        assert_eq!(
            free,
            ["PAT", "PHY", "slots"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn instantiate_splices_set_domain_and_keeps_bound_var() {
        let env: Env = [
            ("PHY".to_string(), Value::atom("Alessia")),
            ("PAT".to_string(), Value::atom("Bianca")),
            ("slots".to_string(), Value::set(["1400", "1600"])),
            // A stray outer binding of `s` must not leak under the existential.
            ("s".to_string(), Value::atom("999")),
        ]
        .into_iter()
        .collect();
        let p = table1_available_slots().instantiate(&env);
        assert!(p.is_ground(), "{p}");
        assert_eq!(
            p.to_string(),
            "C(Alessia, Bianca, exists s in {1400, 1600}: C(Bianca, Alessia, T, showUp(Bianca, s)), \
             C(Alessia, Bianca, T, showUp(Alessia, s)))"
        );
    }

    #[test]
    fn source_form_quotes_names() {
        let p = Proposition::event("showUp", vec![Term::atom("Bianca"), Term::atom("1400")]);
        assert_eq!(p.to_source(), "showUp(\"Bianca\", 1400)");
        assert_eq!(quote_atom("a\"b"), "\"a\\\"b\"");
    }

    #[test]
    fn wildcard_accepts() {
        let pat = Proposition::event("availableSlots", vec![Term::atom("A"), Term::Any]);
        let actual = Proposition::event("availableSlots", vec![Term::atom("A"), Term::atom("x")]);
        assert!(pat.accepts(&actual));
        assert!(!actual.accepts(&pat));
    }
}
