//! Static checks on a parsed protocol. Every check reports; none stops early.

use std::collections::{BTreeSet, HashSet};

use super::diagnostic::{rules, Diagnostic, Principle, Span};
use crate::protocol::{MeaningClause, MessageSchema, Protocol};
use crate::proposition::Term;

pub fn validate(protocol: &Protocol) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_roles(protocol, &mut out);
    check_params(protocol, &mut out);
    let mut seen = HashSet::new();
    for (i, m) in protocol.messages.iter().enumerate() {
        let span = protocol.message_span(i);
        if !seen.insert(m.name.as_str()) {
            out.push(Diagnostic::error(
                rules::DUPLICATE,
                Principle::Syntax,
                span,
                format!("message `{}` is declared more than once", m.name),
            ));
        }
        check_message(protocol, i, m, &mut out);
    }
    out
}

fn check_roles(protocol: &Protocol, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for (i, r) in protocol.roles.iter().enumerate() {
        if !seen.insert(r) {
            let span = protocol.source.roles.get(i).copied().unwrap_or(protocol.source.header);
            out.push(Diagnostic::error(
                rules::DUPLICATE,
                Principle::Syntax,
                span,
                format!("role `{r}` is declared more than once"),
            ));
        }
    }
    if seen.len() < 2 {
        out.push(Diagnostic::error(
            rules::ROLES,
            Principle::AccountabilityModularity,
            protocol.source.header,
            format!(
                "protocol `{}` declares {} distinct role(s); commitments need a debtor and a distinct creditor",
                protocol.name,
                seen.len()
            ),
        ));
    }
}

fn check_params(protocol: &Protocol, out: &mut Vec<Diagnostic>) {
    let mut seen = HashSet::new();
    for (i, p) in protocol.params.iter().enumerate() {
        let span = protocol.source.params.get(i).copied().unwrap_or(protocol.source.header);
        if !seen.insert(p.name.as_str()) {
            out.push(Diagnostic::error(
                rules::DUPLICATE,
                Principle::Syntax,
                span,
                format!("parameter `{}` is declared more than once", p.name),
            ));
        }
        if protocol.roles.iter().any(|r| r.as_str() == p.name) {
            out.push(Diagnostic::error(
                rules::DUPLICATE,
                Principle::Syntax,
                span,
                format!("parameter `{}` shadows a role of the same name", p.name),
            ));
        }
    }
}

fn is_role_var(protocol: &Protocol, t: &Term, role: &str) -> bool {
    matches!(t, Term::Var(v) if v == role) && protocol.roles.iter().any(|r| r.as_str() == role)
}

fn check_message(protocol: &Protocol, index: usize, m: &MessageSchema, out: &mut Vec<Diagnostic>) {
    let span = protocol.message_span(index);
    for role in [&m.sender, &m.receiver] {
        if !protocol.has_role(role) {
            out.push(Diagnostic::error(
                rules::UNKNOWN,
                Principle::Syntax,
                span,
                format!("message `{}` uses undeclared role `{role}`", m.name),
            ));
        }
    }
    if m.sender == m.receiver {
        out.push(Diagnostic::error(
            rules::SELF_MESSAGE,
            Principle::SocialTechnicalSeparation,
            span,
            format!("message `{}` is sent by `{}` to itself", m.name, m.sender),
        ));
    }
    let mut seen = HashSet::new();
    for p in &m.params {
        if protocol.param(p).is_none() {
            out.push(Diagnostic::error(
                rules::UNKNOWN,
                Principle::Syntax,
                span,
                format!("message `{}` carries undeclared parameter `{p}`", m.name),
            ));
        }
        if !seen.insert(p) {
            out.push(Diagnostic::error(
                rules::DUPLICATE,
                Principle::Syntax,
                span,
                format!("message `{}` lists parameter `{p}` twice", m.name),
            ));
        }
    }

    // Names a meaning may mention: roles, plus this message's parameters.
    let bound: BTreeSet<&str> = protocol
        .roles
        .iter()
        .map(|r| r.as_str())
        .chain(m.params.iter().map(String::as_str))
        .collect();

    for (ci, clause) in m.meaning.iter().enumerate() {
        let cspan = protocol.clause_span(index, ci);
        check_clause(protocol, m, clause, cspan, &bound, out);
    }
}

fn check_clause(
    protocol: &Protocol,
    m: &MessageSchema,
    clause: &MeaningClause,
    span: Span,
    bound: &BTreeSet<&str>,
    out: &mut Vec<Diagnostic>,
) {
    let atom = clause.atom();
    let sender = m.sender.as_str();
    let mut vars = atom.free_vars();
    if let MeaningClause::Delegate { to: Term::Var(v), .. } | MeaningClause::Assign { to: Term::Var(v), .. } = clause {
        vars.insert(v.clone());
    }
    for v in vars.iter().filter(|v| !bound.contains(v.as_str())) {
        let hint = if protocol.param(v).is_some() {
            format!("parameter `{v}` is not carried by message `{}`", m.name)
        } else {
            format!("`{v}` is neither a role nor a parameter of message `{}`", m.name)
        };
        out.push(Diagnostic::error(
            rules::FREEVAR,
            Principle::ExplicitSocialMeaning,
            span,
            format!("free variable in `{}` clause: {hint}", clause.keyword()),
        ));
    }

    match clause {
        MeaningClause::Create(c) => {
            if c.antecedent.contains_wildcard() || c.consequent.contains_wildcard() {
                out.push(Diagnostic::error(
                    rules::FREEVAR,
                    Principle::ExplicitSocialMeaning,
                    span,
                    format!("`create` in message `{}` uses `_` as a proposition; a created commitment must be fully stated", m.name),
                ));
            }
            if !is_role_var(protocol, &c.debtor, sender) {
                out.push(Diagnostic::error(
                    rules::DEBTOR,
                    Principle::AccountabilityModularity,
                    span,
                    format!(
                        "message `{}` from `{sender}` creates a commitment whose debtor is `{}`; \
                         only the sender can commit itself",
                        m.name, c.debtor
                    ),
                ));
            }
            if c.debtor == c.creditor && matches!(c.debtor, Term::Var(_)) {
                out.push(Diagnostic::error(
                    rules::DEBTOR,
                    Principle::AccountabilityModularity,
                    span,
                    format!("commitment created by `{}` has the same debtor and creditor", m.name),
                ));
            }
        }
        MeaningClause::Cancel(c) | MeaningClause::Delegate { target: c, .. } => {
            if !is_role_var(protocol, &c.debtor, sender) {
                out.push(Diagnostic::error(
                    rules::AUTHORITY,
                    Principle::AccountabilityModularity,
                    span,
                    format!(
                        "`{}` in message `{}` targets commitments whose debtor is `{}`, but only \
                         the debtor `{sender}` may {0} them",
                        clause.keyword(),
                        m.name,
                        c.debtor
                    ),
                ));
            }
        }
        MeaningClause::Release(c) | MeaningClause::Assign { target: c, .. } => {
            if !is_role_var(protocol, &c.creditor, sender) {
                out.push(Diagnostic::error(
                    rules::AUTHORITY,
                    Principle::AccountabilityModularity,
                    span,
                    format!(
                        "`{}` in message `{}` targets commitments whose creditor is `{}`, but only \
                         the creditor `{sender}` may {0} them",
                        clause.keyword(),
                        m.name,
                        c.creditor
                    ),
                ));
            }
        }
    }
}
