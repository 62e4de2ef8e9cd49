use super::diagnostic::{rules, Diagnostic, Principle};
use crate::protocol::Protocol;

/// Advisory checks. Warnings only; a protocol that lints dirty still runs.
pub fn lint(protocol: &Protocol) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, o) in protocol.orderings.iter().enumerate() {
        let span = protocol.source.orderings.get(i).copied().unwrap_or(protocol.source.header);
        out.push(Diagnostic::warning(
            rules::SOLELY,
            Principle::SolelySocialMeaning,
            span,
            format!(
                "ordering `{} < {}` is not part of any commitment, so no principal is accountable \
                 for it; state it inside a commitment instead",
                o.before, o.after
            ),
        ));
    }
    for (i, m) in protocol.messages.iter().enumerate() {
        if m.meaning.is_empty() {
            out.push(Diagnostic::warning(
                rules::MEANING,
                Principle::ExplicitSocialMeaning,
                protocol.message_span(i),
                format!("message `{}` has no social meaning", m.name),
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn bare_ordering_and_empty_meaning_warn() {
        let p = parse("protocol P\n roles A, B\n message m: A -> B\n order m < n\n").unwrap();
        let d = lint(&p);
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|d| !d.is_error()));
        assert_eq!(d[0].rule, rules::SOLELY);
        assert_eq!(d[0].span.line, 4);
        assert_eq!(d[1].rule, rules::MEANING);
    }
}
