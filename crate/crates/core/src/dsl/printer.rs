use std::fmt::Write;

use crate::protocol::{MeaningClause, Protocol};

/// Render a protocol in canonical source form. `parse(print(p)) == p`.
pub fn print(protocol: &Protocol) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "protocol {}", protocol.name);
    if !protocol.roles.is_empty() {
        let roles: Vec<&str> = protocol.roles.iter().map(|r| r.as_str()).collect();
        let _ = writeln!(out, "  roles {}", roles.join(", "));
    }
    for p in &protocol.params {
        let _ = writeln!(out, "  param {}: {}", p.name, p.ty);
    }
    for m in &protocol.messages {
        let _ = write!(out, "  message {}: {} -> {}", m.name, m.sender, m.receiver);
        if !m.params.is_empty() {
            let _ = write!(out, " ({})", m.params.join(", "));
        }
        out.push('\n');
        for clause in &m.meaning {
            let _ = write!(out, "    {} {}", clause.keyword(), clause.atom().to_source());
            match clause {
                MeaningClause::Delegate { to, .. } | MeaningClause::Assign { to, .. } => {
                    let _ = write!(out, " to {}", to.to_source());
                }
                _ => {}
            }
            out.push('\n');
        }
    }
    for o in &protocol.orderings {
        let _ = writeln!(out, "  order {} < {}", o.before.to_source(), o.after.to_source());
    }
    out.push_str("end\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn printing_round_trips() {
        let src = "protocol P\n  roles A, B\n  param x: value\n  message m: A -> B (x)\n    \
                   create C(A, B, exists v in {1, \"two\"}: done(B, v) & (a . b), T)\n    \
                   delegate C(A, B, _, _) to \"Carol\"\n  order a < b(\"q\")\nend\n";
        let p = parse(src).unwrap();
        let printed = print(&p);
        assert_eq!(parse(&printed).unwrap(), p);
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }
}
