//! The protocol language: lexer, parser, printer, validator and linter.

mod diagnostic;
pub(crate) mod lexer;
mod lint;
pub(crate) mod parser;
mod printer;
mod validate;

pub use diagnostic::{has_errors, rules, Diagnostic, Principle, Severity, Span};
pub use lexer::{tokenize, Tok, Token};
pub use lint::lint;
pub use parser::{
    parse, parse_bytes, parse_commitment, parse_proposition, CLAUSE_KEYWORDS, DECLARATION_KEYWORDS,
    INTERNAL_WORDS, PROPOSITION_KEYWORDS,
};
pub use printer::print;
pub use validate::validate;

use crate::protocol::Protocol;

/// Parse, validate and lint. Diagnostics are sorted by position.
/// The protocol is returned whenever parsing succeeded, even if
/// validation found errors.
pub fn analyze(src: &str) -> (Option<Protocol>, Vec<Diagnostic>) {
    analyze_parsed(parse(src))
}

/// As [`analyze`], from raw bytes.
pub fn analyze_bytes(bytes: &[u8]) -> (Option<Protocol>, Vec<Diagnostic>) {
    analyze_parsed(parse_bytes(bytes))
}

fn analyze_parsed(parsed: Result<Protocol, Vec<Diagnostic>>) -> (Option<Protocol>, Vec<Diagnostic>) {
    match parsed {
        Ok(p) => {
            let mut diags = validate(&p);
            diags.extend(lint(&p));
            diags.sort_by_key(|d| (d.span.start, d.severity));
            (Some(p), diags)
        }
        Err(mut diags) => {
            diags.sort_by_key(|d| (d.span.start, d.severity));
            (None, diags)
        }
    }
}

/// Parse and require zero errors from parsing and validation.
pub fn load(src: &str) -> Result<Protocol, Vec<Diagnostic>> {
    match analyze(src) {
        (Some(p), diags) if !has_errors(&diags) => Ok(p),
        (_, diags) => Err(diags.into_iter().filter(Diagnostic::is_error).collect()),
    }
}
