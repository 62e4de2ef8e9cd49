//! Recursive-descent parser for protocol sources and propositions.
//!
//! The grammar is line oriented:
//!
//! ```text
//! protocol Appointment
//!   roles PHY, PAT
//!   param slots: set
//!   param s: value
//!   message selectSlot: PAT -> PHY (s)
//!     create C(PAT, PHY, T, showUp(PAT, s))
//!   order requestAppointment < availableSlots
//! end
//! ```
//!
//! Propositions: `T`, `name(args)`, `C(x, y, r, u)`, `p & q`,
//! `exists v in dom: p` and `a . b` (occurs before).

use super::diagnostic::{rules, Diagnostic, Principle, Span};
use super::lexer::{tokenize, Tok, Token};
use crate::commitment::Role;
use crate::proposition::{CommitmentAtom, EventAtom, Proposition, Term, Value};
use crate::protocol::{MeaningClause, MessageSchema, OrderingConstraint, ParamDecl, ParamType, Protocol};

/// Words that start a top-level declaration.
pub const DECLARATION_KEYWORDS: &[&str] = &["protocol", "roles", "param", "message", "order", "end"];

/// Words that start a meaning clause under a message.
pub const CLAUSE_KEYWORDS: &[&str] = &["create", "release", "cancel", "delegate", "assign"];

/// Words with fixed meaning inside propositions; unusable as names.
pub const PROPOSITION_KEYWORDS: &[&str] = &["T", "C", "exists", "in", "to"];

/// Words for agent-internal constructs. The grammar has no production
/// for any of them.
pub const INTERNAL_WORDS: &[&str] = &[
    "goal",
    "goals",
    "belief",
    "beliefs",
    "intention",
    "intentions",
    "desire",
    "desires",
    "plan",
    "plans",
    "task",
    "tasks",
    "internal",
    "activity",
];

const MAX_DEPTH: usize = 64;

pub(crate) struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    pub(crate) diags: Vec<Diagnostic>,
}

/// Marker for a failed production; the diagnostic is already recorded.
pub(crate) struct Failed;

pub(crate) type PResult<T> = Result<T, Failed>;

impl Parser {
    pub(crate) fn new(src: &str) -> Self {
        let (tokens, diags) = tokenize(src);
        Parser {
            tokens,
            pos: 0,
            depth: 0,
            diags,
        }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    pub(crate) fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub(crate) fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    pub(crate) fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    pub(crate) fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub(crate) fn is_word(&self, word: &str) -> bool {
        matches!(self.peek(), Tok::Ident(w) if w == word)
    }

    pub(crate) fn current_word(&self) -> Option<&str> {
        match self.peek() {
            Tok::Ident(w) => Some(w),
            _ => None,
        }
    }

    pub(crate) fn error<T>(&mut self, span: Span, message: impl Into<String>) -> PResult<T> {
        self.diags.push(Diagnostic::syntax(span, message));
        Err(Failed)
    }

    pub(crate) fn unexpected<T>(&mut self, expected: &str) -> PResult<T> {
        let found = self.peek().describe();
        let span = self.span();
        self.error(span, format!("expected {expected}, found {found}"))
    }

    pub(crate) fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(what)
        }
    }

    pub(crate) fn expect_word(&mut self, word: &str) -> PResult<Span> {
        if self.is_word(word) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{word}`"))
        }
    }

    /// An identifier usable as a name.
    pub(crate) fn name(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(w) if PROPOSITION_KEYWORDS.contains(&w.as_str()) => {
                let span = self.span();
                self.error(span, format!("`{w}` is reserved and cannot be used as {what}"))
            }
            Tok::Ident(w) => {
                let span = self.bump().span;
                Ok((w, span))
            }
            _ => self.unexpected(what),
        }
    }

    pub(crate) fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    /// Skip the rest of the current line, including its newline.
    pub(crate) fn recover_line(&mut self) {
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
        self.skip_newlines();
    }

    pub(crate) fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.skip_newlines();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.unexpected("end of line"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            let span = self.span();
            return self.error(span, format!("nesting deeper than {MAX_DEPTH} levels"));
        }
        Ok(())
    }

    // ---- terms and propositions ----

    pub(crate) fn term(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Ident(_) => self.name("a variable").map(|(n, _)| Term::Var(n)),
            Tok::Number(n) | Tok::Str(n) => {
                self.bump();
                Ok(Term::Lit(Value::Atom(n)))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Term::Any)
            }
            Tok::LBrace => {
                self.bump();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBrace {
                    loop {
                        match self.peek().clone() {
                            Tok::Number(n) | Tok::Str(n) => {
                                self.bump();
                                items.push(n);
                            }
                            _ => return self.unexpected("a literal in a set"),
                        }
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Term::Lit(Value::Set(items)))
            }
            _ => self.unexpected("a term"),
        }
    }

    fn term_list(&mut self, close: Tok) -> PResult<Vec<Term>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    pub(crate) fn event_atom(&mut self) -> PResult<EventAtom> {
        let (name, _) = self.name("an event name")?;
        let args = if *self.peek() == Tok::LParen {
            self.bump();
            let args = self.term_list(Tok::RParen)?;
            self.expect(Tok::RParen, "`)` or `,`")?;
            args
        } else {
            Vec::new()
        };
        Ok(EventAtom::new(name, args))
    }

    pub(crate) fn commitment_atom(&mut self) -> PResult<CommitmentAtom> {
        self.enter()?;
        self.expect_word("C")?;
        self.expect(Tok::LParen, "`(` after `C`")?;
        let debtor = self.term()?;
        self.expect(Tok::Comma, "`,`")?;
        let creditor = self.term()?;
        self.expect(Tok::Comma, "`,`")?;
        let antecedent = self.proposition()?;
        self.expect(Tok::Comma, "`,`")?;
        let consequent = self.proposition()?;
        self.expect(Tok::RParen, "`)` closing the commitment")?;
        self.depth -= 1;
        Ok(CommitmentAtom::new(debtor, creditor, antecedent, consequent))
    }

    pub(crate) fn proposition(&mut self) -> PResult<Proposition> {
        self.enter()?;
        let first = self.before()?;
        let mut parts = vec![first];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.before()?);
        }
        self.depth -= 1;
        Ok(if parts.len() == 1 {
            parts.pop().expect("one part")
        } else {
            Proposition::And(parts)
        })
    }

    fn before(&mut self) -> PResult<Proposition> {
        let start = self.span();
        let first = self.primary()?;
        if *self.peek() != Tok::Dot {
            return Ok(first);
        }
        self.bump();
        let second = self.primary()?;
        let span = start.to(self.prev_span());
        if *self.peek() == Tok::Dot {
            let at = self.span();
            return self.error(at, "occurs-before cannot be chained; its operands must be events");
        }
        match (first, second) {
            (Proposition::Event(a), Proposition::Event(b)) => Ok(Proposition::Before(a, b)),
            _ => self.error(span, "occurs-before takes event operands"),
        }
    }

    fn primary(&mut self) -> PResult<Proposition> {
        match self.peek().clone() {
            Tok::Ident(w) if w == "T" => {
                self.bump();
                Ok(Proposition::Top)
            }
            Tok::Ident(w) if w == "C" && *self.peek_at(1) == Tok::LParen => {
                Ok(Proposition::Commitment(Box::new(self.commitment_atom()?)))
            }
            Tok::Ident(w) if w == "exists" => {
                self.enter()?;
                self.bump();
                let (var, _) = self.name("a bound variable")?;
                self.expect_word("in")?;
                let domain = match self.peek().clone() {
                    Tok::LBrace => {
                        let open = self.bump().span;
                        let items = self.term_list(Tok::RBrace)?;
                        self.expect(Tok::RBrace, "`}`")?;
                        if items.is_empty() {
                            let span = open.to(self.prev_span());
                            return self.error(span, "existential domain must not be empty");
                        }
                        items
                    }
                    Tok::Ident(_) => vec![Term::Var(self.name("a domain")?.0)],
                    _ => return self.unexpected("a domain (`{...}` or a parameter)"),
                };
                self.expect(Tok::Colon, "`:` after the domain")?;
                let body = self.proposition()?;
                self.depth -= 1;
                Ok(Proposition::exists_in(var, domain, body))
            }
            Tok::Underscore => {
                self.bump();
                Ok(Proposition::Wildcard)
            }
            Tok::LParen => {
                self.enter()?;
                self.bump();
                let inner = self.proposition()?;
                self.expect(Tok::RParen, "`)`")?;
                self.depth -= 1;
                Ok(inner)
            }
            Tok::Ident(_) => Ok(Proposition::Event(self.event_atom()?)),
            _ => self.unexpected("a proposition"),
        }
    }

    // ---- protocol ----

    fn protocol(&mut self) -> Protocol {
        let mut proto = Protocol::default();
        self.skip_newlines();
        if !self.is_word("protocol") {
            let span = self.span();
            let _ = self.error::<()>(span, "expected protocol header `protocol <name>`");
            return proto;
        }
        let header = self.bump().span;
        match self.name("a protocol name") {
            Ok((name, span)) => {
                proto.name = name;
                proto.source.header = header.to(span);
                if self.end_of_line().is_err() {
                    self.recover_line();
                }
            }
            Err(Failed) => self.recover_line(),
        }

        let mut ended = false;
        while !self.at_eof() {
            let line_start = self.span();
            if ended {
                let _ = self.error::<()>(line_start, "unexpected content after `end`");
                self.recover_line();
                continue;
            }
            let result = match self.current_word().map(str::to_string) {
                Some(w) if w == "roles" || w == "role" => self.roles_decl(&mut proto),
                Some(w) if w == "param" => self.param_decl(&mut proto),
                Some(w) if w == "message" => self.message_decl(&mut proto),
                Some(w) if w == "order" => self.order_decl(&mut proto),
                Some(w) if w == "end" => {
                    self.bump();
                    ended = true;
                    Ok(())
                }
                Some(w) if CLAUSE_KEYWORDS.contains(&w.as_str()) => {
                    if proto.messages.is_empty() {
                        self.error(line_start, format!("`{w}` clause outside a message"))
                    } else {
                        self.clause_line(&mut proto)
                    }
                }
                Some(w) if INTERNAL_WORDS.contains(&w.as_str()) => {
                    let span = self.span();
                    self.diags.push(Diagnostic::error(
                        rules::INTERNAL,
                        Principle::NoPrincipalInternals,
                        span,
                        format!(
                            "`{w}` describes a principal's internals; a protocol may only state \
                             communications and their social meaning"
                        ),
                    ));
                    Err(Failed)
                }
                _ => self.unexpected("a declaration (`roles`, `param`, `message`, `order` or `end`)"),
            };
            match result.and_then(|()| self.end_of_line()) {
                Ok(()) => {}
                Err(Failed) => self.recover_line(),
            }
        }
        proto
    }

    fn roles_decl(&mut self, proto: &mut Protocol) -> PResult<()> {
        self.bump();
        loop {
            let (name, span) = self.name("a role name")?;
            proto.roles.push(Role::new(name));
            proto.source.roles.push(span);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Ident(_) => {}
                _ => return Ok(()),
            }
        }
    }

    fn param_decl(&mut self, proto: &mut Protocol) -> PResult<()> {
        let start = self.bump().span;
        let (name, _) = self.name("a parameter name")?;
        self.expect(Tok::Colon, "`:` before the parameter type")?;
        let ty = match self.current_word() {
            Some("value") => ParamType::Value,
            Some("set") => ParamType::Set,
            _ => return self.unexpected("a parameter type (`value` or `set`)"),
        };
        self.bump();
        proto.params.push(ParamDecl { name, ty });
        proto.source.params.push(start.to(self.prev_span()));
        Ok(())
    }

    fn message_decl(&mut self, proto: &mut Protocol) -> PResult<()> {
        let start = self.bump().span;
        let (name, _) = self.name("a message name")?;
        self.expect(Tok::Colon, "`:` after the message name")?;
        let (sender, _) = self.name("a sender role")?;
        self.expect(Tok::Arrow, "`->`")?;
        let (receiver, _) = self.name("a receiver role")?;
        let mut params = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            if *self.peek() != Tok::RParen {
                loop {
                    params.push(self.name("a parameter name")?.0);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)` or `,`")?;
        }
        proto.messages.push(MessageSchema {
            name,
            sender: Role::new(sender),
            receiver: Role::new(receiver),
            params,
            meaning: Vec::new(),
        });
        proto.source.messages.push(start.to(self.prev_span()));
        proto.source.clauses.push(Vec::new());
        Ok(())
    }

    fn clause_line(&mut self, proto: &mut Protocol) -> PResult<()> {
        let start = self.span();
        let clause = self.clause()?;
        let span = start.to(self.prev_span());
        if let Some(m) = proto.messages.last_mut() {
            m.meaning.push(clause);
        }
        if let Some(spans) = proto.source.clauses.last_mut() {
            spans.push(span);
        }
        Ok(())
    }

    pub(crate) fn clause(&mut self) -> PResult<MeaningClause> {
        let word = self.current_word().unwrap_or_default().to_string();
        self.bump();
        let atom = self.commitment_atom()?;
        Ok(match word.as_str() {
            "create" => MeaningClause::Create(atom),
            "release" => MeaningClause::Release(atom),
            "cancel" => MeaningClause::Cancel(atom),
            "delegate" | "assign" => {
                self.expect_word("to")?;
                let to = self.term()?;
                if word == "delegate" {
                    MeaningClause::Delegate { target: atom, to }
                } else {
                    MeaningClause::Assign { target: atom, to }
                }
            }
            _ => unreachable!("caller checked clause keyword"),
        })
    }

    fn order_decl(&mut self, proto: &mut Protocol) -> PResult<()> {
        let start = self.bump().span;
        let before = self.event_atom()?;
        self.expect(Tok::Lt, "`<`")?;
        let after = self.event_atom()?;
        proto.orderings.push(OrderingConstraint { before, after });
        proto.source.orderings.push(start.to(self.prev_span()));
        Ok(())
    }

    fn finish<T>(self, value: T) -> Result<T, Vec<Diagnostic>> {
        if self.diags.iter().any(Diagnostic::is_error) {
            Err(self.diags)
        } else {
            Ok(value)
        }
    }
}

/// Parse a protocol source.
pub fn parse(src: &str) -> Result<Protocol, Vec<Diagnostic>> {
    let mut p = Parser::new(src);
    let proto = p.protocol();
    p.finish(proto)
}

/// Parse raw bytes; invalid UTF-8 is a diagnostic, never a panic.
pub fn parse_bytes(bytes: &[u8]) -> Result<Protocol, Vec<Diagnostic>> {
    match std::str::from_utf8(bytes) {
        Ok(src) => parse(src),
        Err(e) => {
            let at = e.valid_up_to();
            let prefix = &bytes[..at];
            let line = prefix.iter().filter(|&&b| b == b'\n').count() as u32 + 1;
            let line_start = prefix.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            let col = String::from_utf8_lossy(&prefix[line_start..]).chars().count() as u32 + 1;
            Err(vec![Diagnostic::syntax(
                Span {
                    start: at,
                    end: at + e.error_len().unwrap_or(bytes.len() - at),
                    line,
                    col,
                },
                "input is not valid UTF-8",
            )])
        }
    }
}

fn parse_whole<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T, Vec<Diagnostic>> {
    let mut p = Parser::new(src);
    p.skip_newlines();
    let result = f(&mut p);
    if let Ok(value) = result {
        p.skip_newlines();
        if !p.at_eof() {
            let _ = p.unexpected::<()>("end of input");
        }
        return p.finish(value);
    }
    if !p.diags.iter().any(Diagnostic::is_error) {
        let span = p.span();
        p.diags.push(Diagnostic::syntax(span, "malformed input"));
    }
    Err(p.diags)
}

/// Parse a standalone proposition.
pub fn parse_proposition(src: &str) -> Result<Proposition, Vec<Diagnostic>> {
    parse_whole(src, Parser::proposition)
}

/// Parse a standalone `C(x, y, r, u)`.
pub fn parse_commitment(src: &str) -> Result<CommitmentAtom, Vec<Diagnostic>> {
    parse_whole(src, Parser::commitment_atom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::diagnostic::rules;

    pub(crate) const TABLE1: &str = "\
protocol Appointment
  roles PHY, PAT
  param slots: set
  param s: value
  message availableSlots: PHY -> PAT (slots)
    create C(PHY, PAT, exists s in slots: C(PAT, PHY, T, showUp(PAT, s)), C(PHY, PAT, T, showUp(PHY, s)))
  message selectSlot: PAT -> PHY (s)
    create C(PAT, PHY, T, showUp(PAT, s))
  message confirmSlot: PHY -> PAT (s)
    create C(PHY, PAT, T, showUp(PHY, s))
end
";

    #[test]
    fn parses_the_scheduling_table() {
        let p = parse(TABLE1).unwrap();
        assert_eq!(p.name, "Appointment");
        assert_eq!(p.roles, vec![Role::new("PHY"), Role::new("PAT")]);
        assert_eq!(p.messages.len(), 3);
        let names: Vec<_> = p.messages.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["availableSlots", "selectSlot", "confirmSlot"]);
        let MeaningClause::Create(c) = &p.messages[0].meaning[0] else {
            panic!("expected create")
        };
        assert!(matches!(c.antecedent, Proposition::ExistsIn { .. }));
        assert_eq!(p.source.clauses[0].len(), 1);
    }

    #[test]
    fn empty_input_wants_a_header() {
        let diags = parse("").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.contains("expected protocol header"));
        assert_eq!((diags[0].span.line, diags[0].span.col), (1, 1));
    }

    #[test]
    fn errors_carry_line_and_column() {
        let diags = parse("protocol P\n  roles A, B\n  message m: A => B\n").unwrap_err();
        let d = &diags[0];
        assert_eq!(d.span.line, 3);
        assert!(d.span.col > 1, "{d:?}");
    }

    #[test]
    fn recovers_and_reports_several_errors() {
        let diags = parse("protocol P\n  roles A B\n  bogus line\n  param x: integer\n").unwrap_err();
        assert_eq!(diags.iter().filter(|d| d.is_error()).count(), 2, "{diags:?}");
    }

    #[test]
    fn internal_constructs_are_rejected_with_principle() {
        let src = "protocol P\n  roles A, B\n  goal scheduleAppointment\n  belief A trusts B\nend\n";
        let diags = parse(src).unwrap_err();
        let internal: Vec<_> = diags.iter().filter(|d| d.rule == rules::INTERNAL).collect();
        assert_eq!(internal.len(), 2);
        assert!(internal
            .iter()
            .all(|d| d.principle == Principle::NoPrincipalInternals));
    }

    #[test]
    fn before_requires_event_operands() {
        assert!(parse_proposition("a . b").is_ok());
        assert!(parse_proposition("a . T").is_err());
        assert!(parse_proposition("a . b . c").is_err());
        assert!(parse_proposition("C(x, y, T, a) . b").is_err());
    }

    #[test]
    fn deep_nesting_is_a_diagnostic() {
        let src = format!("{}a{}", "(".repeat(10_000), ")".repeat(10_000));
        let diags = parse_proposition(&src).unwrap_err();
        assert!(diags[0].message.contains("nesting"));
    }

    #[test]
    fn invalid_utf8_is_reported() {
        let diags = parse_bytes(b"protocol P\n\xff\xfe").unwrap_err();
        assert_eq!(diags[0].span.line, 2);
        assert_eq!(diags[0].span.start, 11);
    }
}
