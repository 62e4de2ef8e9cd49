//! Tokenizer shared by protocol (`.cp`) and scenario (`.scn`) sources.
//!
//! Newlines are significant at bracket depth zero and ignored inside
//! `(...)` and `{...}`, so long propositions may wrap.

use super::diagnostic::{Diagnostic, Span};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
    Amp,
    Lt,
    Arrow,
    Pipe,
    Underscore,
    Newline,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Underscore => "`_`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.src[self.pos..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> Span {
        Span {
            start: self.pos,
            end: self.pos,
            line: self.line,
            col: self.col,
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

pub fn tokenize(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut tokens: Vec<Token> = Vec::new();
    let mut diags = Vec::new();
    let mut depth: usize = 0;

    while let Some(c) = cur.peek() {
        let start = cur.here();
        let simple = |tok| Some(tok);
        let tok = match c {
            '\n' => {
                cur.bump();
                if depth == 0 && !matches!(tokens.last().map(|t| &t.tok), Some(Tok::Newline) | None) {
                    Some(Tok::Newline)
                } else {
                    None
                }
            }
            c if c.is_whitespace() => {
                cur.bump();
                None
            }
            '#' => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                None
            }
            '(' | '{' => {
                cur.bump();
                depth += 1;
                simple(if c == '(' { Tok::LParen } else { Tok::LBrace })
            }
            ')' | '}' => {
                cur.bump();
                depth = depth.saturating_sub(1);
                simple(if c == ')' { Tok::RParen } else { Tok::RBrace })
            }
            ',' => {
                cur.bump();
                simple(Tok::Comma)
            }
            ':' => {
                cur.bump();
                simple(Tok::Colon)
            }
            '.' => {
                cur.bump();
                simple(Tok::Dot)
            }
            '&' => {
                cur.bump();
                simple(Tok::Amp)
            }
            '<' => {
                cur.bump();
                simple(Tok::Lt)
            }
            '|' => {
                cur.bump();
                simple(Tok::Pipe)
            }
            '-' if cur.peek2() == Some('>') => {
                cur.bump();
                cur.bump();
                simple(Tok::Arrow)
            }
            '-' if cur.peek2().is_some_and(|d| d.is_ascii_digit()) => {
                cur.bump();
                let mut s = String::from("-");
                while let Some(d) = cur.peek().filter(char::is_ascii_digit) {
                    s.push(d);
                    cur.bump();
                }
                Some(Tok::Number(s))
            }
            '"' => {
                cur.bump();
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            let esc_at = cur.here();
                            match cur.bump() {
                                Some('"') => s.push('"'),
                                Some('\\') => s.push('\\'),
                                Some('n') => s.push('\n'),
                                Some('t') => s.push('\t'),
                                Some('r') => s.push('\r'),
                                Some('\n') | None => break,
                                Some(other) => diags.push(Diagnostic::syntax(
                                    Span { end: cur.pos, ..esc_at },
                                    format!("unknown escape `\\{other}`"),
                                )),
                            }
                        }
                        c => s.push(c),
                    }
                }
                if !closed {
                    diags.push(Diagnostic::syntax(
                        Span { end: cur.pos, ..start },
                        "unterminated string literal",
                    ));
                }
                Some(Tok::Str(s))
            }
            c if c.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(d) = cur.peek().filter(|d| is_ident_char(*d)) {
                    s.push(d);
                    cur.bump();
                }
                if s.bytes().all(|b| b.is_ascii_digit()) {
                    Some(Tok::Number(s))
                } else {
                    diags.push(Diagnostic::syntax(
                        Span { end: cur.pos, ..start },
                        format!("malformed number `{s}`"),
                    ));
                    None
                }
            }
            c if is_ident_start(c) => {
                let mut s = String::new();
                while let Some(d) = cur.peek().filter(|d| is_ident_char(*d)) {
                    s.push(d);
                    cur.bump();
                }
                if s == "_" {
                    Some(Tok::Underscore)
                } else {
                    Some(Tok::Ident(s))
                }
            }
            other => {
                cur.bump();
                diags.push(Diagnostic::syntax(
                    Span { end: cur.pos, ..start },
                    format!("unexpected character `{}`", other.escape_default()),
                ));
                None
            }
        };
        if let Some(tok) = tok {
            tokens.push(Token {
                tok,
                span: Span { end: cur.pos, ..start },
            });
        }
    }
    let end = cur.here();
    if !matches!(tokens.last().map(|t| &t.tok), Some(Tok::Newline) | None) {
        tokens.push(Token { tok: Tok::Newline, span: end });
    }
    tokens.push(Token { tok: Tok::Eof, span: end });
    (tokens, diags)
}
