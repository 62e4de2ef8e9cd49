use std::fmt;

use serde::Serialize;

/// Byte range plus the 1-based line and column of its start.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.start),
            line: self.line,
            col: self.col,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// The design principle a diagnostic enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Principle {
    AccountabilityModularity,
    ExplicitSocialMeaning,
    SolelySocialMeaning,
    SocialTechnicalSeparation,
    NoPrincipalInternals,
    Syntax,
}

impl Principle {
    pub fn as_str(self) -> &'static str {
        match self {
            Principle::AccountabilityModularity => "accountability-modularity",
            Principle::ExplicitSocialMeaning => "explicit-social-meaning",
            Principle::SolelySocialMeaning => "solely-social-meaning",
            Principle::SocialTechnicalSeparation => "social-technical-separation",
            Principle::NoPrincipalInternals => "no-principal-internals",
            Principle::Syntax => "syntax",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub mod rules {
    pub const SYNTAX: &str = "E-SYNTAX";
    pub const DEBTOR: &str = "D-DEBTOR";
    pub const AUTHORITY: &str = "D-AUTHORITY";
    pub const FREEVAR: &str = "D-FREEVAR";
    pub const ROLES: &str = "D-ROLES";
    pub const DUPLICATE: &str = "D-DUP";
    pub const UNKNOWN: &str = "D-UNKNOWN";
    pub const SELF_MESSAGE: &str = "D-SELF";
    pub const SOLELY: &str = "L-SOLELY";
    pub const MEANING: &str = "L-MEANING";
    pub const INTERNAL: &str = "L-INTERNAL";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule: &'static str,
    pub severity: Severity,
    #[serde(flatten)]
    pub span: Span,
    pub principle: Principle,
    pub message: String,
}

impl Diagnostic {
    pub fn error(rule: &'static str, principle: Principle, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            rule,
            severity: Severity::Error,
            span,
            principle,
            message: message.into(),
        }
    }

    pub fn warning(rule: &'static str, principle: Principle, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            rule,
            severity: Severity::Warning,
            span,
            principle,
            message: message.into(),
        }
    }

    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        Self::error(rules::SYNTAX, Principle::Syntax, span, message)
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity[RULE] message (principle)`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {}[{}] {} ({})",
            self.span.line, self.span.col, self.severity, self.rule, self.message, self.principle
        )
    }

    /// One JSON object per line.
    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
