//! Reading and writing the supported WSML subset: ontology documents and
//! logical expressions.

mod expression;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use expression::validate_expression_text;
pub use lexer::{is_keyword, tokenize, Token, TokenKind, KEYWORDS};
pub use parser::{parse_ontology, parse_ontology_with_diagnostics};
pub use printer::print_ontology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: u32,
    pub column: u32,
    pub expected: Option<Vec<TokenKind>>,
}

impl ParseDiagnostic {
    pub fn error(message: impl Into<String>, line: u32, column: u32) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            message: message.into(),
            line,
            column,
            expected: None,
        }
    }

    pub fn warning(message: impl Into<String>, line: u32, column: u32) -> Self {
        ParseDiagnostic {
            severity: Severity::Warning,
            ..ParseDiagnostic::error(message, line, column)
        }
    }

    pub fn with_expected(mut self, expected: Vec<TokenKind>) -> Self {
        self.expected = Some(expected);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}

/// Line and column just past the last character of `source`.
pub(crate) fn end_position(source: &str) -> (u32, u32) {
    let line = source.matches('\n').count() as u32 + 1;
    let last = source.rsplit('\n').next().unwrap_or("");
    (line, last.chars().count() as u32 + 1)
}
