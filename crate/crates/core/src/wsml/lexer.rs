//! Tokenizer for the supported WSML subset.
//!
//! Every token keeps the exact source slice it was read from, so the original
//! text can be rebuilt from the lexemes plus the whitespace and comments
//! between them.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ParseDiagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Iri,
    Variable,
    StringLiteral,
    IntegerLiteral,
    DecimalLiteral,
    BooleanLiteral,
    Punctuation,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Keyword => "keyword",
            TokenKind::Identifier => "identifier",
            TokenKind::Iri => "iri",
            TokenKind::Variable => "variable",
            TokenKind::StringLiteral => "string-literal",
            TokenKind::IntegerLiteral => "integer-literal",
            TokenKind::DecimalLiteral => "decimal-literal",
            TokenKind::BooleanLiteral => "boolean-literal",
            TokenKind::Punctuation => "punctuation",
        };
        f.write_str(s)
    }
}

/// Reserved words of the ontology and logical-expression grammars.
pub const KEYWORDS: &[&str] = &[
    "wsmlVariant",
    "namespace",
    "ontology",
    "importsOntology",
    "concept",
    "subConceptOf",
    "ofType",
    "impliesType",
    "relation",
    "instance",
    "memberOf",
    "hasValue",
    "relationInstance",
    "nonFunctionalProperties",
    "endNonFunctionalProperties",
    "axiom",
    "definedBy",
    "and",
    "or",
    "neg",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    /// 1-based line of the first character.
    pub line: u32,
    /// 1-based column (in characters) of the first character.
    pub column: u32,
    /// Byte offset of the first character.
    pub offset: usize,
}

impl Token {
    pub fn is_keyword(&self, word: &str) -> bool {
        self.kind == TokenKind::Keyword && self.lexeme == word
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme == p
    }

    /// Text of an IRI or string literal without delimiters, with escapes resolved.
    pub fn text_value(&self) -> String {
        match self.kind {
            TokenKind::Iri => unescape(&self.lexeme[2..self.lexeme.len() - 1]),
            TokenKind::StringLiteral => unescape(&self.lexeme[1..self.lexeme.len() - 1]),
            TokenKind::Variable => self.lexeme[1..].to_string(),
            _ => self.lexeme.clone(),
        }
    }
}

fn unescape(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut chars = raw.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            if let Some(next) = chars.next() {
                out.push(next);
            }
        } else {
            out.push(c);
        }
    }
    out
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '#'
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat_while(&mut self, pred: impl Fn(char) -> bool) {
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            self.bump();
        }
    }
}

/// Splits `source` into tokens, skipping whitespace and `//` line comments.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_nth(1) == Some('/') {
            cur.eat_while(|c| c != '\n');
            continue;
        }

        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let kind = match c {
            '_' if cur.peek_nth(1) == Some('"') => {
                cur.bump();
                lex_quoted(&mut cur, line, column, "IRI")?;
                TokenKind::Iri
            }
            '"' => {
                lex_quoted(&mut cur, line, column, "string literal")?;
                TokenKind::StringLiteral
            }
            '?' => {
                cur.bump();
                match cur.peek() {
                    Some(c) if is_ident_start(c) => cur.eat_while(is_ident_char),
                    _ => {
                        return Err(ParseDiagnostic::error(
                            "expected a variable name after `?`",
                            line,
                            column,
                        ))
                    }
                }
                TokenKind::Variable
            }
            c if c.is_ascii_digit()
                || ((c == '-' || c == '+')
                    && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit())) =>
            {
                cur.bump();
                cur.eat_while(|c| c.is_ascii_digit());
                if cur.peek() == Some('.') && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit()) {
                    cur.bump();
                    cur.eat_while(|c| c.is_ascii_digit());
                    TokenKind::DecimalLiteral
                } else {
                    TokenKind::IntegerLiteral
                }
            }
            c if is_ident_start(c) => {
                cur.eat_while(is_ident_char);
                let word = &source[start..cur.pos];
                if word == "true" || word == "false" {
                    TokenKind::BooleanLiteral
                } else if is_keyword(word) {
                    TokenKind::Keyword
                } else {
                    TokenKind::Identifier
                }
            }
            '{' | '}' | '(' | ')' | '[' | ']' | ',' | '.' => {
                cur.bump();
                TokenKind::Punctuation
            }
            other => {
                return Err(ParseDiagnostic::error(
                    format!("illegal character `{}`", other.escape_debug()),
                    line,
                    column,
                ))
            }
        };
        tokens.push(Token {
            kind,
            lexeme: source[start..cur.pos].to_string(),
            line,
            column,
            offset: start,
        });
    }
    Ok(tokens)
}

fn lex_quoted(cur: &mut Cursor<'_>, line: u32, column: u32, what: &str) -> Result<(), ParseDiagnostic> {
    // opening quote
    cur.bump();
    loop {
        match cur.bump() {
            Some('"') => return Ok(()),
            Some('\\') => {
                cur.bump();
            }
            Some('\n') | None => {
                return Err(ParseDiagnostic::error(
                    format!("unterminated {what}"),
                    line,
                    column,
                ))
            }
            Some(_) => {}
        }
    }
}
