//! Recognizer for the logical-expression grammar used by generated axioms:
//!
//! ```text
//! axiomText := "definedBy"? expr
//! expr      := conj ("or" conj)*
//! conj      := unary ("and" unary)*
//! unary     := "neg" unary | "(" expr ")" | molecule | atom
//! molecule  := var "memberOf" ident | var "[" ident "hasValue" term "]"
//! atom      := ident "(" term ("," term)* ")"
//! term      := var | ident | literal
//! ```

use super::lexer::{tokenize, Token, TokenKind};
use super::{end_position, ParseDiagnostic};

struct Recognizer<'a> {
    tokens: &'a [Token],
    pos: usize,
    eof: (u32, u32),
}

type RResult = Result<(), ParseDiagnostic>;

impl Recognizer<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn error(&self, what: &str, expected: Vec<TokenKind>) -> ParseDiagnostic {
        match self.peek() {
            Some(t) => ParseDiagnostic::error(
                format!("expected {what}, found `{}`", t.lexeme),
                t.line,
                t.column,
            ),
            None => ParseDiagnostic::error(
                format!("expected {what}, found end of input"),
                self.eof.0,
                self.eof.1,
            ),
        }
        .with_expected(expected)
    }

    fn eat_keyword(&mut self, word: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_keyword(word)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, word: &str) -> RResult {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            Err(self.error(&format!("`{word}`"), vec![TokenKind::Keyword]))
        }
    }

    fn expect_punct(&mut self, p: &str) -> RResult {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&format!("`{p}`"), vec![TokenKind::Punctuation]))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind) -> RResult {
        if self.peek().is_some_and(|t| t.kind == kind) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&kind.to_string(), vec![kind]))
        }
    }

    fn expr(&mut self) -> RResult {
        self.conj()?;
        while self.eat_keyword("or") {
            self.conj()?;
        }
        Ok(())
    }

    fn conj(&mut self) -> RResult {
        self.unary()?;
        while self.eat_keyword("and") {
            self.unary()?;
        }
        Ok(())
    }

    fn unary(&mut self) -> RResult {
        if self.eat_keyword("neg") {
            return self.unary();
        }
        if self.eat_punct("(") {
            self.expr()?;
            return self.expect_punct(")");
        }
        match self.peek().map(|t| t.kind) {
            Some(TokenKind::Variable) => {
                self.pos += 1;
                if self.eat_keyword("memberOf") {
                    self.expect_kind(TokenKind::Identifier)
                } else if self.eat_punct("[") {
                    self.expect_kind(TokenKind::Identifier)?;
                    self.expect_keyword("hasValue")?;
                    self.term()?;
                    self.expect_punct("]")
                } else {
                    Err(self.error("`memberOf` or `[`", vec![TokenKind::Keyword, TokenKind::Punctuation]))
                }
            }
            Some(TokenKind::Identifier) => {
                self.pos += 1;
                self.expect_punct("(")?;
                self.term()?;
                while self.eat_punct(",") {
                    self.term()?;
                }
                self.expect_punct(")")
            }
            _ => Err(self.error(
                "a molecule, relation atom, `neg` or `(`",
                vec![
                    TokenKind::Variable,
                    TokenKind::Identifier,
                    TokenKind::Keyword,
                    TokenKind::Punctuation,
                ],
            )),
        }
    }

    fn term(&mut self) -> RResult {
        match self.peek().map(|t| t.kind) {
            Some(
                TokenKind::Variable
                | TokenKind::Identifier
                | TokenKind::StringLiteral
                | TokenKind::IntegerLiteral
                | TokenKind::DecimalLiteral
                | TokenKind::BooleanLiteral,
            ) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error(
                "a variable, identifier or literal",
                vec![
                    TokenKind::Variable,
                    TokenKind::Identifier,
                    TokenKind::StringLiteral,
                    TokenKind::IntegerLiteral,
                    TokenKind::DecimalLiteral,
                    TokenKind::BooleanLiteral,
                ],
            )),
        }
    }
}

/// Checks that `text` is a well-formed logical expression, optionally
/// introduced by `definedBy`.
pub fn validate_expression_text(text: &str) -> Result<(), Vec<ParseDiagnostic>> {
    let tokens = tokenize(text).map_err(|d| vec![d])?;
    let mut rec = Recognizer {
        tokens: &tokens,
        pos: 0,
        eof: end_position(text),
    };
    rec.eat_keyword("definedBy");
    rec.expr().map_err(|d| vec![d])?;
    if rec.peek().is_some() {
        return Err(vec![rec.error("end of expression", Vec::new())]);
    }
    Ok(())
}
