use std::collections::HashSet;

use super::lexer::{tokenize, Token, TokenKind};
use super::{end_position, ParseDiagnostic};
use crate::ontology::{
    AttributeConstraint, AttributeDef, Builtin, Concept, InstanceDef, Iri, Literal, Namespace,
    NfpEntry, OpaqueAxiom, Ontology, RelationDef, RelationInstance, TypeRef, Value,
};

const TOP_LEVEL: &[&str] = &["concept", "relation", "instance", "relationInstance", "axiom"];

type PResult<T> = Result<T, ParseDiagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    eof: (u32, u32),
    diagnostics: Vec<ParseDiagnostic>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn at_keyword(&self, word: &str) -> bool {
        self.peek().is_some_and(|t| t.is_keyword(word))
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_top_level(&self) -> bool {
        self.peek()
            .is_some_and(|t| t.kind == TokenKind::Keyword && TOP_LEVEL.contains(&t.lexeme.as_str()))
    }

    fn unexpected(&self, what: &str, expected: Vec<TokenKind>) -> ParseDiagnostic {
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

    fn expect_keyword(&mut self, word: &str) -> PResult<Token> {
        if self.at_keyword(word) {
            Ok(self.next().unwrap())
        } else {
            Err(self.unexpected(&format!("`{word}`"), vec![TokenKind::Keyword]))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.at_punct(p) {
            Ok(self.next().unwrap())
        } else {
            Err(self.unexpected(&format!("`{p}`"), vec![TokenKind::Punctuation]))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind) -> PResult<Token> {
        match self.peek() {
            Some(t) if t.kind == kind => Ok(self.next().unwrap()),
            _ => Err(self.unexpected(&kind.to_string(), vec![kind])),
        }
    }

    fn iri(&mut self) -> PResult<Iri> {
        let tok = self.expect_kind(TokenKind::Iri)?;
        Iri::new(tok.text_value())
            .ok_or_else(|| ParseDiagnostic::error("IRI must not be empty", tok.line, tok.column))
    }

    fn ident(&mut self) -> PResult<Token> {
        self.expect_kind(TokenKind::Identifier)
    }

    fn literal(&mut self) -> PResult<Literal> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("a literal", literal_kinds()));
        };
        let lit = match tok.kind {
            TokenKind::StringLiteral => Literal::String(tok.text_value()),
            TokenKind::IntegerLiteral => Literal::Integer(tok.lexeme.clone()),
            TokenKind::DecimalLiteral => Literal::Decimal(tok.lexeme.clone()),
            TokenKind::BooleanLiteral => Literal::Boolean(tok.lexeme == "true"),
            _ => return Err(self.unexpected("a literal", literal_kinds())),
        };
        self.pos += 1;
        Ok(lit)
    }

    fn value(&mut self) -> PResult<Value> {
        if self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
            Ok(Value::Identifier(self.next().unwrap().lexeme))
        } else {
            let mut expected = vec![TokenKind::Identifier];
            expected.extend(literal_kinds());
            self.literal()
                .map(Value::Literal)
                .map_err(|d| ParseDiagnostic { expected: Some(expected), ..d })
        }
    }

    fn document(&mut self) -> PResult<Ontology> {
        let variant = if self.at_keyword("wsmlVariant") {
            self.next();
            Some(self.iri()?)
        } else {
            None
        };

        let mut namespaces = Vec::new();
        if self.at_keyword("namespace") {
            self.next();
            self.expect_punct("{")?;
            loop {
                namespaces.push(self.namespace_decl()?);
                if self.at_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect_punct("}")?;
        }

        self.expect_keyword("ontology")?;
        let mut ontology = Ontology::new(self.iri()?);
        ontology.variant = variant;
        ontology.namespaces = namespaces;

        loop {
            if self.at_keyword("importsOntology") {
                self.next();
                self.import_list(&mut ontology.imports)?;
            } else if self.at_keyword("nonFunctionalProperties") {
                let block = self.nfp_block()?;
                ontology.nfp.extend(block);
            } else {
                break;
            }
        }

        let mut seen = ElementIds::default();
        while self.peek().is_some() {
            if let Err(diag) = self.element(&mut ontology, &mut seen) {
                self.diagnostics.push(diag);
                self.recover();
            }
        }
        Ok(ontology)
    }

    fn recover(&mut self) {
        if self.peek().is_some() {
            self.pos += 1;
        }
        while self.peek().is_some() && !self.at_top_level() {
            self.pos += 1;
        }
    }

    fn namespace_decl(&mut self) -> PResult<Namespace> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Iri => Ok(Namespace {
                prefix: None,
                iri: self.iri()?,
            }),
            Some(t) if t.kind == TokenKind::Identifier => {
                let prefix = self.next().unwrap().lexeme;
                let iri = self.iri()?;
                Ok(Namespace {
                    prefix: if prefix == "_" { None } else { Some(prefix) },
                    iri,
                })
            }
            _ => Err(self.unexpected(
                "a namespace declaration",
                vec![TokenKind::Identifier, TokenKind::Iri],
            )),
        }
    }

    fn import_list(&mut self, into: &mut Vec<Iri>) -> PResult<()> {
        if self.at_punct("{") {
            self.next();
            loop {
                into.push(self.iri()?);
                if self.at_punct(",") {
                    self.next();
                } else {
                    break;
                }
            }
            self.expect_punct("}")?;
            return Ok(());
        }
        into.push(self.iri()?);
        while self.peek().is_some_and(|t| t.kind == TokenKind::Iri) {
            into.push(self.iri()?);
        }
        Ok(())
    }

    fn nfp_block(&mut self) -> PResult<Vec<NfpEntry>> {
        self.expect_keyword("nonFunctionalProperties")?;
        let mut entries = Vec::new();
        while !self.at_keyword("endNonFunctionalProperties") {
            if self.peek().is_none() || self.at_top_level() {
                return Err(self.unexpected(
                    "`endNonFunctionalProperties`",
                    vec![TokenKind::Keyword, TokenKind::Identifier],
                ));
            }
            let key = self.ident()?.lexeme;
            self.expect_keyword("hasValue")?;
            let value = self.literal()?;
            entries.push(NfpEntry { key, value });
        }
        self.next();
        Ok(entries)
    }

    fn element(&mut self, ontology: &mut Ontology, seen: &mut ElementIds) -> PResult<()> {
        let Some(tok) = self.peek().cloned() else {
            return Ok(());
        };
        if tok.kind != TokenKind::Keyword {
            return Err(self.unexpected(
                "`concept`, `relation`, `instance`, `relationInstance` or `axiom`",
                vec![TokenKind::Keyword],
            ));
        }
        match tok.lexeme.as_str() {
            "concept" => {
                let (concept, id_tok) = self.concept()?;
                claim(&mut seen.concepts, "concept", &id_tok)?;
                ontology.concepts.push(concept);
            }
            "relation" => {
                let (relation, id_tok) = self.relation()?;
                claim(&mut seen.relations, "relation", &id_tok)?;
                ontology.relations.push(relation);
            }
            "instance" => {
                let (instance, id_tok) = self.instance()?;
                claim(&mut seen.instances, "instance", &id_tok)?;
                ontology.instances.push(instance);
            }
            "relationInstance" => {
                let ri = self.relation_instance()?;
                ontology.relation_instances.push(ri);
            }
            "axiom" => {
                let axiom = self.opaque_axiom()?;
                ontology.axioms.push(axiom);
            }
            _ => {
                return Err(self.unexpected(
                    "`concept`, `relation`, `instance`, `relationInstance` or `axiom`",
                    vec![TokenKind::Keyword],
                ))
            }
        }
        Ok(())
    }

    fn concept(&mut self) -> PResult<(Concept, Token)> {
        self.expect_keyword("concept")?;
        let id_tok = self.ident()?;
        let mut super_concepts: Vec<String> = Vec::new();
        if self.at_keyword("subConceptOf") {
            self.next();
            for tok in self.idlist()? {
                if super_concepts.contains(&tok.lexeme) {
                    self.diagnostics.push(ParseDiagnostic::warning(
                        format!("duplicate super-concept `{}` ignored", tok.lexeme),
                        tok.line,
                        tok.column,
                    ));
                } else {
                    super_concepts.push(tok.lexeme);
                }
            }
        }
        let nfp = if self.at_keyword("nonFunctionalProperties") {
            self.nfp_block()?
        } else {
            Vec::new()
        };
        let mut attributes: Vec<AttributeDef> = Vec::new();
        while self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
            let name_tok = self.ident()?;
            let constraint = match self.peek() {
                Some(t) if t.is_keyword("ofType") => AttributeConstraint::OfType,
                Some(t) if t.is_keyword("impliesType") => AttributeConstraint::ImpliesType,
                _ => return Err(self.unexpected("`ofType` or `impliesType`", vec![TokenKind::Keyword])),
            };
            self.next();
            let cardinality = if self.at_punct("(") {
                self.next();
                let min = self.cardinality_bound()?;
                let max = self.cardinality_bound()?;
                self.expect_punct(")")?;
                Some((min, max))
            } else {
                None
            };
            let range = self.type_ref()?;
            if attributes.iter().any(|a| a.name == name_tok.lexeme) {
                return Err(ParseDiagnostic::error(
                    format!("duplicate attribute `{}` in concept `{}`", name_tok.lexeme, id_tok.lexeme),
                    name_tok.line,
                    name_tok.column,
                ));
            }
            attributes.push(AttributeDef {
                name: name_tok.lexeme,
                constraint,
                cardinality,
                range,
            });
        }
        Ok((
            Concept {
                id: id_tok.lexeme.clone(),
                super_concepts,
                attributes,
                nfp,
            },
            id_tok,
        ))
    }

    fn cardinality_bound(&mut self) -> PResult<u32> {
        let tok = self.expect_kind(TokenKind::IntegerLiteral)?;
        tok.lexeme
            .parse()
            .map_err(|_| ParseDiagnostic::error("cardinality must be a non-negative integer", tok.line, tok.column))
    }

    fn type_ref(&mut self) -> PResult<TypeRef> {
        let tok = self.ident()?;
        if tok.lexeme.starts_with('_') && !tok.lexeme.contains('#') {
            return Builtin::from_name(&tok.lexeme).map(TypeRef::Builtin).ok_or_else(|| {
                ParseDiagnostic::error(
                    format!("unknown datatype `{}`", tok.lexeme),
                    tok.line,
                    tok.column,
                )
            });
        }
        Ok(TypeRef::Concept(tok.lexeme))
    }

    fn idlist(&mut self) -> PResult<Vec<Token>> {
        let braced = self.at_punct("{");
        if braced {
            self.next();
        }
        let mut ids = vec![self.ident()?];
        while self.at_punct(",") {
            self.next();
            ids.push(self.ident()?);
        }
        if braced {
            self.expect_punct("}")?;
        }
        Ok(ids)
    }

    fn relation(&mut self) -> PResult<(RelationDef, Token)> {
        self.expect_keyword("relation")?;
        let id_tok = self.ident()?;
        self.expect_punct("(")?;
        let mut parameters = Vec::new();
        loop {
            self.expect_keyword("ofType")?;
            parameters.push(self.type_ref()?);
            if self.at_punct(",") {
                self.next();
            } else {
                break;
            }
        }
        self.expect_punct(")")?;
        Ok((
            RelationDef {
                id: id_tok.lexeme.clone(),
                parameters,
            },
            id_tok,
        ))
    }

    fn instance(&mut self) -> PResult<(InstanceDef, Token)> {
        self.expect_keyword("instance")?;
        let id_tok = self.ident()?;
        self.expect_keyword("memberOf")?;
        let member_of = self.ident()?.lexeme;
        let nfp = if self.at_keyword("nonFunctionalProperties") {
            self.nfp_block()?
        } else {
            Vec::new()
        };
        let mut values = Vec::new();
        while self.peek().is_some_and(|t| t.kind == TokenKind::Identifier) {
            let attr = self.ident()?.lexeme;
            self.expect_keyword("hasValue")?;
            values.push((attr, self.value()?));
        }
        Ok((
            InstanceDef {
                id: id_tok.lexeme.clone(),
                member_of,
                values,
                nfp,
            },
            id_tok,
        ))
    }

    fn relation_instance(&mut self) -> PResult<RelationInstance> {
        self.expect_keyword("relationInstance")?;
        let relation = self.ident()?.lexeme;
        self.expect_punct("(")?;
        let mut args = vec![self.value()?];
        while self.at_punct(",") {
            self.next();
            args.push(self.value()?);
        }
        self.expect_punct(")")?;
        Ok(RelationInstance { relation, args })
    }

    fn opaque_axiom(&mut self) -> PResult<OpaqueAxiom> {
        self.expect_keyword("axiom")?;
        let id = self.ident()?.lexeme;
        if self.at_keyword("nonFunctionalProperties") {
            self.nfp_block()?;
        }
        self.expect_keyword("definedBy")?;
        let mut parts = Vec::new();
        while self.peek().is_some() && !self.at_top_level() {
            parts.push(self.next().unwrap().lexeme);
        }
        Ok(OpaqueAxiom {
            id,
            text: parts.join(" "),
        })
    }
}

#[derive(Default)]
struct ElementIds {
    concepts: HashSet<String>,
    relations: HashSet<String>,
    instances: HashSet<String>,
}

fn claim(set: &mut HashSet<String>, what: &str, tok: &Token) -> PResult<()> {
    if set.insert(tok.lexeme.clone()) {
        Ok(())
    } else {
        Err(ParseDiagnostic::error(
            format!("duplicate {what} id `{}`", tok.lexeme),
            tok.line,
            tok.column,
        ))
    }
}

fn literal_kinds() -> Vec<TokenKind> {
    vec![
        TokenKind::StringLiteral,
        TokenKind::IntegerLiteral,
        TokenKind::DecimalLiteral,
        TokenKind::BooleanLiteral,
    ]
}

/// Parses an ontology document, returning the ontology (absent when any
/// error was found) together with every diagnostic, warnings included.
pub fn parse_ontology_with_diagnostics(source: &str) -> (Option<Ontology>, Vec<ParseDiagnostic>) {
    let tokens = match tokenize(source) {
        Ok(tokens) => tokens,
        Err(diag) => return (None, vec![diag]),
    };
    let mut parser = Parser {
        tokens,
        pos: 0,
        eof: end_position(source),
        diagnostics: Vec::new(),
    };
    let result = parser.document();
    let mut diagnostics = parser.diagnostics;
    match result {
        Ok(ontology) if !diagnostics.iter().any(ParseDiagnostic::is_error) => {
            (Some(ontology), diagnostics)
        }
        Ok(_) => (None, diagnostics),
        Err(diag) => {
            diagnostics.push(diag);
            (None, diagnostics)
        }
    }
}

pub fn parse_ontology(source: &str) -> Result<Ontology, Vec<ParseDiagnostic>> {
    match parse_ontology_with_diagnostics(source) {
        (Some(ontology), _) => Ok(ontology),
        (None, diagnostics) => Err(diagnostics),
    }
}
