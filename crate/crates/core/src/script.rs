//! Edit scripts: one command per line, applied in order against a fresh
//! graph. Lines name nodes through script-local handles introduced by the
//! creating line, so scripts never depend on numeric ids.
//!
//! ```text
//! // comment
//! var p http://example.org/sociology#Person
//! refine p.hasEmployer inst http://example.org/sociology#Acme
//! insert p.hasEmployer OR default as org
//! ```

use std::collections::HashMap;

use thiserror::Error;

use crate::engine::{BindingSpec, EditCommand, EditEngine, Endpoint, InstanceSpec, Mode, Rejection};
use crate::model::{AxiomGraph, ConnId, Coords, NodeId, OperatorKind, Port, Violation};
use crate::ontology::{Builtin, ElementKey, Iri};
use crate::store::{OntologyStore, StoreError};
use crate::textgen::{self, GeneratedExpression, Incomplete};

#[derive(Debug, Error)]
pub enum ScriptError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {rejection}")]
    Rejected { line: usize, rejection: Rejection },
    #[error("line {line}: {source}")]
    Store {
        line: usize,
        #[source]
        source: StoreError,
    },
    #[error("{}", incomplete_message(.0))]
    Incomplete(Incomplete),
}

fn incomplete_message(incomplete: &Incomplete) -> String {
    if incomplete.0 == [Violation::EmptyAxiom] {
        "empty axiom".into()
    } else {
        incomplete.to_string()
    }
}

/// The graph a script built and the commands it issued.
#[derive(Debug, Clone)]
pub struct ScriptRun {
    pub graph: AxiomGraph,
    pub commands: Vec<EditCommand>,
}

/// Applies every line; stops at the first syntax error or rejection.
/// Ontologies named by IRI are loaded from the store's file store on first
/// use, together with whatever of their imports the file store holds.
pub fn execute_script(store: &mut OntologyStore, source: &str) -> Result<ScriptRun, ScriptError> {
    let mut runner = Runner {
        store,
        graph: AxiomGraph::new("axiom"),
        handles: HashMap::new(),
        commands: Vec::new(),
        line: 0,
    };
    for (i, raw) in source.lines().enumerate() {
        runner.line = i + 1;
        let tokens = lex(raw).map_err(|m| runner.syntax(m))?;
        if tokens.is_empty() {
            continue;
        }
        runner.run_line(tokens)?;
    }
    Ok(ScriptRun {
        graph: runner.graph,
        commands: runner.commands,
    })
}

/// Runs a script and generates the text of the resulting axiom.
pub fn run_script(
    store: &mut OntologyStore,
    source: &str,
    pretty: bool,
) -> Result<(ScriptRun, GeneratedExpression), ScriptError> {
    let run = execute_script(store, source)?;
    let text = textgen::generate(&run.graph, pretty).map_err(ScriptError::Incomplete)?;
    Ok((run, text))
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tok {
    text: String,
    quoted: bool,
}

/// Splits a line into words, quoted strings and the punctuation `(`, `)`
/// and `,`. Commas inside `@x,y` stay put. `//` starts a comment.
fn lex(line: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let flush = |cur: &mut String, out: &mut Vec<Tok>| {
        if !cur.is_empty() {
            out.push(Tok {
                text: std::mem::take(cur),
                quoted: false,
            });
        }
    };
    while let Some(c) = chars.next() {
        match c {
            '/' if cur.is_empty() && chars.peek() == Some(&'/') => break,
            '"' if cur.is_empty() => {
                let mut value = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('n') => value.push('\n'),
                            Some(other) => value.push(other),
                            None => return Err("unterminated string".into()),
                        },
                        Some(other) => value.push(other),
                        None => return Err("unterminated string".into()),
                    }
                }
                out.push(Tok {
                    text: value,
                    quoted: true,
                });
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            '(' | ')' => {
                flush(&mut cur, &mut out);
                out.push(Tok {
                    text: c.to_string(),
                    quoted: false,
                });
            }
            ',' if !cur.starts_with('@') => {
                flush(&mut cur, &mut out);
                out.push(Tok {
                    text: ",".into(),
                    quoted: false,
                });
            }
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    Ok(out)
}

struct Runner<'s> {
    store: &'s mut OntologyStore,
    graph: AxiomGraph,
    handles: HashMap<String, NodeId>,
    commands: Vec<EditCommand>,
    line: usize,
}

struct Words {
    toks: Vec<Tok>,
    pos: usize,
}

impl Words {
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.text.as_str())
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Concept,
    Relation,
    Instance,
}

impl Runner<'_> {
    fn syntax(&self, message: impl Into<String>) -> ScriptError {
        ScriptError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn word(&self, w: &mut Words, what: &str) -> Result<String, ScriptError> {
        match w.next() {
            Some(t) => Ok(t.text),
            None => Err(self.syntax(format!("expected {what}"))),
        }
    }

    fn run_line(&mut self, toks: Vec<Tok>) -> Result<(), ScriptError> {
        let mut w = Words { toks, pos: 0 };
        // Trailing `@x,y` and `as <id>` apply to whatever the line creates.
        let mut at = None;
        if let Some(last) = w.toks.last() {
            if let Some(rest) = last.text.strip_prefix('@').filter(|_| !last.quoted) {
                at = Some(self.coords(rest)?);
                w.toks.pop();
            }
        }
        let mut alias = None;
        let n = w.toks.len();
        if n >= 2 && w.toks[n - 2].text == "as" && !w.toks[n - 2].quoted {
            alias = Some(w.toks[n - 1].text.clone());
            w.toks.truncate(n - 2);
        }

        let verb = self.word(&mut w, "a command")?;
        let (command, handle) = match verb.as_str() {
            "var" => {
                let id = self.word(&mut w, "a handle")?;
                let concept = self.element(&self.word(&mut w, "a concept")?, Kind::Concept)?;
                let shared = w.peek() == Some("shared");
                if shared {
                    w.next();
                }
                (
                    EditCommand::CreateVariable {
                        concept,
                        shared,
                        at,
                    },
                    Some(id),
                )
            }
            "op" => {
                let id = self.word(&mut w, "a handle")?;
                let operator = self.operator(&self.word(&mut w, "AND, OR or NOT")?)?;
                (EditCommand::CreateOperator { operator, at }, Some(id))
            }
            "inst" => {
                let id = self.word(&mut w, "a handle")?;
                let instance = self.element(&self.word(&mut w, "an instance")?, Kind::Instance)?;
                (
                    EditCommand::CreateInstance {
                        instance: InstanceSpec::Ontology { instance },
                        at,
                    },
                    Some(id),
                )
            }
            "lit" => {
                let id = self.word(&mut w, "a handle")?;
                let datatype = self.builtin(&self.word(&mut w, "a datatype")?)?;
                let value = self.word(&mut w, "a value")?;
                (
                    EditCommand::CreateInstance {
                        instance: InstanceSpec::Literal { datatype, value },
                        at,
                    },
                    Some(id),
                )
            }
            "rel" => {
                let id = self.word(&mut w, "a handle")?;
                let relation = self.element(&self.word(&mut w, "a relation")?, Kind::Relation)?;
                (EditCommand::CreateRelation { relation, at }, Some(id))
            }
            "refine" => {
                let target = self.word(&mut w, "<handle>.<attribute>")?;
                let Port::Slot { node, index } = self.port(&target)? else {
                    return Err(self.syntax("refine takes <handle>.<attribute>"));
                };
                let binding = self.binding(&mut w)?;
                (
                    EditCommand::RefineAttribute {
                        node,
                        slot: index,
                        binding,
                        at,
                    },
                    alias.take(),
                )
            }
            "refinep" => {
                let target = self.word(&mut w, "<handle>[<k>]")?;
                let Port::Param { node, index } = self.port(&target)? else {
                    return Err(self.syntax("refinep takes <handle>[<k>]"));
                };
                let binding = self.binding(&mut w)?;
                (
                    EditCommand::RefineParameter {
                        node,
                        param: index,
                        binding,
                        at,
                    },
                    alias.take(),
                )
            }
            "involve" => {
                let variable = self.handle(&self.word(&mut w, "a variable")?)?;
                let target = self.word(&mut w, "<handle>[<k>]")?;
                let Port::Param { node, index } = self.port(&target)? else {
                    return Err(self.syntax("involve takes <variable> <handle>[<k>]"));
                };
                (
                    EditCommand::Involve {
                        variable,
                        relation: node,
                        param: index,
                    },
                    None,
                )
            }
            "rename" => {
                let node = self.handle(&self.word(&mut w, "a variable")?)?;
                let name = self.word(&mut w, "a new name")?;
                (EditCommand::Rename { node, name }, None)
            }
            "delete" => {
                let node = self.handle(&self.word(&mut w, "an element")?)?;
                (EditCommand::Delete { node }, None)
            }
            "setop" => {
                let node = self.handle(&self.word(&mut w, "an operator")?)?;
                let operator = self.operator(&self.word(&mut w, "AND, OR or NOT")?)?;
                (EditCommand::SetOperator { node, operator }, None)
            }
            "addoperand" => {
                let node = self.handle(&self.word(&mut w, "an operator")?)?;
                let operand = self.binding(&mut w)?;
                (
                    EditCommand::AddOperand { node, operand, at },
                    alias.take(),
                )
            }
            "setval" => {
                let node = self.handle(&self.word(&mut w, "a literal")?)?;
                let value = self.word(&mut w, "a value")?;
                (EditCommand::SetValue { node, value }, None)
            }
            "insert" => {
                let connection = self.connection(&self.word(&mut w, "a connection")?)?;
                let operator = self.operator(&self.word(&mut w, "AND, OR or NOT")?)?;
                let second = if w.at_end() {
                    None
                } else {
                    Some(self.binding(&mut w)?)
                };
                (
                    EditCommand::Insert {
                        connection,
                        operator,
                        second,
                        at,
                    },
                    alias.take(),
                )
            }
            "reconnect" => {
                let connection = self.connection(&self.word(&mut w, "a connection")?)?;
                let end = self.word(&mut w, "source or target")?;
                let to = self.word(&mut w, "a port or element")?;
                let endpoint = match end.as_str() {
                    "source" => Endpoint::Source {
                        port: self.port(&to)?,
                    },
                    "target" => Endpoint::Target {
                        node: self.handle(&to)?,
                    },
                    other => return Err(self.syntax(format!("expected source or target, found `{other}`"))),
                };
                (
                    EditCommand::Reconnect {
                        connection,
                        endpoint,
                    },
                    None,
                )
            }
            "connect" => {
                let source = self.port(&self.word(&mut w, "a port")?)?;
                let target = self.handle(&self.word(&mut w, "an element")?)?;
                (EditCommand::Connect { source, target }, None)
            }
            "move" => {
                let node = self.handle(&self.word(&mut w, "an element")?)?;
                let at = at.ok_or_else(|| self.syntax("move needs @x,y"))?;
                (EditCommand::Move { node, at }, None)
            }
            other => return Err(self.syntax(format!("unknown command `{other}`"))),
        };
        if let Some(extra) = w.next() {
            return Err(self.syntax(format!("unexpected `{}`", extra.text)));
        }
        if let Some(a) = alias {
            return Err(self.syntax(format!("`as {a}` is not meaningful for {verb}")));
        }

        let engine = EditEngine::new(self.store, Mode::Advanced);
        let outcome = engine
            .apply(&mut self.graph, &command)
            .map_err(|rejection| ScriptError::Rejected {
                line: self.line,
                rejection,
            })?;
        self.commands.push(command);
        if let (Some(h), Some(node)) = (handle, outcome.node) {
            self.handles.insert(h, node);
        }
        Ok(())
    }

    fn coords(&self, text: &str) -> Result<Coords, ScriptError> {
        let parsed = text
            .split_once(',')
            .and_then(|(x, y)| Some(Coords::new(x.parse().ok()?, y.parse().ok()?)));
        parsed.ok_or_else(|| self.syntax(format!("bad coordinates `@{text}`")))
    }

    fn operator(&self, text: &str) -> Result<OperatorKind, ScriptError> {
        OperatorKind::from_name(text)
            .ok_or_else(|| self.syntax(format!("expected AND, OR or NOT, found `{text}`")))
    }

    fn builtin(&self, text: &str) -> Result<Builtin, ScriptError> {
        Builtin::from_name(text).ok_or_else(|| self.syntax(format!("unknown datatype `{text}`")))
    }

    /// `IRI#id` (loading the ontology if needed) or a bare id looked up
    /// among loaded ontologies.
    fn element(&mut self, text: &str, kind: Kind) -> Result<ElementKey, ScriptError> {
        if let Some(key) = ElementKey::parse_qualified(text) {
            self.ensure_loaded(&key.ontology)?;
            return Ok(key);
        }
        let found = match kind {
            Kind::Concept => self.store.find_concept_by_id(text),
            Kind::Relation => self.store.find_relation_by_id(text),
            Kind::Instance => self.store.find_instance_by_id(text),
        };
        found.ok_or_else(|| {
            let what = match kind {
                Kind::Concept => "concept",
                Kind::Relation => "relation",
                Kind::Instance => "instance",
            };
            self.syntax(format!("no loaded {what} is called `{text}`"))
        })
    }

    fn ensure_loaded(&mut self, iri: &Iri) -> Result<(), ScriptError> {
        if self.store.contains(iri) {
            return Ok(());
        }
        let line = self.line;
        self.store
            .load_imported_ontology(iri)
            .map_err(|source| ScriptError::Store { line, source })?;
        let mut pending: Vec<Iri> = self
            .store
            .ontology(iri)
            .map(|o| o.imports.clone())
            .unwrap_or_default();
        while let Some(next) = pending.pop() {
            if self.store.contains(&next) {
                continue;
            }
            match self.store.load_imported_ontology(&next) {
                Ok(()) => pending.extend(
                    self.store
                        .ontology(&next)
                        .map(|o| o.imports.clone())
                        .unwrap_or_default(),
                ),
                Err(StoreError::NotFound(_)) => {}
                Err(source) => return Err(ScriptError::Store { line, source }),
            }
        }
        Ok(())
    }

    fn handle(&self, text: &str) -> Result<NodeId, ScriptError> {
        if text == "start" {
            return Ok(AxiomGraph::ROOT);
        }
        if let Some(id) = self.handles.get(text) {
            return Ok(*id);
        }
        if text.starts_with('?') {
            if let Some(id) = self.graph.variable_by_name(text) {
                return Ok(id);
            }
        }
        if let Some(n) = text.strip_prefix('n').and_then(|d| d.parse::<u32>().ok()) {
            return Ok(NodeId(n));
        }
        Err(self.syntax(format!("unknown element `{text}`")))
    }

    /// `start`, `h.attr`, `h[k]` or an operator handle.
    fn port(&self, text: &str) -> Result<Port, ScriptError> {
        if text == "start" {
            return Ok(Port::Root);
        }
        if let Some((h, rest)) = text.split_once('[') {
            let k = rest
                .strip_suffix(']')
                .and_then(|k| k.parse::<usize>().ok())
                .ok_or_else(|| self.syntax(format!("bad parameter reference `{text}`")))?;
            return Ok(Port::Param {
                node: self.handle(h)?,
                index: k,
            });
        }
        if let Some((h, attr)) = text.split_once('.') {
            let node = self.handle(h)?;
            let index = self
                .graph
                .variable(node)
                .and_then(|v| v.slots.iter().position(|s| s.attribute == attr))
                .ok_or_else(|| self.syntax(format!("`{h}` has no attribute `{attr}`")))?;
            return Ok(Port::Slot { node, index });
        }
        Ok(Port::Operator {
            node: self.handle(text)?,
        })
    }

    /// `cN`, `a>b`, or a bound slot or parameter port.
    fn connection(&self, text: &str) -> Result<ConnId, ScriptError> {
        if let Some(n) = text.strip_prefix('c').and_then(|d| d.parse::<u32>().ok()) {
            return Ok(ConnId(n));
        }
        if let Some((a, b)) = text.split_once('>') {
            let (from, to) = (self.handle(a)?, self.handle(b)?);
            return self
                .graph
                .connections()
                .find(|c| c.source.owner() == from && c.target == to)
                .map(|c| c.id)
                .ok_or_else(|| self.syntax(format!("no connection from `{a}` to `{b}`")));
        }
        let port = self.port(text)?;
        self.graph
            .port_binding(port)
            .ok_or_else(|| self.syntax(format!("`{text}` is not bound")))
    }

    fn binding(&mut self, w: &mut Words) -> Result<BindingSpec, ScriptError> {
        let head = self.word(w, "a binding")?;
        Ok(match head.as_str() {
            "default" => BindingSpec::DefaultConcept,
            "sub" => BindingSpec::Subconcept {
                concept: self.element(&self.word(w, "a concept")?, Kind::Concept)?,
            },
            "inst" => BindingSpec::Instance {
                instance: self.element(&self.word(w, "an instance")?, Kind::Instance)?,
            },
            "lit" => {
                let datatype = self.builtin(&self.word(w, "a datatype")?)?;
                let value = self.word(w, "a value")?;
                BindingSpec::Literal { datatype, value }
            }
            "rel" => {
                let spec = self.word(w, "<relation>:<k>")?;
                let (name, k) = spec
                    .rsplit_once(':')
                    .and_then(|(n, k)| Some((n, k.parse::<usize>().ok()?)))
                    .ok_or_else(|| self.syntax(format!("expected <relation>:<k>, found `{spec}`")))?;
                BindingSpec::Relation {
                    relation: self.element(name, Kind::Relation)?,
                    param: k,
                }
            }
            "use" => BindingSpec::ExistingVariable {
                node: self.handle(&self.word(w, "a variable")?)?,
            },
            "shared" => BindingSpec::SharedVariable {
                node: self.handle(&self.word(w, "a variable")?)?,
            },
            "node" => BindingSpec::Node {
                node: self.handle(&self.word(w, "an element")?)?,
            },
            "AND" | "OR" | "NOT" => {
                let operator = self.operator(&head)?;
                if w.next().map(|t| t.text) != Some("(".into()) {
                    return Err(self.syntax(format!("expected `(` after {head}")));
                }
                let mut operands = vec![self.binding(w)?];
                loop {
                    match w.next().map(|t| t.text) {
                        Some(t) if t == "," => operands.push(self.binding(w)?),
                        Some(t) if t == ")" => break,
                        _ => return Err(self.syntax("expected `,` or `)`")),
                    }
                }
                BindingSpec::Operator { operator, operands }
            }
            other => match self.handle(other) {
                Ok(node) => BindingSpec::Node { node },
                Err(_) => return Err(self.syntax(format!("unknown binding `{other}`"))),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexer_keeps_coordinates_and_strings_whole() {
        let toks = lex(r#"lit x _string "a b, c" @10,-20 // note"#).unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["lit", "x", "_string", "a b, c", "@10,-20"]);
        assert!(toks[3].quoted);
    }

    #[test]
    fn lexer_splits_operator_bindings() {
        let toks = lex("refine p.a OR(default,inst X)").unwrap();
        let texts: Vec<&str> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(texts, ["refine", "p.a", "OR", "(", "default", ",", "inst", "X", ")"]);
    }

    #[test]
    fn empty_script_is_an_empty_axiom() {
        let mut store = OntologyStore::new("/nonexistent");
        let err = run_script(&mut store, "// nothing\n\n", false).unwrap_err();
        assert_eq!(err.to_string(), "empty axiom");
    }

    #[test]
    fn unknown_command_reports_its_line() {
        let mut store = OntologyStore::new("/nonexistent");
        let err = execute_script(&mut store, "\nfrobnicate x").unwrap_err();
        assert_eq!(err.to_string(), "line 2: unknown command `frobnicate`");
    }
}
