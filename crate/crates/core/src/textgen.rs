//! Maps the part of an axiom graph reachable from `Start` to WSML
//! logical-expression text.
//!
//! A variable contributes `?v memberOf C` on its first visit followed by one
//! `?v[p hasValue t]` molecule per bound slot, in connection order. An
//! operator under a slot distributes the molecule over its operands. A
//! relation contributes an atom; a relation bound into a slot shares a
//! parameter variable with the slot's molecule. Free slots contribute
//! nothing; free relation parameters get fresh `?<relation>P<k>` variables.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::model::{AxiomGraph, InstanceValue, NodeId, NodeKind, OperatorKind, Port, Violation};
use crate::ontology::{escape_string, Builtin};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneratedExpression {
    pub text: String,
    /// Byte offset and length of each emitted element's first occurrence.
    pub element_spans: BTreeMap<NodeId, (usize, usize)>,
    /// Variables invented for free relation parameters.
    pub parameter_variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("the axiom is not complete: {}", list(.0))]
pub struct Incomplete(pub Vec<Violation>);

fn list(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Generates the axiom text. `pretty` puts the expression on its own
/// indented line; the flat form is canonical.
pub fn generate(graph: &AxiomGraph, pretty: bool) -> Result<GeneratedExpression, Incomplete> {
    let violations = graph.validate_complete();
    if !violations.is_empty() {
        return Err(Incomplete(violations));
    }
    let mut gen = Gen {
        g: graph,
        visited: HashSet::new(),
        taken: graph.variable_names().into_iter().map(str::to_string).collect(),
        params: Vec::new(),
        extras: Vec::new(),
    };
    let items: Vec<Expr> = graph
        .outgoing(AxiomGraph::ROOT)
        .iter()
        .filter_map(|c| gen.top_level(c.target))
        .collect();
    let expr = and_of(items);

    let mut out = Renderer {
        text: if pretty { "definedBy\n  " } else { "definedBy " }.to_string(),
        spans: BTreeMap::new(),
    };
    out.render(&expr);
    Ok(GeneratedExpression {
        text: out.text,
        element_spans: out.spans,
        parameter_variables: gen.params,
    })
}

#[derive(Debug, Clone)]
struct Piece {
    text: String,
    node: Option<NodeId>,
}

impl Piece {
    fn plain(text: impl Into<String>) -> Self {
        Piece {
            text: text.into(),
            node: None,
        }
    }

    fn of(node: NodeId, text: impl Into<String>) -> Self {
        Piece {
            text: text.into(),
            node: Some(node),
        }
    }
}

#[derive(Debug, Clone)]
enum Expr {
    Leaf(Vec<Piece>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Neg(Box<Expr>),
    Group(Box<Expr>),
    /// Records the span of the wrapped expression for a node.
    Tag(NodeId, Box<Expr>),
}

impl Expr {
    fn untagged(&self) -> &Expr {
        match self {
            Expr::Tag(_, inner) => inner.untagged(),
            other => other,
        }
    }
}

fn and_of(mut items: Vec<Expr>) -> Expr {
    if items.len() == 1 {
        items.pop().expect("one item")
    } else {
        Expr::And(items)
    }
}

/// What a slot or parameter value turns into: a single argument, or an
/// operator over alternative arguments.
#[derive(Debug, Clone)]
enum Form {
    Leaf {
        arg: Piece,
        /// Index into the arena of conjuncts that accompany the argument.
        extras: usize,
    },
    Op {
        node: NodeId,
        kind: OperatorKind,
        branches: Vec<Form>,
    },
}

struct Gen<'g> {
    g: &'g AxiomGraph,
    visited: HashSet<NodeId>,
    taken: BTreeSet<String>,
    params: Vec<String>,
    /// Conjuncts owed by leaf forms; each set is emitted once.
    extras: Vec<Vec<Expr>>,
}

impl Gen<'_> {
    fn top_level(&mut self, node: NodeId) -> Option<Expr> {
        match &self.g.node(node)?.kind {
            NodeKind::Variable(_) => {
                if self.visited.contains(&node) {
                    None
                } else {
                    Some(and_of(self.variable(node)))
                }
            }
            NodeKind::Relation(_) => Some(and_of(self.relation(node, None))),
            NodeKind::Operator(kind) => {
                let kind = *kind;
                let parts: Vec<Expr> = self
                    .g
                    .operands(node)
                    .into_iter()
                    .filter_map(|o| self.top_level(o))
                    .collect();
                if parts.is_empty() {
                    return None;
                }
                Some(Expr::Tag(node, Box::new(combine(kind, parts))))
            }
            NodeKind::Root | NodeKind::Instance(_) => None,
        }
    }

    /// `?v memberOf C` and the molecules for every bound slot.
    fn variable(&mut self, node: NodeId) -> Vec<Expr> {
        self.visited.insert(node);
        let Some(v) = self.g.variable(node) else {
            return Vec::new();
        };
        let name = v.name.clone();
        let mut out = vec![Expr::Leaf(vec![
            Piece::of(node, name.clone()),
            Piece::plain(format!(" memberOf {}", v.concept.id)),
        ])];
        let mut bound: Vec<_> = self
            .g
            .outgoing(node)
            .into_iter()
            .filter_map(|c| match c.source {
                Port::Slot { index, .. } => Some((c.id, index, c.target)),
                _ => None,
            })
            .collect();
        bound.sort();
        for (_, index, target) in bound {
            let attribute = v.slots[index].attribute.clone();
            let form = self.value_form(target);
            let var = name.clone();
            let make = move |args: &[Piece]| {
                Expr::Leaf(vec![
                    Piece::plain(format!("{var}[{attribute} hasValue ")),
                    args[0].clone(),
                    Piece::plain("]"),
                ])
            };
            out.extend(self.expand(&make, vec![form]));
        }
        out
    }

    /// The atom for a relation node plus whatever its bound parameters owe.
    fn relation(&mut self, node: NodeId, anchor_arg: Option<Piece>) -> Vec<Expr> {
        self.visited.insert(node);
        let Some(rel) = self.g.node(node).and_then(|n| n.as_relation()) else {
            return Vec::new();
        };
        let id = rel.relation.id.clone();
        let mut forms = Vec::with_capacity(rel.params.len());
        for (k, param) in rel.params.iter().enumerate() {
            let form = if rel.anchor == Some(k) {
                let arg = anchor_arg.clone().unwrap_or_else(|| Piece::plain(self.fresh(&id, k)));
                self.leaf(arg, Vec::new())
            } else {
                match param.binding.and_then(|c| self.g.connection(c)) {
                    Some(conn) => {
                        let target = conn.target;
                        self.value_form(target)
                    }
                    None => {
                        let name = self.fresh(&id, k);
                        self.leaf(Piece::plain(name), Vec::new())
                    }
                }
            };
            forms.push(form);
        }
        let make = move |args: &[Piece]| {
            let mut pieces = vec![Piece::of(node, id.clone()), Piece::plain("(")];
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    pieces.push(Piece::plain(", "));
                }
                pieces.push(a.clone());
            }
            pieces.push(Piece::plain(")"));
            Expr::Leaf(pieces)
        };
        self.expand(&make, forms)
    }

    fn leaf(&mut self, arg: Piece, extras: Vec<Expr>) -> Form {
        self.extras.push(extras);
        Form::Leaf {
            arg,
            extras: self.extras.len() - 1,
        }
    }

    fn value_form(&mut self, target: NodeId) -> Form {
        let Some(node) = self.g.node(target) else {
            return self.leaf(Piece::plain("?missing"), Vec::new());
        };
        match &node.kind {
            NodeKind::Variable(v) => {
                let arg = Piece::of(target, v.name.clone());
                let extras = if self.visited.contains(&target) {
                    Vec::new()
                } else {
                    self.variable(target)
                };
                self.leaf(arg, extras)
            }
            NodeKind::Instance(InstanceValue::Ontology(key)) => {
                let arg = Piece::of(target, key.id.clone());
                self.leaf(arg, Vec::new())
            }
            NodeKind::Instance(InstanceValue::Literal { datatype, value }) => {
                let arg = Piece::of(target, literal_text(*datatype, value));
                self.leaf(arg, Vec::new())
            }
            NodeKind::Relation(r) => {
                let k = r.anchor.unwrap_or(0);
                let name = self.fresh(&r.relation.id, k);
                let extras = self.relation(target, Some(Piece::plain(name.clone())));
                self.leaf(Piece::plain(name), extras)
            }
            NodeKind::Operator(kind) => {
                let kind = *kind;
                let branches = self
                    .g
                    .operands(target)
                    .into_iter()
                    .map(|o| self.value_form(o))
                    .collect();
                Form::Op {
                    node: target,
                    kind,
                    branches,
                }
            }
            NodeKind::Root => self.leaf(Piece::plain("?start"), Vec::new()),
        }
    }

    /// Instantiates a molecule or atom template over its argument forms.
    /// Conjuncts owed by plain arguments follow the result; those owed by
    /// operator operands stay inside their branch.
    fn expand(&mut self, make: &dyn Fn(&[Piece]) -> Expr, forms: Vec<Form>) -> Vec<Expr> {
        let mut outside = Vec::new();
        for form in &forms {
            if let Form::Leaf { extras, .. } = form {
                outside.extend(std::mem::take(&mut self.extras[*extras]));
            }
        }
        let mut out = self.distribute(make, forms);
        out.extend(outside);
        out
    }

    fn distribute(&mut self, make: &dyn Fn(&[Piece]) -> Expr, forms: Vec<Form>) -> Vec<Expr> {
        let Some(i) = forms.iter().position(|f| matches!(f, Form::Op { .. })) else {
            let args: Vec<Piece> = forms
                .iter()
                .map(|f| match f {
                    Form::Leaf { arg, .. } => arg.clone(),
                    Form::Op { .. } => unreachable!("no operator forms left"),
                })
                .collect();
            let mut out = vec![make(&args)];
            for form in &forms {
                if let Form::Leaf { extras, .. } = form {
                    out.extend(std::mem::take(&mut self.extras[*extras]));
                }
            }
            return out;
        };
        let Form::Op {
            node,
            kind,
            branches,
        } = forms[i].clone()
        else {
            unreachable!("position matched an operator form")
        };
        let parts: Vec<Expr> = branches
            .into_iter()
            .map(|b| {
                let mut fs = forms.clone();
                fs[i] = b;
                and_of(self.distribute(make, fs))
            })
            .collect();
        vec![Expr::Tag(node, Box::new(combine(kind, parts)))]
    }

    fn fresh(&mut self, relation: &str, k: usize) -> String {
        let base = format!("?{relation}P{}", k + 1);
        let name = if self.taken.contains(&base) {
            (2..)
                .map(|i| format!("{base}_{i}"))
                .find(|c| !self.taken.contains(c))
                .expect("unbounded suffix search")
        } else {
            base
        };
        self.taken.insert(name.clone());
        self.params.push(name.clone());
        name
    }
}

fn combine(kind: OperatorKind, mut parts: Vec<Expr>) -> Expr {
    match kind {
        OperatorKind::Or => Expr::Group(Box::new(Expr::Or(parts))),
        OperatorKind::And => Expr::Group(Box::new(Expr::And(parts))),
        OperatorKind::Not => Expr::Neg(Box::new(parts.remove(0))),
    }
}

/// Strings and dates are quoted; the expression grammar has no date token.
pub fn literal_text(datatype: Builtin, value: &str) -> String {
    match datatype {
        Builtin::String | Builtin::Date => format!("\"{}\"", escape_string(value)),
        Builtin::Integer | Builtin::Decimal | Builtin::Boolean => value.to_string(),
    }
}

struct Renderer {
    text: String,
    spans: BTreeMap<NodeId, (usize, usize)>,
}

impl Renderer {
    fn render(&mut self, e: &Expr) {
        match e {
            Expr::Leaf(pieces) => {
                for p in pieces {
                    let start = self.text.len();
                    self.text.push_str(&p.text);
                    if let Some(n) = p.node {
                        self.spans.entry(n).or_insert((start, p.text.len()));
                    }
                }
            }
            Expr::And(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.text.push_str(" and ");
                    }
                    self.render_wrapped(item, matches!(item.untagged(), Expr::Or(_)));
                }
            }
            Expr::Or(items) => {
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        self.text.push_str(" or ");
                    }
                    self.render(item);
                }
            }
            Expr::Neg(inner) => {
                self.text.push_str("neg ");
                let compound = matches!(inner.untagged(), Expr::And(_) | Expr::Or(_));
                self.render_wrapped(inner, compound);
            }
            Expr::Group(inner) => self.render_wrapped(inner, true),
            Expr::Tag(node, inner) => {
                let start = self.text.len();
                self.render(inner);
                let len = self.text.len() - start;
                self.spans.entry(*node).or_insert((start, len));
            }
        }
    }

    fn render_wrapped(&mut self, e: &Expr, parens: bool) {
        if parens {
            self.text.push('(');
            self.render(e);
            self.text.push(')');
        } else {
            self.render(e);
        }
    }
}

/// One entry of the outline: the expression structure as a tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutlineEntry {
    pub node: NodeId,
    pub label: String,
    /// The attribute or parameter this entry refines, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    /// Already shown elsewhere in the outline; not expanded again.
    pub repeated: bool,
    pub children: Vec<OutlineEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Outline {
    pub root: OutlineEntry,
    /// Elements nothing points at, excluded from the text.
    pub detached: Vec<OutlineEntry>,
}

pub fn outline(graph: &AxiomGraph) -> Outline {
    let mut seen = HashSet::new();
    let root = outline_entry(graph, AxiomGraph::ROOT, None, &mut seen);
    let detached = graph
        .nodes()
        .filter(|n| n.id != AxiomGraph::ROOT && graph.incoming(n.id).is_empty())
        .map(|n| n.id)
        .collect::<Vec<_>>()
        .into_iter()
        .map(|id| outline_entry(graph, id, None, &mut seen))
        .collect();
    Outline { root, detached }
}

pub fn node_label(graph: &AxiomGraph, node: NodeId) -> String {
    match graph.node(node).map(|n| &n.kind) {
        Some(NodeKind::Root) => "Start".into(),
        Some(NodeKind::Variable(v)) => format!("{} memberOf {}", v.name, v.concept.id),
        Some(NodeKind::Relation(r)) => r.relation.id.clone(),
        Some(NodeKind::Operator(k)) => k.to_string(),
        Some(NodeKind::Instance(InstanceValue::Ontology(key))) => key.id.clone(),
        Some(NodeKind::Instance(InstanceValue::Literal { datatype, value })) => {
            format!("{} ({datatype})", literal_text(*datatype, value))
        }
        None => node.to_string(),
    }
}

fn outline_entry(
    graph: &AxiomGraph,
    node: NodeId,
    via: Option<String>,
    seen: &mut HashSet<NodeId>,
) -> OutlineEntry {
    let label = node_label(graph, node);
    if !seen.insert(node) {
        return OutlineEntry {
            node,
            label,
            via,
            repeated: true,
            children: Vec::new(),
        };
    }
    let children = graph
        .outgoing(node)
        .into_iter()
        .map(|c| {
            let via = match c.source {
                Port::Slot { node, index } => graph
                    .variable(node)
                    .and_then(|v| v.slots.get(index))
                    .map(|s| s.attribute.clone()),
                Port::Param { index, .. } => Some(format!("parameter {}", index + 1)),
                Port::Root | Port::Operator { .. } => None,
            };
            (c.target, via)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(target, via)| outline_entry(graph, target, via, seen))
        .collect();
    OutlineEntry {
        node,
        label,
        via,
        repeated: false,
        children,
    }
}
