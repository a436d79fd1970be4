//! Context-sensitive menus. The menu for a selection is assembled from store
//! queries (sub-concepts, assignable instances, compatible relation
//! parameters) and a reachability-based link predicate of its own; it does
//! not call into the engine.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{
    AxiomGraph, ConnId, Connection, Coords, InstanceValue, NodeId, NodeKind, OperatorKind, Port,
};
use crate::ontology::{Builtin, ValueType};
use crate::store::{literal_conforms, OntologyStore};

use super::{port_context, BindingSpec, Context, EditCommand, Endpoint, InstanceSpec, Mode};

/// What the user right-clicked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "on", rename_all = "camelCase")]
pub enum Selection {
    /// Empty modelling area.
    Canvas,
    Node { node: NodeId },
    Connection { connection: ConnId },
    Port { port: Port },
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::Canvas => f.write_str("canvas"),
            Selection::Node { node } => write!(f, "node:{}", node.0),
            Selection::Connection { connection } => write!(f, "conn:{}", connection.0),
            Selection::Port { port } => match port {
                Port::Root => f.write_str("port:root"),
                Port::Slot { node, index } => write!(f, "port:slot:{}:{index}", node.0),
                Port::Param { node, index } => write!(f, "port:param:{}:{index}", node.0),
                Port::Operator { node } => write!(f, "port:op:{}", node.0),
            },
        }
    }
}

impl FromStr for Selection {
    type Err = String;

    /// `canvas`, `node:N`, `conn:N`, `port:root`, `port:slot:N:I`,
    /// `port:param:N:I` or `port:op:N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.parse::<u32>().map_err(|_| format!("bad number `{t}` in selection"));
        let idx = |t: &str| t.parse::<usize>().map_err(|_| format!("bad index `{t}` in selection"));
        match parts.as_slice() {
            ["canvas"] => Ok(Selection::Canvas),
            ["node", n] => Ok(Selection::Node { node: NodeId(num(n)?) }),
            ["conn", c] => Ok(Selection::Connection {
                connection: ConnId(num(c)?),
            }),
            ["port", "root"] => Ok(Selection::Port { port: Port::Root }),
            ["port", "slot", n, i] => Ok(Selection::Port {
                port: Port::Slot {
                    node: NodeId(num(n)?),
                    index: idx(i)?,
                },
            }),
            ["port", "param", n, i] => Ok(Selection::Port {
                port: Port::Param {
                    node: NodeId(num(n)?),
                    index: idx(i)?,
                },
            }),
            ["port", "op", n] => Ok(Selection::Port {
                port: Port::Operator { node: NodeId(num(n)?) },
            }),
            _ => Err(format!("unrecognized selection `{s}`")),
        }
    }
}

/// Every command that would commit for `selection`, restricted to the
/// enumerable command space: operator bindings, arbitrary new names and
/// moves are never listed.
pub fn list_allowed_operations(
    graph: &AxiomGraph,
    store: &OntologyStore,
    mode: Mode,
    selection: Selection,
) -> Vec<EditCommand> {
    let advanced = mode == Mode::Advanced;
    let mut out = Vec::new();
    match selection {
        Selection::Canvas => {
            if advanced || graph.outgoing(AxiomGraph::ROOT).is_empty() {
                for concept in store.concepts() {
                    for shared in [false, true] {
                        out.push(EditCommand::CreateVariable {
                            concept: concept.clone(),
                            shared,
                            at: None,
                        });
                    }
                }
            }
            if advanced {
                for operator in OperatorKind::ALL {
                    out.push(EditCommand::CreateOperator { operator, at: None });
                }
                for instance in store.instances() {
                    out.push(EditCommand::CreateInstance {
                        instance: InstanceSpec::Ontology { instance },
                        at: None,
                    });
                }
                for datatype in Builtin::ALL {
                    for value in conforming_samples(datatype) {
                        out.push(EditCommand::CreateInstance {
                            instance: InstanceSpec::Literal { datatype, value },
                            at: None,
                        });
                    }
                }
                for relation in store.relations() {
                    out.push(EditCommand::CreateRelation { relation, at: None });
                }
            }
        }
        Selection::Node { node } => {
            let Some(n) = graph.node(node) else {
                return out;
            };
            if node != AxiomGraph::ROOT {
                out.push(EditCommand::Delete { node });
            }
            match &n.kind {
                NodeKind::Variable(v) => {
                    out.push(EditCommand::Rename {
                        node,
                        name: v.name.clone(),
                    });
                    for rel in graph.nodes().filter(|r| r.as_relation().is_some()) {
                        let arity = rel.as_relation().map_or(0, |r| r.params.len());
                        for param in 0..arity {
                            let port = Port::Param {
                                node: rel.id,
                                index: param,
                            };
                            if target_ok(graph, store, port, node) {
                                out.push(EditCommand::Involve {
                                    variable: node,
                                    relation: rel.id,
                                    param,
                                });
                            }
                        }
                    }
                }
                NodeKind::Operator(_) => {
                    let operands = graph.operands(node).len();
                    for operator in OperatorKind::ALL {
                        if operator != OperatorKind::Not || operands <= 1 {
                            out.push(EditCommand::SetOperator { node, operator });
                        }
                    }
                    let port = Port::Operator { node };
                    for operand in binding_candidates(graph, store, port) {
                        out.push(EditCommand::AddOperand {
                            node,
                            operand,
                            at: None,
                        });
                    }
                }
                NodeKind::Instance(InstanceValue::Literal { datatype, value }) => {
                    let mut values: BTreeSet<String> = conforming_samples(*datatype).collect();
                    values.insert(value.clone());
                    for value in values {
                        out.push(EditCommand::SetValue { node, value });
                    }
                }
                _ => {}
            }
        }
        Selection::Port { port } => {
            match port {
                Port::Slot { node, index } => {
                    for binding in binding_candidates(graph, store, port) {
                        out.push(EditCommand::RefineAttribute {
                            node,
                            slot: index,
                            binding,
                            at: None,
                        });
                    }
                }
                Port::Param { node, index } => {
                    for binding in binding_candidates(graph, store, port) {
                        out.push(EditCommand::RefineParameter {
                            node,
                            param: index,
                            binding,
                            at: None,
                        });
                    }
                }
                Port::Root | Port::Operator { .. } => {}
            }
            if advanced {
                for target in graph.nodes().map(|n| n.id) {
                    if target_ok(graph, store, port, target) {
                        out.push(EditCommand::Connect {
                            source: port,
                            target,
                        });
                    }
                }
            }
        }
        Selection::Connection { connection } => {
            let Some(conn) = graph.connection(connection).cloned() else {
                return out;
            };
            insert_candidates(graph, store, &conn, &mut out);
            if advanced {
                let mut detached = graph.clone();
                detached.remove_connection(connection);
                for port in graph.ports() {
                    if port != conn.source && target_ok(&detached, store, port, conn.target) {
                        out.push(EditCommand::Reconnect {
                            connection,
                            endpoint: Endpoint::Source { port },
                        });
                    }
                }
                for node in graph.nodes().map(|n| n.id) {
                    if node != conn.target && target_ok(&detached, store, conn.source, node) {
                        out.push(EditCommand::Reconnect {
                            connection,
                            endpoint: Endpoint::Target { node },
                        });
                    }
                }
                // Moving an endpoint onto itself is a no-op that commits.
                if target_ok(&detached, store, conn.source, conn.target) {
                    out.push(EditCommand::Reconnect {
                        connection,
                        endpoint: Endpoint::Source { port: conn.source },
                    });
                    out.push(EditCommand::Reconnect {
                        connection,
                        endpoint: Endpoint::Target { node: conn.target },
                    });
                }
            }
        }
    }
    out
}

fn insert_candidates(
    graph: &AxiomGraph,
    store: &OntologyStore,
    conn: &Connection,
    out: &mut Vec<EditCommand>,
) {
    // The graph as it looks once the operator sits in the connection.
    let mut split = graph.clone();
    split.remove_connection(conn.id);
    let op = split.add_node(NodeKind::Operator(OperatorKind::Or), Coords::default());
    split.add_connection(conn.source, op);
    let op_port = Port::Operator { node: op };
    if !target_ok(&split, store, op_port, conn.target) {
        return;
    }
    if conn.source != Port::Root {
        out.push(EditCommand::Insert {
            connection: conn.id,
            operator: OperatorKind::Not,
            second: None,
            at: None,
        });
    }
    split.add_connection(op_port, conn.target);
    for second in binding_candidates(&split, store, op_port) {
        if matches!(&second, BindingSpec::Node { node } | BindingSpec::ExistingVariable { node } | BindingSpec::SharedVariable { node } if *node == op)
        {
            continue;
        }
        for operator in [OperatorKind::And, OperatorKind::Or] {
            out.push(EditCommand::Insert {
                connection: conn.id,
                operator,
                second: Some(second.clone()),
                at: None,
            });
        }
    }
}

fn conforming_samples(datatype: Builtin) -> impl Iterator<Item = String> {
    Builtin::ALL
        .into_iter()
        .map(Builtin::sample_value)
        .filter(move |v| literal_conforms(v, datatype))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(str::to_string)
}

/// Bindings a free port accepts, excluding operator bindings.
fn binding_candidates(graph: &AxiomGraph, store: &OntologyStore, port: Port) -> Vec<BindingSpec> {
    let mut out = Vec::new();
    if !port_free(graph, port) {
        return out;
    }
    let Some(ctx) = port_context(graph, store, port) else {
        return out;
    };
    match &ctx {
        Context::Typed(t) => {
            if let ValueType::Concept(c) = t {
                out.push(BindingSpec::DefaultConcept);
                out.extend(
                    store
                        .subconcepts_of(c)
                        .into_iter()
                        .map(|concept| BindingSpec::Subconcept { concept }),
                );
            }
            out.extend(
                store
                    .instances_assignable_to(t)
                    .into_iter()
                    .map(|instance| BindingSpec::Instance { instance }),
            );
            if let ValueType::Builtin(b) = t {
                out.extend(conforming_samples(*b).map(|value| BindingSpec::Literal {
                    datatype: *b,
                    value,
                }));
            }
            out.extend(
                store
                    .relations_with_compatible_param(t)
                    .into_iter()
                    .map(|(relation, param)| BindingSpec::Relation { relation, param }),
            );
        }
        Context::Root => {
            out.extend(
                store
                    .concepts()
                    .into_iter()
                    .map(|concept| BindingSpec::Subconcept { concept }),
            );
        }
        Context::Open => {
            out.extend(
                store
                    .concepts()
                    .into_iter()
                    .map(|concept| BindingSpec::Subconcept { concept }),
            );
            out.extend(
                store
                    .instances()
                    .into_iter()
                    .map(|instance| BindingSpec::Instance { instance }),
            );
            for datatype in Builtin::ALL {
                out.extend(
                    conforming_samples(datatype).map(|value| BindingSpec::Literal { datatype, value }),
                );
            }
            for relation in store.relations() {
                let arity = store.relation(&relation).map_or(0, |r| r.parameters.len());
                out.extend((0..arity).map(|param| BindingSpec::Relation {
                    relation: relation.clone(),
                    param,
                }));
            }
        }
    }
    for n in graph.nodes() {
        if !target_ok(graph, store, port, n.id) {
            continue;
        }
        if let Some(v) = n.as_variable() {
            out.push(BindingSpec::ExistingVariable { node: n.id });
            if v.shared {
                out.push(BindingSpec::SharedVariable { node: n.id });
            }
        }
        out.push(BindingSpec::Node { node: n.id });
    }
    out
}

fn port_free(graph: &AxiomGraph, port: Port) -> bool {
    match port {
        Port::Root => true,
        Port::Slot { node, index } => graph
            .variable(node)
            .and_then(|v| v.slots.get(index))
            .is_some_and(|s| s.binding.is_none()),
        Port::Param { node, index } => graph
            .node(node)
            .and_then(|n| n.as_relation())
            .is_some_and(|r| {
                r.anchor != Some(index) && r.params.get(index).is_some_and(|p| p.binding.is_none())
            }),
        Port::Operator { node } => match graph.node(node).and_then(|n| n.as_operator()) {
            Some(OperatorKind::Not) => graph.operands(node).is_empty(),
            Some(_) => true,
            None => false,
        },
    }
}

/// Whether an existing node may be connected to `port`.
fn target_ok(graph: &AxiomGraph, store: &OntologyStore, port: Port, target: NodeId) -> bool {
    if !port_free(graph, port) {
        return false;
    }
    let Some(node) = graph.node(target) else {
        return false;
    };
    let in_degree = graph.incoming(target).len();
    let top_level_operand = matches!(port, Port::Operator { .. })
        && port_context(graph, store, port) == Some(Context::Root);
    match &node.kind {
        NodeKind::Root => return false,
        NodeKind::Operator(_) | NodeKind::Relation(_) if in_degree > 0 => return false,
        NodeKind::Variable(_) => {
            if top_level_operand && in_degree > 0 {
                return false;
            }
            let held_by_top_level_operator = graph.incoming(target).iter().any(|c| {
                matches!(c.source, Port::Operator { .. })
                    && port_context(graph, store, c.source) == Some(Context::Root)
            });
            if held_by_top_level_operator {
                return false;
            }
        }
        _ => {}
    }
    let Some(ctx) = port_context(graph, store, port) else {
        return false;
    };
    if !fits(graph, store, &ctx, target) {
        return false;
    }
    !descendants(graph, target).contains(&port.owner())
}

fn fits(graph: &AxiomGraph, store: &OntologyStore, ctx: &Context, target: NodeId) -> bool {
    let Some(node) = graph.node(target) else {
        return false;
    };
    let concept_fits = |c: &crate::ontology::ConceptRef, t: &ValueType| match t {
        ValueType::Concept(required) => store.is_subconcept_of(c, required),
        _ => false,
    };
    match (&node.kind, ctx) {
        (NodeKind::Root, _) => false,
        (NodeKind::Variable(_), Context::Root | Context::Open) => true,
        (NodeKind::Variable(v), Context::Typed(t)) => concept_fits(&v.concept, t),
        (NodeKind::Instance(_), Context::Root) => false,
        (NodeKind::Instance(_), Context::Open) => true,
        (NodeKind::Instance(InstanceValue::Ontology(key)), Context::Typed(t)) => store
            .instance_type(key)
            .is_some_and(|c| concept_fits(&c, t)),
        (NodeKind::Instance(InstanceValue::Literal { datatype, .. }), Context::Typed(t)) => {
            *t == ValueType::Builtin(*datatype)
        }
        (NodeKind::Relation(r), Context::Root) => r.anchor.is_none(),
        (NodeKind::Relation(_), Context::Open) => true,
        (NodeKind::Relation(r), Context::Typed(t)) => {
            let Some(k) = r.anchor else {
                return false;
            };
            store
                .relations_with_compatible_param(t)
                .contains(&(r.relation.clone(), k))
        }
        (NodeKind::Operator(_), _) => graph.operands(target).into_iter().all(|o| {
            let sole_parent = graph.variable(o).is_none() || graph.incoming(o).len() == 1;
            (*ctx != Context::Root || sole_parent) && fits(graph, store, ctx, o)
        }),
    }
}

fn descendants(graph: &AxiomGraph, start: NodeId) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        if seen.insert(n) {
            stack.extend(graph.outgoing(n).iter().map(|c| c.target));
        }
    }
    seen
}

/// The finite command space a selection's menu is drawn from. Every
/// command the menu lists is in here; the rest must be rejected.
pub fn candidate_universe(
    graph: &AxiomGraph,
    store: &OntologyStore,
    selection: Selection,
) -> Vec<EditCommand> {
    let bindings = binding_universe(graph, store);
    let mut out = Vec::new();
    match selection {
        Selection::Canvas => {
            for concept in store.concepts() {
                for shared in [false, true] {
                    out.push(EditCommand::CreateVariable {
                        concept: concept.clone(),
                        shared,
                        at: None,
                    });
                }
            }
            for operator in OperatorKind::ALL {
                out.push(EditCommand::CreateOperator { operator, at: None });
            }
            for instance in store.instances() {
                out.push(EditCommand::CreateInstance {
                    instance: InstanceSpec::Ontology { instance },
                    at: None,
                });
            }
            for datatype in Builtin::ALL {
                for value in all_samples() {
                    out.push(EditCommand::CreateInstance {
                        instance: InstanceSpec::Literal { datatype, value },
                        at: None,
                    });
                }
            }
            for relation in store.relations() {
                out.push(EditCommand::CreateRelation { relation, at: None });
            }
        }
        Selection::Node { node } => {
            out.push(EditCommand::Delete { node });
            let Some(n) = graph.node(node) else {
                return out;
            };
            match &n.kind {
                NodeKind::Variable(_) => {
                    for other in graph.nodes() {
                        if let Some(v) = other.as_variable() {
                            out.push(EditCommand::Rename {
                                node,
                                name: v.name.clone(),
                            });
                        }
                    }
                    for rel in graph.nodes() {
                        if let Some(r) = rel.as_relation() {
                            for param in 0..r.params.len() {
                                out.push(EditCommand::Involve {
                                    variable: node,
                                    relation: rel.id,
                                    param,
                                });
                            }
                        }
                    }
                }
                NodeKind::Operator(_) => {
                    for operator in OperatorKind::ALL {
                        out.push(EditCommand::SetOperator { node, operator });
                    }
                    for operand in &bindings {
                        out.push(EditCommand::AddOperand {
                            node,
                            operand: operand.clone(),
                            at: None,
                        });
                    }
                }
                NodeKind::Instance(inst) => {
                    let mut values: BTreeSet<String> = all_samples().collect();
                    if let InstanceValue::Literal { value, .. } = inst {
                        values.insert(value.clone());
                    }
                    for value in values {
                        out.push(EditCommand::SetValue { node, value });
                    }
                }
                _ => {}
            }
        }
        Selection::Port { port } => {
            match port {
                Port::Slot { node, index } => {
                    for binding in &bindings {
                        out.push(EditCommand::RefineAttribute {
                            node,
                            slot: index,
                            binding: binding.clone(),
                            at: None,
                        });
                    }
                }
                Port::Param { node, index } => {
                    for binding in &bindings {
                        out.push(EditCommand::RefineParameter {
                            node,
                            param: index,
                            binding: binding.clone(),
                            at: None,
                        });
                    }
                }
                _ => {}
            }
            for target in graph.nodes() {
                out.push(EditCommand::Connect {
                    source: port,
                    target: target.id,
                });
            }
        }
        Selection::Connection { connection } => {
            out.push(EditCommand::Insert {
                connection,
                operator: OperatorKind::Not,
                second: Some(BindingSpec::DefaultConcept),
                at: None,
            });
            for operator in OperatorKind::ALL {
                out.push(EditCommand::Insert {
                    connection,
                    operator,
                    second: None,
                    at: None,
                });
            }
            for operator in [OperatorKind::And, OperatorKind::Or] {
                for second in &bindings {
                    out.push(EditCommand::Insert {
                        connection,
                        operator,
                        second: Some(second.clone()),
                        at: None,
                    });
                }
            }
            for port in graph.ports() {
                out.push(EditCommand::Reconnect {
                    connection,
                    endpoint: Endpoint::Source { port },
                });
            }
            for node in graph.nodes() {
                out.push(EditCommand::Reconnect {
                    connection,
                    endpoint: Endpoint::Target { node: node.id },
                });
            }
        }
    }
    out
}

fn all_samples() -> impl Iterator<Item = String> {
    Builtin::ALL.into_iter().map(|b| b.sample_value().to_string())
}

fn binding_universe(graph: &AxiomGraph, store: &OntologyStore) -> Vec<BindingSpec> {
    let mut out = vec![BindingSpec::DefaultConcept];
    out.extend(
        store
            .concepts()
            .into_iter()
            .map(|concept| BindingSpec::Subconcept { concept }),
    );
    out.extend(
        store
            .instances()
            .into_iter()
            .map(|instance| BindingSpec::Instance { instance }),
    );
    for datatype in Builtin::ALL {
        out.extend(all_samples().map(|value| BindingSpec::Literal { datatype, value }));
    }
    for relation in store.relations() {
        let arity = store.relation(&relation).map_or(0, |r| r.parameters.len());
        out.extend((0..arity).map(|param| BindingSpec::Relation {
            relation: relation.clone(),
            param,
        }));
    }
    for n in graph.nodes() {
        if n.id == AxiomGraph::ROOT {
            continue;
        }
        if n.as_variable().is_some() {
            out.push(BindingSpec::ExistingVariable { node: n.id });
            out.push(BindingSpec::SharedVariable { node: n.id });
        }
        out.push(BindingSpec::Node { node: n.id });
    }
    out
}
