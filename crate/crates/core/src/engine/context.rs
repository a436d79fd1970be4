//! Context typing: what a port demands of whatever it points at, and the
//! single link check every mutation goes through.

use crate::model::{AxiomGraph, ConnId, InstanceValue, NodeId, NodeKind, OperatorKind, Port, Scope};
use crate::ontology::ValueType;
use crate::store::OntologyStore;

use super::Rejection;

/// What a connection leaving a port must lead to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Context {
    /// A top-level conjunct.
    Root,
    /// A value of the given type.
    Typed(ValueType),
    /// An operator that is not connected to anything yet.
    Open,
}

pub fn port_context(graph: &AxiomGraph, store: &OntologyStore, port: Port) -> Option<Context> {
    match port {
        Port::Root => Some(Context::Root),
        Port::Slot { node, index } => {
            let slot = graph.variable(node)?.slots.get(index)?;
            Some(Context::Typed(
                store.resolve_type(&slot.origin.ontology, &slot.range),
            ))
        }
        Port::Param { node, index } => {
            let rel = graph.node(node)?.as_relation()?;
            let param = rel.params.get(index)?;
            Some(Context::Typed(
                store.resolve_type(&rel.relation.ontology, &param.param_type),
            ))
        }
        Port::Operator { node } => {
            graph.node(node)?.as_operator()?;
            match graph.scope_of_operator(node) {
                Scope::Root => Some(Context::Root),
                Scope::Port(p) => port_context(graph, store, p),
                Scope::Detached => Some(Context::Open),
            }
        }
    }
}

/// Whether a port can take a new connection at all.
pub fn port_is_free(graph: &AxiomGraph, port: Port) -> Result<(), Rejection> {
    if !graph.port_exists(port) {
        return Err(Rejection::NotFound(format!("port {port}")));
    }
    match port {
        Port::Slot { .. } => {
            if graph.port_binding(port).is_some() {
                return Err(Rejection::PortOccupied(port));
            }
        }
        Port::Param { node, index } => {
            let rel = graph.node(node).and_then(|n| n.as_relation());
            if graph.port_binding(port).is_some() || rel.is_some_and(|r| r.anchor == Some(index)) {
                return Err(Rejection::PortOccupied(port));
            }
        }
        Port::Operator { node } => {
            if graph.node(node).and_then(|n| n.as_operator()) == Some(OperatorKind::Not)
                && !graph.operands(node).is_empty()
            {
                return Err(Rejection::Arity("NOT takes exactly one operand".into()));
            }
        }
        Port::Root => {}
    }
    Ok(())
}

fn describe(store: &OntologyStore, graph: &AxiomGraph, node: NodeId) -> String {
    match graph.node(node).map(|n| &n.kind) {
        Some(NodeKind::Variable(v)) => format!("{} ({})", v.name, v.concept.id),
        Some(NodeKind::Instance(InstanceValue::Ontology(key))) => match store.instance_type(key) {
            Some(c) => format!("{} ({})", key.id, c.id),
            None => key.id.clone(),
        },
        Some(NodeKind::Instance(InstanceValue::Literal { datatype, value })) => {
            format!("\"{value}\" ({datatype})")
        }
        Some(NodeKind::Relation(r)) => r.relation.id.clone(),
        Some(NodeKind::Operator(k)) => k.to_string(),
        Some(NodeKind::Root) => "Start".into(),
        None => node.to_string(),
    }
}

/// Checks a node against a context without looking at its operands.
pub fn admissible_here(
    graph: &AxiomGraph,
    store: &OntologyStore,
    ctx: &Context,
    node: NodeId,
) -> Result<(), Rejection> {
    let Some(n) = graph.node(node) else {
        return Err(Rejection::NotFound(node.to_string()));
    };
    let incompatible = |required: &ValueType| Rejection::Incompatible {
        found: describe(store, graph, node),
        required: required.to_string(),
    };
    match (&n.kind, ctx) {
        (NodeKind::Root, _) => Err(Rejection::KindNotAllowed("Start cannot be a target".into())),
        (NodeKind::Variable(_) | NodeKind::Operator(_), Context::Root | Context::Open) => Ok(()),
        (NodeKind::Variable(v), Context::Typed(t)) => {
            if store.compatible(&ValueType::Concept(v.concept.clone()), t) {
                Ok(())
            } else {
                Err(incompatible(t))
            }
        }
        (NodeKind::Instance(_), Context::Root) => Err(Rejection::KindNotAllowed(
            "an instance cannot be a top-level conjunct".into(),
        )),
        (NodeKind::Instance(_), Context::Open) => Ok(()),
        (NodeKind::Instance(InstanceValue::Ontology(key)), Context::Typed(t)) => {
            match store.instance_type(key) {
                Some(c) if store.compatible(&ValueType::Concept(c.clone()), t) => Ok(()),
                _ => Err(incompatible(t)),
            }
        }
        (NodeKind::Instance(InstanceValue::Literal { datatype, .. }), Context::Typed(t)) => {
            if store.compatible(&ValueType::Builtin(*datatype), t) {
                Ok(())
            } else {
                Err(incompatible(t))
            }
        }
        (NodeKind::Relation(r), Context::Root) => match r.anchor {
            None => Ok(()),
            Some(_) => Err(Rejection::KindNotAllowed(
                "a relation standing for a value cannot be a top-level conjunct".into(),
            )),
        },
        (NodeKind::Relation(_), Context::Open) => Ok(()),
        (NodeKind::Relation(r), Context::Typed(t)) => {
            let Some(k) = r.anchor else {
                return Err(Rejection::KindNotAllowed(
                    "relations bind values through their parameters, not as values".into(),
                ));
            };
            let param = store
                .relation_parameter_types(&r.relation)
                .and_then(|ps| ps.get(k).cloned());
            match param {
                Some(p) if store.compatible(t, &p) => Ok(()),
                Some(p) => Err(Rejection::Incompatible {
                    found: t.to_string(),
                    required: format!("{} parameter {} ({p})", r.relation.id, k + 1),
                }),
                None => Err(Rejection::Unresolved(r.relation.to_string())),
            }
        }
        (NodeKind::Operator(_), Context::Typed(_)) => Ok(()),
    }
}

/// Checks a node and, for operators, every operand below it, as if it were
/// placed in `ctx`.
pub fn admissible(
    graph: &AxiomGraph,
    store: &OntologyStore,
    ctx: &Context,
    node: NodeId,
) -> Result<(), Rejection> {
    admissible_here(graph, store, ctx, node)?;
    if graph.node(node).and_then(|n| n.as_operator()).is_some() {
        for operand in graph.operands(node) {
            if *ctx == Context::Root && graph.variable(operand).is_some() && graph.incoming(operand).len() != 1 {
                return Err(shared_operand(operand));
            }
            admissible(graph, store, ctx, operand)?;
        }
    }
    Ok(())
}

fn shared_operand(node: NodeId) -> Rejection {
    Rejection::KindNotAllowed(format!(
        "{node} would be a top-level operand that is also referenced elsewhere"
    ))
}

/// Every check a new connection `source → target` must pass.
pub fn check_link(
    graph: &AxiomGraph,
    store: &OntologyStore,
    source: Port,
    target: NodeId,
) -> Result<(), Rejection> {
    port_is_free(graph, source)?;
    let Some(t) = graph.node(target) else {
        return Err(Rejection::NotFound(target.to_string()));
    };
    let incoming = graph.incoming(target);
    match &t.kind {
        NodeKind::Root => {
            return Err(Rejection::KindNotAllowed("Start cannot be a target".into()))
        }
        NodeKind::Operator(_) | NodeKind::Relation(_) if !incoming.is_empty() => {
            return Err(Rejection::InDegree(target))
        }
        NodeKind::Variable(_) => {
            if graph.is_root_operand_port(source) && !incoming.is_empty() {
                return Err(shared_operand(target));
            }
            if incoming.iter().any(|c| graph.is_root_operand_port(c.source)) {
                return Err(shared_operand(target));
            }
        }
        _ => {}
    }
    let ctx = port_context(graph, store, source)
        .ok_or_else(|| Rejection::NotFound(format!("port {source}")))?;
    admissible(graph, store, &ctx, target)?;
    if graph.would_create_cycle(source, target) {
        return Err(Rejection::Cycle {
            from: source,
            to: target,
        });
    }
    Ok(())
}

/// A connection whose target does not suit the context of its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticViolation {
    pub connection: ConnId,
    pub rejection: Rejection,
}

/// Type-checks every connection against its source's context.
pub fn validate_semantic(graph: &AxiomGraph, store: &OntologyStore) -> Vec<SemanticViolation> {
    let mut out = Vec::new();
    for conn in graph.connections() {
        let result = match port_context(graph, store, conn.source) {
            Some(ctx) => admissible_here(graph, store, &ctx, conn.target),
            None => Err(Rejection::NotFound(format!("port {}", conn.source))),
        };
        if let Err(rejection) = result {
            out.push(SemanticViolation {
                connection: conn.id,
                rejection,
            });
        }
    }
    out
}
