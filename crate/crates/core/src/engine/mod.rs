//! The transactional edit operations. Every command runs against a working
//! copy of the graph; the copy replaces the original only if every check
//! passes, so a rejected command leaves the graph untouched.

mod context;
pub mod menu;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AttributeSlot, AxiomGraph, ConnId, Coords, InstanceValue, NodeId, NodeKind, OperatorKind,
    ParamSlot, Port, RelationNode, VariableNode,
};
use crate::ontology::{Builtin, ConceptRef, ElementKey, ValueType};
use crate::store::{literal_conforms, OntologyStore};

pub use context::{
    admissible, check_link, port_context, port_is_free, validate_semantic, Context,
    SemanticViolation,
};
pub use menu::{candidate_universe, list_allowed_operations, Selection};

/// Standard sessions only extend what is already connected; advanced
/// sessions may also create isolated elements and draw connections freely.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Standard,
    Advanced,
}

/// What a free attribute or parameter gets bound to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum BindingSpec {
    /// A fresh variable of the declared range concept.
    DefaultConcept,
    /// A fresh variable of a sub-concept of the declared range.
    Subconcept { concept: ConceptRef },
    /// A fresh node for an ontology instance.
    Instance { instance: ElementKey },
    /// A fresh datatype literal.
    Literal { datatype: Builtin, value: String },
    /// A fresh relation node whose parameter `param` stands for the value.
    Relation { relation: ElementKey, param: usize },
    ExistingVariable { node: NodeId },
    /// An existing variable created with the shared flag.
    SharedVariable { node: NodeId },
    /// Any existing element.
    Node { node: NodeId },
    /// A fresh operator whose operands are materialized recursively.
    Operator {
        operator: OperatorKind,
        operands: Vec<BindingSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum InstanceSpec {
    Ontology { instance: ElementKey },
    Literal { datatype: Builtin, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "end", rename_all = "camelCase")]
pub enum Endpoint {
    Source { port: Port },
    Target { node: NodeId },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verb", rename_all = "camelCase")]
pub enum EditCommand {
    CreateVariable {
        concept: ConceptRef,
        #[serde(default)]
        shared: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    CreateOperator {
        operator: OperatorKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    CreateInstance {
        instance: InstanceSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    CreateRelation {
        relation: ElementKey,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    RefineAttribute {
        node: NodeId,
        slot: usize,
        binding: BindingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    RefineParameter {
        node: NodeId,
        param: usize,
        binding: BindingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    Involve {
        variable: NodeId,
        relation: NodeId,
        param: usize,
    },
    Rename {
        node: NodeId,
        name: String,
    },
    Delete {
        node: NodeId,
    },
    SetOperator {
        node: NodeId,
        operator: OperatorKind,
    },
    AddOperand {
        node: NodeId,
        operand: BindingSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    SetValue {
        node: NodeId,
        value: String,
    },
    Insert {
        connection: ConnId,
        operator: OperatorKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        second: Option<BindingSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        at: Option<Coords>,
    },
    Reconnect {
        connection: ConnId,
        endpoint: Endpoint,
    },
    Connect {
        source: Port,
        target: NodeId,
    },
    Move {
        node: NodeId,
        at: Coords,
    },
}

impl EditCommand {
    pub fn verb(&self) -> &'static str {
        match self {
            EditCommand::CreateVariable { .. } => "createVariable",
            EditCommand::CreateOperator { .. } => "createOperator",
            EditCommand::CreateInstance { .. } => "createInstance",
            EditCommand::CreateRelation { .. } => "createRelation",
            EditCommand::RefineAttribute { .. } => "refineAttribute",
            EditCommand::RefineParameter { .. } => "refineParameter",
            EditCommand::Involve { .. } => "involve",
            EditCommand::Rename { .. } => "rename",
            EditCommand::Delete { .. } => "delete",
            EditCommand::SetOperator { .. } => "setOperator",
            EditCommand::AddOperand { .. } => "addOperand",
            EditCommand::SetValue { .. } => "setValue",
            EditCommand::Insert { .. } => "insert",
            EditCommand::Reconnect { .. } => "reconnect",
            EditCommand::Connect { .. } => "connect",
            EditCommand::Move { .. } => "move",
        }
    }

    /// Commands that create isolated elements or draw arbitrary connections.
    pub fn advanced_only(&self) -> bool {
        matches!(
            self,
            EditCommand::CreateOperator { .. }
                | EditCommand::CreateInstance { .. }
                | EditCommand::CreateRelation { .. }
                | EditCommand::Reconnect { .. }
                | EditCommand::Connect { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("subsumption violation: {found} is not compatible with {required}")]
    Incompatible { found: String, required: String },
    #[error("cycle: connecting {from} to {to} would close a cycle")]
    Cycle { from: Port, to: NodeId },
    #[error("arity violation: {0}")]
    Arity(String),
    #[error("name collision: {0} is already in use")]
    NameCollision(String),
    #[error("malformed name: `{0}` is not `?` followed by an identifier")]
    MalformedName(String),
    #[error("port occupied: {0} is already bound")]
    PortOccupied(Port),
    #[error("in-degree limit: {0} already has an incoming connection")]
    InDegree(NodeId),
    #[error("not allowed: {0}")]
    KindNotAllowed(String),
    #[error("unresolved: {0} is not loaded")]
    Unresolved(String),
    #[error("nonconforming literal: `{value}` is not a valid {datatype}")]
    NonconformingLiteral { datatype: Builtin, value: String },
    #[error("not found: {0}")]
    NotFound(String),
    #[error("root is immutable: the Start node cannot be deleted")]
    RootImmutable,
    #[error("immutable instance: {0} is an ontology instance")]
    ImmutableInstance(NodeId),
    #[error("mode restriction: {0}")]
    Mode(String),
    /// A post-condition failed; indicates a gap in the explicit checks.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Rejection {
    /// Short name of the rule that failed.
    pub fn rule(&self) -> &'static str {
        match self {
            Rejection::Incompatible { .. } => "subsumption violation",
            Rejection::Cycle { .. } => "cycle",
            Rejection::Arity(_) => "arity violation",
            Rejection::NameCollision(_) => "name collision",
            Rejection::MalformedName(_) => "malformed name",
            Rejection::PortOccupied(_) => "port occupied",
            Rejection::InDegree(_) => "in-degree limit",
            Rejection::KindNotAllowed(_) => "not allowed",
            Rejection::Unresolved(_) => "unresolved",
            Rejection::NonconformingLiteral { .. } => "nonconforming literal",
            Rejection::NotFound(_) => "not found",
            Rejection::RootImmutable => "root is immutable",
            Rejection::ImmutableInstance(_) => "immutable instance",
            Rejection::Mode(_) => "mode restriction",
            Rejection::Invariant(_) => "invariant violation",
        }
    }
}

/// What a committed command produced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Outcome {
    /// The node the command created, or the root of what it materialized.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<NodeId>,
    /// The connection the command created.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connection: Option<ConnId>,
}

#[derive(Debug, Clone, Copy)]
pub struct EditEngine<'s> {
    store: &'s OntologyStore,
    mode: Mode,
}

impl<'s> EditEngine<'s> {
    pub fn new(store: &'s OntologyStore, mode: Mode) -> Self {
        EditEngine { store, mode }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn store(&self) -> &'s OntologyStore {
        self.store
    }

    /// Applies one command. On rejection `graph` is left exactly as it was.
    pub fn apply(&self, graph: &mut AxiomGraph, command: &EditCommand) -> Result<Outcome, Rejection> {
        if self.mode == Mode::Standard && command.advanced_only() {
            return Err(Rejection::Mode(format!(
                "{} is only available in advanced mode",
                command.verb()
            )));
        }
        let mut work = graph.clone();
        let outcome = Tx {
            store: self.store,
            mode: self.mode,
            g: &mut work,
        }
        .execute(command)?;
        work.refresh_references();
        if let Some(v) = work.validate_structural().first() {
            return Err(Rejection::Invariant(v.to_string()));
        }
        if let Some(v) = validate_semantic(&work, self.store).first() {
            return Err(Rejection::Invariant(format!("{}: {}", v.connection, v.rejection)));
        }
        *graph = work;
        Ok(outcome)
    }
}

#[derive(Debug, Clone, Copy)]
enum Naming<'a> {
    /// Name fresh variables after the attribute they refine.
    Attribute(&'a str),
    /// Name fresh variables after their concept.
    Concept,
}

struct Tx<'a> {
    store: &'a OntologyStore,
    mode: Mode,
    g: &'a mut AxiomGraph,
}

/// `?` plus the identifier with its first letter lowercased, suffixed with
/// 1, 2, ... until it is unused in `graph`.
pub fn fresh_variable_name(graph: &AxiomGraph, base: &str) -> String {
    let mut chars = base.chars();
    let stem: String = match chars.next() {
        Some(first) => first.to_lowercase().chain(chars).collect(),
        None => "x".into(),
    };
    let taken = graph.variable_names();
    let candidate = format!("?{stem}");
    if !taken.contains(candidate.as_str()) {
        return candidate;
    }
    (1..)
        .map(|i| format!("?{stem}{i}"))
        .find(|c| !taken.contains(c.as_str()))
        .expect("unbounded suffix search")
}

impl Tx<'_> {
    fn execute(&mut self, command: &EditCommand) -> Result<Outcome, Rejection> {
        match command {
            EditCommand::CreateVariable { concept, shared, at } => {
                let first = self.g.outgoing(AxiomGraph::ROOT).is_empty();
                if self.mode == Mode::Standard && !first {
                    return Err(Rejection::Mode(
                        "further variables are added by refinement in standard mode".into(),
                    ));
                }
                let name = fresh_variable_name(self.g, &concept.id);
                let coords = at.unwrap_or_else(|| self.place(AxiomGraph::ROOT));
                let node = self.new_variable(concept, name, *shared, coords)?;
                let connection = if first {
                    Some(self.link(Port::Root, node)?)
                } else {
                    None
                };
                Ok(Outcome {
                    node: Some(node),
                    connection,
                })
            }
            EditCommand::CreateOperator { operator, at } => {
                let coords = at.unwrap_or_default();
                let node = self.g.add_node(NodeKind::Operator(*operator), coords);
                Ok(created(node))
            }
            EditCommand::CreateInstance { instance, at } => {
                let value = match instance {
                    InstanceSpec::Ontology { instance } => {
                        self.require_instance(instance)?;
                        InstanceValue::Ontology(instance.clone())
                    }
                    InstanceSpec::Literal { datatype, value } => {
                        require_conforming(*datatype, value)?;
                        InstanceValue::Literal {
                            datatype: *datatype,
                            value: value.clone(),
                        }
                    }
                };
                let node = self
                    .g
                    .add_node(NodeKind::Instance(value), at.unwrap_or_default());
                Ok(created(node))
            }
            EditCommand::CreateRelation { relation, at } => {
                let node = self.new_relation(relation, None, at.unwrap_or_default())?;
                Ok(created(node))
            }
            EditCommand::RefineAttribute {
                node,
                slot,
                binding,
                at,
            } => {
                let attribute = self
                    .g
                    .variable(*node)
                    .and_then(|v| v.slots.get(*slot))
                    .map(|s| s.attribute.clone())
                    .ok_or_else(|| Rejection::NotFound(format!("slot {slot} of {node}")))?;
                let port = Port::Slot {
                    node: *node,
                    index: *slot,
                };
                self.bind(port, binding, Naming::Attribute(&attribute), *at)
            }
            EditCommand::RefineParameter {
                node,
                param,
                binding,
                at,
            } => {
                let port = Port::Param {
                    node: *node,
                    index: *param,
                };
                if !self.g.port_exists(port) {
                    return Err(Rejection::NotFound(format!("parameter {param} of {node}")));
                }
                self.bind(port, binding, Naming::Concept, *at)
            }
            EditCommand::Involve {
                variable,
                relation,
                param,
            } => {
                if self.g.variable(*variable).is_none() {
                    return Err(Rejection::NotFound(format!("variable {variable}")));
                }
                let port = Port::Param {
                    node: *relation,
                    index: *param,
                };
                let connection = self.link(port, *variable)?;
                Ok(Outcome {
                    node: None,
                    connection: Some(connection),
                })
            }
            EditCommand::Rename { node, name } => {
                let current = self
                    .g
                    .variable(*node)
                    .map(|v| v.name.clone())
                    .ok_or_else(|| Rejection::NotFound(format!("variable {node}")))?;
                if current == *name {
                    return Ok(Outcome::default());
                }
                if !crate::model::is_variable_name(name) {
                    return Err(Rejection::MalformedName(name.clone()));
                }
                if self.g.variable_by_name(name).is_some() {
                    return Err(Rejection::NameCollision(name.clone()));
                }
                if let Some(NodeKind::Variable(v)) = self.g.node_mut(*node).map(|n| &mut n.kind) {
                    v.name = name.clone();
                }
                Ok(Outcome::default())
            }
            EditCommand::Delete { node } => {
                if *node == AxiomGraph::ROOT {
                    return Err(Rejection::RootImmutable);
                }
                self.g
                    .remove_node(*node)
                    .ok_or_else(|| Rejection::NotFound(node.to_string()))?;
                Ok(Outcome::default())
            }
            EditCommand::SetOperator { node, operator } => {
                self.g
                    .node(*node)
                    .and_then(|n| n.as_operator())
                    .ok_or_else(|| Rejection::NotFound(format!("operator {node}")))?;
                let operands = self.g.operands(*node).len();
                if *operator == OperatorKind::Not && operands > 1 {
                    return Err(Rejection::Arity(format!(
                        "NOT takes one operand, {node} has {operands}"
                    )));
                }
                if let Some(n) = self.g.node_mut(*node) {
                    n.kind = NodeKind::Operator(*operator);
                }
                Ok(Outcome::default())
            }
            EditCommand::AddOperand { node, operand, at } => {
                self.g
                    .node(*node)
                    .and_then(|n| n.as_operator())
                    .ok_or_else(|| Rejection::NotFound(format!("operator {node}")))?;
                self.bind(Port::Operator { node: *node }, operand, Naming::Concept, *at)
            }
            EditCommand::SetValue { node, value } => {
                let datatype = match self.g.node(*node).map(|n| &n.kind) {
                    Some(NodeKind::Instance(InstanceValue::Literal { datatype, .. })) => *datatype,
                    Some(NodeKind::Instance(InstanceValue::Ontology(_))) => {
                        return Err(Rejection::ImmutableInstance(*node))
                    }
                    _ => return Err(Rejection::NotFound(format!("literal {node}"))),
                };
                require_conforming(datatype, value)?;
                if let Some(n) = self.g.node_mut(*node) {
                    n.kind = NodeKind::Instance(InstanceValue::Literal {
                        datatype,
                        value: value.clone(),
                    });
                }
                Ok(Outcome::default())
            }
            EditCommand::Insert {
                connection,
                operator,
                second,
                at,
            } => self.insert(*connection, *operator, second.as_ref(), *at),
            EditCommand::Reconnect {
                connection,
                endpoint,
            } => {
                let conn = self
                    .g
                    .remove_connection(*connection)
                    .ok_or_else(|| Rejection::NotFound(connection.to_string()))?;
                let (source, target) = match endpoint {
                    Endpoint::Source { port } => (*port, conn.target),
                    Endpoint::Target { node } => (conn.source, *node),
                };
                check_link(self.g, self.store, source, target)?;
                self.g.restore_connection(crate::model::Connection {
                    id: conn.id,
                    source,
                    target,
                });
                Ok(Outcome {
                    node: None,
                    connection: Some(conn.id),
                })
            }
            EditCommand::Connect { source, target } => {
                let connection = self.link(*source, *target)?;
                Ok(Outcome {
                    node: None,
                    connection: Some(connection),
                })
            }
            EditCommand::Move { node, at } => {
                let n = self
                    .g
                    .node_mut(*node)
                    .ok_or_else(|| Rejection::NotFound(node.to_string()))?;
                n.coords = *at;
                Ok(Outcome::default())
            }
        }
    }

    fn link(&mut self, source: Port, target: NodeId) -> Result<ConnId, Rejection> {
        check_link(self.g, self.store, source, target)?;
        Ok(self.g.add_connection(source, target))
    }

    /// A position to the right of `owner`, below its existing children.
    fn place(&self, owner: NodeId) -> Coords {
        let base = self.g.node(owner).map(|n| n.coords).unwrap_or_default();
        let below = self.g.outgoing(owner).len() as i32;
        Coords::new(base.x + 220, base.y + 90 * below)
    }

    fn require_concept(&self, concept: &ConceptRef) -> Result<(), Rejection> {
        match self.store.concept(concept) {
            Some(_) => Ok(()),
            None => Err(Rejection::Unresolved(concept.to_string())),
        }
    }

    fn require_instance(&self, instance: &ElementKey) -> Result<(), Rejection> {
        match self.store.instance(instance) {
            Some(_) => Ok(()),
            None => Err(Rejection::Unresolved(instance.to_string())),
        }
    }

    fn new_variable(
        &mut self,
        concept: &ConceptRef,
        name: String,
        shared: bool,
        coords: Coords,
    ) -> Result<NodeId, Rejection> {
        self.require_concept(concept)?;
        let slots = self
            .store
            .effective_attributes(concept)
            .into_iter()
            .map(|a| AttributeSlot {
                origin: a.origin,
                attribute: a.def.name,
                range: a.def.range,
                binding: None,
            })
            .collect();
        Ok(self.g.add_node(
            NodeKind::Variable(VariableNode {
                name,
                concept: concept.clone(),
                slots,
                shared,
            }),
            coords,
        ))
    }

    fn new_relation(
        &mut self,
        relation: &ElementKey,
        anchor: Option<usize>,
        coords: Coords,
    ) -> Result<NodeId, Rejection> {
        let def = self
            .store
            .relation(relation)
            .ok_or_else(|| Rejection::Unresolved(relation.to_string()))?;
        if let Some(k) = anchor {
            if k >= def.parameters.len() {
                return Err(Rejection::NotFound(format!(
                    "parameter {} of {}",
                    k + 1,
                    relation.id
                )));
            }
        }
        let params = def
            .parameters
            .iter()
            .map(|p| ParamSlot {
                param_type: p.clone(),
                binding: None,
            })
            .collect();
        Ok(self.g.add_node(
            NodeKind::Relation(RelationNode {
                relation: relation.clone(),
                params,
                anchor,
            }),
            coords,
        ))
    }

    /// Binds a free port according to `spec`, creating whatever the binding
    /// asks for. Returns the node the port now points at.
    fn bind(
        &mut self,
        port: Port,
        spec: &BindingSpec,
        naming: Naming<'_>,
        at: Option<Coords>,
    ) -> Result<Outcome, Rejection> {
        port_is_free(self.g, port)?;
        let ctx = port_context(self.g, self.store, port)
            .ok_or_else(|| Rejection::NotFound(format!("port {port}")))?;
        let coords = at.unwrap_or_else(|| self.place(port.owner()));
        let target = match spec {
            BindingSpec::DefaultConcept => {
                let concept = match &ctx {
                    Context::Typed(ValueType::Concept(c)) => c.clone(),
                    Context::Typed(ValueType::Unresolved(raw)) => {
                        return Err(Rejection::Unresolved(raw.clone()))
                    }
                    Context::Typed(ValueType::Builtin(b)) => {
                        return Err(Rejection::KindNotAllowed(format!(
                            "a {b} value has no default variable"
                        )))
                    }
                    Context::Root | Context::Open => {
                        return Err(Rejection::KindNotAllowed(
                            "the default binding needs a typed value".into(),
                        ))
                    }
                };
                let base = match naming {
                    Naming::Attribute(a) => a.to_string(),
                    Naming::Concept => concept.id.clone(),
                };
                let name = fresh_variable_name(self.g, &base);
                self.new_variable(&concept, name, false, coords)?
            }
            BindingSpec::Subconcept { concept } => {
                let base = match naming {
                    Naming::Attribute(a) => a.to_string(),
                    Naming::Concept => concept.id.clone(),
                };
                let name = fresh_variable_name(self.g, &base);
                self.new_variable(concept, name, false, coords)?
            }
            BindingSpec::Instance { instance } => {
                self.require_instance(instance)?;
                self.g.add_node(
                    NodeKind::Instance(InstanceValue::Ontology(instance.clone())),
                    coords,
                )
            }
            BindingSpec::Literal { datatype, value } => {
                require_conforming(*datatype, value)?;
                self.g.add_node(
                    NodeKind::Instance(InstanceValue::Literal {
                        datatype: *datatype,
                        value: value.clone(),
                    }),
                    coords,
                )
            }
            BindingSpec::Relation { relation, param } => {
                self.new_relation(relation, Some(*param), coords)?
            }
            BindingSpec::ExistingVariable { node } => {
                if self.g.variable(*node).is_none() {
                    return Err(Rejection::NotFound(format!("variable {node}")));
                }
                *node
            }
            BindingSpec::SharedVariable { node } => match self.g.variable(*node) {
                Some(v) if v.shared => *node,
                Some(v) => {
                    return Err(Rejection::KindNotAllowed(format!(
                        "{} is not a shared variable",
                        v.name
                    )))
                }
                None => return Err(Rejection::NotFound(format!("variable {node}"))),
            },
            BindingSpec::Node { node } => {
                if self.g.node(*node).is_none() {
                    return Err(Rejection::NotFound(node.to_string()));
                }
                *node
            }
            BindingSpec::Operator { operator, operands } => {
                check_operator_arity(*operator, operands.len())?;
                let op = self.g.add_node(NodeKind::Operator(*operator), coords);
                let connection = self.link(port, op)?;
                for operand in operands {
                    self.bind(Port::Operator { node: op }, operand, Naming::Concept, None)?;
                }
                return Ok(Outcome {
                    node: Some(op),
                    connection: Some(connection),
                });
            }
        };
        let connection = self.link(port, target)?;
        Ok(Outcome {
            node: Some(target),
            connection: Some(connection),
        })
    }

    fn insert(
        &mut self,
        connection: ConnId,
        operator: OperatorKind,
        second: Option<&BindingSpec>,
        at: Option<Coords>,
    ) -> Result<Outcome, Rejection> {
        let conn = self
            .g
            .connection(connection)
            .cloned()
            .ok_or_else(|| Rejection::NotFound(connection.to_string()))?;
        match (operator, second) {
            (OperatorKind::Not, Some(_)) => {
                return Err(Rejection::Arity("NOT takes exactly one operand".into()))
            }
            (OperatorKind::Not, None) if conn.source == Port::Root => {
                return Err(Rejection::KindNotAllowed(
                    "NOT cannot be inserted into a connection from Start".into(),
                ))
            }
            (OperatorKind::And | OperatorKind::Or, None) => {
                return Err(Rejection::Arity(format!("{operator} needs a second operand")))
            }
            _ => {}
        }
        let coords = at.unwrap_or_else(|| {
            let a = self.g.node(conn.source.owner()).map(|n| n.coords).unwrap_or_default();
            let b = self.g.node(conn.target).map(|n| n.coords).unwrap_or_default();
            Coords::new((a.x + b.x) / 2, (a.y + b.y) / 2)
        });
        self.g.remove_connection(connection);
        let op = self.g.add_node(NodeKind::Operator(operator), coords);
        let incoming = self.link(conn.source, op)?;
        self.link(Port::Operator { node: op }, conn.target)?;
        if let Some(spec) = second {
            self.bind(Port::Operator { node: op }, spec, Naming::Concept, None)?;
        }
        Ok(Outcome {
            node: Some(op),
            connection: Some(incoming),
        })
    }
}

fn created(node: NodeId) -> Outcome {
    Outcome {
        node: Some(node),
        connection: None,
    }
}

fn require_conforming(datatype: Builtin, value: &str) -> Result<(), Rejection> {
    if literal_conforms(value, datatype) {
        Ok(())
    } else {
        Err(Rejection::NonconformingLiteral {
            datatype,
            value: value.to_string(),
        })
    }
}

fn check_operator_arity(operator: OperatorKind, operands: usize) -> Result<(), Rejection> {
    let ok = match operator {
        OperatorKind::Not => operands == 1,
        OperatorKind::And | OperatorKind::Or => operands >= 2,
    };
    if ok {
        Ok(())
    } else {
        Err(Rejection::Arity(format!(
            "{operator} cannot take {operands} operand(s)"
        )))
    }
}
