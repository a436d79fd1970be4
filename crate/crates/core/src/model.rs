//! The axiom graph: a DAG rooted at `Start` whose variable, relation,
//! operator and instance nodes are linked by typed connections, plus the
//! structural validators everything else relies on.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ontology::{Builtin, ConceptRef, ElementKey, Iri, TypeRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConnId(pub u32);

impl fmt::Display for ConnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// Canvas position. Stored for layout only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coords {
    pub x: i32,
    pub y: i32,
}

impl Coords {
    pub fn new(x: i32, y: i32) -> Self {
        Coords { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    #[serde(rename = "AND")]
    And,
    #[serde(rename = "OR")]
    Or,
    #[serde(rename = "NOT")]
    Not,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] = [OperatorKind::And, OperatorKind::Or, OperatorKind::Not];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::And => "AND",
            OperatorKind::Or => "OR",
            OperatorKind::Not => "NOT",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        OperatorKind::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributeSlot {
    /// Concept declaring the attribute.
    pub origin: ConceptRef,
    pub attribute: String,
    /// Declared range, resolved relative to `origin`'s ontology.
    pub range: TypeRef,
    pub binding: Option<ConnId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamSlot {
    /// Declared type, resolved relative to the relation's ontology.
    pub param_type: TypeRef,
    pub binding: Option<ConnId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableNode {
    pub name: String,
    pub concept: ConceptRef,
    pub slots: Vec<AttributeSlot>,
    pub shared: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelationNode {
    pub relation: ElementKey,
    pub params: Vec<ParamSlot>,
    /// Parameter that stands for the value of the slot this relation refines.
    /// `None` for relations used as top-level conjuncts.
    pub anchor: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InstanceValue {
    Ontology(ElementKey),
    Literal { datatype: Builtin, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeKind {
    Root,
    Variable(VariableNode),
    Relation(RelationNode),
    Operator(OperatorKind),
    Instance(InstanceValue),
}

impl NodeKind {
    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Root => "root",
            NodeKind::Variable(_) => "variable",
            NodeKind::Relation(_) => "relation",
            NodeKind::Operator(_) => "operator",
            NodeKind::Instance(_) => "instance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub coords: Coords,
    pub kind: NodeKind,
}

impl Node {
    pub fn as_variable(&self) -> Option<&VariableNode> {
        match &self.kind {
            NodeKind::Variable(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_relation(&self) -> Option<&RelationNode> {
        match &self.kind {
            NodeKind::Relation(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_operator(&self) -> Option<OperatorKind> {
        match &self.kind {
            NodeKind::Operator(k) => Some(*k),
            _ => None,
        }
    }
}

/// Where a connection starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "port", rename_all = "camelCase")]
pub enum Port {
    Root,
    Slot { node: NodeId, index: usize },
    Param { node: NodeId, index: usize },
    Operator { node: NodeId },
}

impl Port {
    pub fn owner(&self) -> NodeId {
        match *self {
            Port::Root => AxiomGraph::ROOT,
            Port::Slot { node, .. } | Port::Param { node, .. } | Port::Operator { node } => node,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Root => f.write_str("start"),
            Port::Slot { node, index } => write!(f, "{node}.{index}"),
            Port::Param { node, index } => write!(f, "{node}[{index}]"),
            Port::Operator { node } => write!(f, "{node}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Connection {
    pub id: ConnId,
    pub source: Port,
    pub target: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxiomGraph {
    pub name: String,
    nodes: BTreeMap<NodeId, Node>,
    connections: BTreeMap<ConnId, Connection>,
    referenced_ontologies: BTreeSet<Iri>,
    next_node: u32,
    next_conn: u32,
}

/// Where an operator's operands get their meaning from: the first
/// non-operator port above it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Root,
    Port(Port),
    /// Not connected to anything.
    Detached,
}

impl AxiomGraph {
    pub const ROOT: NodeId = NodeId(0);

    pub fn new(name: impl Into<String>) -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(
            Self::ROOT,
            Node {
                id: Self::ROOT,
                coords: Coords::default(),
                kind: NodeKind::Root,
            },
        );
        AxiomGraph {
            name: name.into(),
            nodes,
            connections: BTreeMap::new(),
            referenced_ontologies: BTreeSet::new(),
            next_node: 1,
            next_conn: 0,
        }
    }

    /// Rebuilds a graph from stored parts. No validation happens here.
    pub fn from_parts(
        name: String,
        nodes: Vec<Node>,
        connections: Vec<Connection>,
    ) -> Self {
        let next_node = nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(1);
        let next_conn = connections.iter().map(|c| c.id.0 + 1).max().unwrap_or(0);
        let mut graph = AxiomGraph {
            name,
            nodes: nodes.into_iter().map(|n| (n.id, n)).collect(),
            connections: connections.into_iter().map(|c| (c.id, c)).collect(),
            referenced_ontologies: BTreeSet::new(),
            next_node,
            next_conn,
        };
        graph.refresh_references();
        graph
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn connections(&self) -> impl Iterator<Item = &Connection> {
        self.connections.values()
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn node_mut(&mut self, id: NodeId) -> Option<&mut Node> {
        self.nodes.get_mut(&id)
    }

    pub fn connection(&self, id: ConnId) -> Option<&Connection> {
        self.connections.get(&id)
    }

    pub fn referenced_ontologies(&self) -> &BTreeSet<Iri> {
        &self.referenced_ontologies
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn variable(&self, id: NodeId) -> Option<&VariableNode> {
        self.node(id).and_then(Node::as_variable)
    }

    pub fn variable_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes
            .values()
            .find(|n| n.as_variable().is_some_and(|v| v.name == name))
            .map(|n| n.id)
    }

    pub fn is_empty(&self) -> bool {
        self.outgoing(Self::ROOT).is_empty()
    }

    pub fn add_node(&mut self, kind: NodeKind, coords: Coords) -> NodeId {
        let id = NodeId(self.next_node);
        self.next_node += 1;
        self.nodes.insert(id, Node { id, coords, kind });
        id
    }

    /// Adds a connection and marks the source slot or parameter as bound.
    /// The caller is responsible for every semantic check.
    pub fn add_connection(&mut self, source: Port, target: NodeId) -> ConnId {
        let id = ConnId(self.next_conn);
        self.next_conn += 1;
        self.connections.insert(id, Connection { id, source, target });
        self.set_port_binding(source, Some(id));
        id
    }

    pub fn remove_connection(&mut self, id: ConnId) -> Option<Connection> {
        let conn = self.connections.remove(&id)?;
        if self.port_binding(conn.source) == Some(id) {
            self.set_port_binding(conn.source, None);
        }
        Some(conn)
    }

    /// Re-inserts a connection under its original id.
    pub fn restore_connection(&mut self, conn: Connection) {
        let (id, source) = (conn.id, conn.source);
        self.next_conn = self.next_conn.max(id.0 + 1);
        self.connections.insert(id, conn);
        self.set_port_binding(source, Some(id));
    }

    pub fn set_connection_target(&mut self, id: ConnId, target: NodeId) {
        if let Some(conn) = self.connections.get_mut(&id) {
            conn.target = target;
        }
    }

    pub fn set_connection_source(&mut self, id: ConnId, source: Port) {
        let Some(old) = self.connections.get(&id).map(|c| c.source) else {
            return;
        };
        if self.port_binding(old) == Some(id) {
            self.set_port_binding(old, None);
        }
        if let Some(conn) = self.connections.get_mut(&id) {
            conn.source = source;
        }
        self.set_port_binding(source, Some(id));
    }

    /// Removes a node and every connection touching it; slots that pointed
    /// at it become free again.
    pub fn remove_node(&mut self, id: NodeId) -> Option<Node> {
        let incident: Vec<ConnId> = self
            .connections
            .values()
            .filter(|c| c.target == id || c.source.owner() == id)
            .map(|c| c.id)
            .collect();
        for c in incident {
            self.remove_connection(c);
        }
        self.nodes.remove(&id)
    }

    pub fn port_binding(&self, port: Port) -> Option<ConnId> {
        match port {
            Port::Slot { node, index } => self
                .variable(node)
                .and_then(|v| v.slots.get(index))
                .and_then(|s| s.binding),
            Port::Param { node, index } => self
                .node(node)
                .and_then(Node::as_relation)
                .and_then(|r| r.params.get(index))
                .and_then(|p| p.binding),
            Port::Root | Port::Operator { .. } => None,
        }
    }

    fn set_port_binding(&mut self, port: Port, binding: Option<ConnId>) {
        match port {
            Port::Slot { node, index } => {
                if let Some(Node {
                    kind: NodeKind::Variable(v),
                    ..
                }) = self.nodes.get_mut(&node)
                {
                    if let Some(slot) = v.slots.get_mut(index) {
                        slot.binding = binding;
                    }
                }
            }
            Port::Param { node, index } => {
                if let Some(Node {
                    kind: NodeKind::Relation(r),
                    ..
                }) = self.nodes.get_mut(&node)
                {
                    if let Some(param) = r.params.get_mut(index) {
                        param.binding = binding;
                    }
                }
            }
            Port::Root | Port::Operator { .. } => {}
        }
    }

    /// Whether the port exists on a node of the matching kind.
    pub fn port_exists(&self, port: Port) -> bool {
        match port {
            Port::Root => true,
            Port::Slot { node, index } => self.variable(node).is_some_and(|v| index < v.slots.len()),
            Port::Param { node, index } => self
                .node(node)
                .and_then(Node::as_relation)
                .is_some_and(|r| index < r.params.len()),
            Port::Operator { node } => self.node(node).and_then(Node::as_operator).is_some(),
        }
    }

    /// Connections leaving any port of `node`, in creation order.
    /// Every port of every node: Start, then slots, parameters and operator
    /// ports in node order.
    pub fn ports(&self) -> Vec<Port> {
        let mut ports = vec![Port::Root];
        for n in self.nodes.values() {
            match &n.kind {
                NodeKind::Variable(v) => ports.extend((0..v.slots.len()).map(|index| Port::Slot {
                    node: n.id,
                    index,
                })),
                NodeKind::Relation(r) => ports.extend((0..r.params.len()).map(|index| Port::Param {
                    node: n.id,
                    index,
                })),
                NodeKind::Operator(_) => ports.push(Port::Operator { node: n.id }),
                _ => {}
            }
        }
        ports
    }

    pub fn outgoing(&self, node: NodeId) -> Vec<&Connection> {
        self.connections
            .values()
            .filter(|c| c.source.owner() == node)
            .collect()
    }

    pub fn incoming(&self, node: NodeId) -> Vec<&Connection> {
        self.connections.values().filter(|c| c.target == node).collect()
    }

    pub fn operands(&self, op: NodeId) -> Vec<NodeId> {
        self.connections
            .values()
            .filter(|c| c.source == Port::Operator { node: op })
            .map(|c| c.target)
            .collect()
    }

    /// Follows the single incoming connection of an operator chain upwards.
    pub fn scope_of_operator(&self, op: NodeId) -> Scope {
        let mut current = op;
        let mut seen = HashSet::new();
        loop {
            if !seen.insert(current) {
                return Scope::Detached;
            }
            let Some(incoming) = self.incoming(current).first().map(|c| c.source) else {
                return Scope::Detached;
            };
            match incoming {
                Port::Root => return Scope::Root,
                Port::Operator { node } => current = node,
                port => return Scope::Port(port),
            }
        }
    }

    /// The scope a connection leaving `port` lives in.
    pub fn scope_of_port(&self, port: Port) -> Scope {
        match port {
            Port::Root => Scope::Root,
            Port::Operator { node } => self.scope_of_operator(node),
            other => Scope::Port(other),
        }
    }

    /// True when `port` is an operator port in the top-level scope.
    pub fn is_root_operand_port(&self, port: Port) -> bool {
        matches!(port, Port::Operator { .. }) && self.scope_of_port(port) == Scope::Root
    }

    pub fn reachable_from_start(&self) -> BTreeSet<NodeId> {
        self.reachable_from(Self::ROOT)
    }

    fn reachable_from(&self, start: NodeId) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for c in self.outgoing(n) {
                if seen.insert(c.target) {
                    queue.push_back(c.target);
                }
            }
        }
        seen
    }

    /// Whether connecting `source` to `target` would close a directed cycle.
    pub fn would_create_cycle(&self, source: Port, target: NodeId) -> bool {
        self.reachable_from(target).contains(&source.owner())
    }

    pub fn variable_names(&self) -> BTreeSet<&str> {
        self.nodes
            .values()
            .filter_map(|n| n.as_variable().map(|v| v.name.as_str()))
            .collect()
    }

    /// Recomputes the set of ontologies referenced by nodes and slots.
    pub fn refresh_references(&mut self) {
        let mut refs = BTreeSet::new();
        for node in self.nodes.values() {
            match &node.kind {
                NodeKind::Variable(v) => {
                    refs.insert(v.concept.ontology.clone());
                    refs.extend(v.slots.iter().map(|s| s.origin.ontology.clone()));
                }
                NodeKind::Relation(r) => {
                    refs.insert(r.relation.ontology.clone());
                }
                NodeKind::Instance(InstanceValue::Ontology(key)) => {
                    refs.insert(key.ontology.clone());
                }
                _ => {}
            }
        }
        self.referenced_ontologies = refs;
    }

    pub fn validate_structural(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        match self.nodes.get(&Self::ROOT) {
            Some(Node {
                kind: NodeKind::Root,
                ..
            }) => {}
            _ => out.push(Violation::MissingRoot),
        }
        for (id, node) in &self.nodes {
            if node.id != *id {
                out.push(Violation::MisfiledNode { node: *id });
            }
            if *id != Self::ROOT && matches!(node.kind, NodeKind::Root) {
                out.push(Violation::ExtraRoot { node: *id });
            }
        }

        let mut dangling = false;
        for conn in self.connections.values() {
            if !self.port_exists(conn.source) {
                out.push(Violation::DanglingSource { conn: conn.id });
                dangling = true;
            }
            match self.node(conn.target) {
                None => {
                    out.push(Violation::DanglingTarget { conn: conn.id });
                    dangling = true;
                }
                Some(Node {
                    kind: NodeKind::Root,
                    ..
                }) => out.push(Violation::TargetIsRoot { conn: conn.id }),
                _ => {}
            }
            if let Port::Slot { .. } | Port::Param { .. } = conn.source {
                if self.port_binding(conn.source) != Some(conn.id) {
                    out.push(Violation::BindingMismatch { port: conn.source });
                }
            }
        }

        for node in self.nodes.values() {
            let ports: Vec<(Port, Option<ConnId>)> = match &node.kind {
                NodeKind::Variable(v) => v
                    .slots
                    .iter()
                    .enumerate()
                    .map(|(index, s)| (Port::Slot { node: node.id, index }, s.binding))
                    .collect(),
                NodeKind::Relation(r) => {
                    if let Some(a) = r.anchor {
                        if r.params.get(a).is_none_or(|p| p.binding.is_some()) {
                            out.push(Violation::BadAnchor { node: node.id });
                        }
                    }
                    r.params
                        .iter()
                        .enumerate()
                        .map(|(index, p)| (Port::Param { node: node.id, index }, p.binding))
                        .collect()
                }
                _ => Vec::new(),
            };
            for (port, binding) in ports {
                if let Some(c) = binding {
                    if self.connection(c).is_none_or(|conn| conn.source != port) {
                        out.push(Violation::BindingMismatch { port });
                    }
                }
            }

            let in_degree = self.incoming(node.id).len();
            match &node.kind {
                NodeKind::Operator(kind) => {
                    if in_degree > 1 {
                        out.push(Violation::InDegree { node: node.id, degree: in_degree });
                    }
                    let degree = self.operands(node.id).len();
                    if *kind == OperatorKind::Not && degree > 1 {
                        out.push(Violation::NotArity { node: node.id, operands: degree });
                    }
                }
                NodeKind::Relation(_) if in_degree > 1 => {
                    out.push(Violation::InDegree { node: node.id, degree: in_degree });
                }
                NodeKind::Variable(v) if !is_variable_name(&v.name) => {
                    out.push(Violation::MalformedName { node: node.id, name: v.name.clone() });
                }
                _ => {}
            }
        }

        if !dangling {
            self.check_kind_table(&mut out);
        }

        let mut names: BTreeMap<&str, usize> = BTreeMap::new();
        for node in self.nodes.values() {
            if let Some(v) = node.as_variable() {
                *names.entry(v.name.as_str()).or_default() += 1;
            }
        }
        for (name, count) in names {
            if count > 1 {
                out.push(Violation::DuplicateName { name: name.to_string() });
            }
        }

        if let Some(node) = self.find_cycle() {
            out.push(Violation::Cycle { node });
        }
        out
    }

    /// Which node kinds may sit behind which port kinds.
    fn check_kind_table(&self, out: &mut Vec<Violation>) {
        for conn in self.connections.values() {
            let Some(target) = self.node(conn.target) else {
                continue;
            };
            let scope = self.scope_of_port(conn.source);
            let top_level = scope == Scope::Root;
            match &target.kind {
                NodeKind::Instance(_) if top_level => {
                    out.push(Violation::KindNotAllowed { conn: conn.id, reason: "instance at top level" })
                }
                NodeKind::Relation(r) => {
                    let ok = match scope {
                        Scope::Root => r.anchor.is_none(),
                        Scope::Port(_) => r.anchor.is_some(),
                        Scope::Detached => true,
                    };
                    if !ok {
                        out.push(Violation::KindNotAllowed {
                            conn: conn.id,
                            reason: if top_level {
                                "value-anchored relation at top level"
                            } else {
                                "top-level relation used as a value"
                            },
                        });
                    }
                }
                NodeKind::Variable(_)
                    if self.is_root_operand_port(conn.source) && self.incoming(target.id).len() != 1 =>
                {
                    out.push(Violation::SharedTopLevelOperand { node: target.id })
                }
                _ => {}
            }
        }
    }

    fn find_cycle(&self) -> Option<NodeId> {
        // Kahn's algorithm; whatever is left over sits on or behind a cycle.
        let mut indegree: BTreeMap<NodeId, usize> = self.nodes.keys().map(|k| (*k, 0)).collect();
        for c in self.connections.values() {
            if let Some(d) = indegree.get_mut(&c.target) {
                *d += 1;
            }
        }
        let mut queue: VecDeque<NodeId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(k, _)| *k)
            .collect();
        let mut removed = 0;
        while let Some(n) = queue.pop_front() {
            removed += 1;
            for c in self.outgoing(n) {
                if let Some(d) = indegree.get_mut(&c.target) {
                    *d -= 1;
                    if *d == 0 {
                        queue.push_back(c.target);
                    }
                }
            }
        }
        if removed == self.nodes.len() {
            None
        } else {
            indegree.into_iter().find(|(_, d)| *d > 0).map(|(k, _)| k)
        }
    }

    /// Structural checks plus the arity requirements a graph must meet before
    /// text can be generated. Only operators reachable from `Start` count.
    pub fn validate_complete(&self) -> Vec<Violation> {
        let mut out = self.validate_structural();
        if self.outgoing(Self::ROOT).is_empty() {
            out.push(Violation::EmptyAxiom);
        }
        for id in self.reachable_from_start() {
            if let Some(kind) = self.node(id).and_then(Node::as_operator) {
                let operands = self.operands(id).len();
                let ok = match kind {
                    OperatorKind::Not => operands == 1,
                    OperatorKind::And | OperatorKind::Or => operands >= 2,
                };
                if !ok {
                    out.push(Violation::IncompleteOperator { node: id, kind, operands });
                }
            }
        }
        out
    }

    /// A relabelled copy in which node and connection ids follow creation
    /// order starting from zero, with counters dropped. Two graphs are
    /// isomorphic under order-preserving renumbering iff their canonical
    /// forms are equal.
    pub fn canonical_form(&self) -> CanonicalGraph {
        let node_map: BTreeMap<NodeId, NodeId> = self
            .nodes
            .keys()
            .enumerate()
            .map(|(i, k)| (*k, NodeId(i as u32)))
            .collect();
        let conn_map: BTreeMap<ConnId, ConnId> = self
            .connections
            .keys()
            .enumerate()
            .map(|(i, k)| (*k, ConnId(i as u32)))
            .collect();
        let mn = |n: NodeId| node_map.get(&n).copied().unwrap_or(n);
        let mc = |c: ConnId| conn_map.get(&c).copied().unwrap_or(c);
        let mp = |p: Port| match p {
            Port::Root => Port::Root,
            Port::Slot { node, index } => Port::Slot { node: mn(node), index },
            Port::Param { node, index } => Port::Param { node: mn(node), index },
            Port::Operator { node } => Port::Operator { node: mn(node) },
        };
        let nodes = self
            .nodes
            .values()
            .map(|n| {
                let mut n = n.clone();
                n.id = mn(n.id);
                match &mut n.kind {
                    NodeKind::Variable(v) => {
                        for s in &mut v.slots {
                            s.binding = s.binding.map(mc);
                        }
                    }
                    NodeKind::Relation(r) => {
                        for p in &mut r.params {
                            p.binding = p.binding.map(mc);
                        }
                    }
                    _ => {}
                }
                n
            })
            .collect();
        let connections = self
            .connections
            .values()
            .map(|c| Connection {
                id: mc(c.id),
                source: mp(c.source),
                target: mn(c.target),
            })
            .collect();
        CanonicalGraph {
            name: self.name.clone(),
            nodes,
            connections,
        }
    }

    pub fn is_isomorphic(&self, other: &AxiomGraph) -> bool {
        self.canonical_form() == other.canonical_form()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalGraph {
    pub name: String,
    pub nodes: Vec<Node>,
    pub connections: Vec<Connection>,
}

/// `?` followed by an identifier.
pub fn is_variable_name(name: &str) -> bool {
    let Some(rest) = name.strip_prefix('?') else {
        return false;
    };
    let mut chars = rest.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Violation {
    MissingRoot,
    ExtraRoot { node: NodeId },
    MisfiledNode { node: NodeId },
    DanglingSource { conn: ConnId },
    DanglingTarget { conn: ConnId },
    TargetIsRoot { conn: ConnId },
    BindingMismatch { port: Port },
    BadAnchor { node: NodeId },
    InDegree { node: NodeId, degree: usize },
    NotArity { node: NodeId, operands: usize },
    KindNotAllowed { conn: ConnId, reason: &'static str },
    SharedTopLevelOperand { node: NodeId },
    MalformedName { node: NodeId, name: String },
    DuplicateName { name: String },
    Cycle { node: NodeId },
    EmptyAxiom,
    IncompleteOperator { node: NodeId, kind: OperatorKind, operands: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingRoot => write!(f, "the axiom has no Start node"),
            Violation::ExtraRoot { node } => write!(f, "{node} is a second Start node"),
            Violation::MisfiledNode { node } => write!(f, "{node} is stored under the wrong id"),
            Violation::DanglingSource { conn } => write!(f, "{conn} starts at a missing port"),
            Violation::DanglingTarget { conn } => write!(f, "{conn} points at a missing node"),
            Violation::TargetIsRoot { conn } => write!(f, "{conn} points at Start"),
            Violation::BindingMismatch { port } => {
                write!(f, "port {port} disagrees with its connection")
            }
            Violation::BadAnchor { node } => write!(f, "{node} has an invalid value parameter"),
            Violation::InDegree { node, degree } => {
                write!(f, "{node} has {degree} incoming connections, at most one allowed")
            }
            Violation::NotArity { node, operands } => {
                write!(f, "arity violation: NOT {node} has {operands} operands")
            }
            Violation::KindNotAllowed { conn, reason } => write!(f, "{conn}: {reason}"),
            Violation::SharedTopLevelOperand { node } => {
                write!(f, "{node} is a top-level operand and may not be referenced elsewhere")
            }
            Violation::MalformedName { node, name } => {
                write!(f, "{node} has malformed variable name `{name}`")
            }
            Violation::DuplicateName { name } => write!(f, "variable name {name} is used twice"),
            Violation::Cycle { node } => write!(f, "cycle through {node}"),
            Violation::EmptyAxiom => write!(f, "empty axiom"),
            Violation::IncompleteOperator { node, kind, operands } => {
                write!(f, "incomplete operator: {kind} {node} has {operands} operand(s)")
            }
        }
    }
}
