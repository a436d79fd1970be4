#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use axiomforge_core::engine::{
    candidate_universe, BindingSpec, EditCommand, Endpoint, InstanceSpec, Selection,
};
use axiomforge_core::model::{AxiomGraph, ConnId, Coords, NodeId, NodeKind, OperatorKind, Port};
use axiomforge_core::ontology::{Builtin, ElementKey, Iri};
use axiomforge_core::store::OntologyStore;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// Graphs past this size get pruned by biased deletes.
pub const MAX_NODES: usize = 25;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ontologies")
}

pub fn fixture_store() -> OntologyStore {
    let mut store = OntologyStore::new(fixtures_dir());
    store.load_file(&fixtures_dir().join("sociology.wsml")).unwrap();
    store.load_file(&fixtures_dir().join("biology.wsml")).unwrap();
    store
}

pub fn soc(id: &str) -> ElementKey {
    ElementKey::new(Iri::new("http://example.org/sociology").unwrap(), id)
}

pub fn bio(id: &str) -> ElementKey {
    ElementKey::new(Iri::new("http://example.org/biology").unwrap(), id)
}

/// Every selection the menu can be asked about in this graph.
pub fn selections(graph: &AxiomGraph) -> Vec<Selection> {
    let mut out = vec![Selection::Canvas];
    out.extend(graph.nodes().map(|n| Selection::Node { node: n.id }));
    out.extend(graph.connections().map(|c| Selection::Connection { connection: c.id }));
    out.extend(graph.ports().into_iter().map(|port| Selection::Port { port }));
    out
}

/// A command for `graph`: mostly drawn from some selection's candidate
/// space, otherwise assembled from random (often invalid) arguments.
pub fn random_command(rng: &mut StdRng, graph: &AxiomGraph, store: &OntologyStore) -> EditCommand {
    let ids: Vec<NodeId> = graph.nodes().map(|n| n.id).filter(|id| *id != AxiomGraph::ROOT).collect();
    if graph.node_count() > MAX_NODES && rng.gen_bool(0.5) {
        return EditCommand::Delete {
            node: *ids.choose(rng).unwrap(),
        };
    }
    if rng.gen_bool(0.65) {
        let sels = selections(graph);
        let sel = *sels.choose(rng).unwrap();
        let universe = candidate_universe(graph, store, sel);
        if let Some(cmd) = universe.choose(rng) {
            return cmd.clone();
        }
    }
    Wild { rng, graph, store }.command()
}

struct Wild<'a> {
    rng: &'a mut StdRng,
    graph: &'a AxiomGraph,
    store: &'a OntologyStore,
}

const VALUES: &[&str] = &["abc", "12", "-3", "1.5", "true", "2020-01-01", "x y", ""];
const NAMES: &[&str] = &["?a", "?person", "?hasEmployer", "bad", "?x1", "?", "?b c"];

impl Wild<'_> {
    fn node(&mut self) -> NodeId {
        let ids: Vec<NodeId> = self.graph.nodes().map(|n| n.id).collect();
        if self.rng.gen_bool(0.05) {
            NodeId(999)
        } else {
            *ids.choose(self.rng).unwrap()
        }
    }

    fn connection(&mut self) -> ConnId {
        let ids: Vec<ConnId> = self.graph.connections().map(|c| c.id).collect();
        match ids.choose(self.rng) {
            Some(id) if self.rng.gen_bool(0.95) => *id,
            _ => ConnId(999),
        }
    }

    fn port(&mut self) -> Port {
        let ports = self.graph.ports();
        if self.rng.gen_bool(0.05) {
            Port::Slot {
                node: self.node(),
                index: self.rng.gen_range(0..6),
            }
        } else {
            *ports.choose(self.rng).unwrap()
        }
    }

    fn pick(&mut self, mut keys: Vec<ElementKey>) -> ElementKey {
        keys.push(ElementKey::new(Iri::new("urn:nowhere").unwrap(), "Ghost"));
        keys.choose(self.rng).unwrap().clone()
    }

    fn concept(&mut self) -> ElementKey {
        let keys = self.store.concepts();
        self.pick(keys)
    }

    fn operator(&mut self) -> OperatorKind {
        *OperatorKind::ALL.choose(self.rng).unwrap()
    }

    fn literal(&mut self) -> (Builtin, String) {
        (
            *Builtin::ALL.choose(self.rng).unwrap(),
            VALUES.choose(self.rng).unwrap().to_string(),
        )
    }

    fn at(&mut self) -> Option<Coords> {
        self.rng
            .gen_bool(0.5)
            .then(|| Coords::new(self.rng.gen_range(-500..500), self.rng.gen_range(-500..500)))
    }

    fn binding(&mut self, depth: u32) -> BindingSpec {
        let top = if depth == 0 { 8 } else { 9 };
        match self.rng.gen_range(0..top) {
            0 => BindingSpec::DefaultConcept,
            1 => BindingSpec::Subconcept {
                concept: self.concept(),
            },
            2 => {
                let keys = self.store.instances();
                BindingSpec::Instance {
                    instance: self.pick(keys),
                }
            }
            3 => {
                let (datatype, value) = self.literal();
                BindingSpec::Literal { datatype, value }
            }
            4 => {
                let keys = self.store.relations();
                BindingSpec::Relation {
                    relation: self.pick(keys),
                    param: self.rng.gen_range(0..3),
                }
            }
            5 => BindingSpec::ExistingVariable { node: self.node() },
            6 => BindingSpec::SharedVariable { node: self.node() },
            7 => BindingSpec::Node { node: self.node() },
            _ => {
                let n = self.rng.gen_range(1..=3);
                BindingSpec::Operator {
                    operator: self.operator(),
                    operands: (0..n).map(|_| self.binding(depth - 1)).collect(),
                }
            }
        }
    }

    fn command(&mut self) -> EditCommand {
        match self.rng.gen_range(0..16) {
            0 => EditCommand::CreateVariable {
                concept: self.concept(),
                shared: self.rng.gen_bool(0.2),
                at: self.at(),
            },
            1 => EditCommand::CreateOperator {
                operator: self.operator(),
                at: self.at(),
            },
            2 => {
                let instance = if self.rng.gen_bool(0.5) {
                    let keys = self.store.instances();
                    InstanceSpec::Ontology {
                        instance: self.pick(keys),
                    }
                } else {
                    let (datatype, value) = self.literal();
                    InstanceSpec::Literal { datatype, value }
                };
                EditCommand::CreateInstance {
                    instance,
                    at: self.at(),
                }
            }
            3 => {
                let keys = self.store.relations();
                EditCommand::CreateRelation {
                    relation: self.pick(keys),
                    at: self.at(),
                }
            }
            4 => EditCommand::RefineAttribute {
                node: self.node(),
                slot: self.rng.gen_range(0..4),
                binding: self.binding(2),
                at: self.at(),
            },
            5 => EditCommand::RefineParameter {
                node: self.node(),
                param: self.rng.gen_range(0..3),
                binding: self.binding(2),
                at: self.at(),
            },
            6 => EditCommand::Involve {
                variable: self.node(),
                relation: self.node(),
                param: self.rng.gen_range(0..3),
            },
            7 => EditCommand::Rename {
                node: self.node(),
                name: NAMES.choose(self.rng).unwrap().to_string(),
            },
            8 => EditCommand::Delete { node: self.node() },
            9 => EditCommand::SetOperator {
                node: self.node(),
                operator: self.operator(),
            },
            10 => EditCommand::AddOperand {
                node: self.node(),
                operand: self.binding(1),
                at: self.at(),
            },
            11 => EditCommand::SetValue {
                node: self.node(),
                value: VALUES.choose(self.rng).unwrap().to_string(),
            },
            12 => {
                let second = self.rng.gen_bool(0.7).then(|| self.binding(1));
                EditCommand::Insert {
                    connection: self.connection(),
                    operator: self.operator(),
                    second,
                    at: self.at(),
                }
            }
            13 => {
                let endpoint = if self.rng.gen_bool(0.5) {
                    Endpoint::Source { port: self.port() }
                } else {
                    Endpoint::Target { node: self.node() }
                };
                EditCommand::Reconnect {
                    connection: self.connection(),
                    endpoint,
                }
            }
            14 => EditCommand::Connect {
                source: self.port(),
                target: self.node(),
            },
            _ => EditCommand::Move {
                node: self.node(),
                at: Coords::new(self.rng.gen_range(-500..500), self.rng.gen_range(-500..500)),
            },
        }
    }
}

/// A random super-concept DAG: concept `i` only takes parents among
/// `0..i`, so the relation is acyclic by construction. Attribute names are
/// unique per concept.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub parents: Vec<Vec<usize>>,
    pub attributes: Vec<Vec<String>>,
}

pub fn random_hierarchy(rng: &mut StdRng, max_concepts: usize, max_parents: usize) -> Hierarchy {
    let n = rng.gen_range(1..=max_concepts);
    let mut parents = Vec::with_capacity(n);
    let mut attributes = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(0..=max_parents.min(i));
        let mut pool: Vec<usize> = (0..i).collect();
        pool.shuffle(rng);
        parents.push(pool.into_iter().take(k).collect());
        let a = rng.gen_range(0..=2);
        attributes.push((0..a).map(|j| format!("a{i}x{j}")).collect());
    }
    Hierarchy {
        parents,
        attributes,
    }
}

impl Hierarchy {
    pub fn len(&self) -> usize {
        self.parents.len()
    }

    /// WSML source declaring the hierarchy, concepts in shuffled order.
    pub fn to_wsml(&self, iri: &str, rng: &mut StdRng) -> String {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(rng);
        let mut out = format!("ontology _\"{iri}\"\n");
        for i in order {
            out.push_str(&format!("concept C{i}"));
            if !self.parents[i].is_empty() {
                let names: Vec<String> = self.parents[i].iter().map(|p| format!("C{p}")).collect();
                out.push_str(&format!(" subConceptOf {{{}}}", names.join(", ")));
            }
            out.push('\n');
            for a in &self.attributes[i] {
                out.push_str(&format!("  {a} ofType _string\n"));
            }
        }
        out
    }

    /// Reflexive-transitive closure by repeated relaxation over the parent
    /// lists: `closure[i][j]` iff `Ci` is subsumed by `Cj`.
    pub fn closure(&self) -> Vec<Vec<bool>> {
        let n = self.len();
        let mut m = vec![vec![false; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
            for &p in &self.parents[i] {
                row[p] = true;
            }
        }
        for k in 0..n {
            let via = m[k].clone();
            for row in m.iter_mut().filter(|row| row[k]) {
                for (cell, &reach) in row.iter_mut().zip(&via) {
                    *cell |= reach;
                }
            }
        }
        m
    }

    /// `(declaring concept, attribute)` pairs over every concept above `i`.
    pub fn inherited(&self, closure: &[Vec<bool>], i: usize) -> BTreeSet<(usize, String)> {
        (0..self.len())
            .filter(|&j| closure[i][j])
            .flat_map(|j| self.attributes[j].iter().map(move |a| (j, a.clone())))
            .collect()
    }
}

/// Identifiers and variables in WSML text, keywords excluded.
pub fn text_identifiers(text: &str) -> BTreeSet<String> {
    use axiomforge_core::wsml::{tokenize, TokenKind};
    tokenize(text)
        .unwrap()
        .into_iter()
        .filter(|t| matches!(t.kind, TokenKind::Identifier | TokenKind::Variable))
        .map(|t| t.lexeme)
        .collect()
}

/// The identifiers the elements reachable from Start should contribute,
/// read off the graph directly.
pub fn expected_identifiers(graph: &AxiomGraph) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for id in graph.reachable_from_start() {
        match &graph.node(id).unwrap().kind {
            NodeKind::Variable(v) => {
                out.insert(v.name.clone());
                out.insert(v.concept.id.clone());
                for s in v.slots.iter().filter(|s| s.binding.is_some()) {
                    out.insert(s.attribute.clone());
                }
            }
            NodeKind::Relation(r) => {
                out.insert(r.relation.id.clone());
            }
            NodeKind::Instance(axiomforge_core::model::InstanceValue::Ontology(k)) => {
                out.insert(k.id.clone());
            }
            _ => {}
        }
    }
    out
}

/// Parameter ports of reachable relations that no connection binds.
pub fn free_reachable_params(graph: &AxiomGraph) -> usize {
    graph
        .reachable_from_start()
        .into_iter()
        .filter_map(|id| graph.node(id).and_then(|n| n.as_relation()))
        .map(|r| r.params.iter().filter(|p| p.binding.is_none()).count())
        .sum()
}
