//! Axiom files: a versioned JSON document holding nodes with their
//! coordinates, connections, and the IRIs of the ontologies the axiom uses.
//! Ontologies are referenced, never embedded; loading an axiom pulls missing
//! ones from the ontology file store.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    AttributeSlot, AxiomGraph, Connection, Coords, InstanceValue, Node, NodeId, NodeKind,
    OperatorKind, ParamSlot, Port, RelationNode, VariableNode,
};
use crate::ontology::{Builtin, ConceptRef, ElementKey, Iri};
use crate::store::{literal_conforms, OntologyStore, StoreError};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum SaveError {
    #[error("refusing to save a structurally invalid axiom: {0}")]
    Invalid(String),
    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt axiom file: {0}")]
    Corrupt(String),
    #[error("unsupported format version {found}; this build reads version {FORMAT_VERSION}")]
    UnsupportedVersion { found: u64 },
    #[error("ontology {0} is not in the ontology file store")]
    MissingOntology(Iri),
    #[error("ontology {iri} could not be loaded: {source}")]
    Ontology {
        iri: Iri,
        #[source]
        source: StoreError,
    },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("invalid axiom: {0}")]
    Invalid(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct AxiomFile {
    format_version: u64,
    name: String,
    ontologies: Vec<Iri>,
    nodes: Vec<NodeRecord>,
    connections: Vec<Connection>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    id: NodeId,
    x: i32,
    y: i32,
    #[serde(flatten)]
    body: NodeBody,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
enum NodeBody {
    Root,
    Variable {
        name: String,
        concept: ConceptRef,
        shared: bool,
        slots: Vec<SlotRecord>,
    },
    Relation {
        relation: ElementKey,
        anchor: Option<usize>,
    },
    Operator {
        operator: OperatorKind,
    },
    Instance {
        instance: ElementKey,
    },
    Literal {
        datatype: Builtin,
        value: String,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SlotRecord {
    origin: ConceptRef,
    attribute: String,
}

fn record(node: &Node) -> NodeRecord {
    let body = match &node.kind {
        NodeKind::Root => NodeBody::Root,
        NodeKind::Variable(v) => NodeBody::Variable {
            name: v.name.clone(),
            concept: v.concept.clone(),
            shared: v.shared,
            slots: v
                .slots
                .iter()
                .map(|s| SlotRecord {
                    origin: s.origin.clone(),
                    attribute: s.attribute.clone(),
                })
                .collect(),
        },
        NodeKind::Relation(r) => NodeBody::Relation {
            relation: r.relation.clone(),
            anchor: r.anchor,
        },
        NodeKind::Operator(k) => NodeBody::Operator { operator: *k },
        NodeKind::Instance(InstanceValue::Ontology(key)) => NodeBody::Instance {
            instance: key.clone(),
        },
        NodeKind::Instance(InstanceValue::Literal { datatype, value }) => NodeBody::Literal {
            datatype: *datatype,
            value: value.clone(),
        },
    };
    NodeRecord {
        id: node.id,
        x: node.coords.x,
        y: node.coords.y,
        body,
    }
}

/// The document as a JSON value with every object's keys in sorted order.
pub fn to_json(graph: &AxiomGraph) -> Value {
    let file = AxiomFile {
        format_version: FORMAT_VERSION,
        name: graph.name.clone(),
        ontologies: graph.referenced_ontologies().iter().cloned().collect(),
        nodes: graph.nodes().map(record).collect(),
        connections: graph.connections().cloned().collect(),
    };
    sort_keys(serde_json::to_value(file).expect("axiom documents always serialize"))
}

fn sort_keys(value: Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sort_keys(v))).collect())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

pub fn to_text(graph: &AxiomGraph) -> String {
    let mut text = serde_json::to_string_pretty(&to_json(graph)).expect("JSON values serialize");
    text.push('\n');
    text
}

/// Writes the axiom atomically. Incomplete axioms are fine; structurally
/// broken ones are refused.
pub fn save_axiom(graph: &AxiomGraph, path: &Path) -> Result<(), SaveError> {
    let violations = graph.validate_structural();
    if let Some(v) = violations.first() {
        return Err(SaveError::Invalid(v.to_string()));
    }
    let io = |source| SaveError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(to_text(graph).as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn load_axiom(store: &mut OntologyStore, path: &Path) -> Result<AxiomGraph, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_axiom(store, &text)
}

/// Rebuilds a graph from document text, loading referenced ontologies from
/// the file store first. Every referenced ontology is located before any is
/// loaded, so a missing one leaves the store untouched.
pub fn parse_axiom(store: &mut OntologyStore, text: &str) -> Result<AxiomGraph, LoadError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| LoadError::Corrupt(e.to_string()))?;
    let version = value
        .get("formatVersion")
        .and_then(Value::as_u64)
        .ok_or_else(|| LoadError::Corrupt("missing formatVersion".into()))?;
    if version > FORMAT_VERSION || version == 0 {
        return Err(LoadError::UnsupportedVersion { found: version });
    }
    let file: AxiomFile =
        serde_json::from_value(value).map_err(|e| LoadError::Corrupt(e.to_string()))?;

    for iri in file.ontologies.iter().filter(|iri| !store.contains(iri)) {
        match store.find_in_file_store(iri) {
            Ok(Some(_)) => {}
            Ok(None) => return Err(LoadError::MissingOntology(iri.clone())),
            Err(source) => {
                return Err(LoadError::Ontology {
                    iri: iri.clone(),
                    source,
                })
            }
        }
    }
    for iri in &file.ontologies {
        match store.load_imported_ontology(iri) {
            Ok(()) => {}
            Err(StoreError::NotFound(iri)) => return Err(LoadError::MissingOntology(iri)),
            Err(source) => {
                return Err(LoadError::Ontology {
                    iri: iri.clone(),
                    source,
                })
            }
        }
    }

    let listed = |key: &ElementKey| {
        if file.ontologies.contains(&key.ontology) {
            Ok(())
        } else {
            Err(LoadError::Invalid(format!(
                "{key} belongs to an ontology the file does not list"
            )))
        }
    };
    let mut nodes = Vec::with_capacity(file.nodes.len());
    for rec in &file.nodes {
        if nodes.iter().any(|n: &Node| n.id == rec.id) {
            return Err(LoadError::Invalid(format!("node id {} appears twice", rec.id)));
        }
        let kind = match &rec.body {
            NodeBody::Root => NodeKind::Root,
            NodeBody::Variable {
                name,
                concept,
                shared,
                slots,
            } => {
                listed(concept)?;
                if store.concept(concept).is_none() {
                    return Err(LoadError::DanglingReference(format!("concept {concept}")));
                }
                let mut resolved = Vec::with_capacity(slots.len());
                for slot in slots {
                    listed(&slot.origin)?;
                    let def = store.attribute(&slot.origin, &slot.attribute).ok_or_else(|| {
                        LoadError::DanglingReference(format!(
                            "attribute {} of {}",
                            slot.attribute, slot.origin
                        ))
                    })?;
                    resolved.push(AttributeSlot {
                        origin: slot.origin.clone(),
                        attribute: slot.attribute.clone(),
                        range: def.range.clone(),
                        binding: None,
                    });
                }
                NodeKind::Variable(VariableNode {
                    name: name.clone(),
                    concept: concept.clone(),
                    slots: resolved,
                    shared: *shared,
                })
            }
            NodeBody::Relation { relation, anchor } => {
                listed(relation)?;
                let def = store
                    .relation(relation)
                    .ok_or_else(|| LoadError::DanglingReference(format!("relation {relation}")))?;
                if anchor.is_some_and(|k| k >= def.parameters.len()) {
                    return Err(LoadError::Invalid(format!(
                        "{relation} has no parameter {}",
                        anchor.unwrap_or_default() + 1
                    )));
                }
                NodeKind::Relation(RelationNode {
                    relation: relation.clone(),
                    params: def
                        .parameters
                        .iter()
                        .map(|p| ParamSlot {
                            param_type: p.clone(),
                            binding: None,
                        })
                        .collect(),
                    anchor: *anchor,
                })
            }
            NodeBody::Operator { operator } => NodeKind::Operator(*operator),
            NodeBody::Instance { instance } => {
                listed(instance)?;
                if store.instance(instance).is_none() {
                    return Err(LoadError::DanglingReference(format!("instance {instance}")));
                }
                NodeKind::Instance(InstanceValue::Ontology(instance.clone()))
            }
            NodeBody::Literal { datatype, value } => {
                if !literal_conforms(value, *datatype) {
                    return Err(LoadError::Invalid(format!(
                        "`{value}` is not a valid {datatype}"
                    )));
                }
                NodeKind::Instance(InstanceValue::Literal {
                    datatype: *datatype,
                    value: value.clone(),
                })
            }
        };
        nodes.push(Node {
            id: rec.id,
            coords: Coords::new(rec.x, rec.y),
            kind,
        });
    }

    let mut graph = AxiomGraph::from_parts(file.name.clone(), nodes, Vec::new());
    for conn in file.connections {
        if graph.connection(conn.id).is_some() {
            return Err(LoadError::Invalid(format!("connection id {} appears twice", conn.id)));
        }
        if !graph.port_exists(conn.source) {
            return Err(LoadError::Invalid(format!(
                "{} starts at missing port {}",
                conn.id, conn.source
            )));
        }
        if matches!(conn.source, Port::Slot { .. } | Port::Param { .. })
            && graph.port_binding(conn.source).is_some()
        {
            return Err(LoadError::Invalid(format!("port {} is bound twice", conn.source)));
        }
        graph.restore_connection(conn);
    }
    graph.refresh_references();
    let violations = graph.validate_structural();
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(LoadError::Invalid(text.join("; ")));
    }
    Ok(graph)
}
