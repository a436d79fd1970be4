//! Parsed ontology vocabulary: the building blocks every axiom is made from.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Absolute identifier of an ontology (or namespace).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Iri(String);

impl Iri {
    /// Returns `None` for empty text.
    pub fn new(value: impl Into<String>) -> Option<Self> {
        let value = value.into();
        if value.trim().is_empty() {
            None
        } else {
            Some(Iri(value))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A resolved reference to a concept, relation or instance: the declaring
/// ontology plus the local identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementKey {
    pub ontology: Iri,
    pub id: String,
}

impl ElementKey {
    pub fn new(ontology: Iri, id: impl Into<String>) -> Self {
        ElementKey {
            ontology,
            id: id.into(),
        }
    }

    /// Parses `<ontologyIRI>#<id>`, splitting at the last `#`.
    pub fn parse_qualified(text: &str) -> Option<Self> {
        let (iri, id) = text.rsplit_once('#')?;
        if id.is_empty() {
            return None;
        }
        Some(ElementKey::new(Iri::new(iri)?, id))
    }
}

impl fmt::Display for ElementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.ontology, self.id)
    }
}

/// A resolved concept reference.
pub type ConceptRef = ElementKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Builtin {
    #[serde(rename = "_string")]
    String,
    #[serde(rename = "_integer")]
    Integer,
    #[serde(rename = "_decimal")]
    Decimal,
    #[serde(rename = "_boolean")]
    Boolean,
    #[serde(rename = "_date")]
    Date,
}

impl Builtin {
    pub const ALL: [Builtin; 5] = [
        Builtin::String,
        Builtin::Integer,
        Builtin::Decimal,
        Builtin::Boolean,
        Builtin::Date,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::String => "_string",
            Builtin::Integer => "_integer",
            Builtin::Decimal => "_decimal",
            Builtin::Boolean => "_boolean",
            Builtin::Date => "_date",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    /// A value that conforms to the datatype; used for menu templates.
    pub fn sample_value(self) -> &'static str {
        match self {
            Builtin::String => "",
            Builtin::Integer => "0",
            Builtin::Decimal => "0.0",
            Builtin::Boolean => "true",
            Builtin::Date => "2000-01-01",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A type as written in an ontology document: a datatype or a concept
/// identifier that the store resolves later.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TypeRef {
    Builtin(Builtin),
    Concept(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Builtin(b) => b.fmt(f),
            TypeRef::Concept(c) => f.write_str(c),
        }
    }
}

/// A type after resolution against the store.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueType {
    Builtin(Builtin),
    Concept(ConceptRef),
    /// A concept declared in an ontology that is not loaded.
    Unresolved(String),
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueType::Builtin(b) => b.fmt(f),
            ValueType::Concept(c) => f.write_str(&c.id),
            ValueType::Unresolved(raw) => write!(f, "{raw} (unresolved)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Literal {
    String(String),
    Integer(String),
    Decimal(String),
    Boolean(bool),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => write!(f, "\"{}\"", escape_string(s)),
            Literal::Integer(v) | Literal::Decimal(v) => f.write_str(v),
            Literal::Boolean(b) => write!(f, "{b}"),
        }
    }
}

pub(crate) fn escape_string(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\\n")
}

/// Non-functional property: kept verbatim for display.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfpEntry {
    pub key: String,
    pub value: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Namespace {
    /// `None` for the default namespace.
    pub prefix: Option<String>,
    pub iri: Iri,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttributeConstraint {
    #[serde(rename = "ofType")]
    OfType,
    #[serde(rename = "impliesType")]
    ImpliesType,
}

impl AttributeConstraint {
    pub fn keyword(self) -> &'static str {
        match self {
            AttributeConstraint::OfType => "ofType",
            AttributeConstraint::ImpliesType => "impliesType",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeDef {
    pub name: String,
    pub constraint: AttributeConstraint,
    /// Parsed and kept, never enforced.
    pub cardinality: Option<(u32, u32)>,
    pub range: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    /// Super-concept identifiers as written; resolved by the store.
    pub super_concepts: Vec<String>,
    pub attributes: Vec<AttributeDef>,
    pub nfp: Vec<NfpEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDef {
    pub id: String,
    pub parameters: Vec<TypeRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Value {
    Identifier(String),
    Literal(Literal),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Identifier(id) => f.write_str(id),
            Value::Literal(l) => l.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDef {
    pub id: String,
    pub member_of: String,
    pub values: Vec<(String, Value)>,
    pub nfp: Vec<NfpEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub relation: String,
    pub args: Vec<Value>,
}

/// An ontology axiom, kept as normalized text and never interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpaqueAxiom {
    pub id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ontology {
    pub iri: Iri,
    pub variant: Option<Iri>,
    pub namespaces: Vec<Namespace>,
    pub imports: Vec<Iri>,
    pub nfp: Vec<NfpEntry>,
    pub concepts: Vec<Concept>,
    pub relations: Vec<RelationDef>,
    pub instances: Vec<InstanceDef>,
    pub relation_instances: Vec<RelationInstance>,
    pub axioms: Vec<OpaqueAxiom>,
}

impl Ontology {
    pub fn new(iri: Iri) -> Self {
        Ontology {
            iri,
            variant: None,
            namespaces: Vec::new(),
            imports: Vec::new(),
            nfp: Vec::new(),
            concepts: Vec::new(),
            relations: Vec::new(),
            instances: Vec::new(),
            relation_instances: Vec::new(),
            axioms: Vec::new(),
        }
    }

    pub fn concept(&self, id: &str) -> Option<&Concept> {
        self.concepts.iter().find(|c| c.id == id)
    }

    pub fn relation(&self, id: &str) -> Option<&RelationDef> {
        self.relations.iter().find(|r| r.id == id)
    }

    pub fn instance(&self, id: &str) -> Option<&InstanceDef> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn namespace(&self, prefix: &str) -> Option<&Iri> {
        self.namespaces
            .iter()
            .find(|ns| ns.prefix.as_deref() == Some(prefix))
            .map(|ns| &ns.iri)
    }
}
