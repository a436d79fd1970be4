//! The in-memory ontology store: every loaded ontology, keyed by IRI, plus
//! the subsumption, inheritance and compatibility queries the editor is
//! built on.
//!
//! Element identifiers inside an ontology document are resolved relative to
//! the declaring ontology: a `prefix#local` name goes through the document's
//! namespace table; a bare name is looked up in the ontology itself and then
//! in each of its imports, in declaration order. References into ontologies
//! that are not loaded stay unresolved and contribute nothing.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::ontology::{
    AttributeDef, Builtin, Concept, ConceptRef, ElementKey, InstanceDef, Iri, Ontology,
    RelationDef, TypeRef, ValueType,
};
use crate::wsml::{self, ParseDiagnostic, TokenKind};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("ontology {0} is already loaded with different content")]
    DuplicateIri(Iri),
    #[error("super-concept cycle through {0}")]
    SuperConceptCycle(ConceptRef),
    #[error("no file in the ontology file store declares {0}")]
    NotFound(Iri),
    #[error("{} does not parse: {}", path.display(), first_error(diagnostics))]
    Parse {
        path: PathBuf,
        diagnostics: Vec<ParseDiagnostic>,
    },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn first_error(diagnostics: &[ParseDiagnostic]) -> String {
    diagnostics
        .iter()
        .find(|d| d.is_error())
        .map(ToString::to_string)
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Registration {
    Added,
    AlreadyLoaded,
}

/// An attribute available on a concept, with the concept that declares it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InheritedAttribute {
    pub origin: ConceptRef,
    pub def: AttributeDef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ElementKind {
    Concept,
    Relation,
    Instance,
}

#[derive(Debug, Clone)]
pub struct OntologyStore {
    ontologies: Vec<Ontology>,
    file_store_dir: PathBuf,
    /// Resolved direct super-concepts, rebuilt whenever an ontology is added.
    supers: HashMap<ConceptRef, Vec<ConceptRef>>,
}

impl Default for OntologyStore {
    fn default() -> Self {
        OntologyStore::new("./ontologies")
    }
}

impl OntologyStore {
    pub fn new(file_store_dir: impl Into<PathBuf>) -> Self {
        OntologyStore {
            ontologies: Vec::new(),
            file_store_dir: file_store_dir.into(),
            supers: HashMap::new(),
        }
    }

    pub fn file_store_dir(&self) -> &Path {
        &self.file_store_dir
    }

    /// Loaded ontologies in registration order.
    pub fn ontologies(&self) -> impl Iterator<Item = &Ontology> {
        self.ontologies.iter()
    }

    pub fn len(&self) -> usize {
        self.ontologies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ontologies.is_empty()
    }

    pub fn ontology(&self, iri: &Iri) -> Option<&Ontology> {
        self.ontologies.iter().find(|o| &o.iri == iri)
    }

    pub fn contains(&self, iri: &Iri) -> bool {
        self.ontology(iri).is_some()
    }

    pub fn register_ontology(&mut self, ontology: Ontology) -> Result<Registration, StoreError> {
        if let Some(existing) = self.ontology(&ontology.iri) {
            return if *existing == ontology {
                Ok(Registration::AlreadyLoaded)
            } else {
                Err(StoreError::DuplicateIri(ontology.iri))
            };
        }
        self.ontologies.push(ontology);
        self.reindex();
        if let Some(concept) = self.find_cycle() {
            self.ontologies.pop();
            self.reindex();
            return Err(StoreError::SuperConceptCycle(concept));
        }
        Ok(Registration::Added)
    }

    fn reindex(&mut self) {
        let mut supers = HashMap::new();
        for ontology in &self.ontologies {
            for concept in &ontology.concepts {
                let mut resolved: Vec<ConceptRef> = Vec::new();
                for raw in &concept.super_concepts {
                    if let Some(r) = self.resolve_concept(&ontology.iri, raw) {
                        if !resolved.contains(&r) {
                            resolved.push(r);
                        }
                    }
                }
                supers.insert(ElementKey::new(ontology.iri.clone(), &concept.id), resolved);
            }
        }
        self.supers = supers;
    }

    fn find_cycle(&self) -> Option<ConceptRef> {
        for ontology in &self.ontologies {
            for concept in &ontology.concepts {
                let start = ElementKey::new(ontology.iri.clone(), &concept.id);
                let mut seen = HashSet::new();
                let mut queue: VecDeque<ConceptRef> = self.direct_supers(&start).into();
                while let Some(next) = queue.pop_front() {
                    if next == start {
                        return Some(start);
                    }
                    if seen.insert(next.clone()) {
                        queue.extend(self.direct_supers(&next));
                    }
                }
            }
        }
        None
    }

    /// Parses the file and registers the ontology it declares.
    pub fn load_file(&mut self, path: &Path) -> Result<Iri, StoreError> {
        let source = fs::read_to_string(path).map_err(|source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let ontology = wsml::parse_ontology(&source).map_err(|diagnostics| StoreError::Parse {
            path: path.to_path_buf(),
            diagnostics,
        })?;
        let iri = ontology.iri.clone();
        self.register_ontology(ontology)?;
        Ok(iri)
    }

    /// Every `(IRI, file)` the ontology file store offers, sorted by file name.
    pub fn file_store_contents(&self) -> Result<Vec<(Iri, PathBuf)>, StoreError> {
        let entries = match fs::read_dir(&self.file_store_dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(source) => {
                return Err(StoreError::Io {
                    path: self.file_store_dir.clone(),
                    source,
                })
            }
        };
        let mut paths: Vec<PathBuf> = entries
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|ext| ext == "wsml"))
            .collect();
        paths.sort();
        Ok(paths
            .into_iter()
            .filter_map(|path| {
                let source = fs::read_to_string(&path).ok()?;
                let iri = Iri::new(declared_iri(&source)?)?;
                Some((iri, path))
            })
            .collect())
    }

    /// Locates the file in the ontology file store whose declared IRI is
    /// `iri`. The file name plays no part in the lookup.
    pub fn find_in_file_store(&self, iri: &Iri) -> Result<Option<PathBuf>, StoreError> {
        Ok(self
            .file_store_contents()?
            .into_iter()
            .find(|(declared, _)| declared == iri)
            .map(|(_, path)| path))
    }

    /// Loads an ontology from the file store by IRI. Loading an IRI that is
    /// already present is a no-op.
    pub fn load_imported_ontology(&mut self, iri: &Iri) -> Result<(), StoreError> {
        if self.contains(iri) {
            return Ok(());
        }
        let path = self
            .find_in_file_store(iri)?
            .ok_or_else(|| StoreError::NotFound(iri.clone()))?;
        self.load_file(&path)?;
        Ok(())
    }

    fn resolve(&self, from: &Iri, raw: &str, kind: ElementKind) -> Option<ElementKey> {
        let has = |o: &Ontology, id: &str| match kind {
            ElementKind::Concept => o.concept(id).is_some(),
            ElementKind::Relation => o.relation(id).is_some(),
            ElementKind::Instance => o.instance(id).is_some(),
        };
        let origin = self.ontology(from)?;
        if let Some((prefix, local)) = raw.split_once('#') {
            let ns = origin.namespace(prefix)?;
            let trimmed = ns.as_str().trim_end_matches(['#', '/']);
            let target = self
                .ontologies
                .iter()
                .find(|o| o.iri.as_str() == ns.as_str() || o.iri.as_str() == trimmed)?;
            return has(target, local).then(|| ElementKey::new(target.iri.clone(), local));
        }
        if has(origin, raw) {
            return Some(ElementKey::new(origin.iri.clone(), raw));
        }
        origin
            .imports
            .iter()
            .filter_map(|iri| self.ontology(iri))
            .find(|o| has(o, raw))
            .map(|o| ElementKey::new(o.iri.clone(), raw))
    }

    pub fn resolve_concept(&self, from: &Iri, raw: &str) -> Option<ConceptRef> {
        self.resolve(from, raw, ElementKind::Concept)
    }

    pub fn resolve_relation(&self, from: &Iri, raw: &str) -> Option<ElementKey> {
        self.resolve(from, raw, ElementKind::Relation)
    }

    pub fn resolve_instance(&self, from: &Iri, raw: &str) -> Option<ElementKey> {
        self.resolve(from, raw, ElementKind::Instance)
    }

    pub fn resolve_type(&self, from: &Iri, ty: &TypeRef) -> ValueType {
        match ty {
            TypeRef::Builtin(b) => ValueType::Builtin(*b),
            TypeRef::Concept(raw) => self
                .resolve_concept(from, raw)
                .map(ValueType::Concept)
                .unwrap_or_else(|| ValueType::Unresolved(raw.clone())),
        }
    }

    pub fn concept(&self, key: &ConceptRef) -> Option<&Concept> {
        self.ontology(&key.ontology)?.concept(&key.id)
    }

    pub fn relation(&self, key: &ElementKey) -> Option<&RelationDef> {
        self.ontology(&key.ontology)?.relation(&key.id)
    }

    pub fn instance(&self, key: &ElementKey) -> Option<&InstanceDef> {
        self.ontology(&key.ontology)?.instance(&key.id)
    }

    /// All loaded concepts in registration and declaration order.
    pub fn concepts(&self) -> Vec<ConceptRef> {
        self.ontologies
            .iter()
            .flat_map(|o| o.concepts.iter().map(|c| ElementKey::new(o.iri.clone(), &c.id)))
            .collect()
    }

    pub fn relations(&self) -> Vec<ElementKey> {
        self.ontologies
            .iter()
            .flat_map(|o| o.relations.iter().map(|r| ElementKey::new(o.iri.clone(), &r.id)))
            .collect()
    }

    pub fn instances(&self) -> Vec<ElementKey> {
        self.ontologies
            .iter()
            .flat_map(|o| o.instances.iter().map(|i| ElementKey::new(o.iri.clone(), &i.id)))
            .collect()
    }

    /// First concept, relation or instance with the given local id, in
    /// registration order.
    pub fn find_concept_by_id(&self, id: &str) -> Option<ConceptRef> {
        self.concepts().into_iter().find(|k| k.id == id)
    }

    pub fn find_relation_by_id(&self, id: &str) -> Option<ElementKey> {
        self.relations().into_iter().find(|k| k.id == id)
    }

    pub fn find_instance_by_id(&self, id: &str) -> Option<ElementKey> {
        self.instances().into_iter().find(|k| k.id == id)
    }

    /// Resolved direct super-concepts, in declaration order.
    pub fn direct_supers(&self, key: &ConceptRef) -> Vec<ConceptRef> {
        self.supers.get(key).cloned().unwrap_or_default()
    }

    /// Proper ancestors in breadth-first discovery order.
    pub fn ancestors(&self, key: &ConceptRef) -> Vec<ConceptRef> {
        let mut seen: HashSet<ConceptRef> = HashSet::from([key.clone()]);
        let mut order = Vec::new();
        let mut queue: VecDeque<ConceptRef> = VecDeque::from([key.clone()]);
        while let Some(current) = queue.pop_front() {
            for sup in self.direct_supers(&current) {
                if seen.insert(sup.clone()) {
                    order.push(sup.clone());
                    queue.push_back(sup);
                }
            }
        }
        order
    }

    /// Reflexive-transitive subsumption.
    pub fn is_subconcept_of(&self, a: &ConceptRef, b: &ConceptRef) -> bool {
        a == b || self.ancestors(a).contains(b)
    }

    /// Concepts `c` with `c ⊑ of`, in store order.
    pub fn subconcepts_of(&self, of: &ConceptRef) -> Vec<ConceptRef> {
        self.concepts()
            .into_iter()
            .filter(|c| self.is_subconcept_of(c, of))
            .collect()
    }

    /// Own attributes first, then those of each loaded ancestor in discovery
    /// order. A name already seen hides later declarations of the same name.
    pub fn effective_attributes(&self, key: &ConceptRef) -> Vec<InheritedAttribute> {
        let mut out: Vec<InheritedAttribute> = Vec::new();
        let chain = std::iter::once(key.clone()).chain(self.ancestors(key));
        for origin in chain {
            let Some(concept) = self.concept(&origin) else {
                continue;
            };
            for def in &concept.attributes {
                if !out.iter().any(|a| a.def.name == def.name) {
                    out.push(InheritedAttribute {
                        origin: origin.clone(),
                        def: def.clone(),
                    });
                }
            }
        }
        out
    }

    pub fn attribute(&self, origin: &ConceptRef, name: &str) -> Option<&AttributeDef> {
        self.concept(origin)?.attributes.iter().find(|a| a.name == name)
    }

    pub fn attribute_range(&self, origin: &ConceptRef, name: &str) -> Option<ValueType> {
        let def = self.attribute(origin, name)?;
        Some(self.resolve_type(&origin.ontology, &def.range))
    }

    pub fn instance_type(&self, key: &ElementKey) -> Option<ConceptRef> {
        let inst = self.instance(key)?;
        self.resolve_concept(&key.ontology, &inst.member_of)
    }

    pub fn relation_parameter_types(&self, key: &ElementKey) -> Option<Vec<ValueType>> {
        let rel = self.relation(key)?;
        Some(
            rel.parameters
                .iter()
                .map(|p| self.resolve_type(&key.ontology, p))
                .collect(),
        )
    }

    /// Datatypes match exactly; concepts are compatible along subsumption.
    /// Unresolved types are compatible with nothing.
    pub fn compatible(&self, candidate: &ValueType, required: &ValueType) -> bool {
        match (candidate, required) {
            (ValueType::Builtin(a), ValueType::Builtin(b)) => a == b,
            (ValueType::Concept(a), ValueType::Concept(b)) => self.is_subconcept_of(a, b),
            _ => false,
        }
    }

    /// Loaded instances whose concept is subsumed by `ty`.
    pub fn instances_assignable_to(&self, ty: &ValueType) -> Vec<ElementKey> {
        let ValueType::Concept(target) = ty else {
            return Vec::new();
        };
        self.instances()
            .into_iter()
            .filter(|i| {
                self.instance_type(i)
                    .is_some_and(|c| self.is_subconcept_of(&c, target))
            })
            .collect()
    }

    /// Every `(relation, parameter index)` whose parameter accepts `ty`.
    pub fn relations_with_compatible_param(&self, ty: &ValueType) -> Vec<(ElementKey, usize)> {
        let mut out = Vec::new();
        for rel in self.relations() {
            for (k, param) in self
                .relation_parameter_types(&rel)
                .unwrap_or_default()
                .iter()
                .enumerate()
            {
                if self.compatible(ty, param) {
                    out.push((rel.clone(), k));
                }
            }
        }
        out
    }

    pub fn tree_view(&self, iri: &Iri) -> Option<TreeNode> {
        let ontology = self.ontology(iri)?;
        Some(TreeBuilder { store: self, ontology }.build())
    }
}

/// Reads the ontology IRI a document declares without parsing the whole file.
pub fn declared_iri(source: &str) -> Option<String> {
    if let Ok(tokens) = wsml::tokenize(source) {
        return tokens
            .windows(2)
            .find(|w| w[0].is_keyword("ontology") && w[1].kind == TokenKind::Iri)
            .map(|w| w[1].text_value());
    }
    let idx = source.find("ontology")?;
    let rest = source[idx + "ontology".len()..].trim_start();
    let rest = rest.strip_prefix("_\"")?;
    rest.split_once('"').map(|(iri, _)| iri.to_string())
}

/// Lexical check of a literal against a built-in datatype.
pub fn literal_conforms(value: &str, ty: Builtin) -> bool {
    fn signed_digits(s: &str) -> bool {
        let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    }
    match ty {
        Builtin::String => true,
        Builtin::Integer => signed_digits(value),
        Builtin::Decimal => match value.split_once('.') {
            Some((int, frac)) => {
                signed_digits(int) && !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit())
            }
            None => signed_digits(value),
        },
        Builtin::Boolean => value == "true" || value == "false",
        Builtin::Date => {
            let parts: Vec<&str> = value.split('-').collect();
            let [y, m, d] = parts.as_slice() else {
                return false;
            };
            let numeric = |s: &str, len: usize| s.len() == len && s.bytes().all(|b| b.is_ascii_digit());
            if !(numeric(y, 4) && numeric(m, 2) && numeric(d, 2)) {
                return false;
            }
            let (m, d): (u32, u32) = (m.parse().unwrap(), d.parse().unwrap());
            (1..=12).contains(&m) && (1..=31).contains(&d)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    Ontology,
    Group,
    Namespace,
    Import,
    Nfp,
    Concept,
    ExternalConcept,
    Attribute,
    Relation,
    Parameter,
    Instance,
    RelationInstance,
    Axiom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub kind: TreeKind,
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<ElementKey>,
    /// For imports: whether the ontology is loaded. For concepts: whether
    /// this is a repeated occurrence whose subtree is shown elsewhere.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub flag: bool,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    fn leaf(kind: TreeKind, label: impl Into<String>) -> Self {
        TreeNode {
            kind,
            label: label.into(),
            key: None,
            flag: false,
            children: Vec::new(),
        }
    }

    fn group(label: &str, children: Vec<TreeNode>) -> Self {
        TreeNode {
            children,
            ..TreeNode::leaf(TreeKind::Group, label)
        }
    }

    /// Depth-first iterator over this node and its descendants.
    pub fn walk(&self) -> Vec<&TreeNode> {
        let mut out = vec![self];
        for child in &self.children {
            out.extend(child.walk());
        }
        out
    }
}

struct TreeBuilder<'a> {
    store: &'a OntologyStore,
    ontology: &'a Ontology,
}

impl TreeBuilder<'_> {
    fn build(&self) -> TreeNode {
        let o = self.ontology;
        let namespaces = o
            .namespaces
            .iter()
            .map(|ns| {
                TreeNode::leaf(
                    TreeKind::Namespace,
                    match &ns.prefix {
                        Some(p) => format!("{p}: {}", ns.iri),
                        None => format!("(default): {}", ns.iri),
                    },
                )
            })
            .collect();
        let imports = o
            .imports
            .iter()
            .map(|iri| TreeNode {
                flag: self.store.contains(iri),
                ..TreeNode::leaf(TreeKind::Import, iri.as_str())
            })
            .collect();
        let nfp = o
            .nfp
            .iter()
            .map(|e| TreeNode::leaf(TreeKind::Nfp, format!("{} = {}", e.key, e.value)))
            .collect();
        let relations = o
            .relations
            .iter()
            .map(|r| TreeNode {
                key: Some(ElementKey::new(o.iri.clone(), &r.id)),
                children: r
                    .parameters
                    .iter()
                    .enumerate()
                    .map(|(k, p)| TreeNode::leaf(TreeKind::Parameter, format!("#{k}: {p}")))
                    .collect(),
                ..TreeNode::leaf(TreeKind::Relation, &r.id)
            })
            .collect();
        let instances = o
            .instances
            .iter()
            .map(|i| TreeNode {
                key: Some(ElementKey::new(o.iri.clone(), &i.id)),
                children: i
                    .values
                    .iter()
                    .map(|(a, v)| TreeNode::leaf(TreeKind::Attribute, format!("{a} = {v}")))
                    .collect(),
                ..TreeNode::leaf(TreeKind::Instance, format!("{} memberOf {}", i.id, i.member_of))
            })
            .collect();
        let relation_instances = o
            .relation_instances
            .iter()
            .map(|ri| {
                let args: Vec<String> = ri.args.iter().map(ToString::to_string).collect();
                TreeNode::leaf(
                    TreeKind::RelationInstance,
                    format!("{}({})", ri.relation, args.join(", ")),
                )
            })
            .collect();
        let axioms = o
            .axioms
            .iter()
            .map(|a| TreeNode::leaf(TreeKind::Axiom, format!("{}: {}", a.id, a.text)))
            .collect();

        TreeNode {
            children: vec![
                TreeNode::group("Namespaces", namespaces),
                TreeNode::group("Imported ontologies", imports),
                TreeNode::group("Non-functional properties", nfp),
                TreeNode::group("Concepts", self.concept_forest()),
                TreeNode::group("Relations", relations),
                TreeNode::group("Instances", instances),
                TreeNode::group("Relation instances", relation_instances),
                TreeNode::group("Axioms", axioms),
            ],
            key: None,
            flag: false,
            ..TreeNode::leaf(TreeKind::Ontology, o.iri.as_str())
        }
    }

    /// A concept appears once under every loaded super-concept; concepts with
    /// no loaded super-concept are roots. Supers from other ontologies show
    /// up as root-level external nodes.
    fn concept_forest(&self) -> Vec<TreeNode> {
        let o = self.ontology;
        let keys: Vec<ConceptRef> = o
            .concepts
            .iter()
            .map(|c| ElementKey::new(o.iri.clone(), &c.id))
            .collect();
        let supers: Vec<Vec<ConceptRef>> = keys.iter().map(|k| self.store.direct_supers(k)).collect();

        let mut expanded = BTreeSet::new();
        let mut roots = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            if supers[i].is_empty() {
                roots.push(self.render(key, &keys, &supers, &mut expanded));
            }
        }
        let mut externals: Vec<ConceptRef> = Vec::new();
        for s in supers.iter().flatten() {
            if s.ontology != o.iri && !externals.contains(s) {
                externals.push(s.clone());
            }
        }
        for ext in externals {
            let children = self.children_of(&ext, &keys, &supers, &mut expanded);
            roots.push(TreeNode {
                key: Some(ext.clone()),
                children,
                ..TreeNode::leaf(TreeKind::ExternalConcept, format!("{} ({})", ext.id, ext.ontology))
            });
        }
        roots
    }

    fn children_of(
        &self,
        parent: &ConceptRef,
        keys: &[ConceptRef],
        supers: &[Vec<ConceptRef>],
        expanded: &mut BTreeSet<ConceptRef>,
    ) -> Vec<TreeNode> {
        let mut out = Vec::new();
        for (i, key) in keys.iter().enumerate() {
            if supers[i].contains(parent) {
                out.push(self.render(key, keys, supers, expanded));
            }
        }
        out
    }

    fn render(
        &self,
        key: &ConceptRef,
        keys: &[ConceptRef],
        supers: &[Vec<ConceptRef>],
        expanded: &mut BTreeSet<ConceptRef>,
    ) -> TreeNode {
        let mut node = TreeNode {
            key: Some(key.clone()),
            ..TreeNode::leaf(TreeKind::Concept, &key.id)
        };
        if !expanded.insert(key.clone()) {
            node.flag = true;
            return node;
        }
        if let Some(concept) = self.store.concept(key) {
            node.children.extend(concept.attributes.iter().map(|a| {
                TreeNode::leaf(
                    TreeKind::Attribute,
                    format!("{} {} {}", a.name, a.constraint.keyword(), a.range),
                )
            }));
        }
        node.children.extend(self.children_of(key, keys, supers, expanded));
        node
    }
}
