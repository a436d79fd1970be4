use std::path::{Path, PathBuf};

use crate::engine::EditCommand;
use crate::model::AxiomGraph;
use crate::script;
use crate::store::OntologyStore;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/ontologies")
}

/// A store over the fixture file store with both fixture ontologies loaded.
pub fn fixture_store() -> OntologyStore {
    let mut store = OntologyStore::new(fixtures_dir());
    store
        .load_file(&fixtures_dir().join("sociology.wsml"))
        .unwrap();
    store
        .load_file(&fixtures_dir().join("biology.wsml"))
        .unwrap();
    store
}

pub fn build(store: &mut OntologyStore, source: &str) -> (AxiomGraph, Vec<EditCommand>) {
    let run = script::execute_script(store, source).unwrap_or_else(|e| panic!("{e}"));
    (run.graph, run.commands)
}
