mod common;

use std::fs;
use std::path::PathBuf;

use axiomforge_core::engine::Mode;
use axiomforge_core::model::AxiomGraph;
use axiomforge_core::persist;
use axiomforge_core::script::{execute_script, run_script, ScriptError};
use axiomforge_core::session::{Session, WsmlState};
use axiomforge_core::store::OntologyStore;
use common::fixtures_dir;

fn script(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests/fixtures/scripts", name].iter().collect();
    fs::read_to_string(path).unwrap()
}

#[test]
fn scripts_load_ontologies_and_their_imports_on_demand() {
    let mut store = OntologyStore::new(fixtures_dir());
    let (_, expr) = run_script(&mut store, &script("employer.axs"), false).unwrap();
    assert_eq!(store.len(), 2);
    assert!(expr.text.starts_with("definedBy ?person memberOf Person and ("));
}

#[test]
fn relation_script_binds_both_parameters() {
    let mut store = OntologyStore::new(fixtures_dir());
    let (_, expr) = run_script(&mut store, &script("worksfor.axs"), false).unwrap();
    assert_eq!(
        expr.text,
        "definedBy ?person memberOf Person and ?person[hasEmployer hasValue ?hasEmployer] \
         and ?hasEmployer memberOf Company and ?hasEmployer[isListed hasValue true] \
         and worksFor(?person, ?hasEmployer)"
    );
    assert!(expr.parameter_variables.is_empty());
}

#[test]
fn rejections_name_the_line_and_rule() {
    let mut store = OntologyStore::new(fixtures_dir());
    let err = run_script(&mut store, &script("mistyped.axs"), false).unwrap_err();
    let message = err.to_string();
    assert!(message.starts_with("line 2: subsumption violation"), "{message}");
    assert!(matches!(err, ScriptError::Rejected { line: 2, .. }));
}

#[test]
fn unknown_ontologies_are_reported() {
    let mut store = OntologyStore::new(fixtures_dir());
    let err = execute_script(&mut store, "var x http://example.org/nowhere#Thing").unwrap_err();
    assert!(matches!(err, ScriptError::Store { line: 1, .. }), "{err}");
}

#[test]
fn recorded_commands_replay_to_the_same_text() {
    for name in ["employer.axs", "worksfor.axs"] {
        let mut store = OntologyStore::new(fixtures_dir());
        let (run, expr) = run_script(&mut store, &script(name), false).unwrap();
        let mut session = Session::with_graph(Mode::Advanced, AxiomGraph::new("axiom"));
        for cmd in &run.commands {
            let resp = session.apply_command(&store, session.revision(), cmd).unwrap();
            assert!(resp.committed, "{cmd:?}");
        }
        assert_eq!(session.wsml(), WsmlState::Text(expr.text));
        assert_eq!(persist::to_text(session.graph()), persist::to_text(&run.graph));
    }
}

#[test]
fn stored_axiom_fixture_matches_its_script() {
    let mut store = OntologyStore::new(fixtures_dir());
    let run = execute_script(&mut store, &script("employer.axs")).unwrap();
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests/fixtures/axioms/employer.axiom.json"]
        .iter()
        .collect();
    assert_eq!(fs::read_to_string(path).unwrap(), persist::to_text(&run.graph));
}
