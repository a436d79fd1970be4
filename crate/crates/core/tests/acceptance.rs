//! Acceptance suite: one PASS/FAIL line per criterion. Sizes and tolerances
//! are pinned below.

mod common;

use std::collections::BTreeSet;
use std::fs;

use axiomforge_core::engine::{candidate_universe, list_allowed_operations, EditCommand, EditEngine, Mode, Rejection};
use axiomforge_core::model::AxiomGraph;
use axiomforge_core::ontology::{ElementKey, Iri};
use axiomforge_core::persist::{self, LoadError};
use axiomforge_core::script;
use axiomforge_core::session::{Session, WsmlState};
use axiomforge_core::store::OntologyStore;
use axiomforge_core::textgen;
use axiomforge_core::wsml::{parse_ontology, validate_expression_text};
use common::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const DAG_TRIALS: usize = 1_000;
const DAG_MAX_CONCEPTS: usize = 30;
const DAG_MAX_PARENTS: usize = 3;
const FUZZ_COMMANDS: usize = 10_000;
const FUZZ_EPISODE_LEN: usize = 50;
const MENU_STATES: usize = 500;
const MENU_SELECTIONS_PER_STATE: usize = 3;
const EMISSION_MIN_GRAPHS: usize = 500;
const PERSIST_ROUNDS: usize = 100;
const MAX_MISMATCHES: usize = 0;

type Verdict = Result<String, String>;

fn report(name: &str, verdict: &Verdict) {
    match verdict {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => println!("FAIL {name}: {detail}"),
    }
}

fn subsumption_oracle() -> Verdict {
    let mut rng = StdRng::seed_from_u64(1);
    let (mut pairs, mut mismatches) = (0usize, Vec::new());
    for trial in 0..DAG_TRIALS {
        let h = random_hierarchy(&mut rng, DAG_MAX_CONCEPTS, DAG_MAX_PARENTS);
        let iri = format!("urn:dag:{trial}");
        let mut store = OntologyStore::new("/nonexistent");
        store
            .register_ontology(parse_ontology(&h.to_wsml(&iri, &mut rng)).unwrap())
            .unwrap();
        let closure = h.closure();
        let key = |i: usize| ElementKey::new(Iri::new(&iri).unwrap(), format!("C{i}"));
        for (i, row) in closure.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                pairs += 1;
                if store.is_subconcept_of(&key(i), &key(j)) != want {
                    mismatches.push(format!("trial {trial}: C{i} vs C{j}"));
                }
            }
        }
    }
    if mismatches.len() > MAX_MISMATCHES {
        return Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]));
    }
    Ok(format!("{DAG_TRIALS} DAGs, {pairs} pairs, 0 mismatches"))
}

fn inheritance_oracle() -> Verdict {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut checked, mut diamonds, mut mismatches) = (0usize, 0usize, Vec::new());
    for trial in 0..DAG_TRIALS {
        let h = random_hierarchy(&mut rng, DAG_MAX_CONCEPTS, DAG_MAX_PARENTS);
        let iri = format!("urn:dag:{trial}");
        let mut store = OntologyStore::new("/nonexistent");
        store
            .register_ontology(parse_ontology(&h.to_wsml(&iri, &mut rng)).unwrap())
            .unwrap();
        let closure = h.closure();
        for i in 0..h.len() {
            checked += 1;
            // A diamond: two distinct parents sharing an ancestor.
            let ps = &h.parents[i];
            if ps.iter().enumerate().any(|(x, &a)| {
                ps[x + 1..]
                    .iter()
                    .any(|&b| (0..h.len()).any(|k| closure[a][k] && closure[b][k]))
            }) {
                diamonds += 1;
            }
            let key = ElementKey::new(Iri::new(&iri).unwrap(), format!("C{i}"));
            let got: BTreeSet<(usize, String)> = store
                .effective_attributes(&key)
                .into_iter()
                .map(|a| (a.origin.id[1..].parse().unwrap(), a.def.name))
                .collect();
            let got_len = store.effective_attributes(&key).len();
            let want = h.inherited(&closure, i);
            if got != want || got_len != want.len() {
                mismatches.push(format!("trial {trial}: C{i}"));
            }
        }
    }
    if mismatches.len() > MAX_MISMATCHES {
        return Err(format!("{} mismatches, first: {}", mismatches.len(), mismatches[0]));
    }
    Ok(format!("{checked} concepts ({diamonds} under diamonds), 0 mismatches"))
}

fn import_scenario() -> Verdict {
    let mut store = OntologyStore::new(fixtures_dir());
    store
        .load_file(&fixtures_dir().join("sociology.wsml"))
        .map_err(|e| e.to_string())?;
    let names = |store: &OntologyStore| -> BTreeSet<String> {
        store
            .effective_attributes(&soc("Person"))
            .into_iter()
            .map(|a| a.def.name)
            .collect()
    };
    let before = names(&store);
    let want_before: BTreeSet<String> = ["hasEmployer"].map(String::from).into();
    if before != want_before {
        return Err(format!("before import: {before:?}"));
    }
    store
        .load_imported_ontology(&Iri::new("http://example.org/biology").unwrap())
        .map_err(|e| e.to_string())?;
    let after = names(&store);
    let want_after: BTreeSet<String> = ["hasEmployer", "hasName", "hasAge"].map(String::from).into();
    if after != want_after {
        return Err(format!("after import: {after:?}"));
    }
    if !store.is_subconcept_of(&soc("Person"), &bio("Human")) {
        return Err("Person is not subsumed by Human after the import".into());
    }
    Ok(format!("{before:?} -> {after:?}"))
}

/// Everything observed while fuzzing the engine.
#[derive(Default)]
struct FuzzLog {
    commands: usize,
    commits: usize,
    invalid_after_commit: Vec<String>,
    invariant_rejections: Vec<String>,
    moved_on_rejection: Vec<String>,
    /// Committed states, sampled for later criteria.
    states: Vec<AxiomGraph>,
    complete: Vec<AxiomGraph>,
    episodes: Vec<(Mode, Vec<EditCommand>, AxiomGraph)>,
}

fn fuzz_engine(store: &OntologyStore) -> FuzzLog {
    let mut rng = StdRng::seed_from_u64(4);
    let mut log = FuzzLog::default();
    let mut episode = 0;
    while log.commands < FUZZ_COMMANDS {
        let mode = if episode % 2 == 0 { Mode::Advanced } else { Mode::Standard };
        episode += 1;
        let engine = EditEngine::new(store, mode);
        let mut graph = AxiomGraph::new("fuzz");
        let mut history = Vec::new();
        for _ in 0..FUZZ_EPISODE_LEN {
            let cmd = random_command(&mut rng, &graph, store);
            log.commands += 1;
            let before = graph.clone();
            let before_text = format!("{graph:?}");
            match engine.apply(&mut graph, &cmd) {
                Ok(_) => {
                    log.commits += 1;
                    history.push(cmd.clone());
                    if let Some(v) = graph.validate_structural().first() {
                        log.invalid_after_commit.push(format!("{cmd:?}: {v}"));
                    }
                    if rng.gen_bool(0.1) {
                        log.states.push(graph.clone());
                    }
                    if graph.validate_complete().is_empty() {
                        log.complete.push(graph.clone());
                    }
                }
                Err(r) => {
                    if let Rejection::Invariant(_) = r {
                        log.invariant_rejections.push(format!("{cmd:?}: {r}"));
                    }
                    if graph != before || format!("{graph:?}") != before_text {
                        log.moved_on_rejection.push(format!("{cmd:?}"));
                    }
                }
            }
        }
        log.episodes.push((mode, history, graph));
    }
    log
}

fn engine_fuzz(log: &FuzzLog) -> Verdict {
    let problems = [
        ("structurally invalid after commit", &log.invalid_after_commit),
        ("post-condition rejections", &log.invariant_rejections),
        ("graphs changed by a rejection", &log.moved_on_rejection),
    ];
    for (what, list) in problems {
        if list.len() > MAX_MISMATCHES {
            return Err(format!("{} {what}, first: {}", list.len(), list[0]));
        }
    }
    Ok(format!(
        "{} commands, {} committed, {} rejected, 0 violations",
        log.commands,
        log.commits,
        log.commands - log.commits
    ))
}

fn menu_differential(store: &OntologyStore) -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut states, mut probes, mut offered_total) = (0usize, 0usize, 0usize);
    let mut counterexamples = Vec::new();
    let mut episode = 0;
    while states < MENU_STATES {
        let mode = if episode % 2 == 0 { Mode::Advanced } else { Mode::Standard };
        episode += 1;
        let engine = EditEngine::new(store, mode);
        let mut graph = AxiomGraph::new("menu");
        for step in 0..FUZZ_EPISODE_LEN {
            if step % 5 == 0 && states < MENU_STATES {
                states += 1;
                let mut sels = selections(&graph);
                sels.shuffle(&mut rng);
                for sel in sels.into_iter().take(MENU_SELECTIONS_PER_STATE) {
                    let offered = list_allowed_operations(&graph, store, mode, sel);
                    offered_total += offered.len();
                    let universe = candidate_universe(&graph, store, sel);
                    for cmd in &offered {
                        if !universe.contains(cmd) {
                            counterexamples.push(format!("{sel}: offered outside the universe: {cmd:?}"));
                        }
                    }
                    for cmd in universe {
                        probes += 1;
                        let commits = engine.apply(&mut graph.clone(), &cmd).is_ok();
                        if commits != offered.contains(&cmd) {
                            counterexamples.push(format!(
                                "{sel} in {mode:?}: {cmd:?} commits={commits}, offered={}",
                                !commits
                            ));
                        }
                    }
                }
            }
            let cmd = random_command(&mut rng, &graph, store);
            let _ = engine.apply(&mut graph, &cmd);
        }
    }
    if counterexamples.len() > MAX_MISMATCHES {
        return Err(format!(
            "{} counterexamples, first: {}",
            counterexamples.len(),
            counterexamples[0]
        ));
    }
    Ok(format!(
        "{states} states, {probes} candidate commands, {offered_total} offered, 0 counterexamples"
    ))
}

fn emission(log: &FuzzLog) -> Verdict {
    let mut failures = Vec::new();
    for graph in &log.complete {
        let first = match textgen::generate(graph, false) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("complete graph did not generate: {e}"));
                continue;
            }
        };
        let second = textgen::generate(graph, false).unwrap();
        if first != second {
            failures.push(format!("generation is not repeatable: {}", first.text));
        }
        if let Err(d) = validate_expression_text(&first.text) {
            failures.push(format!("{}: {}", first.text, d[0]));
            continue;
        }
        let mut want = expected_identifiers(graph);
        want.extend(first.parameter_variables.iter().cloned());
        let got = text_identifiers(&first.text);
        if got != want {
            failures.push(format!("{}: identifiers {got:?} expected {want:?}", first.text));
        }
        if first.parameter_variables.len() != free_reachable_params(graph) {
            failures.push(format!("{}: parameter variables {:?}", first.text, first.parameter_variables));
        }
        let spans: BTreeSet<_> = first.element_spans.keys().copied().collect();
        let mut reachable = graph.reachable_from_start();
        reachable.remove(&AxiomGraph::ROOT);
        if spans != reachable {
            failures.push(format!("{}: spans {spans:?} reachable {reachable:?}", first.text));
        }
    }
    if log.complete.len() < EMISSION_MIN_GRAPHS {
        return Err(format!("only {} complete graphs were produced", log.complete.len()));
    }
    if failures.len() > MAX_MISMATCHES {
        return Err(format!("{} failures, first: {}", failures.len(), failures[0]));
    }
    Ok(format!("{} complete graphs, 0 failures", log.complete.len()))
}

const GOLDEN: [(&str, &str); 3] = [
    (
        "var p http://example.org/sociology#Person",
        "definedBy ?person memberOf Person",
    ),
    (
        "var p http://example.org/sociology#Person\nrefine p.hasEmployer inst Acme",
        "definedBy ?person memberOf Person and ?person[hasEmployer hasValue Acme]",
    ),
    (
        "var p http://example.org/sociology#Person\nrefine p.hasEmployer OR ( inst Acme , default )",
        "definedBy ?person memberOf Person and (?person[hasEmployer hasValue Acme] or ?person[hasEmployer hasValue ?organization] and ?organization memberOf Organization)",
    ),
];

fn golden_texts() -> Verdict {
    for (source, want) in GOLDEN {
        let mut store = OntologyStore::new(fixtures_dir());
        let (_, got) = script::run_script(&mut store, source, false).map_err(|e| e.to_string())?;
        if got.text != want {
            return Err(format!("expected `{want}`, got `{}`", got.text));
        }
    }
    Ok(format!("{} texts reproduced exactly", GOLDEN.len()))
}

fn persistence(log: &FuzzLog) -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut candidates: Vec<&AxiomGraph> = log.states.iter().filter(|g| g.node_count() > 2).collect();
    if candidates.len() < PERSIST_ROUNDS {
        return Err(format!("only {} fuzzed graphs available", candidates.len()));
    }
    candidates.truncate(PERSIST_ROUNDS);
    for (i, graph) in candidates.iter().enumerate() {
        let path = dir.path().join(format!("g{i}.axiom.json"));
        persist::save_axiom(graph, &path).map_err(|e| e.to_string())?;
        let mut fresh = OntologyStore::new(fixtures_dir());
        let loaded = persist::load_axiom(&mut fresh, &path).map_err(|e| format!("round {i}: {e}"))?;
        if !loaded.is_isomorphic(graph) || persist::to_text(&loaded) != persist::to_text(graph) {
            return Err(format!("round {i}: loaded graph differs"));
        }
    }

    // A file store holding sociology but not biology.
    let partial = tempfile::tempdir().map_err(|e| e.to_string())?;
    fs::copy(fixtures_dir().join("sociology.wsml"), partial.path().join("sociology.wsml"))
        .map_err(|e| e.to_string())?;
    let mut source = OntologyStore::new(fixtures_dir());
    let run = script::execute_script(&mut source, GOLDEN[1].0).map_err(|e| e.to_string())?;
    let path = dir.path().join("person.axiom.json");
    persist::save_axiom(&run.graph, &path).map_err(|e| e.to_string())?;
    let mut store = OntologyStore::new(partial.path());
    match persist::load_axiom(&mut store, &path) {
        Err(LoadError::MissingOntology(iri)) if iri.as_str() == "http://example.org/biology" => {}
        other => return Err(format!("expected a missing biology ontology, got {other:?}")),
    }
    if !store.is_empty() {
        return Err("the failed load left ontologies behind".into());
    }
    Ok(format!(
        "{PERSIST_ROUNDS} round-trips isomorphic; missing ontology named, store untouched"
    ))
}

fn script_determinism(store: &OntologyStore, log: &FuzzLog) -> Verdict {
    for (i, (mode, history, graph)) in log.episodes.iter().enumerate() {
        let recorded = serde_json::to_string(history).map_err(|e| e.to_string())?;
        let replay: Vec<EditCommand> = serde_json::from_str(&recorded).map_err(|e| e.to_string())?;
        let mut session = Session::with_graph(*mode, AxiomGraph::new("fuzz"));
        for cmd in &replay {
            let resp = session
                .apply_command(store, session.revision(), cmd)
                .map_err(|e| e.to_string())?;
            if !resp.committed {
                return Err(format!("episode {i}: replayed command rejected: {cmd:?}"));
            }
        }
        let original = Session::with_graph(*mode, graph.clone()).wsml();
        if session.wsml() != original || session.graph() != graph {
            return Err(format!("episode {i}: replay diverged"));
        }
    }
    let texts: Vec<String> = (0..2)
        .map(|_| {
            let mut store = OntologyStore::new(fixtures_dir());
            script::run_script(&mut store, GOLDEN[2].0, false)
                .map(|(_, e)| e.text)
                .unwrap_or_default()
        })
        .collect();
    if texts[0] != texts[1] || texts[0].is_empty() {
        return Err("running the same script twice gave different text".into());
    }
    let complete = log
        .episodes
        .iter()
        .filter(|(m, _, g)| matches!(Session::with_graph(*m, g.clone()).wsml(), WsmlState::Text(_)))
        .count();
    Ok(format!(
        "{} recorded sessions replayed byte-identically ({complete} with complete text)",
        log.episodes.len()
    ))
}

#[test]
fn acceptance() {
    let store = fixture_store();
    let (fuzz, menu) = std::thread::scope(|s| {
        let fuzz = s.spawn(|| fuzz_engine(&store));
        let menu = s.spawn(|| menu_differential(&store));
        (fuzz.join().unwrap(), menu.join().unwrap())
    });
    let results = [
        ("subsumption oracle equivalence", subsumption_oracle()),
        ("inheritance oracle equivalence", inheritance_oracle()),
        ("import scenario", import_scenario()),
        ("edit-engine fuzz", engine_fuzz(&fuzz)),
        ("menu soundness and completeness", menu),
        ("emission well-formedness", emission(&fuzz)),
        ("golden texts", golden_texts()),
        ("persistence round-trip", persistence(&fuzz)),
        ("script determinism", script_determinism(&store, &fuzz)),
    ];
    for (name, verdict) in &results {
        report(name, verdict);
    }
    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, v)| v.is_err())
        .map(|(n, _)| *n)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
