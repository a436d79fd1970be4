mod common;

use std::collections::BTreeSet;

use axiomforge_core::engine::{EditCommand, EditEngine, Mode};
use axiomforge_core::model::{AxiomGraph, NodeKind, Port};
use axiomforge_core::ontology::Iri;
use axiomforge_core::persist;
use axiomforge_core::session::Session;
use axiomforge_core::store::OntologyStore;
use axiomforge_core::textgen;
use axiomforge_core::wsml::{parse_ontology, parse_ontology_with_diagnostics, print_ontology, tokenize};
use common::*;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Runs `steps` random commands and hands every committed state to `check`.
fn walk(seed: u64, steps: usize, mut check: impl FnMut(&AxiomGraph, &EditCommand)) {
    let store = fixture_store();
    let mut rng = StdRng::seed_from_u64(seed);
    let mode = if seed.is_multiple_of(2) { Mode::Advanced } else { Mode::Standard };
    let engine = EditEngine::new(&store, mode);
    let mut graph = AxiomGraph::new("prop");
    for _ in 0..steps {
        let cmd = random_command(&mut rng, &graph, &store);
        if engine.apply(&mut graph, &cmd).is_ok() {
            check(&graph, &cmd);
        }
    }
}

/// Kahn's algorithm over the connection relation.
fn acyclic(g: &AxiomGraph) -> bool {
    let mut indegree: std::collections::BTreeMap<_, usize> = g.nodes().map(|n| (n.id, 0)).collect();
    for c in g.connections() {
        *indegree.get_mut(&c.target).unwrap() += 1;
    }
    let mut ready: Vec<_> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut seen = 0;
    while let Some(n) = ready.pop() {
        seen += 1;
        for c in g.outgoing(n) {
            let d = indegree.get_mut(&c.target).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.push(c.target);
            }
        }
    }
    seen == g.node_count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tokens_point_at_their_lexemes(seed in any::<u64>(), indent in 0usize..4) {
        let mut rng = StdRng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 8, 3);
        let source = h.to_wsml("urn:t", &mut rng).replace("\n  ", &format!("\n{}", " ".repeat(indent + 1)));
        let lines: Vec<&str> = source.split('\n').collect();
        for t in tokenize(&source).unwrap() {
            let line = lines[t.line as usize - 1];
            let rest: String = line.chars().skip(t.column as usize - 1).collect();
            prop_assert!(rest.starts_with(&t.lexeme), "{t:?}");
            prop_assert!(source[t.offset..].starts_with(&t.lexeme));
        }
    }

    #[test]
    fn an_error_diagnostic_means_no_ontology(cut in 0usize..400, junk in "[{}(),#?\"a-z ]{0,3}") {
        let source = std::fs::read_to_string(fixtures_dir().join("sociology.wsml")).unwrap();
        let cut = cut.min(source.len());
        let cut = (0..=cut).rev().find(|i| source.is_char_boundary(*i)).unwrap();
        let mutated = format!("{}{junk}{}", &source[..cut], &source[cut..]);
        let (ontology, diagnostics) = parse_ontology_with_diagnostics(&mutated);
        if diagnostics.iter().any(|d| d.is_error()) {
            prop_assert!(ontology.is_none());
        } else {
            prop_assert!(ontology.is_some());
        }
    }

    #[test]
    fn printed_ontologies_parse_back_equal(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let h = random_hierarchy(&mut rng, 12, 3);
        let parsed = parse_ontology(&h.to_wsml("urn:p", &mut rng)).unwrap();
        let printed = print_ontology(&parsed);
        prop_assert_eq!(parse_ontology(&printed).unwrap(), parsed);
    }

    #[test]
    fn one_ontology_per_iri(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut store = OntologyStore::new("/nonexistent");
        let a = random_hierarchy(&mut rng, 6, 2).to_wsml("urn:same", &mut rng);
        let b = random_hierarchy(&mut rng, 6, 2).to_wsml("urn:same", &mut rng);
        let (a, b) = (parse_ontology(&a).unwrap(), parse_ontology(&b).unwrap());
        store.register_ontology(a.clone()).unwrap();
        let second = store.register_ontology(b.clone());
        prop_assert_eq!(second.is_ok(), a == b);
        prop_assert_eq!(store.len(), 1);
        prop_assert_eq!(store.ontology(&Iri::new("urn:same").unwrap()), Some(&a));
    }

    #[test]
    fn committed_graphs_keep_their_shape(seed in any::<u64>()) {
        let store = fixture_store();
        walk(seed, 60, |g, cmd| {
            assert_eq!(g.nodes().filter(|n| matches!(n.kind, NodeKind::Root)).count(), 1);
            assert!(acyclic(g));
            let names: Vec<&str> = g.nodes().filter_map(|n| n.as_variable()).map(|v| v.name.as_str()).collect();
            assert_eq!(names.len(), names.iter().collect::<BTreeSet<_>>().len());
            assert!(g.incoming(AxiomGraph::ROOT).is_empty());
            for n in g.nodes() {
                if matches!(n.kind, NodeKind::Instance(_)) {
                    assert!(g.outgoing(n.id).is_empty());
                }
                if matches!(n.kind, NodeKind::Operator(axiomforge_core::model::OperatorKind::Not)) {
                    assert!(g.outgoing(n.id).len() <= 1);
                }
            }
            for port in g.ports() {
                if matches!(port, Port::Slot { .. } | Port::Param { .. }) {
                    let from_port = g.connections().filter(|c| c.source == port).count();
                    assert_eq!(from_port, usize::from(g.port_binding(port).is_some()), "{port}");
                }
            }
            if let EditCommand::CreateVariable { concept, .. } = cmd {
                let v = g.nodes().filter_map(|n| n.as_variable()).last().unwrap();
                let want: Vec<String> = store.effective_attributes(concept).into_iter().map(|a| a.def.name).collect();
                let got: Vec<String> = v.slots.iter().map(|s| s.attribute.clone()).collect();
                assert_eq!(got, want);
            }
        });
    }

    #[test]
    fn revisions_count_commits(seed in any::<u64>()) {
        let store = fixture_store();
        let mut rng = StdRng::seed_from_u64(seed);
        let mut session = Session::new(if seed.is_multiple_of(2) { Mode::Advanced } else { Mode::Standard });
        let mut commits = 0;
        for _ in 0..40 {
            let cmd = random_command(&mut rng, session.graph(), &store);
            let before = session.revision();
            let resp = session.apply_command(&store, before, &cmd).unwrap();
            commits += usize::from(resp.committed);
            prop_assert_eq!(resp.revision, before + u64::from(resp.committed));
        }
        prop_assert_eq!(session.revision(), commits as u64);
    }

    #[test]
    fn spans_cover_the_reachable_elements(seed in any::<u64>()) {
        walk(seed, 60, |g, _| {
            if let Ok(expr) = textgen::generate(g, seed % 3 == 0) {
                let mut reachable = g.reachable_from_start();
                reachable.remove(&AxiomGraph::ROOT);
                assert_eq!(expr.element_spans.keys().copied().collect::<BTreeSet<_>>(), reachable);
                for (start, len) in expr.element_spans.values() {
                    assert!(start + len <= expr.text.len());
                }
            }
        });
    }

    #[test]
    fn saved_documents_are_self_contained(seed in any::<u64>()) {
        walk(seed, 40, |g, _| {
            let doc = persist::to_json(g);
            let listed: BTreeSet<&str> = doc["ontologies"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
            for node in doc["nodes"].as_array().unwrap() {
                assert!(node["x"].is_i64() && node["y"].is_i64());
                for field in ["concept", "relation", "instance"] {
                    if let Some(o) = node[field]["ontology"].as_str() {
                        assert!(listed.contains(o), "{o} not listed");
                    }
                }
                for slot in node["slots"].as_array().into_iter().flatten() {
                    assert!(listed.contains(slot["origin"]["ontology"].as_str().unwrap()));
                }
            }
        });
    }
}
