use std::fmt::Write;

use crate::ontology::{escape_string, NfpEntry, Ontology};

/// Canonical text form of an ontology. Parsing the output yields an equal
/// [`Ontology`].
pub fn print_ontology(ontology: &Ontology) -> String {
    let mut out = String::new();
    if let Some(variant) = &ontology.variant {
        let _ = writeln!(out, "wsmlVariant {}", iri(variant.as_str()));
    }
    if !ontology.namespaces.is_empty() {
        let decls: Vec<String> = ontology
            .namespaces
            .iter()
            .map(|ns| match &ns.prefix {
                Some(p) => format!("{p} {}", iri(ns.iri.as_str())),
                None => iri(ns.iri.as_str()),
            })
            .collect();
        let _ = writeln!(out, "namespace {{ {} }}", decls.join(",\n  "));
    }
    if !out.is_empty() {
        out.push('\n');
    }

    let _ = writeln!(out, "ontology {}", iri(ontology.iri.as_str()));
    if !ontology.imports.is_empty() {
        let list: Vec<String> = ontology.imports.iter().map(|i| iri(i.as_str())).collect();
        let _ = writeln!(out, "  importsOntology {}", list.join(" "));
    }
    write_nfp(&mut out, &ontology.nfp, "  ");

    for concept in &ontology.concepts {
        out.push('\n');
        let _ = write!(out, "concept {}", concept.id);
        match concept.super_concepts.as_slice() {
            [] => {}
            [one] => {
                let _ = write!(out, " subConceptOf {one}");
            }
            many => {
                let _ = write!(out, " subConceptOf {{{}}}", many.join(", "));
            }
        }
        out.push('\n');
        write_nfp(&mut out, &concept.nfp, "  ");
        for attr in &concept.attributes {
            let _ = write!(out, "  {} {} ", attr.name, attr.constraint.keyword());
            if let Some((min, max)) = attr.cardinality {
                let _ = write!(out, "({min} {max}) ");
            }
            let _ = writeln!(out, "{}", attr.range);
        }
    }

    for relation in &ontology.relations {
        let params: Vec<String> = relation
            .parameters
            .iter()
            .map(|p| format!("ofType {p}"))
            .collect();
        let _ = writeln!(out, "\nrelation {}({})", relation.id, params.join(", "));
    }

    for instance in &ontology.instances {
        let _ = writeln!(out, "\ninstance {} memberOf {}", instance.id, instance.member_of);
        write_nfp(&mut out, &instance.nfp, "  ");
        for (attr, value) in &instance.values {
            let _ = writeln!(out, "  {attr} hasValue {value}");
        }
    }

    for ri in &ontology.relation_instances {
        let args: Vec<String> = ri.args.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "\nrelationInstance {}({})", ri.relation, args.join(", "));
    }

    for axiom in &ontology.axioms {
        let _ = writeln!(out, "\naxiom {} definedBy\n  {}", axiom.id, axiom.text);
    }
    out
}

fn iri(value: &str) -> String {
    format!("_\"{}\"", escape_string(value))
}

fn write_nfp(out: &mut String, entries: &[NfpEntry], indent: &str) {
    if entries.is_empty() {
        return;
    }
    let _ = writeln!(out, "{indent}nonFunctionalProperties");
    for entry in entries {
        let _ = writeln!(out, "{indent}  {} hasValue {}", entry.key, entry.value);
    }
    let _ = writeln!(out, "{indent}endNonFunctionalProperties");
}
