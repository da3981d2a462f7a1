mod oracle;

use std::collections::BTreeSet;

use dlcd::el::*;
use dlcd::{parse_ontology, subconcepts, CdKind, Concept, Gci, Ontology};
use proptest::prelude::*;

fn name(n: &str) -> Concept {
    Concept::name(n)
}

fn pairs(o: &Ontology) -> BTreeSet<(Concept, Concept)> {
    el_classify(o).0.pairs().clone()
}

#[test]
fn transitivity_through_told_subsumers() {
    let o = parse_ontology("A SubClassOf B .\nB SubClassOf C .\n").unwrap();
    let (cl, ds) = el_classify(&o);
    assert!(cl.contains(&name("A"), &name("C")));
    assert!(!cl.contains(&name("C"), &name("A")));
    let goal = dlcd::Sentence::Gci(Gci::new(name("A"), name("C")));
    let p = ds.extract_proof(&goal, dlcd::ProofMetric::Size).unwrap();
    assert!(p.steps.iter().all(|s| s.rule == R_SUB));
    assert_eq!(p.leaves().len(), 2);
}

#[test]
fn bottom_propagates_along_roles() {
    let o = parse_ontology("A SubClassOf some r B .\nB SubClassOf Bot .\n").unwrap();
    let (cl, ds) = el_classify(&o);
    assert!(cl.contains(&name("A"), &Concept::Bot));
    assert!(ds.edges().iter().any(|e| e.rule == R_BOT));
}

#[test]
fn conjunctions_split() {
    let o = parse_ontology("A SubClassOf B and C .\n").unwrap();
    let (cl, ds) = el_classify(&o);
    assert!(cl.contains(&name("A"), &name("B")) && cl.contains(&name("A"), &name("C")));
    assert!(ds.edges().iter().any(|e| e.rule == R_AND_MINUS));
}

#[test]
fn classification_is_reflexive_and_has_top() {
    let o = parse_ontology("A and B SubClassOf some r C .\nsome r C SubClassOf D .\n").unwrap();
    let cl = el_classify(&o).0;
    for c in subconcepts(&o) {
        assert!(cl.contains(&c, &c));
        assert!(cl.contains(&c, &Concept::Top));
    }
    assert!(cl.contains(&Concept::and(name("A"), name("B")), &name("D")));
}

#[test]
fn countermodel_examples() {
    let o = parse_ontology("A SubClassOf B .\n").unwrap();
    let m = el_countermodel(&o, &name("A"), &name("C")).unwrap();
    assert!(m.is_model(&o));
    let a = m.element("A").unwrap();
    assert!(m.extension(&name("A")).contains(&a) && m.extension(&name("B")).contains(&a));
    assert!(!m.extension(&name("C")).contains(&a));

    let m = el_countermodel(&Ontology::empty(), &Concept::Top, &name("A")).unwrap();
    assert!(m.extension(&Concept::Top).difference(&m.extension(&name("A"))).next().is_some());

    let o = parse_ontology("A SubClassOf some r B .\n").unwrap();
    let m = el_countermodel(&o, &name("A"), &name("B")).unwrap();
    assert!(m.is_model(&o));
    let (a, b) = (m.element("A").unwrap(), m.element("B").unwrap());
    assert!(m.roles["r"].contains(&(a, b)));
    assert!(!m.extension(&name("B")).contains(&a));

    assert!(matches!(el_countermodel(&o, &name("A"), &Concept::exists("r", name("B"))), Err(ElError::Entailed(..))));
}

const NAMES: [&str; 3] = ["A", "B", "C"];

fn arb_concept() -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![6 => (0usize..3).prop_map(|i| name(NAMES[i])), 1 => Just(Concept::Top), 1 => Just(Concept::Bot)];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Concept::and(a, b)),
            (prop::bool::ANY, inner).prop_map(|(s, c)| Concept::exists(if s { "r" } else { "s" }, c)),
        ]
    })
}

fn arb_ontology(max: usize) -> impl Strategy<Value = Ontology> {
    prop::collection::vec((arb_concept(), arb_concept()).prop_map(|(l, r)| Gci::new(l, r)), 0..=max)
        .prop_map(|axioms| Ontology::new(axioms, CdKind::None))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_the_naive_fixpoint(o in arb_ontology(6)) {
        prop_assert_eq!(pairs(&o), oracle::el_classification(&o.axioms));
    }

    #[test]
    fn non_derived_pairs_have_countermodels(o in arb_ontology(5)) {
        let r = ElReasoner::new(&o, &[]);
        let concepts: Vec<Concept> = subconcepts(&o).into_iter().collect();
        for c in &concepts {
            for d in &concepts {
                if r.subsumes(c, d) {
                    continue;
                }
                let m = r.countermodel(c, d).unwrap();
                prop_assert!(m.is_model(&o));
                let x = m.extension(c).difference(&m.extension(d)).next().is_some();
                prop_assert!(x, "no witness for {} not below {}", c, d);
            }
        }
    }

    #[test]
    fn more_axioms_never_lose_subsumptions(o in arb_ontology(5), extra in (arb_concept(), arb_concept())) {
        let before = pairs(&o);
        let mut bigger = o.clone();
        bigger.axioms.push(Gci::new(extra.0, extra.1));
        let after = pairs(&bigger);
        prop_assert!(before.is_subset(&after));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn derived_pairs_hold_in_all_small_models(o in arb_ontology(3)) {
        let cl = pairs(&o);
        let text = o.to_string();
        let roles: Vec<String> = ["r", "s"].iter().filter(|r| text.contains(&format!("some {} ", r))).map(|s| s.to_string()).collect();
        let names: Vec<String> = NAMES.iter().filter(|n| text.contains(*n)).map(|s| s.to_string()).collect();
        for n in 1..=2 {
            for (ne, re) in oracle::interpretations(n, &names, &roles) {
                let model = o.axioms.iter().all(|g| {
                    oracle::eval(&g.lhs, n, &ne, &re).is_subset(&oracle::eval(&g.rhs, n, &ne, &re))
                });
                if !model {
                    continue;
                }
                for (c, d) in &cl {
                    prop_assert!(oracle::eval(c, n, &ne, &re).is_subset(&oracle::eval(d, n, &ne, &re)), "{} < {}", c, d);
                }
            }
        }
    }
}
