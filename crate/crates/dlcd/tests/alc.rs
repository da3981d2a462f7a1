use std::collections::{BTreeSet, HashMap};

use dlcd::alc::*;
use dlcd::bench::{generate_benchmark, random_ontology, BenchSpec, Family, RandomParams};
use dlcd::check::check_proof;
use dlcd::eld::eld_classify;
use dlcd::proof::Sentence;
use dlcd::{parse_gci, parse_ontology, subconcepts, CdKind, Concept, Gci, Ontology, ProofMetric};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn name(n: &str) -> Concept {
    Concept::name(n)
}

fn clause_strings(cl: &Clausification) -> BTreeSet<BTreeSet<String>> {
    cl.clauses
        .keys()
        .map(|c| c.iter().map(|l| cl.symbols.literal_concept(l).to_string()).collect())
        .collect()
}

fn set(lits: &[&str]) -> BTreeSet<String> {
    lits.iter().map(|s| s.to_string()).collect()
}

fn setup(o: &str, g: &str) -> (Ontology, Gci) {
    let o = parse_ontology(o).unwrap();
    let g = parse_gci(g, o.kind).unwrap();
    (o, g)
}

#[test]
fn clausify_examples() {
    let (o, g) = setup("A SubClassOf some r B .\n", "A SubClassOf C");
    let cl = clausify(&o, &g);
    let expected: BTreeSet<_> = [
        set(&["$lhs", "A"]),
        set(&["$rhs", "not C"]),
        set(&["not A", "some r $d0"]),
        set(&["not $d0", "B"]),
    ]
    .into();
    assert_eq!(clause_strings(&cl), expected);

    let (o, g) = setup("some r B SubClassOf C .\n", "A SubClassOf C");
    let strings = clause_strings(&clausify(&o, &g));
    assert!(strings.contains(&set(&["C", "all r $d0"])));
    assert!(strings.contains(&set(&["not $d0", "not B"])));

    let (o, g) = setup("A SubClassOf B and C .\n", "A SubClassOf B");
    let strings = clause_strings(&clausify(&o, &g));
    assert!(strings.contains(&set(&["not A", "B"])) && strings.contains(&set(&["not A", "C"])));
    assert_eq!(strings.len(), 4);
}

#[test]
fn syllogism_through_a_role() {
    let (o, g) = setup("A SubClassOf some r B .\nsome r B SubClassOf C .\n", "A SubClassOf C");
    let cl = clausify(&o, &g);
    let res = alc_saturate(&cl, DEFAULT_CLAUSE_CAP).unwrap();
    assert!(res.success.is_some());
    assert!(res.inferences.iter().any(|(r, _, _)| *r == R2));
    let p = alc_prove(&o, &g, ProofMetric::Size).unwrap();
    assert_eq!(p.nodes[p.sink()], Sentence::Gci(g));
    let leaves: BTreeSet<String> = p.leaves().iter().map(|s| s.to_string()).collect();
    for ax in &o.axioms {
        assert!(leaves.contains(&ax.to_string()), "{} missing from {:?}", ax, leaves);
    }
    assert!(check_proof(&p, &o).is_valid());
}

#[test]
fn contradicting_constraints_are_injected() {
    let (o, g) = setup("A SubClassOf [x = 1] .\nA SubClassOf [x = 2] .\n", "A SubClassOf B");
    let res = alc_saturate(&clausify(&o, &g), DEFAULT_CLAUSE_CAP).unwrap();
    assert!(res.success.is_some());
    assert!(res.cd_clauses.values().any(|c| c.conclusion.is_none() && c.premises.len() == 2));
    assert!(eld_classify(&o).0.contains(&name("A"), &Concept::Bot));
    let p = alc_prove(&o, &g, ProofMetric::Size).unwrap();
    assert!(check_proof(&p, &o).is_valid());
}

#[test]
fn disjunction_does_not_entail_a_disjunct() {
    let (o, g) = setup("A SubClassOf B or C .\n", "A SubClassOf B");
    assert_eq!(alc_entails(&o, &g), Ok(false));
    assert!(matches!(alc_prove(&o, &g, ProofMetric::Size), Err(AlcError::NotEntailed(_))));
}

#[test]
fn inconsistent_ontology_proves_anything() {
    let (o, g) = setup("A SubClassOf [x = 1] .\nA SubClassOf [x = 2] .\nTop SubClassOf A .\n", "B SubClassOf E");
    assert!(eld_classify(&o).0.contains(&Concept::Top, &Concept::Bot));
    let p = alc_prove(&o, &g, ProofMetric::Size).unwrap();
    assert!(p.steps.iter().any(|s| s.rule == WEAKEN));
    assert!(check_proof(&p, &o).is_valid());
}

#[test]
fn running_example_through_resolution() {
    let (o, g) = setup(
        "C SubClassOf [2 x + 3 y = 5] .\nC SubClassOf [4 y = 3] .\n[4 x - 6 y = 1] SubClassOf E .\n",
        "C SubClassOf E",
    );
    let p = alc_prove(&o, &g, ProofMetric::Size).unwrap();
    let rep = check_proof(&p, &o);
    assert!(rep.is_valid(), "{}", rep);
    let atoms: BTreeSet<Concept> = p
        .leaves()
        .into_iter()
        .filter_map(|s| s.as_gci().map(|g| g.rhs.clone()))
        .filter(|c| matches!(c, Concept::Atom(_)))
        .collect();
    let given: BTreeSet<Concept> = o.axioms[..2].iter().map(|a| a.rhs.clone()).collect();
    assert_eq!(atoms, given);
}

#[test]
fn mixed_examples_check() {
    for (o, g) in [
        ("A SubClassOf [x > 3] .\n", "A SubClassOf [x > 1]"),
        ("A SubClassOf B or C .\nB SubClassOf D .\nC SubClassOf D .\n", "A SubClassOf D"),
        ("A SubClassOf all r B .\nA SubClassOf some r not B .\n", "A SubClassOf Bot"),
        ("A SubClassOf some r (B and [x = 2]) .\n[x > 1] SubClassOf D .\nsome r D SubClassOf E .\n", "A SubClassOf E"),
        ("A SubClassOf not (all r (not B)) .\nB SubClassOf C .\n", "A SubClassOf some r C"),
    ] {
        let (o, goal) = setup(o, g);
        let p = alc_prove(&o, &goal, ProofMetric::Size).unwrap();
        let rep = check_proof(&p, &o);
        assert!(rep.is_valid(), "{}\n{}\n{}", g, p.to_json(), rep);
    }
}

#[test]
fn clause_cap_is_reported() {
    let (o, g) = setup("A SubClassOf some r B .\nsome r B SubClassOf C .\n", "A SubClassOf C");
    assert!(matches!(alc_prove_with(&o, &g, ProofMetric::Size, 2), Err(AlcError::ResourceLimit(2))));
}

fn definer_exists(s: &Symbols, d: u32) -> Option<bool> {
    match s.kind(d) {
        SymKind::Definer { exists, .. } => Some(*exists),
        _ => None,
    }
}

fn name_of(l: &Lit) -> u32 {
    match *l {
        Lit::Pos(a) | Lit::Neg(a) | Lit::Ex(_, a) | Lit::All(_, a) => a,
    }
}

fn is_marker_lit(s: &Symbols, l: &Lit) -> bool {
    matches!(l, Lit::Pos(_) | Lit::Neg(_)) && s.is_marker(name_of(l))
}

fn is_definer_neg(s: &Symbols, l: &Lit) -> bool {
    matches!(l, Lit::Neg(d) if s.is_definer(*d))
}

/// Checks the ordering conditions on one pair of literals.
fn order_conditions(s: &Symbols, a: &Lit, b: &Lit) -> Result<(), String> {
    let lt = |x: &Lit, y: &Lit| s.key(x) < s.key(y);
    let fail = |what: &str| Err(format!("{}: {:?} {:?}", what, a, b));
    if a != b && s.key(a) == s.key(b) {
        return fail("not total");
    }
    if is_marker_lit(s, a) && !is_marker_lit(s, b) && !lt(a, b) {
        return fail("markers minimal");
    }
    if is_marker_lit(s, a) || is_marker_lit(s, b) {
        return Ok(());
    }
    if let (Lit::Neg(x), Lit::Neg(y)) = (a, b) {
        if definer_exists(s, *x) == Some(true) && definer_exists(s, *y) == Some(false) && !lt(a, b) {
            return fail("existential definers first");
        }
    }
    if is_definer_neg(s, a) && !is_definer_neg(s, b) && !lt(a, b) {
        return fail("definer negations lowest");
    }
    if let (Lit::Pos(x), Lit::Neg(y)) = (a, b) {
        if x == y && !s.is_definer(*x) && !lt(a, b) {
            return fail("A below not A");
        }
    }
    let plain_name = |l: &Lit| matches!(l, Lit::Pos(_) | Lit::Neg(_)) && !s.is_definer(name_of(l));
    if matches!(a, Lit::Ex(..)) && (matches!(b, Lit::All(..)) || plain_name(b)) && !lt(a, b) {
        return fail("exists below forall and names");
    }
    if matches!(a, Lit::All(..)) && plain_name(b) && !lt(a, b) {
        return fail("forall below names");
    }
    Ok(())
}

#[test]
fn literal_order_holds_on_benchmarks() {
    for fam in Family::ALL {
        for n in [1, 3, 5] {
            let (o, g) = generate_benchmark(&BenchSpec::new(fam, n, 3)).unwrap();
            let cl = clausify(&o, &g);
            let lits: Vec<Lit> = cl.literals().into_iter().collect();
            for a in &lits {
                for b in &lits {
                    if let Err(e) = order_conditions(&cl.symbols, a, b) {
                        panic!("{} n={}: {}", fam, n, e);
                    }
                }
            }
        }
    }
}

fn max_lit(cl: &Clausification, c: &[Lit]) -> Lit {
    *c.iter().max_by_key(|l| cl.symbols.key(l)).unwrap()
}

fn without(c: &[Lit], l: &Lit) -> BTreeSet<Lit> {
    c.iter().filter(|x| *x != l).copied().collect()
}

/// Replays a resolution step from the rule schemas, with the resolved
/// literals maximal in their premises.
fn replays(cl: &Clausification, rule: &str, ps: &[Vec<Lit>], concl: &[Lit]) -> bool {
    let concl: BTreeSet<Lit> = concl.iter().copied().collect();
    match rule {
        A1 => {
            let [p, n] = ps else { return false };
            let (Lit::Pos(a), Lit::Neg(b)) = (max_lit(cl, p), max_lit(cl, n)) else { return false };
            let mut r = without(p, &Lit::Pos(a));
            r.extend(without(n, &Lit::Neg(b)));
            a == b && r == concl
        }
        R1 | R2 => {
            let (e, rest) = ps.split_first().unwrap();
            let (q, alls) = rest.split_last().unwrap();
            let Lit::Ex(r, d) = max_lit(cl, e) else { return false };
            let mut r_out = without(e, &Lit::Ex(r, d));
            let mut needed: BTreeSet<Lit> = BTreeSet::new();
            for a in alls {
                let Lit::All(s, di) = max_lit(cl, a) else { return false };
                if s != r {
                    return false;
                }
                needed.insert(Lit::Neg(di));
                r_out.extend(without(a, &Lit::All(s, di)));
            }
            if rule == R2 {
                needed.insert(Lit::Neg(d));
            }
            let qs: BTreeSet<Lit> = q.iter().copied().collect();
            qs == needed && q.iter().all(|l| is_definer_neg(&cl.symbols, l)) && r_out == concl
        }
        _ => false,
    }
}

fn uniform_definers(cl: &Clausification, clauses: &[Vec<Lit>]) -> Result<(), String> {
    let mut shape: HashMap<u32, u8> = HashMap::new();
    for l in clauses.iter().flatten() {
        let (d, k) = match *l {
            Lit::Pos(d) => (d, 0),
            Lit::Ex(_, d) => (d, 1),
            Lit::All(_, d) => (d, 2),
            Lit::Neg(_) => continue,
        };
        if !cl.symbols.is_definer(d) {
            continue;
        }
        if *shape.entry(d).or_insert(k) != k {
            return Err(format!("definer {} occurs positively in two shapes", cl.symbols.name(d)));
        }
    }
    Ok(())
}

fn random_instance(seed: u64) -> (Ontology, Vec<Gci>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if seed.is_multiple_of(2) { CdKind::Lin } else { CdKind::Diff };
    let params = RandomParams { axioms: 8, constraints: 4, ..RandomParams::default() };
    let o = random_ontology(kind, params, &mut rng);
    let concepts: Vec<Concept> = subconcepts(&o).into_iter().collect();
    let goals = (0..3)
        .map(|_| Gci::new(concepts.choose(&mut rng).unwrap().clone(), concepts.choose(&mut rng).unwrap().clone()))
        .collect();
    (o, goals)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn saturation_steps_replay(seed in any::<u64>()) {
        let (o, goals) = random_instance(seed);
        for g in &goals {
            let cl = clausify(&o, g);
            let res = alc_saturate(&cl, DEFAULT_CLAUSE_CAP).unwrap();
            for (rule, ps, c) in &res.inferences {
                prop_assert!(replays(&cl, rule, ps, c), "{} {:?} -> {:?}", rule, ps, c);
            }
            prop_assert!(uniform_definers(&cl, &res.clauses).is_ok(), "{:?}", uniform_definers(&cl, &res.clauses));
            let n = cl.literals().len() as f64;
            prop_assert!((res.clauses.len() as f64) <= 3f64.powf(n));
        }
    }

    #[test]
    fn agrees_with_the_el_classifier(seed in any::<u64>()) {
        let (o, goals) = random_instance(seed);
        let cl = eld_classify(&o).0;
        for g in &goals {
            let expected = cl.contains(&g.lhs, &g.rhs);
            prop_assert_eq!(alc_entails(&o, g), Ok(expected), "{}\n{}", o, g);
            if expected {
                let p = alc_prove(&o, g, ProofMetric::Size).unwrap();
                let rep = check_proof(&p, &o);
                prop_assert!(rep.is_valid(), "{}\n{}\n{}", o, g, rep);
            }
        }
    }
}
