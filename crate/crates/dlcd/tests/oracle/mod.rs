//! Reference implementations the library is checked against. None of this
//! code calls into the solvers under test.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use dlcd::proof::DerivationStructure;
use dlcd::{Assignment, Concept, Constraint, DiffConstraint, Gci, LinConstraint, Ontology, Rational};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Row = (BTreeMap<String, Rational>, Rational);

/// Gauss-Jordan elimination pivoting on variables in reverse name order.
/// `None` when the system has no solution; otherwise the reduced rows keyed
/// by pivot variable.
pub fn rref(ds: &[LinConstraint]) -> Option<Vec<(String, Row)>> {
    let mut rows: Vec<Row> = ds.iter().map(|l| (l.coeffs.clone(), l.rhs.clone())).collect();
    let mut vars: Vec<String> = rows.iter().flat_map(|(c, _)| c.keys().cloned()).collect();
    vars.sort();
    vars.dedup();
    vars.reverse();
    let mut pivots: Vec<(String, Row)> = Vec::new();
    for v in vars {
        let Some(i) = rows.iter().position(|(c, _)| c.get(&v).is_some_and(|a| !a.is_zero())) else {
            continue;
        };
        let (mut c, mut b) = rows.remove(i);
        let a = c[&v].clone();
        for x in c.values_mut() {
            *x /= &a;
        }
        b /= &a;
        let sub = |row: &mut Row, c: &BTreeMap<String, Rational>, b: &Rational| {
            let f = row.0.get(&v).cloned().unwrap_or_else(Rational::zero);
            if f.is_zero() {
                return;
            }
            for (x, k) in c {
                *row.0.entry(x.clone()).or_insert_with(Rational::zero) -= &f * k;
            }
            row.0.retain(|_, k| !k.is_zero());
            row.1 -= &f * b;
        };
        for r in rows.iter_mut() {
            sub(r, &c, &b);
        }
        for (_, r) in pivots.iter_mut() {
            sub(r, &c, &b);
        }
        c.retain(|_, k| !k.is_zero());
        pivots.push((v.clone(), (c, b)));
    }
    if rows.iter().any(|(c, b)| c.is_empty() && !b.is_zero()) {
        return None;
    }
    Some(pivots)
}

pub fn lin_unsat(ds: &[LinConstraint]) -> bool {
    rref(ds).is_none()
}

pub fn lin_entails(ds: &[LinConstraint], beta: &LinConstraint) -> bool {
    let Some(pivots) = rref(ds) else { return true };
    let mut c = beta.coeffs.clone();
    let mut b = beta.rhs.clone();
    for (v, (pc, pb)) in &pivots {
        let f = c.get(v).cloned().unwrap_or_else(Rational::zero);
        if f.is_zero() {
            continue;
        }
        for (x, k) in pc {
            *c.entry(x.clone()).or_insert_with(Rational::zero) -= &f * k;
        }
        c.retain(|_, k| !k.is_zero());
        b -= &f * pb;
    }
    c.is_empty() && b.is_zero()
}

/// A solution of `ds` with the free variables set to `free(var)`.
pub fn lin_solution(ds: &[LinConstraint], mut free: impl FnMut(&str) -> Rational) -> Option<Assignment> {
    let pivots = rref(ds)?;
    let vars: BTreeSet<String> = ds.iter().flat_map(|l| l.coeffs.keys().cloned()).collect();
    let lead: BTreeSet<&String> = pivots.iter().map(|(v, _)| v).collect();
    let mut a = Assignment::new();
    for v in &vars {
        if !lead.contains(v) {
            a.insert(v.clone(), free(v));
        }
    }
    for (v, (c, b)) in &pivots {
        let mut val = b.clone();
        for (x, k) in c {
            if x != v {
                val -= k * &a[x];
            }
        }
        a.insert(v.clone(), val);
    }
    Some(a)
}

/// Upper bound `w` on a difference, strict when the flag is set. Strict
/// bounds sort below non-strict ones of the same weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound(pub Rational, pub bool);

impl Ord for Bound {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.cmp(&o.0).then(o.1.cmp(&self.1))
    }
}

impl PartialOrd for Bound {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest paths over the constraint graph: node 0 stands for the
/// constant 0 and an edge `u -> v` with bound `w` reads `v - u <= w`.
pub struct DiffGraph {
    pub vars: Vec<String>,
    pub dist: Vec<Vec<Option<Bound>>>,
    pub bot: bool,
}

impl DiffGraph {
    pub fn new(ds: &[DiffConstraint]) -> Self {
        let mut vars: Vec<String> = ds.iter().flat_map(|c| c.vars().into_iter().cloned()).collect();
        vars.sort();
        vars.dedup();
        let n = vars.len() + 1;
        let idx = |x: &str| 1 + vars.iter().position(|v| v == x).unwrap();
        let mut dist: Vec<Vec<Option<Bound>>> = vec![vec![None; n]; n];
        let mut bot = false;
        let mut edge = |u: usize, v: usize, b: Bound| {
            if dist[u][v].as_ref().is_none_or(|d| b < *d) {
                dist[u][v] = Some(b);
            }
        };
        for c in ds {
            match c {
                DiffConstraint::Eq(x, q) => {
                    edge(0, idx(x), Bound(q.clone(), false));
                    edge(idx(x), 0, Bound(-q, false));
                }
                DiffConstraint::Gt(x, q) => edge(idx(x), 0, Bound(-q, true)),
                DiffConstraint::Diff(x, q, y) => {
                    edge(idx(x), idx(y), Bound(q.clone(), false));
                    edge(idx(y), idx(x), Bound(-q, false));
                }
                DiffConstraint::Bot => bot = true,
            }
        }
        for (i, row) in dist.iter_mut().enumerate() {
            if row[i].as_ref().is_none_or(|d| Bound(Rational::zero(), false) < *d) {
                row[i] = Some(Bound(Rational::zero(), false));
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if let (Some(a), Some(b)) = (&dist[i][k], &dist[k][j]) {
                        let s = Bound(&a.0 + &b.0, a.1 || b.1);
                        if dist[i][j].as_ref().is_none_or(|d| s < *d) {
                            dist[i][j] = Some(s);
                        }
                    }
                }
            }
        }
        let zero = Bound(Rational::zero(), false);
        if (0..n).any(|i| dist[i][i].as_ref().is_some_and(|d| *d < zero)) {
            bot = true;
        }
        DiffGraph { vars, dist, bot }
    }

    fn idx(&self, x: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == x).map(|i| i + 1)
    }

    fn implies(&self, u: usize, v: usize, b: Bound) -> bool {
        self.dist[u][v].as_ref().is_some_and(|d| *d <= b)
    }

    pub fn entails(&self, beta: &DiffConstraint) -> bool {
        if self.bot {
            return true;
        }
        let need = |x: &str| self.idx(x);
        match beta {
            DiffConstraint::Bot => false,
            DiffConstraint::Eq(x, q) => match need(x) {
                Some(i) => self.implies(0, i, Bound(q.clone(), false)) && self.implies(i, 0, Bound(-q, false)),
                None => false,
            },
            DiffConstraint::Gt(x, q) => match need(x) {
                Some(i) => self.implies(i, 0, Bound(-q, true)),
                None => false,
            },
            DiffConstraint::Diff(x, q, y) => match (need(x), need(y)) {
                (Some(i), Some(j)) => {
                    self.implies(i, j, Bound(q.clone(), false)) && self.implies(j, i, Bound(-q, false))
                }
                _ => false,
            },
        }
    }
}

pub fn diff_entails(ds: &[DiffConstraint], beta: &DiffConstraint) -> bool {
    DiffGraph::new(ds).entails(beta)
}

/// Whether `ds ⊨ β` for constraints of either domain.
pub fn cd_entails(ds: &[Constraint], beta: Option<&Constraint>) -> bool {
    let lin: Vec<LinConstraint> = ds
        .iter()
        .filter_map(|c| match c {
            Constraint::Lin(l) => Some(l.clone()),
            _ => None,
        })
        .collect();
    let diff: Vec<DiffConstraint> = ds
        .iter()
        .filter_map(|c| match c {
            Constraint::Diff(d) => Some(d.clone()),
            _ => None,
        })
        .collect();
    assert!(lin.is_empty() || diff.is_empty(), "mixed domains");
    if !lin.is_empty() {
        match beta {
            None => lin_unsat(&lin),
            Some(Constraint::Lin(b)) => lin_entails(&lin, b),
            Some(_) => lin_unsat(&lin),
        }
    } else {
        let g = DiffGraph::new(&diff);
        match beta {
            None => g.bot,
            Some(Constraint::Diff(b)) => g.entails(b),
            Some(_) => g.bot,
        }
    }
}

/// Subsumer sets computed by naive fixpoint iteration over `universe`,
/// which must be closed under subconcepts and contain `⊤` and `⊥`.
pub fn el_subsumers(axioms: &[Gci], universe: &BTreeSet<Concept>) -> BTreeMap<Concept, BTreeSet<Concept>> {
    let mut s: BTreeMap<Concept, BTreeSet<Concept>> =
        universe.iter().map(|c| (c.clone(), BTreeSet::from([c.clone(), Concept::Top]))).collect();
    loop {
        let mut changed = false;
        for c in universe {
            let cur = s[c].clone();
            let mut add: BTreeSet<Concept> = BTreeSet::new();
            if cur.contains(&Concept::Bot) {
                add.extend(universe.iter().cloned());
            }
            for d in &cur {
                if let Concept::And(a, b) = d {
                    add.insert((**a).clone());
                    add.insert((**b).clone());
                }
                if let Concept::Exists(r, e) = d {
                    let se = &s[&**e];
                    if se.contains(&Concept::Bot) {
                        add.insert(Concept::Bot);
                    }
                    for f in se {
                        let ex = Concept::Exists(r.clone(), Box::new(f.clone()));
                        if universe.contains(&ex) {
                            add.insert(ex);
                        }
                    }
                }
            }
            for u in universe {
                if let Concept::And(a, b) = u {
                    if cur.contains(a) && cur.contains(b) {
                        add.insert(u.clone());
                    }
                }
            }
            for g in axioms {
                if cur.contains(&g.lhs) {
                    add.insert(g.rhs.clone());
                }
            }
            let entry = s.get_mut(c).unwrap();
            for a in add {
                changed |= entry.insert(a);
            }
        }
        if !changed {
            return s;
        }
    }
}

pub fn closure(concepts: impl IntoIterator<Item = Concept>) -> BTreeSet<Concept> {
    let mut out = BTreeSet::from([Concept::Top, Concept::Bot]);
    for c in concepts {
        c.collect_subconcepts(&mut out);
    }
    out
}

pub fn gci_closure(axioms: &[Gci]) -> BTreeSet<Concept> {
    closure(axioms.iter().flat_map(|g| [g.lhs.clone(), g.rhs.clone()]))
}

/// Classification of a constraint-free ontology over `sub(O)`.
pub fn el_classification(axioms: &[Gci]) -> BTreeSet<(Concept, Concept)> {
    let u = gci_closure(axioms);
    let s = el_subsumers(axioms, &u);
    s.iter().flat_map(|(c, ds)| ds.iter().map(move |d| (c.clone(), d.clone()))).collect()
}

fn replace_atoms(c: &Concept, names: &BTreeMap<Constraint, String>) -> Concept {
    c.map(&|x| match x {
        Concept::Atom(a) => Some(Concept::Name(names[&a.canonical()].clone())),
        _ => None,
    })
}

/// Classification of an EL⊥[D] ontology via the exhaustive construction:
/// every subset of the occurring constraints gets an axiom for each
/// constraint it implies, or `⊥` when it is unsatisfiable. Atoms are
/// reported in canonical form.
pub fn od_classification(o: &Ontology) -> BTreeSet<(Concept, Concept)> {
    let mut cs: Vec<Constraint> = Vec::new();
    for c in o.constraints() {
        let k = c.canonical();
        if !cs.contains(&k) {
            cs.push(k);
        }
    }
    assert!(cs.len() <= 12, "too many constraints for the exhaustive construction");
    let names: BTreeMap<Constraint, String> =
        cs.iter().enumerate().map(|(i, c)| (c.clone(), format!("Q{}", i))).collect();
    let back: BTreeMap<String, Constraint> = names.iter().map(|(c, n)| (n.clone(), c.clone())).collect();
    let mut axioms: Vec<Gci> =
        o.axioms.iter().map(|g| Gci::new(replace_atoms(&g.lhs, &names), replace_atoms(&g.rhs, &names))).collect();
    let base = gci_closure(&axioms);
    for mask in 0u32..(1 << cs.len()) {
        let subset: Vec<Constraint> = (0..cs.len()).filter(|i| mask & (1 << i) != 0).map(|i| cs[i].clone()).collect();
        let lhs = Concept::conj(subset.iter().map(|c| Concept::Name(names[c].clone())));
        if cd_entails(&subset, None) {
            axioms.push(Gci::new(lhs, Concept::Bot));
            continue;
        }
        for b in &cs {
            if !subset.contains(b) && cd_entails(&subset, Some(b)) {
                axioms.push(Gci::new(lhs.clone(), Concept::Name(names[b].clone())));
            }
        }
    }
    let universe = gci_closure(&axioms);
    let s = el_subsumers(&axioms, &universe);
    let concrete = |c: &Concept| {
        c.map(&|x| match x {
            Concept::Name(n) => back.get(n).map(|a| Concept::Atom(a.clone())),
            _ => None,
        })
    };
    let mut out = BTreeSet::new();
    for c in &base {
        for d in &s[c] {
            if base.contains(d) {
                out.insert((concrete(c), concrete(d)));
            }
        }
    }
    out
}

/// Minimal tree size and depth of a derivation of every vertex, found by
/// enumerating all derivation trees that repeat no vertex along a branch.
pub fn exhaustive_costs(ds: &DerivationStructure, goal: usize) -> Option<(u64, u64)> {
    fn go(ds: &DerivationStructure, v: usize, path: &mut Vec<usize>, depth: bool) -> Option<u64> {
        path.push(v);
        let mut best: Option<u64> = None;
        for e in ds.edges().iter().filter(|e| e.conclusion == v) {
            if e.premises.iter().any(|p| path.contains(p)) {
                continue;
            }
            let mut total = 1u64;
            let mut deepest = 0u64;
            let mut ok = true;
            for &p in &e.premises {
                match go(ds, p, path, depth) {
                    Some(c) => {
                        total += c;
                        deepest = deepest.max(c);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                let c = if depth { 1 + deepest } else { total };
                best = Some(best.map_or(c, |b| b.min(c)));
            }
        }
        path.pop();
        best
    }
    let size = go(ds, goal, &mut Vec::new(), false)?;
    let depth = go(ds, goal, &mut Vec::new(), true)?;
    Some((size, depth))
}

/// Extension of `c` in an interpretation given by name and role
/// extensions over the domain `0..n`.
pub fn eval(
    c: &Concept,
    n: usize,
    names: &BTreeMap<String, BTreeSet<usize>>,
    roles: &BTreeMap<String, BTreeSet<(usize, usize)>>,
) -> BTreeSet<usize> {
    match c {
        Concept::Top => (0..n).collect(),
        Concept::Bot => BTreeSet::new(),
        Concept::Name(a) => names.get(a).cloned().unwrap_or_default(),
        Concept::And(a, b) => eval(a, n, names, roles).intersection(&eval(b, n, names, roles)).copied().collect(),
        Concept::Or(a, b) => eval(a, n, names, roles).union(&eval(b, n, names, roles)).copied().collect(),
        Concept::Not(a) => {
            let x = eval(a, n, names, roles);
            (0..n).filter(|i| !x.contains(i)).collect()
        }
        Concept::Exists(r, f) => {
            let fx = eval(f, n, names, roles);
            roles.get(r).map(|es| es.iter().filter(|(_, e)| fx.contains(e)).map(|(d, _)| *d).collect()).unwrap_or_default()
        }
        Concept::Forall(r, f) => {
            let fx = eval(f, n, names, roles);
            let es = roles.get(r).cloned().unwrap_or_default();
            (0..n).filter(|d| es.iter().all(|(s, e)| s != d || fx.contains(e))).collect()
        }
        Concept::Atom(_) => panic!("atoms are not evaluated"),
    }
}

/// Every interpretation over `n` elements for the given names and roles.
pub fn interpretations(
    n: usize,
    names: &[String],
    roles: &[String],
) -> impl Iterator<Item = (BTreeMap<String, BTreeSet<usize>>, BTreeMap<String, BTreeSet<(usize, usize)>>)> {
    let name_bits = names.len() * n;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    let role_bits = roles.len() * pairs.len();
    let total = 1u64 << (name_bits + role_bits);
    let names = names.to_vec();
    let roles = roles.to_vec();
    (0..total).map(move |mask| {
        let mut ne = BTreeMap::new();
        for (i, a) in names.iter().enumerate() {
            let set: BTreeSet<usize> = (0..n).filter(|d| mask & (1 << (i * n + d)) != 0).collect();
            ne.insert(a.clone(), set);
        }
        let mut re = BTreeMap::new();
        for (i, r) in roles.iter().enumerate() {
            let set: BTreeSet<(usize, usize)> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << (name_bits + i * pairs.len() + k)) != 0)
                .map(|(_, p)| *p)
                .collect();
            re.insert(r.clone(), set);
        }
        (ne, re)
    })
}

const LIN_VARS: [&str; 5] = ["a", "b", "c", "d", "e"];
const DIFF_VARS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];

fn nonzero(rng: &mut ChaCha8Rng, k: i64) -> i64 {
    loop {
        let a = rng.gen_range(-k..=k);
        if a != 0 {
            return a;
        }
    }
}

/// Up to four equations over at most five variables with integer
/// coefficients in `[-5, 5]`, and a query that is a combination of two of
/// them about half of the time.
pub fn random_lin_query(rng: &mut ChaCha8Rng) -> (Vec<LinConstraint>, LinConstraint) {
    let nv = rng.gen_range(1..=5);
    let term = |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(1..=nv.min(3));
        let vars: Vec<&str> = LIN_VARS[..nv].choose_multiple(rng, k).copied().collect();
        let terms: Vec<(&str, Rational)> = vars.into_iter().map(|v| (v, Rational::from_integer(nonzero(rng, 5).into()))).collect();
        LinConstraint::new(terms, Rational::from_integer(rng.gen_range(-5..=5).into()))
    };
    let m = rng.gen_range(1..=4);
    let ds: Vec<LinConstraint> = (0..m).map(|_| term(rng)).filter(|l| !l.coeffs.is_empty()).collect();
    let beta = loop {
        let b = if !ds.is_empty() && rng.gen_bool(0.5) {
            let x = ds.choose(rng).unwrap();
            let y = ds.choose(rng).unwrap();
            let (p, q) = (Rational::from_integer(nonzero(rng, 3).into()), Rational::from_integer(rng.gen_range(-3..=3).into()));
            LinConstraint::combine(&[(&p, x), (&q, y)])
        } else {
            term(rng)
        };
        if !b.coeffs.is_empty() {
            break b;
        }
    };
    (ds, beta)
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(rng.gen_range(-8..=8).into(), rng.gen_range(1..=4).into())
}

fn random_diff_constraint(rng: &mut ChaCha8Rng, vars: &[&str]) -> DiffConstraint {
    let x = vars.choose(rng).unwrap().to_string();
    match rng.gen_range(0..3) {
        0 => DiffConstraint::Eq(x, small_rational(rng)),
        1 => DiffConstraint::Gt(x, small_rational(rng)),
        _ => {
            let others: Vec<&&str> = vars.iter().filter(|v| **v != x).collect();
            match others.choose(rng) {
                Some(y) => DiffConstraint::Diff(x, small_rational(rng), y.to_string()),
                None => DiffConstraint::Gt(x, small_rational(rng)),
            }
        }
    }
}

/// Difference constraints over at most `max_vars` variables with constants
/// whose denominators are at most 4.
pub fn random_diff_set(rng: &mut ChaCha8Rng, max_vars: usize, max_len: usize) -> Vec<DiffConstraint> {
    let nv = rng.gen_range(1..=max_vars.min(DIFF_VARS.len()));
    let m = rng.gen_range(1..=max_len);
    (0..m).map(|_| random_diff_constraint(rng, &DIFF_VARS[..nv])).collect()
}

/// A difference-constraint query; about half of the queries are read off
/// the tightest implied bounds, so positives are common.
pub fn random_diff_query(rng: &mut ChaCha8Rng) -> (Vec<DiffConstraint>, DiffConstraint) {
    let ds = random_diff_set(rng, 6, 6);
    let g = DiffGraph::new(&ds);
    let mut tight = Vec::new();
    for (i, x) in g.vars.iter().enumerate() {
        let i = i + 1;
        if let (Some(up), Some(down)) = (&g.dist[0][i], &g.dist[i][0]) {
            if up.0 == -&down.0 {
                tight.push(DiffConstraint::Eq(x.clone(), up.0.clone()));
            }
        }
        if let Some(down) = &g.dist[i][0] {
            tight.push(DiffConstraint::Gt(x.clone(), -&down.0));
            tight.push(DiffConstraint::Gt(x.clone(), -&down.0 - Rational::new(1.into(), 2.into())));
        }
        for (j, y) in g.vars.iter().enumerate() {
            if let Some(d) = &g.dist[i][j + 1] {
                if i != j + 1 {
                    tight.push(DiffConstraint::Diff(x.clone(), d.0.clone(), y.clone()));
                }
            }
        }
    }
    let beta = if !tight.is_empty() && rng.gen_bool(0.5) {
        tight.choose(rng).unwrap().clone()
    } else {
        let vars: Vec<&str> = g.vars.iter().map(|s| s.as_str()).chain(std::iter::once("p")).collect();
        random_diff_constraint(rng, &vars)
    };
    (ds, beta)
}

/// Every subset-minimal `(premises, conclusion)` with conclusion in
/// `targets ∪ {⊥}` by enumeration of all subsets; premise sets that are
/// themselves unsatisfiable are only listed under `⊥`.
pub fn brute_minimal(ds: &[Constraint], targets: &[Constraint]) -> BTreeSet<(Vec<Constraint>, Option<Constraint>)> {
    let mut base: Vec<Constraint> = Vec::new();
    for c in ds {
        if !base.contains(c) {
            base.push(c.clone());
        }
    }
    let subsets: Vec<Vec<Constraint>> = (0u32..(1 << base.len()))
        .map(|m| (0..base.len()).filter(|i| m & (1 << i) != 0).map(|i| base[i].clone()).collect())
        .collect();
    let mut goals: Vec<Option<&Constraint>> = targets.iter().filter(|t| !t.is_bot()).map(Some).collect();
    goals.push(None);
    let mut out = BTreeSet::new();
    for t in goals {
        let holds = |s: &[Constraint]| cd_entails(s, t);
        for s in &subsets {
            if !holds(s) {
                continue;
            }
            let minimal = (0..s.len()).all(|i| {
                let mut smaller = s.clone();
                smaller.remove(i);
                !holds(&smaller)
            });
            if minimal && (t.is_none() || !cd_entails(s, None)) {
                let mut ps = s.clone();
                ps.sort();
                out.insert((ps, t.cloned()));
            }
        }
    }
    out
}
