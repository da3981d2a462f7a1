//! Independent proof checker. Every leaf must be an axiom or a
//! propositional tautology; every step is replayed against its rule.

use std::collections::BTreeSet;
use std::fmt;

use crate::alc::{cnf, nnf, A1, NORM, R1, R2, WEAKEN};
use crate::cd::{defined_valid, R_DEF};
use crate::diff::{diff_rule_valid, DIFF_RULES};
use crate::el::{R_AND_MINUS, R_AND_PLUS, R_BOT, R_EX, R_EXFALSO, R_SUB};
use crate::lin::{combination, LIN_RULE};
use crate::model::{Concept, Constraint, DiffConstraint, Gci, Ontology, Rational};
use crate::proof::{Proof, Sentence};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    /// Node the issue is about, if any.
    pub node: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(f, "node {}: {}", n, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Empty report means the proof is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub issues: Vec<Issue>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, node: Option<usize>, message: impl Into<String>) {
        self.issues.push(Issue { node, message: message.into() });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("valid");
        }
        for i in &self.issues {
            writeln!(f, "{}", i)?;
        }
        Ok(())
    }
}

fn constraint_valid(c: &Constraint) -> bool {
    match c {
        Constraint::Lin(l) => l.is_trivial(),
        Constraint::Diff(DiffConstraint::Diff(x, q, y)) => x == y && *q == Rational::from_integer(0.into()),
        _ => false,
    }
}

/// Canonical atoms, with valid atoms as `⊤` and contradictory ones as `⊥`.
fn prop_normal(c: &Concept) -> Concept {
    c.map(&|x| match x {
        Concept::Atom(a) if constraint_valid(a) => Some(Concept::Top),
        Concept::Atom(a) if a.is_bot() => Some(Concept::Bot),
        Concept::Atom(a) => Some(Concept::Atom(a.canonical())),
        _ => None,
    })
}

/// Validity of `lhs ⊑ rhs` read propositionally, with names, atoms and
/// role restrictions as propositional variables.
pub fn is_tautology(g: &Gci) -> bool {
    let f = nnf(&prop_normal(&Concept::or(Concept::not(g.lhs.clone()), g.rhs.clone())));
    cnf(&f).iter().all(|cl| {
        cl.iter().any(|l| match l {
            Concept::Top => true,
            Concept::Forall(_, f) if **f == Concept::Top => true,
            Concept::Not(_) | Concept::Forall(..) => cl.contains(&negated(l)),
            _ => false,
        })
    })
}

fn flatten(c: Concept, out: &mut BTreeSet<Concept>) {
    match c {
        Concept::Or(a, b) => {
            flatten(*a, out);
            flatten(*b, out);
        }
        Concept::Bot => {}
        other => {
            out.insert(other);
        }
    }
}

/// Literals of `⊤ ⊑ ¬lhs ⊔ rhs`.
pub fn literals(g: &Gci) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    flatten(nnf(&prop_normal(&Concept::not(g.lhs.clone()))), &mut out);
    flatten(nnf(&prop_normal(&g.rhs)), &mut out);
    out
}

fn negated(c: &Concept) -> Concept {
    nnf(&Concept::not(c.clone()))
}

fn negated_literals(c: &Concept) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    flatten(nnf(&prop_normal(&Concept::not(c.clone()))), &mut out);
    out
}

fn check_a1(ps: &[Gci], c: &Gci) -> bool {
    if ps.len() != 2 {
        return false;
    }
    let concl = literals(c);
    let (s1, s2) = (literals(&ps[0]), literals(&ps[1]));
    for (a, b) in [(&s1, &s2), (&s2, &s1)] {
        for x in a.iter() {
            let nx = negated_literals(x);
            if !nx.is_empty()
                && nx.is_subset(b)
                && a.iter().filter(|l| *l != x).all(|l| concl.contains(l))
                && b.iter().filter(|l| !nx.contains(l)).all(|l| concl.contains(l))
            {
                return true;
            }
        }
    }
    false
}

/// `[C ⊔ ∃r.F, C₁ ⊔ ∀r.F₁, …, Q] ⟹ C ⊔ C₁ ⊔ …` where `Q` only contains
/// negations of the fillers.
fn check_role_rule(ps: &[Gci], c: &Gci, with_exists_filler: bool) -> bool {
    if ps.len() < 2 {
        return false;
    }
    let concl = literals(c);
    let e = literals(&ps[0]);
    let alls: Vec<BTreeSet<Concept>> = ps[1..ps.len() - 1].iter().map(literals).collect();
    let q = literals(&ps[ps.len() - 1]);
    for ex in &e {
        let Concept::Exists(r, f) = ex else { continue };
        if !e.iter().filter(|l| *l != ex).all(|l| concl.contains(l)) {
            continue;
        }
        let mut choice = vec![None; alls.len()];
        if search_alls(r, f, &alls, 0, &mut choice, &q, &concl, with_exists_filler) {
            return true;
        }
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn search_alls(
    r: &str,
    f: &Concept,
    alls: &[BTreeSet<Concept>],
    k: usize,
    choice: &mut Vec<Option<Concept>>,
    q: &BTreeSet<Concept>,
    concl: &BTreeSet<Concept>,
    with_exists_filler: bool,
) -> bool {
    if k == alls.len() {
        let mut allowed = BTreeSet::new();
        if with_exists_filler {
            allowed.extend(negated_literals(f));
        }
        for fi in choice.iter().flatten() {
            allowed.extend(negated_literals(fi));
        }
        return q.iter().all(|l| allowed.contains(l));
    }
    for lit in &alls[k] {
        let Concept::Forall(r2, fi) = lit else { continue };
        if r2 != r || !alls[k].iter().filter(|l| *l != lit).all(|l| concl.contains(l)) {
            continue;
        }
        choice[k] = Some((**fi).clone());
        if search_alls(r, f, alls, k + 1, choice, q, concl, with_exists_filler) {
            return true;
        }
    }
    choice[k] = None;
    false
}

fn check_norm(ps: &[Gci], c: &Gci) -> bool {
    let [ax] = ps else { return false };
    let concl = literals(c);
    let f = nnf(&prop_normal(&Concept::or(Concept::not(ax.lhs.clone()), ax.rhs.clone())));
    cnf(&f).iter().any(|cl| cl.iter().all(|l| concl.contains(l) || *l == Concept::Bot))
}

fn check_weaken(ps: &[Gci], c: &Gci) -> bool {
    let [p] = ps else { return false };
    let concl = literals(c);
    literals(p).iter().all(|l| concl.contains(l))
}

fn check_el(rule: &str, ps: &[Gci], c: &Gci) -> bool {
    match (rule, ps) {
        (R_SUB, [a, b]) => a.lhs == c.lhs && a.rhs == b.lhs && b.rhs == c.rhs,
        (R_AND_MINUS, [a]) => {
            a.lhs == c.lhs && matches!(&a.rhs, Concept::And(x, y) if **x == c.rhs || **y == c.rhs)
        }
        (R_AND_PLUS, [a, b]) => {
            a.lhs == c.lhs
                && b.lhs == c.lhs
                && matches!(&c.rhs, Concept::And(x, y)
                    if (**x == a.rhs && **y == b.rhs) || (**x == b.rhs && **y == a.rhs))
        }
        (R_EX, [a, b]) => {
            a.lhs == c.lhs
                && matches!((&a.rhs, &c.rhs), (Concept::Exists(r, f), Concept::Exists(r2, g))
                    if r == r2 && **f == b.lhs && **g == b.rhs)
        }
        (R_BOT, [a, b]) => {
            a.lhs == c.lhs
                && c.rhs == Concept::Bot
                && b.rhs == Concept::Bot
                && matches!(&a.rhs, Concept::Exists(_, f) if **f == b.lhs)
        }
        (R_EXFALSO, [a]) => a.lhs == c.lhs && a.rhs == Concept::Bot,
        _ => false,
    }
}

/// Constraint behind a sentence of a concrete-domain step; `⊥` becomes
/// `None`.
fn cd_part(rhs: &Concept) -> Option<Option<Constraint>> {
    match rhs {
        Concept::Atom(a) => Some(Some(a.clone())),
        Concept::Bot => Some(None),
        _ => None,
    }
}

fn check_cd(rule: &str, label: &[Rational], ps: &[Option<Constraint>], c: &Option<Constraint>) -> Result<(), String> {
    if rule == LIN_RULE {
        let mut lins = Vec::new();
        for p in ps {
            match p {
                Some(Constraint::Lin(l)) => lins.push(l.clone()),
                _ => return Err("lin step over a non-linear premise".into()),
            }
        }
        if label.len() != lins.len() {
            return Err(format!("label has {} entries for {} premises", label.len(), lins.len()));
        }
        let sum = combination(label, &lins);
        let ok = match c {
            Some(Constraint::Lin(l)) => sum == *l,
            None => sum.is_contradiction(),
            _ => false,
        };
        return if ok { Ok(()) } else { Err(format!("linear combination gives {}", sum)) };
    }
    if rule == R_DEF {
        return match (ps, c) {
            ([Some(p)], Some(c)) if defined_valid(p, c) => Ok(()),
            _ => Err("R_def does not apply".into()),
        };
    }
    if DIFF_RULES.contains(&rule) {
        let as_diff = |x: &Option<Constraint>| -> Option<DiffConstraint> {
            match x {
                Some(Constraint::Diff(d)) => Some(d.clone()),
                None => Some(DiffConstraint::Bot),
                _ => None,
            }
        };
        let prem: Option<Vec<DiffConstraint>> = ps.iter().map(as_diff).collect();
        return match (prem, as_diff(c)) {
            (Some(p), Some(k)) if diff_rule_valid(rule, &p, &k) => Ok(()),
            _ => Err(format!("{} does not apply", rule)),
        };
    }
    Err(format!("unknown rule {}", rule))
}

fn is_cd_rule(rule: &str) -> bool {
    rule == LIN_RULE || rule == R_DEF || DIFF_RULES.contains(&rule)
}

fn as_gci(s: &Sentence) -> Option<Gci> {
    match s {
        Sentence::Gci(g) => Some(g.clone()),
        Sentence::Clause(lits) => Some(Gci::new(Concept::Top, Concept::disj(lits.iter().cloned()))),
        Sentence::Constraint(_) => None,
    }
}

/// Checker for a fixed theory: GCI axioms and, for pure concrete-domain
/// proofs, constraint premises.
pub struct Checker {
    axioms: BTreeSet<Gci>,
    constraints: BTreeSet<Constraint>,
}

impl Checker {
    pub fn new(o: &Ontology) -> Self {
        Checker {
            axioms: o.axioms.iter().map(|g| g.canonical()).collect(),
            constraints: o.constraints().iter().map(|c| c.canonical()).collect(),
        }
    }

    pub fn for_constraints(premises: &[Constraint]) -> Self {
        Checker { axioms: BTreeSet::new(), constraints: premises.iter().map(|c| c.canonical()).collect() }
    }

    fn leaf_ok(&self, s: &Sentence) -> bool {
        match s {
            Sentence::Constraint(c) => constraint_valid(c) || self.constraints.contains(&c.canonical()),
            other => {
                let g = as_gci(other).unwrap().canonical();
                self.axioms.contains(&g) || is_tautology(&g)
            }
        }
    }

    fn step(&self, rule: &str, label: &[Rational], ps: &[&Sentence], c: &Sentence) -> Result<(), String> {
        if let Sentence::Constraint(k) = c {
            let mut prem = Vec::new();
            for p in ps {
                match p {
                    Sentence::Constraint(x) => prem.push(if x.is_bot() { None } else { Some(x.clone()) }),
                    _ => return Err("mixed constraint and GCI step".into()),
                }
            }
            let k = if k.is_bot() && rule != LIN_RULE { None } else { Some(k.clone()) };
            return check_cd(rule, label, &prem, &k);
        }
        let c = as_gci(c).ok_or("missing conclusion")?;
        let gs: Option<Vec<Gci>> = ps.iter().map(|p| as_gci(p)).collect();
        let gs = gs.ok_or("constraint premise in a GCI step")?;
        if is_cd_rule(rule) {
            if gs.iter().any(|g| g.lhs != c.lhs) {
                return Err("premises do not share the left-hand side".into());
            }
            let parts: Option<Vec<Option<Constraint>>> = gs.iter().map(|g| cd_part(&g.rhs)).collect();
            let parts = parts.ok_or("premise is not a constraint")?;
            let k = cd_part(&c.rhs).ok_or("conclusion is not a constraint")?;
            return check_cd(rule, label, &parts, &k);
        }
        let c = c.canonical();
        let gs: Vec<Gci> = gs.iter().map(|g| g.canonical()).collect();
        let ok = match rule {
            A1 => check_a1(&gs, &c),
            R1 => check_role_rule(&gs, &c, false),
            R2 => check_role_rule(&gs, &c, true),
            NORM => check_norm(&gs, &c),
            WEAKEN => check_weaken(&gs, &c),
            other => check_el(other, &gs, &c),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("{} does not apply", rule))
        }
    }

    pub fn check(&self, p: &Proof) -> Report {
        let mut r = Report::default();
        if p.nodes.is_empty() {
            r.push(None, "empty proof");
            return r;
        }
        if p.nodes.last() != Some(&p.goal) {
            r.push(Some(p.nodes.len() - 1), format!("sink is not the goal {}", p.goal));
        }
        let distinct: BTreeSet<&Sentence> = p.nodes.iter().collect();
        if distinct.len() != p.nodes.len() {
            r.push(None, "a statement occurs twice");
        }
        let mut concluded = vec![false; p.nodes.len()];
        for st in &p.steps {
            if st.conclusion >= p.nodes.len() {
                r.push(None, "step concludes an unknown node");
                continue;
            }
            if concluded[st.conclusion] {
                r.push(Some(st.conclusion), "concluded by two steps");
            }
            concluded[st.conclusion] = true;
            if st.premises.iter().any(|&q| q >= st.conclusion) {
                r.push(Some(st.conclusion), "premise does not precede its conclusion");
                continue;
            }
            let ps: Vec<&Sentence> = st.premises.iter().map(|&q| &p.nodes[q]).collect();
            if let Err(m) = self.step(&st.rule, &st.label, &ps, &p.nodes[st.conclusion]) {
                r.push(Some(st.conclusion), m);
            }
        }
        for (i, s) in p.nodes.iter().enumerate() {
            if !concluded[i] && !self.leaf_ok(s) {
                r.push(Some(i), format!("leaf {} is neither an axiom nor a tautology", s));
            }
        }
        r
    }
}

pub fn check_proof(p: &Proof, o: &Ontology) -> Report {
    Checker::new(o).check(p)
}
