//! Ordered resolution for ALC with a concrete domain: clausification with
//! definers, saturation restricted to maximal literals under a set-of-support
//! strategy, on-demand concrete-domain clauses, and translation of the
//! clause-level proof back into GCIs.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::abstraction::AbstractionMap;
use crate::cd::{minimal_implications, CdSolver};
use crate::model::{Concept, Constraint, Gci, Ontology};
use crate::proof::{DerivationStructure, Proof, ProofMetric, Sentence};

pub const A1: &str = "A1";
pub const R1: &str = "r1";
pub const R2: &str = "r2";
pub const NORM: &str = "norm";
pub const WEAKEN: &str = "weaken";
pub const INPUT: &str = "input";
pub const CD_CLAUSE: &str = "cd";

pub const DEFAULT_CLAUSE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlcError {
    #[error("not entailed: {0}")]
    NotEntailed(String),
    #[error("clause limit of {0} reached")]
    ResourceLimit(usize),
}

/// Negation normal form: negation only in front of names and atoms.
pub fn nnf(c: &Concept) -> Concept {
    match c {
        Concept::And(a, b) => Concept::and(nnf(a), nnf(b)),
        Concept::Or(a, b) => Concept::or(nnf(a), nnf(b)),
        Concept::Exists(r, f) => Concept::exists(r, nnf(f)),
        Concept::Forall(r, f) => Concept::forall(r, nnf(f)),
        Concept::Not(x) => match x.as_ref() {
            Concept::Top => Concept::Bot,
            Concept::Bot => Concept::Top,
            Concept::Not(y) => nnf(y),
            Concept::And(a, b) => Concept::or(nnf(&Concept::not((**a).clone())), nnf(&Concept::not((**b).clone()))),
            Concept::Or(a, b) => Concept::and(nnf(&Concept::not((**a).clone())), nnf(&Concept::not((**b).clone()))),
            Concept::Exists(r, f) => Concept::forall(r, nnf(&Concept::not((**f).clone()))),
            Concept::Forall(r, f) => Concept::exists(r, nnf(&Concept::not((**f).clone()))),
            other => Concept::not(other.clone()),
        },
        other => other.clone(),
    }
}

/// Clauses of an NNF concept by distribution; each clause lists literal
/// concepts (names, negated names, atoms, role restrictions). `⊤` literals
/// make a clause vanish, `⊥` literals are dropped.
pub fn cnf(c: &Concept) -> Vec<Vec<Concept>> {
    match c {
        Concept::Top => vec![],
        Concept::Bot => vec![vec![]],
        Concept::And(a, b) => {
            let mut v = cnf(a);
            v.extend(cnf(b));
            v
        }
        Concept::Or(a, b) => {
            let ca = cnf(a);
            let cb = cnf(b);
            let mut out = Vec::new();
            for x in &ca {
                for y in &cb {
                    let mut z = x.clone();
                    for l in y {
                        if !z.contains(l) {
                            z.push(l.clone());
                        }
                    }
                    out.push(z);
                }
            }
            out
        }
        other => vec![vec![other.clone()]],
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SymKind {
    User,
    Abstraction,
    Definer { exists: bool, role: u32, filler: Concept },
    Lhs,
    Rhs,
    GoalLhs,
    GoalRhs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lit {
    Pos(u32),
    Neg(u32),
    Ex(u32, u32),
    All(u32, u32),
}

#[derive(Clone, Debug, Default)]
pub struct Symbols {
    names: Vec<String>,
    kinds: Vec<SymKind>,
    by_name: HashMap<String, u32>,
    roles: IndexSet<String>,
    definers: HashMap<(bool, u32, Concept), u32>,
}

impl Symbols {
    fn add(&mut self, name: String, kind: SymKind) -> u32 {
        let id = self.names.len() as u32;
        self.by_name.insert(name.clone(), id);
        self.names.push(name);
        self.kinds.push(kind);
        id
    }

    fn name_id(&mut self, n: &str) -> u32 {
        if let Some(&i) = self.by_name.get(n) {
            return i;
        }
        let kind = if AbstractionMap::is_abstract(n) { SymKind::Abstraction } else { SymKind::User };
        self.add(n.to_string(), kind)
    }

    fn role_id(&mut self, r: &str) -> u32 {
        self.roles.insert_full(r.to_string()).0 as u32
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn kind(&self, id: u32) -> &SymKind {
        &self.kinds[id as usize]
    }

    pub fn role(&self, r: u32) -> &str {
        &self.roles[r as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_definer(&self, id: u32) -> bool {
        matches!(self.kind(id), SymKind::Definer { .. })
    }

    pub fn is_marker(&self, id: u32) -> bool {
        matches!(self.kind(id), SymKind::Lhs | SymKind::Rhs)
    }

    /// Sort key realizing the literal order: markers lowest, then negated
    /// existential definers, negated universal definers, `∃`, `∀`, and
    /// finally names with each `¬A` directly above `A`.
    pub fn key(&self, l: &Lit) -> (u8, u32, u32, u8) {
        match *l {
            Lit::Pos(a) | Lit::Neg(a) if self.is_marker(a) => {
                let neg = matches!(l, Lit::Neg(_)) as u8;
                (0, (self.kind(a) == &SymKind::Rhs) as u32, 0, neg)
            }
            Lit::Neg(d) if self.is_definer(d) => match self.kind(d) {
                SymKind::Definer { exists: true, .. } => (1, d, 0, 0),
                _ => (2, d, 0, 0),
            },
            Lit::Ex(r, d) => (3, r, d, 0),
            Lit::All(r, d) => (4, r, d, 0),
            Lit::Pos(a) => (5, a, 0, 0),
            Lit::Neg(a) => (5, a, 0, 1),
        }
    }

    pub fn literal_concept(&self, l: &Lit) -> Concept {
        let n = |i: u32| Concept::Name(self.name(i).to_string());
        match *l {
            Lit::Pos(a) => n(a),
            Lit::Neg(a) => Concept::not(n(a)),
            Lit::Ex(r, d) => Concept::exists(self.role(r), n(d)),
            Lit::All(r, d) => Concept::forall(self.role(r), n(d)),
        }
    }

    pub fn clause_sentence(&self, c: &[Lit]) -> Sentence {
        Sentence::Clause(c.iter().map(|l| self.literal_concept(l)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    Axiom(usize),
    Definer(u32),
    Marker,
    GoalBridge,
}

/// Clause set obtained from an ontology and a goal, with the provenance
/// of every clause.
#[derive(Clone, Debug)]
pub struct Clausification {
    pub symbols: Symbols,
    pub clauses: IndexMap<Vec<Lit>, Vec<Source>>,
    pub map: AbstractionMap,
    pub ontology: Ontology,
    pub goal: Gci,
    pub lhs: u32,
    pub rhs: u32,
}

impl Clausification {
    pub fn sort(&self, mut c: Vec<Lit>) -> Vec<Lit> {
        c.sort_by_key(|l| self.symbols.key(l));
        c.dedup();
        c
    }

    pub fn is_tautology(c: &[Lit]) -> bool {
        c.iter().any(|l| matches!(l, Lit::Pos(a) if c.contains(&Lit::Neg(*a))))
    }

    /// Every literal occurring in the input clauses.
    pub fn literals(&self) -> BTreeSet<Lit> {
        self.clauses.keys().flatten().copied().collect()
    }
}

struct Builder {
    syms: Symbols,
    clauses: IndexMap<Vec<Lit>, Vec<Source>>,
    pending: VecDeque<u32>,
}

impl Builder {
    fn definer(&mut self, exists: bool, role: &str, filler: &Concept) -> u32 {
        let r = self.syms.role_id(role);
        let key = (exists, r, filler.clone());
        if let Some(&d) = self.syms.definers.get(&key) {
            return d;
        }
        let name = format!("$d{}", self.syms.definers.len());
        let d = self.syms.add(name, SymKind::Definer { exists, role: r, filler: filler.clone() });
        self.syms.definers.insert(key, d);
        self.pending.push_back(d);
        d
    }

    fn literal(&mut self, c: &Concept) -> Lit {
        match c {
            Concept::Name(n) => Lit::Pos(self.syms.name_id(n)),
            Concept::Not(x) => match x.as_ref() {
                Concept::Name(n) => Lit::Neg(self.syms.name_id(n)),
                other => panic!("negation of {} survived normal form", other),
            },
            Concept::Exists(r, f) => Lit::Ex(self.syms.role_id(r), self.definer(true, r, f)),
            Concept::Forall(r, f) => Lit::All(self.syms.role_id(r), self.definer(false, r, f)),
            other => panic!("unexpected literal {}", other),
        }
    }

    fn push(&mut self, lits: Vec<Lit>, src: Source) {
        let mut c = lits;
        c.sort_by_key(|l| self.syms.key(l));
        c.dedup();
        if Clausification::is_tautology(&c) {
            return;
        }
        let e = self.clauses.entry(c).or_default();
        if !e.contains(&src) {
            e.push(src);
        }
    }

    /// Clauses of `⊤ ⊑ prefix ⊔ c`.
    fn add_concept(&mut self, prefix: &[Lit], c: &Concept, src: Source) {
        for cl in cnf(&nnf(c)) {
            let mut lits = prefix.to_vec();
            for l in &cl {
                lits.push(self.literal(l));
            }
            self.push(lits, src.clone());
        }
    }
}

/// Normalizes `o` and the goal `C ⊑ D` into clauses. Non-name goal sides get
/// fresh names `A_C ⊑ C`, `D ⊑ A_D`; the marker clauses are `A_LHS ⊔ A_C`
/// and `A_RHS ⊔ ¬A_D`.
pub fn clausify(o: &Ontology, goal: &Gci) -> Clausification {
    let mut map = AbstractionMap::new();
    let axioms: Vec<Gci> = o.axioms.iter().map(|g| map.abstract_gci(g)).collect();
    let agoal = map.abstract_gci(goal);
    let mut b = Builder { syms: Symbols::default(), clauses: IndexMap::new(), pending: VecDeque::new() };
    for g in axioms.iter().chain(std::iter::once(&agoal)) {
        let mut names: Vec<&String> = Vec::new();
        for c in [&g.lhs, &g.rhs] {
            collect_names(c, &mut names);
        }
        for n in names {
            b.syms.name_id(n);
        }
    }
    let lhs = b.syms.add("$lhs".into(), SymKind::Lhs);
    let rhs = b.syms.add("$rhs".into(), SymKind::Rhs);
    let a = match &agoal.lhs {
        Concept::Name(n) => b.syms.name_id(n),
        other => {
            let id = b.syms.add("$gl".into(), SymKind::GoalLhs);
            b.add_concept(&[Lit::Neg(id)], other, Source::GoalBridge);
            id
        }
    };
    let bb = match &agoal.rhs {
        Concept::Name(n) => b.syms.name_id(n),
        other => {
            let id = b.syms.add("$gr".into(), SymKind::GoalRhs);
            b.add_concept(&[Lit::Pos(id)], &Concept::not(other.clone()), Source::GoalBridge);
            id
        }
    };
    b.push(vec![Lit::Pos(lhs), Lit::Pos(a)], Source::Marker);
    b.push(vec![Lit::Pos(rhs), Lit::Neg(bb)], Source::Marker);
    for (i, g) in axioms.iter().enumerate() {
        b.add_concept(&[], &Concept::or(Concept::not(g.lhs.clone()), g.rhs.clone()), Source::Axiom(i));
    }
    while let Some(d) = b.pending.pop_front() {
        let filler = match b.syms.kind(d) {
            SymKind::Definer { filler, .. } => filler.clone(),
            _ => unreachable!(),
        };
        b.add_concept(&[Lit::Neg(d)], &filler, Source::Definer(d));
    }
    Clausification {
        symbols: b.syms,
        clauses: b.clauses,
        map,
        ontology: o.clone(),
        goal: goal.clone(),
        lhs,
        rhs,
    }
}

fn collect_names<'a>(c: &'a Concept, out: &mut Vec<&'a String>) {
    match c {
        Concept::Name(n) => {
            if !out.contains(&n) {
                out.push(n);
            }
        }
        other => {
            for x in other.children() {
                collect_names(x, out);
            }
        }
    }
}

/// Concrete-domain clause together with the implication behind it.
#[derive(Clone, Debug)]
pub struct CdClause {
    pub premises: Vec<Constraint>,
    pub conclusion: Option<Constraint>,
    pub proof: Proof,
}

#[derive(Clone, Debug)]
pub struct SaturationResult {
    /// The derived subclause of `A_LHS ⊔ A_RHS`, if any.
    pub success: Option<Vec<Lit>>,
    pub clauses: Vec<Vec<Lit>>,
    pub cd_clauses: HashMap<Vec<Lit>, CdClause>,
    pub ds: DerivationStructure,
    pub inferences: Vec<(&'static str, Vec<Vec<Lit>>, Vec<Lit>)>,
    /// Whether the set-of-support run sufficed.
    pub by_support: bool,
}

struct Saturator<'a> {
    cl: &'a Clausification,
    clauses: Vec<Vec<Lit>>,
    index: HashMap<Vec<Lit>, usize>,
    alive: Vec<bool>,
    support: Vec<bool>,
    active: Vec<bool>,
    queue: VecDeque<usize>,
    by_max: HashMap<Lit, Vec<usize>>,
    neg_inputs: HashMap<u32, Vec<usize>>,
    dset: BTreeSet<u32>,
    targets: Vec<u32>,
    cd_done: HashSet<Vec<Lit>>,
    cd_clauses: HashMap<Vec<Lit>, CdClause>,
    ds: DerivationStructure,
    inferences: Vec<(&'static str, Vec<Vec<Lit>>, Vec<Lit>)>,
    success: Option<usize>,
    cap: usize,
    pending_cd: bool,
}

impl<'a> Saturator<'a> {
    fn new(cl: &'a Clausification, cap: usize) -> Self {
        let mut targets: Vec<u32> = Vec::new();
        for c in cl.clauses.keys() {
            for l in c {
                if let Lit::Neg(a) = l {
                    if cl.symbols.kind(*a) == &SymKind::Abstraction && !targets.contains(a) {
                        targets.push(*a);
                    }
                }
            }
        }
        Saturator {
            cl,
            clauses: Vec::new(),
            index: HashMap::new(),
            alive: Vec::new(),
            support: Vec::new(),
            active: Vec::new(),
            queue: VecDeque::new(),
            by_max: HashMap::new(),
            neg_inputs: HashMap::new(),
            dset: BTreeSet::new(),
            targets,
            cd_done: HashSet::new(),
            cd_clauses: HashMap::new(),
            ds: DerivationStructure::new(),
            inferences: Vec::new(),
            success: None,
            cap,
            pending_cd: false,
        }
    }

    fn syms(&self) -> &Symbols {
        &self.cl.symbols
    }

    fn is_success(&self, c: &[Lit]) -> bool {
        c.iter().all(|l| *l == Lit::Pos(self.cl.lhs) || *l == Lit::Pos(self.cl.rhs))
    }

    fn subsumed(&self, c: &[Lit]) -> bool {
        (0..self.clauses.len()).any(|i| self.alive[i] && self.clauses[i].iter().all(|l| c.contains(l)))
    }

    /// Adds a clause (forward/backward subsumption, tautology deletion).
    fn add(&mut self, lits: Vec<Lit>, premises: &[usize], rule: &'static str, support: bool) -> Result<(), AlcError> {
        let c = self.cl.sort(lits);
        if Clausification::is_tautology(&c) {
            return Ok(());
        }
        let sentence = self.syms().clause_sentence(&c);
        if let Some(&i) = self.index.get(&c) {
            if !premises.contains(&i) {
                let ps = premises.iter().map(|&p| self.syms().clause_sentence(&self.clauses[p])).collect();
                self.ds.add_edge(ps, sentence, rule, vec![]);
            }
            return Ok(());
        }
        if self.subsumed(&c) {
            return Ok(());
        }
        if self.clauses.len() >= self.cap {
            return Err(AlcError::ResourceLimit(self.cap));
        }
        let id = self.clauses.len();
        let ps: Vec<Sentence> = premises.iter().map(|&p| self.syms().clause_sentence(&self.clauses[p])).collect();
        if premises.is_empty() {
            self.ds.add_edge(vec![], sentence, rule, vec![]);
        } else {
            self.inferences.push((rule, premises.iter().map(|&p| self.clauses[p].clone()).collect(), c.clone()));
            self.ds.add_edge(ps, sentence, rule, vec![]);
        }
        for i in 0..self.clauses.len() {
            if self.alive[i] && c.iter().all(|l| self.clauses[i].contains(l)) {
                self.alive[i] = false;
            }
        }
        self.index.insert(c.clone(), id);
        self.clauses.push(c.clone());
        self.alive.push(true);
        self.support.push(false);
        self.active.push(false);
        if self.is_success(&c) {
            self.success = Some(id);
        }
        if rule == INPUT {
            for l in &c {
                if let Lit::Neg(d) = l {
                    self.neg_inputs.entry(*d).or_default().push(id);
                }
            }
        }
        if support {
            self.make_support(id);
        } else {
            self.activate(id);
        }
        Ok(())
    }

    fn activate(&mut self, id: usize) {
        self.active[id] = true;
        if let Some(m) = self.clauses[id].last() {
            self.by_max.entry(*m).or_default().push(id);
        }
    }

    fn make_support(&mut self, id: usize) {
        if self.support[id] {
            return;
        }
        self.support[id] = true;
        if self.active[id] {
            self.active[id] = false;
            if let Some(m) = self.clauses[id].last() {
                if let Some(v) = self.by_max.get_mut(m) {
                    v.retain(|&x| x != id);
                }
            }
        }
        self.queue.push_back(id);
        let lits = self.clauses[id].clone();
        for l in &lits {
            match l {
                Lit::Ex(_, d) | Lit::All(_, d) => {
                    for c in self.neg_inputs.get(d).cloned().unwrap_or_default() {
                        if self.alive[c] {
                            self.make_support(c);
                        }
                    }
                }
                Lit::Pos(a) if self.syms().kind(*a) == &SymKind::Abstraction
                    && self.dset.insert(*a) => {
                        self.pending_cd = true;
                    }
                _ => {}
            }
        }
    }

    fn constraint(&self, a: u32) -> Constraint {
        self.cl.map.constraint(self.syms().name(a)).expect("abstraction name").clone()
    }

    fn cd_update(&mut self) -> Result<(), AlcError> {
        self.pending_cd = false;
        let ds: Vec<u32> = self.dset.iter().copied().collect();
        let premises: Vec<Constraint> = ds.iter().map(|&a| self.constraint(a)).collect();
        let targets: Vec<Constraint> = self.targets.iter().map(|&a| self.constraint(a)).collect();
        for (ps, concl) in minimal_implications(&premises, &targets) {
            let mut lits: Vec<Lit> = ps
                .iter()
                .map(|p| Lit::Neg(ds[premises.iter().position(|x| x == p).unwrap()]))
                .collect();
            if let Some(b) = &concl {
                let j = targets.iter().position(|t| t == b).unwrap();
                lits.push(Lit::Pos(self.targets[j]));
            }
            let lits = self.cl.sort(lits);
            if !self.cd_done.insert(lits.clone()) {
                continue;
            }
            let solver = CdSolver::new(&ps);
            let proof = match &concl {
                Some(b) => solver.proof(b, ProofMetric::Size),
                None => solver.unsat_proof(ProofMetric::Size),
            }
            .expect("minimal implications are valid");
            self.cd_clauses.insert(lits.clone(), CdClause { premises: ps, conclusion: concl, proof });
            self.add(lits, &[], CD_CLAUSE, true)?;
            if self.success.is_some() {
                return Ok(());
            }
        }
        Ok(())
    }

    fn partners(&self, m: &Lit) -> Vec<usize> {
        self.by_max.get(m).map(|v| v.iter().copied().filter(|&i| self.alive[i]).collect()).unwrap_or_default()
    }

    fn is_q(&self, c: &[Lit]) -> bool {
        !c.is_empty() && c.iter().all(|l| matches!(l, Lit::Neg(d) if self.syms().is_definer(*d)))
    }

    fn infer(&mut self, g: usize) -> Vec<(Vec<Lit>, Vec<usize>, &'static str)> {
        let mut out = Vec::new();
        let gc = self.clauses[g].clone();
        let Some(&m) = gc.last() else { return out };
        let strip = |c: &Vec<Lit>| -> Vec<Lit> { c[..c.len() - 1].to_vec() };
        match m {
            Lit::Pos(a) if !self.syms().is_marker(a) => {
                for p in self.partners(&Lit::Neg(a)) {
                    let mut r = strip(&gc);
                    r.extend(strip(&self.clauses[p]));
                    out.push((r, vec![g, p], A1));
                }
            }
            Lit::Neg(a) if !self.syms().is_definer(a) && !self.syms().is_marker(a) => {
                for p in self.partners(&Lit::Pos(a)) {
                    let mut r = strip(&self.clauses[p]);
                    r.extend(strip(&gc));
                    out.push((r, vec![p, g], A1));
                }
            }
            _ => {}
        }
        let g_is_q = self.is_q(&gc);
        if !g_is_q && !matches!(m, Lit::Ex(..) | Lit::All(..)) {
            return out;
        }
        let usable = |i: usize| i == g || (self.alive[i] && self.active[i]);
        let qs: Vec<usize> = if g_is_q {
            vec![g]
        } else {
            (0..self.clauses.len()).filter(|&i| usable(i) && self.is_q(&self.clauses[i])).collect()
        };
        let mut exs: Vec<usize> = Vec::new();
        for (l, v) in &self.by_max {
            if matches!(l, Lit::Ex(..)) {
                exs.extend(v.iter().copied().filter(|&i| self.alive[i]));
            }
        }
        if matches!(m, Lit::Ex(..)) {
            exs.push(g);
        }
        exs.sort_unstable();
        exs.dedup();
        for &q in &qs {
            let defs: Vec<u32> = self.clauses[q]
                .iter()
                .map(|l| match l {
                    Lit::Neg(d) => *d,
                    _ => unreachable!(),
                })
                .collect();
            for &e in &exs {
                let Some(&Lit::Ex(r, d)) = self.clauses[e].last() else { continue };
                let (rule, rest): (&'static str, Vec<u32>) = if defs.contains(&d) {
                    (R2, defs.iter().copied().filter(|x| *x != d).collect())
                } else {
                    (R1, defs.clone())
                };
                if rest.iter().any(|x| !matches!(self.syms().kind(*x), SymKind::Definer { exists: false, role, .. } if *role == r)) {
                    continue;
                }
                let mut options: Vec<Vec<usize>> = Vec::new();
                for di in &rest {
                    let lit = Lit::All(r, *di);
                    let mut v = self.partners(&lit);
                    if m == lit && !v.contains(&g) {
                        v.push(g);
                    }
                    options.push(v);
                }
                if options.iter().any(|v| v.is_empty()) {
                    continue;
                }
                let mut combo = vec![0usize; options.len()];
                loop {
                    let alls: Vec<usize> = combo.iter().enumerate().map(|(k, &j)| options[k][j]).collect();
                    if e == g || q == g || alls.contains(&g) {
                        let mut concl = strip(&self.clauses[e]);
                        for &a in &alls {
                            concl.extend(strip(&self.clauses[a]));
                        }
                        let mut prem = vec![e];
                        prem.extend(alls.iter().copied());
                        prem.push(q);
                        out.push((concl, prem, rule));
                    }
                    let mut k = 0;
                    while k < combo.len() {
                        combo[k] += 1;
                        if combo[k] < options[k].len() {
                            break;
                        }
                        combo[k] = 0;
                        k += 1;
                    }
                    if k == combo.len() {
                        break;
                    }
                }
            }
        }
        out
    }

    fn run(&mut self, all_support: bool) -> Result<(), AlcError> {
        for (c, srcs) in &self.cl.clauses {
            let support = all_support || srcs.contains(&Source::Marker);
            self.add(c.clone(), &[], INPUT, support)?;
        }
        loop {
            if self.success.is_some() {
                return Ok(());
            }
            let Some(g) = self.queue.pop_front() else {
                if self.pending_cd {
                    self.cd_update()?;
                    continue;
                }
                return Ok(());
            };
            if !self.alive[g] || self.active[g] {
                continue;
            }
            self.activate(g);
            for (lits, prem, rule) in self.infer(g) {
                self.add(lits, &prem, rule, true)?;
                if self.success.is_some() {
                    return Ok(());
                }
            }
        }
    }
}

/// Saturates the clause set; falls back to plain ordered resolution when
/// the set-of-support run ends without success.
pub fn alc_saturate(cl: &Clausification, cap: usize) -> Result<SaturationResult, AlcError> {
    let mut by_support = true;
    let mut s = Saturator::new(cl, cap);
    s.run(false)?;
    if s.success.is_none() {
        by_support = false;
        s = Saturator::new(cl, cap);
        s.run(true)?;
    }
    Ok(SaturationResult {
        success: s.success.map(|i| s.clauses[i].clone()),
        clauses: s.clauses,
        cd_clauses: s.cd_clauses,
        ds: s.ds,
        inferences: s.inferences,
        by_support,
    })
}

pub fn alc_entails(o: &Ontology, goal: &Gci) -> Result<bool, AlcError> {
    let cl = clausify(o, goal);
    Ok(alc_saturate(&cl, DEFAULT_CLAUSE_CAP)?.success.is_some())
}

/// Reading of clauses as GCIs after replacing every introduced name.
pub struct ClauseReader<'a> {
    cl: &'a Clausification,
}

impl<'a> ClauseReader<'a> {
    pub fn new(cl: &'a Clausification) -> Self {
        ClauseReader { cl }
    }

    fn name(&self, a: u32) -> Concept {
        let s = &self.cl.symbols;
        match s.kind(a) {
            SymKind::User => Concept::Name(s.name(a).to_string()),
            SymKind::Abstraction => Concept::Atom(self.cl.map.constraint(s.name(a)).unwrap().clone()),
            SymKind::Definer { filler, .. } => self.cl.map.concretize(filler),
            SymKind::Lhs => Concept::not(self.cl.goal.lhs.clone()),
            SymKind::Rhs | SymKind::GoalRhs => self.cl.goal.rhs.clone(),
            SymKind::GoalLhs => self.cl.goal.lhs.clone(),
        }
    }

    pub fn literal(&self, l: &Lit) -> Concept {
        let s = &self.cl.symbols;
        match *l {
            Lit::Pos(a) => self.name(a),
            Lit::Neg(a) => nnf(&Concept::not(self.name(a))),
            Lit::Ex(r, d) => Concept::exists(s.role(r), self.name(d)),
            Lit::All(r, d) => Concept::forall(s.role(r), self.name(d)),
        }
    }

    pub fn gci(&self, c: &[Lit]) -> Gci {
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let mut parts = Vec::new();
        for l in c {
            let mut stack = vec![self.literal(l)];
            while let Some(x) = stack.pop() {
                match x {
                    Concept::Or(a, b) => {
                        stack.push(*b);
                        stack.push(*a);
                    }
                    other => parts.push(other),
                }
            }
        }
        for part in parts {
            match part {
                Concept::Not(x) => lhs.push(*x),
                Concept::Forall(r, f) if *f == Concept::Bot => lhs.push(Concept::exists(&r, Concept::Top)),
                Concept::Exists(r, f) if matches!(*f, Concept::Not(_)) => {
                    let Concept::Not(x) = *f else { unreachable!() };
                    lhs.push(Concept::forall(&r, *x));
                }
                Concept::Forall(r, f) if matches!(*f, Concept::Not(_)) => {
                    let Concept::Not(x) = *f else { unreachable!() };
                    lhs.push(Concept::exists(&r, *x));
                }
                Concept::Bot => {}
                other => rhs.push(other),
            }
        }
        lhs.retain(|x| *x != Concept::Top);
        let mut seen_l = Vec::new();
        for x in lhs {
            if !seen_l.contains(&x) {
                seen_l.push(x);
            }
        }
        let mut seen_r = Vec::new();
        for x in rhs {
            if !seen_r.contains(&x) {
                seen_r.push(x);
            }
        }
        Gci::new(Concept::conj(seen_l), Concept::disj(seen_r))
    }
}

fn lift_cd(ds: &mut DerivationStructure, ctx: &Concept, cd: &CdClause) {
    let lift = |s: &Sentence| -> Sentence {
        match s {
            Sentence::Constraint(c) if c.is_bot() => Sentence::Gci(Gci::new(ctx.clone(), Concept::Bot)),
            Sentence::Constraint(c) => Sentence::Gci(Gci::new(ctx.clone(), Concept::Atom(c.clone()))),
            other => other.clone(),
        }
    };
    let p = &cd.proof;
    for (i, s) in p.nodes.iter().enumerate() {
        match p.step_for(i) {
            Some(st) => {
                let ps = st.premises.iter().map(|&q| lift(&p.nodes[q])).collect();
                ds.add_edge(ps, lift(s), &st.rule, st.label.clone());
            }
            None => ds.add_tautology(lift(s)),
        }
    }
}

/// GCI proof of the goal built from the clause-level refutation.
pub fn alc_prove(o: &Ontology, goal: &Gci, metric: ProofMetric) -> Result<Proof, AlcError> {
    alc_prove_with(o, goal, metric, DEFAULT_CLAUSE_CAP)
}

pub fn alc_prove_with(o: &Ontology, goal: &Gci, metric: ProofMetric, cap: usize) -> Result<Proof, AlcError> {
    let cl = clausify(o, goal);
    let res = alc_saturate(&cl, cap)?;
    let Some(succ) = res.success.clone() else {
        return Err(AlcError::NotEntailed(goal.to_string()));
    };
    let syms = &cl.symbols;
    let cproof = res.ds.extract_proof(&syms.clause_sentence(&succ), metric).expect("success clause is derived");
    let mut by_sentence: HashMap<Sentence, Vec<Lit>> = HashMap::new();
    for c in res.clauses.iter() {
        by_sentence.insert(syms.clause_sentence(c), c.clone());
    }
    let reader = ClauseReader::new(&cl);
    let as_gci = |s: &Sentence| -> Gci { reader.gci(&by_sentence[s]) };
    let mut ds = DerivationStructure::new();
    for (i, node) in cproof.nodes.iter().enumerate() {
        let g = as_gci(node);
        match cproof.step_for(i) {
            Some(st) => {
                let ps: Vec<Sentence> = st.premises.iter().map(|&p| Sentence::Gci(as_gci(&cproof.nodes[p]))).collect();
                if ps.contains(&Sentence::Gci(g.clone())) {
                    continue;
                }
                ds.add_edge(ps, Sentence::Gci(g), &st.rule, vec![]);
            }
            None => {
                let lits = &by_sentence[node];
                if let Some(cd) = res.cd_clauses.get(lits) {
                    lift_cd(&mut ds, &g.lhs, cd);
                    continue;
                }
                for src in cl.clauses.get(lits).cloned().unwrap_or_default() {
                    match src {
                        Source::Axiom(k) => {
                            let ax = &o.axioms[k];
                            ds.add_axiom(Sentence::Gci(ax.clone()));
                            if *ax != g {
                                ds.add_edge(vec![Sentence::Gci(ax.clone())], Sentence::Gci(g.clone()), NORM, vec![]);
                            }
                        }
                        Source::Definer(_) | Source::Marker | Source::GoalBridge => {
                            ds.add_tautology(Sentence::Gci(g.clone()));
                        }
                    }
                }
            }
        }
    }
    let goal_gci = reader.gci(&[Lit::Pos(cl.lhs), Lit::Pos(cl.rhs)]);
    let succ_gci = reader.gci(&succ);
    if succ_gci != goal_gci {
        ds.add_edge(vec![Sentence::Gci(succ_gci)], Sentence::Gci(goal_gci.clone()), WEAKEN, vec![]);
    }
    if goal_gci != *goal {
        ds.add_edge(vec![Sentence::Gci(goal_gci)], Sentence::Gci(goal.clone()), WEAKEN, vec![]);
    }
    ds.extract_proof(&Sentence::Gci(goal.clone()), metric).map_err(|e| AlcError::NotEntailed(e.to_string()))
}
