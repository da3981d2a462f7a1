//! Consequence-based classification for EL⊥ with recorded inferences.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::interp::Interpretation;
use crate::model::{Assignment, Concept, Gci, Ontology};
use crate::proof::{DerivationStructure, Sentence};

pub const R_SUB: &str = "R_sub";
pub const R_AND_MINUS: &str = "R_and-";
pub const R_AND_PLUS: &str = "R_and+";
pub const R_EX: &str = "R_ex";
pub const R_BOT: &str = "R_bot";
pub const R_EXFALSO: &str = "R_exfalso";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElError {
    #[error("{0} is entailed, so no countermodel exists")]
    Entailed(String),
    #[error("not an EL concept: {0}")]
    NotEl(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Shape {
    Top,
    Bot,
    Opaque,
    And(usize, usize),
    Exists(String, usize),
}

/// Pairs `⟨C, D⟩` over the indexed subconcepts with `C ⊑ D` entailed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Classification {
    pairs: BTreeSet<(Concept, Concept)>,
}

impl Classification {
    pub fn new(pairs: BTreeSet<(Concept, Concept)>) -> Self {
        Classification { pairs }
    }

    pub fn contains(&self, c: &Concept, d: &Concept) -> bool {
        self.pairs.contains(&(c.clone(), d.clone()))
    }

    pub fn pairs(&self) -> &BTreeSet<(Concept, Concept)> {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Concept, Concept)> {
        self.pairs.iter()
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (c, d) in &self.pairs {
            writeln!(f, "{}", Gci::new(c.clone(), d.clone()))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ElReasoner {
    concepts: IndexSet<Concept>,
    shape: Vec<Shape>,
    axioms: IndexSet<Gci>,
    by_lhs: Vec<Vec<(usize, usize)>>,
    conj_parents: Vec<Vec<(usize, usize)>>,
    exists_by_filler: Vec<Vec<(String, usize)>>,
    subs: Vec<IndexSet<usize>>,
    derived: Vec<HashSet<usize>>,
    links: Vec<Vec<(usize, String, usize)>>,
    queue: VecDeque<(usize, usize)>,
    ds: DerivationStructure,
    fresh: Vec<usize>,
}

const TOP: usize = 0;
const BOT: usize = 1;

impl ElReasoner {
    /// Saturates `o`; `extra` concepts are indexed as well so that queries
    /// about them can be answered.
    pub fn new(o: &Ontology, extra: &[Concept]) -> Self {
        let mut r = ElReasoner {
            concepts: IndexSet::new(),
            shape: Vec::new(),
            axioms: IndexSet::new(),
            by_lhs: Vec::new(),
            conj_parents: Vec::new(),
            exists_by_filler: Vec::new(),
            subs: Vec::new(),
            derived: Vec::new(),
            links: Vec::new(),
            queue: VecDeque::new(),
            ds: DerivationStructure::new(),
            fresh: Vec::new(),
        };
        r.intern(&Concept::Top);
        r.intern(&Concept::Bot);
        r.add(&o.axioms, extra);
        r
    }

    pub fn structure(&self) -> &DerivationStructure {
        &self.ds
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.iter()
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Gci> {
        self.axioms.iter()
    }

    pub fn id(&self, c: &Concept) -> Option<usize> {
        self.concepts.get_index_of(c)
    }

    fn sentence(&self, c: usize, d: usize) -> Sentence {
        Sentence::Gci(Gci::new(self.concepts[c].clone(), self.concepts[d].clone()))
    }

    fn intern(&mut self, c: &Concept) -> usize {
        if let Some(i) = self.concepts.get_index_of(c) {
            return i;
        }
        let shape = match c {
            Concept::Top => Shape::Top,
            Concept::Bot => Shape::Bot,
            Concept::And(a, b) => Shape::And(self.intern(a), self.intern(b)),
            Concept::Exists(r, f) => Shape::Exists(r.clone(), self.intern(f)),
            _ => Shape::Opaque,
        };
        let (id, _) = self.concepts.insert_full(c.clone());
        self.shape.push(shape.clone());
        self.by_lhs.push(Vec::new());
        self.conj_parents.push(Vec::new());
        self.exists_by_filler.push(Vec::new());
        self.subs.push(IndexSet::new());
        self.derived.push(HashSet::new());
        self.links.push(Vec::new());
        match shape {
            Shape::And(a, b) => {
                self.conj_parents[a].push((id, b));
                if a != b {
                    self.conj_parents[b].push((id, a));
                }
            }
            Shape::Exists(r, f) => self.exists_by_filler[f].push((r, id)),
            _ => {}
        }
        let s = self.sentence(id, id);
        self.ds.add_tautology(s);
        self.derive_raw(id, id);
        if id != TOP {
            let s = self.sentence(id, TOP);
            self.ds.add_tautology(s);
            self.derive_raw(id, TOP);
        }
        self.fresh.push(id);
        id
    }

    fn derive_raw(&mut self, c: usize, d: usize) {
        if self.derived[c].insert(d) {
            self.queue.push_back((c, d));
        }
    }

    fn derive(&mut self, c: usize, d: usize, premises: Vec<Sentence>, rule: &str) {
        let s = self.sentence(c, d);
        self.ds.add_edge(premises, s, rule, vec![]);
        self.derive_raw(c, d);
    }

    /// Adds axioms (and extra concepts) to a saturated state and
    /// saturates again, reusing everything derived so far.
    pub fn add(&mut self, axioms: &[Gci], extra: &[Concept]) {
        self.fresh.clear();
        for c in extra {
            self.intern(c);
        }
        let mut new_axioms = Vec::new();
        for g in axioms {
            let l = self.intern(&g.lhs);
            let r = self.intern(&g.rhs);
            let (gi, inserted) = self.axioms.insert_full(g.clone());
            if inserted {
                self.ds.add_axiom(Sentence::Gci(g.clone()));
                self.by_lhs[l].push((r, gi));
                new_axioms.push((l, r, gi));
            }
        }
        let fresh = std::mem::take(&mut self.fresh);
        let contexts: Vec<usize> = (0..self.concepts.len()).filter(|i| !fresh.contains(i)).collect();
        for &n in &fresh {
            match self.shape[n].clone() {
                Shape::And(a, b) => {
                    for &c in &contexts {
                        if self.subs[c].contains(&a) && self.subs[c].contains(&b) {
                            let ps = vec![self.sentence(c, a), self.sentence(c, b)];
                            self.derive(c, n, ps, R_AND_PLUS);
                        }
                    }
                }
                Shape::Exists(r, g) => {
                    for f in 0..self.concepts.len() {
                        if !self.subs[f].contains(&g) {
                            continue;
                        }
                        for (p, r2, ex) in self.links[f].clone() {
                            if r2 == r {
                                let ps = vec![self.sentence(p, ex), self.sentence(f, g)];
                                self.derive(p, n, ps, R_EX);
                            }
                        }
                    }
                }
                _ => {}
            }
            for &c in &contexts {
                if self.subs[c].contains(&BOT) {
                    let ps = vec![self.sentence(c, BOT)];
                    self.derive(c, n, ps, R_EXFALSO);
                }
            }
        }
        for (l, r, gi) in new_axioms {
            for c in 0..self.concepts.len() {
                if self.subs[c].contains(&l) {
                    let ps = vec![self.sentence(c, l), Sentence::Gci(self.axioms[gi].clone())];
                    self.derive(c, r, ps, R_SUB);
                }
            }
        }
        self.saturate();
    }

    fn apply_ex(&mut self, p: usize, ex: usize, role: &str, f: usize, g: usize) {
        if g == BOT {
            let ps = vec![self.sentence(p, ex), self.sentence(f, g)];
            self.derive(p, BOT, ps, R_BOT);
        }
        for (r2, ex2) in self.exists_by_filler[g].clone() {
            if r2 == role {
                let ps = vec![self.sentence(p, ex), self.sentence(f, g)];
                self.derive(p, ex2, ps, R_EX);
            }
        }
    }

    fn saturate(&mut self) {
        while let Some((c, d)) = self.queue.pop_front() {
            self.subs[c].insert(d);
            match self.shape[d].clone() {
                Shape::Bot => {
                    for e in 0..self.concepts.len() {
                        if e != BOT {
                            let ps = vec![self.sentence(c, BOT)];
                            self.derive(c, e, ps, R_EXFALSO);
                        }
                    }
                }
                Shape::And(a, b) => {
                    let ps = vec![self.sentence(c, d)];
                    self.derive(c, a, ps.clone(), R_AND_MINUS);
                    self.derive(c, b, ps, R_AND_MINUS);
                }
                Shape::Exists(r, f) => {
                    self.links[f].push((c, r.clone(), d));
                    for g in self.subs[f].clone() {
                        self.apply_ex(c, d, &r, f, g);
                    }
                }
                Shape::Top | Shape::Opaque => {}
            }
            for (conj, other) in self.conj_parents[d].clone() {
                if self.subs[c].contains(&other) {
                    let (a, b) = match self.shape[conj] {
                        Shape::And(a, b) => (a, b),
                        _ => unreachable!(),
                    };
                    let ps = vec![self.sentence(c, a), self.sentence(c, b)];
                    self.derive(c, conj, ps, R_AND_PLUS);
                }
            }
            for (r, gi) in self.by_lhs[d].clone() {
                let ps = vec![self.sentence(c, d), Sentence::Gci(self.axioms[gi].clone())];
                self.derive(c, r, ps, R_SUB);
            }
            for (p, role, ex) in self.links[c].clone() {
                self.apply_ex(p, ex, &role, c, d);
            }
        }
    }

    pub fn subsumes(&self, c: &Concept, d: &Concept) -> bool {
        match (self.id(c), self.id(d)) {
            (Some(i), Some(j)) => self.subs[i].contains(&j),
            _ => false,
        }
    }

    /// Derived subsumers of `c` in derivation order.
    pub fn subsumers(&self, c: &Concept) -> Vec<&Concept> {
        match self.id(c) {
            Some(i) => self.subs[i].iter().map(|&j| &self.concepts[j]).collect(),
            None => Vec::new(),
        }
    }

    pub fn is_unsat(&self, c: &Concept) -> bool {
        self.subsumes(c, &Concept::Bot)
    }

    pub fn classification(&self) -> Classification {
        let mut pairs = BTreeSet::new();
        for (i, s) in self.subs.iter().enumerate() {
            for &j in s {
                pairs.insert((self.concepts[i].clone(), self.concepts[j].clone()));
            }
        }
        Classification { pairs }
    }

    /// Canonical model over the satisfiable indexed concepts; an element
    /// belongs to `A` iff its concept is subsumed by `A`.
    pub fn canonical_model(&self) -> Interpretation {
        let mut index: IndexMap<usize, usize> = IndexMap::new();
        let mut it = Interpretation::default();
        for i in 0..self.concepts.len() {
            if !self.subs[i].contains(&BOT) {
                index.insert(i, it.domain.len());
                it.domain.push(self.concepts[i].to_string());
                it.values.push(Assignment::new());
            }
        }
        for (&i, &e) in &index {
            for &j in &self.subs[i] {
                match &self.concepts[j] {
                    Concept::Name(n) => {
                        it.concepts.entry(n.clone()).or_default().insert(e);
                    }
                    Concept::Exists(r, f) => {
                        if let Some(&fe) = self.id(f).and_then(|fi| index.get(&fi)) {
                            it.roles.entry(r.clone()).or_default().insert((e, fe));
                        }
                    }
                    _ => {}
                }
            }
        }
        it
    }

    /// Model of the ontology in which the element for `c` is not in `d`.
    pub fn countermodel(&self, c: &Concept, d: &Concept) -> Result<Interpretation, ElError> {
        if self.subsumes(c, d) || self.id(c).is_none() {
            return Err(ElError::Entailed(Gci::new(c.clone(), d.clone()).to_string()));
        }
        Ok(self.canonical_model())
    }
}

pub fn el_classify(o: &Ontology) -> (Classification, DerivationStructure) {
    let r = ElReasoner::new(o, &[]);
    (r.classification(), r.ds)
}

pub fn el_countermodel(o: &Ontology, c: &Concept, d: &Concept) -> Result<Interpretation, ElError> {
    for x in [c, d] {
        if !x.is_el() {
            return Err(ElError::NotEl(x.to_string()));
        }
    }
    ElReasoner::new(o, &[c.clone(), d.clone()]).countermodel(c, d)
}
