//! Classification of EL⊥ with a concrete domain by alternating EL⊥
//! saturation with concrete-domain implication tests, and the combined
//! proofs obtained from both.

use std::collections::{BTreeSet, HashSet};

use indexmap::IndexMap;
use thiserror::Error;

use crate::abstraction::AbstractionMap;
use crate::cd::CdSolver;
use crate::el::{Classification, ElReasoner, R_SUB};
use crate::model::{subconcepts, Concept, Constraint, Gci, Ontology};
use crate::proof::{DerivationStructure, Proof, ProofMetric, Sentence, AXIOM, TAUTOLOGY};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EldError {
    #[error("not entailed: {0}")]
    NotEntailed(String),
    #[error("not an EL ontology or goal: {0}")]
    NotEl(String),
}

/// A concrete-domain implication turned into an axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bridge {
    pub premises: Vec<Constraint>,
    /// `None` stands for `⊥`.
    pub conclusion: Option<Constraint>,
    pub proof: Proof,
}

#[derive(Clone, Debug)]
pub struct EldReasoner {
    original: Ontology,
    map: AbstractionMap,
    abstracted: Ontology,
    base: BTreeSet<Concept>,
    el: ElReasoner,
    bridges: IndexMap<Gci, Bridge>,
    rounds: usize,
}

impl EldReasoner {
    pub fn new(o: &Ontology, extra: &[Concept]) -> Self {
        let mut map = AbstractionMap::new();
        let axioms: Vec<Gci> = o.axioms.iter().map(|g| map.abstract_gci(g)).collect();
        let abstracted = Ontology::new(axioms, o.kind);
        let extra: Vec<Concept> = extra.iter().map(|c| map.abstract_concept(c)).collect();
        let mut base = subconcepts(&abstracted);
        for c in &extra {
            c.collect_subconcepts(&mut base);
        }
        for n in map.names() {
            base.insert(Concept::Name(n.clone()));
        }
        let el = ElReasoner::new(&abstracted, &extra);
        let mut r = EldReasoner { original: o.clone(), map, abstracted, base, el, bridges: IndexMap::new(), rounds: 0 };
        r.run();
        r
    }

    fn run(&mut self) {
        let names: Vec<(String, Constraint)> =
            self.map.names().iter().map(|n| (n.clone(), self.map.constraint(n).unwrap().clone())).collect();
        let mut handled: HashSet<Vec<usize>> = HashSet::new();
        loop {
            let mut added: Vec<Gci> = Vec::new();
            let contexts: Vec<Concept> = self.el.concepts().cloned().collect();
            for ctx in contexts {
                if self.el.is_unsat(&ctx) {
                    continue;
                }
                let dc: Vec<usize> = (0..names.len())
                    .filter(|&i| self.el.subsumes(&ctx, &Concept::Name(names[i].0.clone())))
                    .collect();
                if !handled.insert(dc.clone()) {
                    continue;
                }
                let premises: Vec<Constraint> = dc.iter().map(|&i| names[i].1.clone()).collect();
                let lhs = Concept::conj(dc.iter().map(|&i| Concept::Name(names[i].0.clone())));
                let solver = CdSolver::new(&premises);
                if solver.is_unsat() {
                    let g = Gci::new(lhs, Concept::Bot);
                    let proof = solver.unsat_proof(ProofMetric::Size).expect("unsat has a proof");
                    self.bridges.insert(g.clone(), Bridge { premises, conclusion: None, proof });
                    added.push(g);
                    continue;
                }
                for (j, (name, beta)) in names.iter().enumerate() {
                    if dc.contains(&j) || !solver.entails(beta) {
                        continue;
                    }
                    let g = Gci::new(lhs.clone(), Concept::Name(name.clone()));
                    if self.bridges.contains_key(&g) {
                        continue;
                    }
                    let proof = solver.proof(beta, ProofMetric::Size).expect("entailed has a proof");
                    self.bridges.insert(
                        g.clone(),
                        Bridge { premises: premises.clone(), conclusion: Some(beta.clone()), proof },
                    );
                    added.push(g);
                }
            }
            if added.is_empty() {
                break;
            }
            self.rounds += 1;
            self.el.add(&added, &[]);
        }
    }

    /// Rounds that added at least one axiom.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// `|sub(O^{-D})| · |C(O)|`.
    pub fn round_bound(&self) -> usize {
        subconcepts(&self.abstracted).len() * self.original.constraints().len().max(1)
    }

    pub fn map(&self) -> &AbstractionMap {
        &self.map
    }

    pub fn abstracted(&self) -> &Ontology {
        &self.abstracted
    }

    pub fn el(&self) -> &ElReasoner {
        &self.el
    }

    pub fn bridges(&self) -> &IndexMap<Gci, Bridge> {
        &self.bridges
    }

    /// `O'`: the abstracted ontology with every bridge axiom.
    pub fn final_ontology(&self) -> Ontology {
        let mut axioms = self.abstracted.axioms.clone();
        axioms.extend(self.bridges.keys().cloned());
        Ontology::new(axioms, self.original.kind)
    }

    /// Classification restricted to the abstracted subconcepts, with
    /// abstraction names turned back into constraint atoms.
    pub fn classification(&self) -> Classification {
        let mut pairs = BTreeSet::new();
        for (c, d) in self.el.classification().iter() {
            if self.base.contains(c) && self.base.contains(d) {
                pairs.insert((self.map.concretize(c), self.map.concretize(d)));
            }
        }
        Classification::new(pairs)
    }

    pub fn entails(&self, g: &Gci) -> Option<bool> {
        let l = self.map.abstract_known(&g.lhs);
        let r = self.map.abstract_known(&g.rhs);
        self.el.id(&l)?;
        self.el.id(&r)?;
        Some(self.el.subsumes(&l, &r))
    }

    fn concept_for(&self, c: &Constraint) -> Concept {
        if c.is_bot() {
            return Concept::Bot;
        }
        match self.map.exact(c) {
            Some(n) => Concept::Name(n.clone()),
            None => Concept::Atom(c.clone()),
        }
    }

    /// Adds the CD proof of `bridge` under the left-hand side `ctx`.
    fn splice(&self, ds: &mut DerivationStructure, ctx: &Concept, bridge: &Bridge) {
        let lift = |s: &Sentence| -> Sentence {
            match s {
                Sentence::Constraint(c) => Sentence::Gci(Gci::new(ctx.clone(), self.concept_for(c))),
                other => other.clone(),
            }
        };
        let p = &bridge.proof;
        let conjuncts: Vec<&Concept> = ctx.conjuncts();
        for (i, s) in p.nodes.iter().enumerate() {
            match p.step_for(i) {
                Some(st) => {
                    let ps = st.premises.iter().map(|&q| lift(&p.nodes[q])).collect();
                    ds.add_edge(ps, lift(s), &st.rule, st.label.clone());
                }
                None => {
                    let lifted = lift(s);
                    let is_premise = matches!(s, Sentence::Constraint(c) if bridge.premises.contains(c));
                    if !is_premise {
                        ds.add_tautology(lifted);
                    } else if conjuncts.len() > 1 {
                        if let Sentence::Gci(g) = &lifted {
                            if conjuncts.contains(&&g.rhs) {
                                ds.add_tautology(lifted);
                            }
                        }
                    }
                }
            }
        }
    }

    /// The EL derivations with every use of a bridge axiom replaced by its
    /// contextualized concrete-domain proof.
    pub fn combined_structure(&self) -> DerivationStructure {
        let src = self.el.structure();
        let mut ds = DerivationStructure::new();
        for e in src.edges() {
            let concl = src.sentence(e.conclusion);
            if e.premises.is_empty() {
                if e.rule == AXIOM {
                    if let Sentence::Gci(g) = concl {
                        if self.bridges.contains_key(g) {
                            continue;
                        }
                    }
                }
                if e.rule == TAUTOLOGY {
                    ds.add_tautology(concl.clone());
                } else {
                    ds.add_axiom(concl.clone());
                }
                continue;
            }
            if e.rule == R_SUB {
                if let Sentence::Gci(b) = src.sentence(e.premises[1]) {
                    if let Some(bridge) = self.bridges.get(b) {
                        if let Sentence::Gci(first) = src.sentence(e.premises[0]) {
                            self.splice(&mut ds, &first.lhs, bridge);
                        }
                        continue;
                    }
                }
            }
            let ps = e.premises.iter().map(|&p| src.sentence(p).clone()).collect();
            ds.add_edge(ps, concl.clone(), &e.rule, e.label.clone());
        }
        ds
    }

    /// Combined proof of `goal`; its sides must have been indexed.
    pub fn prove(&self, goal: &Gci, metric: ProofMetric) -> Result<Proof, EldError> {
        let abs = Gci::new(self.map.abstract_known(&goal.lhs), self.map.abstract_known(&goal.rhs));
        if self.el.id(&abs.lhs).is_none() || self.el.id(&abs.rhs).is_none() || !self.el.subsumes(&abs.lhs, &abs.rhs) {
            return Err(EldError::NotEntailed(goal.to_string()));
        }
        let ds = self.combined_structure();
        let p = ds.extract_proof(&Sentence::Gci(abs), metric).map_err(|e| EldError::NotEntailed(e.to_string()))?;
        let map = &self.map;
        let concretize = |s: &Sentence| match s {
            Sentence::Gci(g) => Sentence::Gci(map.concretize_gci(g)),
            other => other.clone(),
        };
        Ok(p.map_sentences(concretize, metric))
    }
}

pub fn eld_classify(o: &Ontology) -> (Classification, Ontology, IndexMap<Gci, Bridge>) {
    let r = EldReasoner::new(o, &[]);
    (r.classification(), r.final_ontology(), r.bridges.clone())
}

pub fn eld_prove(o: &Ontology, goal: &Gci, metric: ProofMetric) -> Result<Proof, EldError> {
    if !o.is_el() || !goal.lhs.is_el() || !goal.rhs.is_el() {
        return Err(EldError::NotEl(goal.to_string()));
    }
    EldReasoner::new(o, &[goal.lhs.clone(), goal.rhs.clone()]).prove(goal, metric)
}
