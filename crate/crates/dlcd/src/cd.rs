//! One entry point over both concrete domains, plus the definedness atom
//! `Top(x)` and minimal-implication enumeration.

use std::collections::BTreeSet;

use crate::diff::DiffState;
use crate::lin::LinSolver;
use crate::model::{Constraint, DiffConstraint, LinConstraint};
use crate::proof::{DerivationStructure, Proof, ProofMetric, Sentence};

pub const R_DEF: &str = "R_def";

/// Solver state for one fixed premise set.
#[derive(Clone, Debug)]
pub struct CdSolver {
    premises: Vec<Constraint>,
    lin: LinSolver,
    diff: DiffState,
}

fn sentence(c: &Constraint) -> Sentence {
    Sentence::Constraint(c.clone())
}

impl CdSolver {
    pub fn new(ds: &[Constraint]) -> Self {
        let mut premises: Vec<Constraint> = Vec::new();
        for c in ds {
            if !premises.contains(c) {
                premises.push(c.clone());
            }
        }
        let lins: Vec<LinConstraint> = premises
            .iter()
            .filter_map(|c| match c {
                Constraint::Lin(l) => Some(l.clone()),
                _ => None,
            })
            .collect();
        let diffs: Vec<DiffConstraint> = premises
            .iter()
            .filter_map(|c| match c {
                Constraint::Diff(d) => Some(d.clone()),
                _ => None,
            })
            .collect();
        CdSolver { lin: LinSolver::new(&lins), diff: DiffState::saturate(&diffs), premises }
    }

    pub fn premises(&self) -> &[Constraint] {
        &self.premises
    }

    pub fn lin(&self) -> &LinSolver {
        &self.lin
    }

    pub fn diff(&self) -> &DiffState {
        &self.diff
    }

    pub fn is_unsat(&self) -> bool {
        self.lin.is_unsat() || self.diff.is_bot()
    }

    /// The constraint standing for `⊥` in proofs: the derived `0 = b`, or
    /// the difference-domain `Bot`.
    pub fn bot(&self) -> Option<Constraint> {
        if let Some(b) = self.lin.bot() {
            return Some(Constraint::Lin(b.clone()));
        }
        self.diff.is_bot().then_some(Constraint::Diff(DiffConstraint::Bot))
    }

    fn defining_premise(&self, x: &str) -> Option<&Constraint> {
        self.premises.iter().find(|c| c.vars().iter().any(|v| v == x))
    }

    pub fn entails(&self, beta: &Constraint) -> bool {
        if self.is_unsat() {
            return true;
        }
        match beta {
            Constraint::Lin(l) => l.is_trivial() || self.lin.entails(l),
            Constraint::Diff(d) => self.diff.entails(d),
            Constraint::Defined(x) => self.defining_premise(x).is_some(),
        }
    }

    pub fn unsat_proof(&self, metric: ProofMetric) -> Option<Proof> {
        if self.lin.is_unsat() {
            return self.lin.unsat_proof(metric);
        }
        self.diff.unsat_proof(metric)
    }

    /// Proof of `β` from the premises; when they are unsatisfiable the
    /// proof may end in `⊥` instead (linear equations have no ex-falso rule).
    pub fn proof(&self, beta: &Constraint, metric: ProofMetric) -> Option<Proof> {
        if beta.is_bot() {
            return self.unsat_proof(metric);
        }
        match beta {
            Constraint::Lin(l) => self.lin.proof(l, metric),
            Constraint::Diff(d) => self.diff.proof(d, metric),
            Constraint::Defined(x) => {
                if self.premises.contains(beta) {
                    return Some(Proof::leaf(sentence(beta)));
                }
                if let Some(p) = self.defining_premise(x) {
                    let mut ds = DerivationStructure::new();
                    ds.add_axiom(sentence(p));
                    ds.add_edge(vec![sentence(p)], sentence(beta), R_DEF, vec![]);
                    return ds.extract_proof(&sentence(beta), metric).ok();
                }
                self.unsat_proof(metric)
            }
        }
    }
}

/// `Top(x)` follows from any premise mentioning `x`.
pub fn defined_valid(premise: &Constraint, conclusion: &Constraint) -> bool {
    match conclusion {
        Constraint::Defined(x) => premise.vars().iter().any(|v| v == x),
        _ => false,
    }
}

fn holds(set: &[Constraint], target: Option<&Constraint>) -> bool {
    let s = CdSolver::new(set);
    match target {
        None => s.is_unsat(),
        Some(t) => s.entails(t),
    }
}

fn shrink(set: &[Constraint], target: Option<&Constraint>) -> Vec<Constraint> {
    let mut m = set.to_vec();
    let mut i = 0;
    while i < m.len() {
        let mut trial = m.clone();
        trial.remove(i);
        if holds(&trial, target) {
            m = trial;
        } else {
            i += 1;
        }
    }
    m
}

fn explore(
    set: Vec<Constraint>,
    target: Option<&Constraint>,
    seen: &mut BTreeSet<Vec<Constraint>>,
    found: &mut Vec<Vec<Constraint>>,
) {
    if !seen.insert(set.clone()) || !holds(&set, target) {
        return;
    }
    let m = shrink(&set, target);
    if !found.contains(&m) {
        found.push(m.clone());
    }
    for x in &m {
        let rest: Vec<Constraint> = set.iter().filter(|c| *c != x).cloned().collect();
        explore(rest, target, seen, found);
    }
}

/// Groups of constraints connected through shared variables. A minimal
/// implication or unsatisfiable core never spans two groups.
fn components(base: &[Constraint]) -> Vec<Vec<Constraint>> {
    let mut groups: Vec<(BTreeSet<String>, Vec<Constraint>)> = Vec::new();
    for c in base {
        let vars: BTreeSet<String> = c.vars().into_iter().collect();
        let mut merged = (vars.clone(), vec![c.clone()]);
        let mut rest = Vec::new();
        for g in groups {
            if !vars.is_empty() && !g.0.is_disjoint(&vars) {
                merged.0.extend(g.0);
                let mut cs = g.1;
                cs.extend(merged.1);
                merged.1 = cs;
            } else {
                rest.push(g);
            }
        }
        rest.push(merged);
        groups = rest;
    }
    groups.into_iter().map(|g| base.iter().filter(|c| g.1.contains(c)).cloned().collect()).collect()
}

/// All subset-minimal `(premises, conclusion)` with conclusion in
/// `targets ∪ {⊥}` (`None` stands for `⊥`). A minimal premise set that is
/// itself unsatisfiable is only reported with conclusion `⊥`.
pub fn minimal_implications(ds: &[Constraint], targets: &[Constraint]) -> Vec<(Vec<Constraint>, Option<Constraint>)> {
    let mut base: Vec<Constraint> = Vec::new();
    for c in ds {
        if !base.contains(c) {
            base.push(c.clone());
        }
    }
    let mut out = Vec::new();
    let mut goals: Vec<Option<&Constraint>> = Vec::new();
    for t in targets {
        if !t.is_bot() && !goals.contains(&Some(t)) {
            goals.push(Some(t));
        }
    }
    let comps = components(&base);
    let mut searches: Vec<(Vec<Constraint>, Option<&Constraint>)> = Vec::new();
    for t in goals {
        let vars = t.unwrap().vars();
        let part: Vec<Constraint> = if vars.is_empty() {
            base.clone()
        } else {
            base.iter().filter(|c| comps.iter().any(|k| k.contains(c) && k.iter().any(|d| d.vars().iter().any(|v| vars.contains(v))))).cloned().collect()
        };
        searches.push((part, t));
    }
    for k in &comps {
        searches.push((k.clone(), None));
    }
    for (part, t) in searches {
        let mut seen = BTreeSet::new();
        let mut found = Vec::new();
        explore(part, t, &mut seen, &mut found);
        for m in found {
            if t.is_some() && CdSolver::new(&m).is_unsat() {
                continue;
            }
            out.push((m, t.cloned()));
        }
    }
    out
}

pub fn lin_minimal_implications(
    ds: &[LinConstraint],
    targets: &[LinConstraint],
) -> Vec<(Vec<LinConstraint>, Option<LinConstraint>)> {
    let wrap = |v: &[LinConstraint]| v.iter().cloned().map(Constraint::Lin).collect::<Vec<_>>();
    let unwrap = |c: Constraint| match c {
        Constraint::Lin(l) => l,
        _ => unreachable!(),
    };
    minimal_implications(&wrap(ds), &wrap(targets))
        .into_iter()
        .map(|(ps, t)| (ps.into_iter().map(unwrap).collect(), t.map(unwrap)))
        .collect()
}

pub fn diff_minimal_implications(
    ds: &[DiffConstraint],
    targets: &[DiffConstraint],
) -> Vec<(Vec<DiffConstraint>, Option<DiffConstraint>)> {
    let wrap = |v: &[DiffConstraint]| v.iter().cloned().map(Constraint::Diff).collect::<Vec<_>>();
    let unwrap = |c: Constraint| match c {
        Constraint::Diff(d) => d,
        _ => unreachable!(),
    };
    minimal_implications(&wrap(ds), &wrap(targets))
        .into_iter()
        .map(|(ps, t)| (ps.into_iter().map(unwrap).collect(), t.map(unwrap)))
        .collect()
}
