//! Linear equations over the rationals: Gaussian elimination with
//! recorded, checkable steps.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{rat, Assignment, Constraint, LinConstraint, Rational};
use crate::proof::{DerivationStructure, Proof, ProofMetric, Sentence, Step};

pub const LIN_RULE: &str = "lin";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinError {
    #[error("pivot {pivot} has no coefficient for {var}")]
    PivotMissingVariable { pivot: String, var: String },
    #[error("malformed forward proof: {0}")]
    MalformedProof(String),
    #[error("no witness exists: {0}")]
    Infeasible(String),
}

/// `conclusion = Σ label[i]·premises[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinStep {
    pub premises: Vec<LinConstraint>,
    pub conclusion: LinConstraint,
    pub label: Vec<Rational>,
}

impl LinStep {
    pub fn verify(&self) -> bool {
        self.premises.len() == self.label.len() && combination(&self.label, &self.premises) == self.conclusion
    }

    /// Same step with the conclusion's leading coefficient scaled to 1.
    pub fn normalized(&self) -> LinStep {
        let f = match self.conclusion.leading() {
            Some((_, a)) => a.recip(),
            None => Rational::one(),
        };
        LinStep {
            premises: self.premises.clone(),
            conclusion: self.conclusion.scale(&f),
            label: self.label.iter().map(|q| q * &f).collect(),
        }
    }
}

pub fn combination(label: &[Rational], premises: &[LinConstraint]) -> LinConstraint {
    let parts: Vec<(&Rational, &LinConstraint)> = label.iter().zip(premises.iter()).collect();
    LinConstraint::combine(&parts)
}

/// Adds the multiple of `pivot` that cancels `var` in `target`.
pub fn lin_eliminate(target: &LinConstraint, pivot: &LinConstraint, var: &str) -> Result<LinStep, LinError> {
    let p = pivot.coeff(var);
    if p.is_zero() {
        return Err(LinError::PivotMissingVariable { pivot: pivot.to_string(), var: var.to_string() });
    }
    let c = -(target.coeff(var) / p);
    let one = Rational::one();
    let conclusion = LinConstraint::combine(&[(&one, target), (&c, pivot)]);
    Ok(LinStep { premises: vec![target.clone(), pivot.clone()], conclusion, label: vec![one, c] })
}

pub enum Insertion {
    Redundant,
    Contradiction(LinConstraint),
    Row(usize),
}

/// Triangular system in insertion order. Each row's leading variable is
/// absent from every later row; rows keep the scaling produced by
/// elimination so that recorded steps match the original equations.
#[derive(Clone, Debug, Default)]
pub struct EchelonBasis {
    rows: Vec<LinConstraint>,
    leads: BTreeMap<String, usize>,
}

impl EchelonBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[LinConstraint] {
        &self.rows
    }

    pub fn normalized_rows(&self) -> Vec<LinConstraint> {
        self.rows.iter().map(|r| r.canonical()).collect()
    }

    pub fn is_lead(&self, v: &str) -> bool {
        self.leads.contains_key(v)
    }

    /// Forward reduction chain: repeatedly cancel the least variable of the
    /// current equation that leads some row.
    pub fn reduce(&self, c: &LinConstraint) -> Vec<LinStep> {
        let mut steps = Vec::new();
        let mut cur = c.clone();
        loop {
            let hit = cur.coeffs.keys().find_map(|v| self.leads.get(v).map(|&i| (v.clone(), i)));
            let Some((v, i)) = hit else { break };
            let step = lin_eliminate(&cur, &self.rows[i], &v).expect("row leads with v");
            cur = step.conclusion.clone();
            steps.push(step);
        }
        steps
    }

    pub fn reduced(&self, c: &LinConstraint) -> LinConstraint {
        self.reduce(c).last().map(|s| s.conclusion.clone()).unwrap_or_else(|| c.clone())
    }

    pub fn insert(&mut self, c: &LinConstraint) -> (Vec<LinStep>, Insertion) {
        let steps = self.reduce(c);
        let r = steps.last().map(|s| s.conclusion.clone()).unwrap_or_else(|| c.clone());
        let outcome = if r.is_trivial() {
            Insertion::Redundant
        } else if r.is_contradiction() {
            Insertion::Contradiction(r)
        } else {
            let lead = r.leading().unwrap().0.clone();
            self.leads.insert(lead, self.rows.len());
            self.rows.push(r);
            Insertion::Row(self.rows.len() - 1)
        };
        (steps, outcome)
    }

    /// Solves the rows backwards given values for every non-leading variable.
    fn back_substitute(&self, free: &Assignment) -> Assignment {
        let mut a = free.clone();
        for row in self.rows.iter().rev() {
            let (lead, coef) = row.leading().unwrap();
            let mut rest = row.rhs.clone();
            for (v, c) in row.coeffs.iter().skip(1) {
                rest -= c * &a[v];
            }
            a.insert(lead.clone(), rest / coef);
        }
        a
    }
}

fn sentence(c: &LinConstraint) -> Sentence {
    Sentence::Constraint(Constraint::Lin(c.clone()))
}

fn record(ds: &mut DerivationStructure, step: &LinStep) {
    let ps = step.premises.iter().map(sentence).collect();
    ds.add_edge(ps, sentence(&step.conclusion), LIN_RULE, step.label.clone());
}

/// Reversal of a forward reduction `β → … → 0=0`: each step
/// `(σ,ρ)[1,c] → τ` becomes `(ρ,τ)[−c,1] → σ`; the trivial `0=0` premise
/// and any step concluding its own premise are dropped.
pub fn reverse_chain(forward: &[LinStep]) -> Result<Vec<LinStep>, LinError> {
    let mut out = Vec::new();
    for (i, s) in forward.iter().enumerate() {
        if s.premises.len() != 2 || s.label.len() != 2 || !s.label[0].is_one() {
            return Err(LinError::MalformedProof(format!("step {} is not of the form (σ,ρ)[1,c]", i)));
        }
        if !s.verify() {
            return Err(LinError::MalformedProof(format!("step {} does not recompute", i)));
        }
        if i > 0 && forward[i - 1].conclusion != s.premises[0] {
            return Err(LinError::MalformedProof(format!("step {} does not continue the chain", i)));
        }
    }
    match forward.last() {
        Some(s) if !s.conclusion.is_trivial() => {
            return Err(LinError::MalformedProof("chain does not end in 0 = 0".into()))
        }
        _ => {}
    }
    for s in forward.iter().rev() {
        let (sigma, rho, tau) = (&s.premises[0], &s.premises[1], &s.conclusion);
        let c = &s.label[1];
        let step = if tau.is_trivial() {
            LinStep { premises: vec![rho.clone()], conclusion: sigma.clone(), label: vec![-c] }
        } else {
            LinStep { premises: vec![rho.clone(), tau.clone()], conclusion: sigma.clone(), label: vec![-c, rat(1)] }
        };
        if step.premises.contains(&step.conclusion) {
            continue;
        }
        out.push(step);
    }
    Ok(out)
}

/// Incremental solver for one fixed set of equations.
#[derive(Clone, Debug)]
pub struct LinSolver {
    inputs: Vec<LinConstraint>,
    basis: EchelonBasis,
    ds: DerivationStructure,
    bot: Option<LinConstraint>,
}

impl LinSolver {
    pub fn new(ds: &[LinConstraint]) -> Self {
        let mut inputs: Vec<LinConstraint> = Vec::new();
        for c in ds {
            if !inputs.contains(c) {
                inputs.push(c.clone());
            }
        }
        let mut s = LinSolver { inputs: Vec::new(), basis: EchelonBasis::new(), ds: DerivationStructure::new(), bot: None };
        for c in &inputs {
            s.ds.add_axiom(sentence(c));
        }
        for c in &inputs {
            if s.bot.is_some() {
                break;
            }
            let (steps, outcome) = s.basis.insert(c);
            for st in &steps {
                record(&mut s.ds, st);
            }
            if let Insertion::Contradiction(r) = outcome {
                s.bot = Some(r);
            }
        }
        s.inputs = inputs;
        s
    }

    pub fn inputs(&self) -> &[LinConstraint] {
        &self.inputs
    }

    pub fn basis(&self) -> &EchelonBasis {
        &self.basis
    }

    pub fn structure(&self) -> &DerivationStructure {
        &self.ds
    }

    pub fn is_unsat(&self) -> bool {
        self.bot.is_some()
    }

    /// The derived `0 = b`, `b ≠ 0`.
    pub fn bot(&self) -> Option<&LinConstraint> {
        self.bot.as_ref()
    }

    pub fn entails(&self, beta: &LinConstraint) -> bool {
        self.bot.is_some() || self.basis.reduced(beta).is_trivial()
    }

    /// Forward chain reducing `β` to `0 = 0`, if it gets there.
    pub fn forward(&self, beta: &LinConstraint) -> Option<Vec<LinStep>> {
        let chain = self.basis.reduce(beta);
        let last = chain.last().map(|s| &s.conclusion).unwrap_or(beta);
        last.is_trivial().then_some(chain)
    }

    /// Structure with the reversed reduction of `β` added.
    pub fn structure_for(&self, beta: &LinConstraint) -> (bool, DerivationStructure) {
        let mut ds = self.ds.clone();
        if self.bot.is_some() {
            return (true, ds);
        }
        if self.inputs.contains(beta) {
            return (true, ds);
        }
        match self.forward(beta) {
            Some(chain) if !chain.is_empty() => {
                for st in reverse_chain(&chain).expect("reduction chains are well formed") {
                    record(&mut ds, &st);
                }
                (true, ds)
            }
            Some(_) => {
                ds.add_tautology(sentence(beta));
                (true, ds)
            }
            None => (false, ds),
        }
    }

    /// Proof of `β`, or of `⊥` when the equations are unsatisfiable.
    pub fn proof(&self, beta: &LinConstraint, metric: ProofMetric) -> Option<Proof> {
        if let Some(b) = &self.bot {
            return self.ds.extract_proof(&sentence(b), metric).ok();
        }
        let (ok, ds) = self.structure_for(beta);
        if !ok {
            return None;
        }
        ds.extract_proof(&sentence(beta), metric).ok()
    }

    pub fn unsat_proof(&self, metric: ProofMetric) -> Option<Proof> {
        let b = self.bot.as_ref()?;
        self.ds.extract_proof(&sentence(b), metric).ok()
    }

    /// Satisfies every input and none of `avoid`.
    pub fn witness(&self, avoid: &[LinConstraint]) -> Result<Assignment, LinError> {
        if let Some(b) = &self.bot {
            return Err(LinError::Infeasible(format!("the equations derive {}", b)));
        }
        for g in avoid {
            if self.entails(g) {
                return Err(LinError::Infeasible(format!("{} is entailed", g)));
            }
        }
        let mut vars: BTreeSet<String> = BTreeSet::new();
        for c in self.inputs.iter().chain(avoid.iter()) {
            vars.extend(c.vars().cloned());
        }
        let free: Vec<String> = vars.into_iter().filter(|v| !self.basis.is_lead(v)).collect();
        let ok = |a: &Assignment| avoid.iter().all(|g| !g.holds(a));
        let first: Assignment = free.iter().enumerate().map(|(i, v)| (v.clone(), rat(i as i64 + 1))).collect();
        let a = self.basis.back_substitute(&first);
        if ok(&a) {
            return Ok(a);
        }
        // Along the moment curve every non-entailed avoid equation becomes a
        // nonzero polynomial in t, so only finitely many t fail.
        let mut t = rat(2);
        loop {
            let mut pw = t.clone();
            let mut vals = Assignment::new();
            for v in &free {
                vals.insert(v.clone(), pw.clone());
                pw = &pw * &t;
            }
            let a = self.basis.back_substitute(&vals);
            if ok(&a) {
                return Ok(a);
            }
            t += rat(1);
        }
    }
}

pub fn lin_unsat(ds: &[LinConstraint]) -> (bool, DerivationStructure) {
    let s = LinSolver::new(ds);
    (s.is_unsat(), s.ds)
}

pub fn lin_entails(ds: &[LinConstraint], beta: &LinConstraint) -> (bool, DerivationStructure) {
    LinSolver::new(ds).structure_for(beta)
}

/// Proof with leaf `β` and sink `0 = 0` recording the forward reduction.
/// Every reduction result gets a vertex of its own, also when it coincides
/// with a pivot, so the chain back to `β` stays intact.
pub fn lin_forward_proof(ds: &[LinConstraint], beta: &LinConstraint) -> Option<Proof> {
    let s = LinSolver::new(ds);
    let chain = s.forward(beta)?;
    let last = chain.last()?;
    let mut proof = Proof { goal: sentence(&last.conclusion), nodes: Vec::new(), steps: Vec::new() };
    let mut shared: HashMap<Sentence, usize> = HashMap::new();
    let mut pivots = Vec::with_capacity(chain.len());
    for st in &chain {
        let sub = s.ds.extract_proof(&sentence(&st.premises[1]), ProofMetric::Size).ok()?;
        let mut local = Vec::with_capacity(sub.nodes.len());
        for (i, n) in sub.nodes.iter().enumerate() {
            let id = match shared.get(n) {
                Some(&id) => id,
                None => {
                    let id = proof.nodes.len();
                    proof.nodes.push(n.clone());
                    if let Some(step) = sub.step_for(i) {
                        proof.steps.push(Step {
                            conclusion: id,
                            premises: step.premises.iter().map(|&p| local[p]).collect(),
                            rule: step.rule.clone(),
                            label: step.label.clone(),
                        });
                    }
                    shared.insert(n.clone(), id);
                    id
                }
            };
            local.push(id);
        }
        pivots.push(local[sub.sink()]);
    }
    let mut cur = proof.nodes.len();
    proof.nodes.push(sentence(beta));
    for (st, p) in chain.iter().zip(pivots) {
        let id = proof.nodes.len();
        proof.nodes.push(sentence(&st.conclusion));
        proof.steps.push(Step { conclusion: id, premises: vec![cur, p], rule: LIN_RULE.to_string(), label: st.label.clone() });
        cur = id;
    }
    Some(proof)
}

fn as_lin(s: &Sentence) -> Result<LinConstraint, LinError> {
    match s {
        Sentence::Constraint(Constraint::Lin(l)) => Ok(l.clone()),
        other => Err(LinError::MalformedProof(format!("not a linear equation: {}", other))),
    }
}

/// Turns a forward reduction proof (leaf `β`, sink `0 = 0`) into a proof of
/// `β`. Sub-proofs of the pivots are kept unchanged.
pub fn lin_reverse_proof(forward: &Proof) -> Result<Proof, LinError> {
    if forward.nodes.is_empty() {
        return Err(LinError::MalformedProof("empty proof".into()));
    }
    let sink = forward.sink();
    if !as_lin(&forward.nodes[sink])?.is_trivial() {
        return Err(LinError::MalformedProof("sink is not 0 = 0".into()));
    }
    let mut chain_nodes = vec![sink];
    let mut chain = Vec::new();
    let mut cur = sink;
    while let Some(st) = forward.step_for(cur) {
        if st.premises.len() != 2 {
            return Err(LinError::MalformedProof("chain step without two premises".into()));
        }
        chain.push(LinStep {
            premises: vec![as_lin(&forward.nodes[st.premises[0]])?, as_lin(&forward.nodes[st.premises[1]])?],
            conclusion: as_lin(&forward.nodes[cur])?,
            label: st.label.clone(),
        });
        cur = st.premises[0];
        chain_nodes.push(cur);
    }
    if chain.is_empty() {
        return Err(LinError::MalformedProof("no reduction steps".into()));
    }
    chain.reverse();
    let beta = as_lin(&forward.nodes[cur])?;
    let mut ds = DerivationStructure::new();
    for (i, s) in forward.nodes.iter().enumerate() {
        if chain_nodes.contains(&i) {
            continue;
        }
        match forward.step_for(i) {
            None => ds.add_axiom(s.clone()),
            Some(st) => {
                let ps = st.premises.iter().map(|&p| forward.nodes[p].clone()).collect();
                ds.add_edge(ps, s.clone(), &st.rule, st.label.clone());
            }
        }
    }
    for st in reverse_chain(&chain)? {
        record(&mut ds, &st);
    }
    if ds.find(&sentence(&beta)).is_none() {
        return Ok(Proof::leaf(sentence(&beta)));
    }
    ds.extract_proof(&sentence(&beta), ProofMetric::Size).map_err(|e| LinError::MalformedProof(e.to_string()))
}

pub fn lin_witness(ds: &[LinConstraint], avoid: &[LinConstraint]) -> Result<Assignment, LinError> {
    LinSolver::new(ds).witness(avoid)
}
