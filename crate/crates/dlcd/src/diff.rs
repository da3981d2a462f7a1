//! Difference constraints `x = q`, `x > q`, `x + q = y`: saturation,
//! entailment, witnesses.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::model::{Assignment, Constraint, DiffConstraint, Rational};
use crate::proof::{DerivationStructure, Proof, ProofMetric, Sentence};

pub const R_NEQ: &str = "R_neq";
pub const R_PLUS: &str = "R_plus";
pub const R_ZERO: &str = "R_0";
pub const R_NEQ_PLUS: &str = "R_neq+";
pub const R_MINUS: &str = "R_minus";
pub const R_REV: &str = "R_rev";
pub const R_LT: &str = "R_lt";
pub const R_EQ: &str = "R_eq";
pub const R_GT: &str = "R_gt";
pub const R_BOT: &str = "R_botcd";
pub const R_GT_PLUS: &str = "R_gt+";
pub const R_GT_MINUS: &str = "R_gt-";

pub const DIFF_RULES: &[&str] =
    &[R_NEQ, R_PLUS, R_ZERO, R_NEQ_PLUS, R_MINUS, R_REV, R_LT, R_EQ, R_GT, R_BOT, R_GT_PLUS, R_GT_MINUS];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("no witness exists: {0}")]
    Infeasible(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffStep {
    pub rule: &'static str,
    pub premises: Vec<DiffConstraint>,
    pub conclusion: DiffConstraint,
    pub side_condition: Option<String>,
}

impl DiffStep {
    pub fn replays(&self) -> bool {
        diff_rule_valid(self.rule, &self.premises, &self.conclusion)
    }
}

fn valid_ordered(rule: &str, p: &[&DiffConstraint], c: &DiffConstraint) -> bool {
    use DiffConstraint::*;
    match (rule, p, c) {
        (R_NEQ, [Eq(x, q), Eq(x2, p)], Bot) => x == x2 && q != p,
        (R_PLUS, [Diff(x, q, y), Diff(y2, p, z)], Diff(x3, r, z3)) => y == y2 && x == x3 && z == z3 && &(q + p) == r,
        (R_ZERO, [], Diff(x, q, y)) => x == y && q.is_zero(),
        (R_NEQ_PLUS, [Diff(x, q, y), Diff(x2, p, y2)], Bot) => x == x2 && y == y2 && q != p,
        (R_MINUS, [Eq(x, q), Eq(y, p)], Diff(x3, r, y3)) => x == x3 && y == y3 && &(p - q) == r,
        (R_REV, [Diff(x, q, y)], Diff(y2, r, x2)) => x == x2 && y == y2 && &(-q) == r,
        (R_LT, [Eq(x, q), Gt(x2, p)], Bot) => x == x2 && q <= p,
        (R_EQ, [Eq(x, q), Diff(x2, p, y)], Eq(y2, r)) => x == x2 && y == y2 && &(q + p) == r,
        (R_GT, [Gt(x, q), Diff(x2, p, y)], Gt(y2, r)) => x == x2 && y == y2 && &(q + p) == r,
        (R_BOT, [Bot], _) => true,
        (R_GT_PLUS, [Eq(x, p)], Gt(x2, q)) => x == x2 && p > q,
        (R_GT_MINUS, [Gt(x, p)], Gt(x2, q)) => x == x2 && p >= q,
        _ => false,
    }
}

/// Checks one application of a saturation or entailment rule. Premises
/// of binary rules may come in either order.
pub fn diff_rule_valid(rule: &str, premises: &[DiffConstraint], conclusion: &DiffConstraint) -> bool {
    let p: Vec<&DiffConstraint> = premises.iter().collect();
    if valid_ordered(rule, &p, conclusion) {
        return true;
    }
    if p.len() == 2 {
        let q = [p[1], p[0]];
        return valid_ordered(rule, &q, conclusion);
    }
    false
}

fn side_condition(rule: &str, premises: &[DiffConstraint]) -> Option<String> {
    use DiffConstraint::*;
    match (rule, premises) {
        (R_NEQ, [Eq(_, q), Eq(_, p)]) | (R_NEQ_PLUS, [Diff(_, q, _), Diff(_, p, _)]) => Some(format!("{} != {}", q, p)),
        (R_LT, [Eq(_, q), Gt(_, p)]) => Some(format!("{} <= {}", q, p)),
        _ => None,
    }
}

fn sentence(c: &DiffConstraint) -> Sentence {
    Sentence::Constraint(Constraint::Diff(c.clone()))
}

/// Saturated store: one unary constraint per variable, one binary per
/// ordered pair (self-loops under `(x, x)`).
#[derive(Clone, Debug, Default)]
pub struct DiffState {
    unary: BTreeMap<String, DiffConstraint>,
    binary: BTreeMap<(String, String), Rational>,
    bot: bool,
    inputs: Vec<DiffConstraint>,
    derived: BTreeSet<DiffConstraint>,
    steps: Vec<DiffStep>,
    ds: DerivationStructure,
}

impl DiffState {
    pub fn saturate(ds: &[DiffConstraint]) -> DiffState {
        let mut s = DiffState::default();
        for c in ds {
            if !s.inputs.contains(c) {
                s.inputs.push(c.clone());
            }
        }
        for c in &s.inputs {
            s.ds.add_axiom(sentence(c));
        }
        for c in s.inputs.clone() {
            s.store(&c);
            if s.bot {
                return s;
            }
        }
        s.run();
        s
    }

    pub fn inputs(&self) -> &[DiffConstraint] {
        &self.inputs
    }

    pub fn is_bot(&self) -> bool {
        self.bot
    }

    pub fn steps(&self) -> &[DiffStep] {
        &self.steps
    }

    pub fn structure(&self) -> &DerivationStructure {
        &self.ds
    }

    /// Constraints first produced by a rule (not given as input), `⊥` included.
    pub fn derived(&self) -> &BTreeSet<DiffConstraint> {
        &self.derived
    }

    pub fn unary(&self, x: &str) -> Option<&DiffConstraint> {
        self.unary.get(x)
    }

    pub fn binary(&self, x: &str, y: &str) -> Option<&Rational> {
        self.binary.get(&(x.to_string(), y.to_string()))
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.inputs.iter().flat_map(|c| c.vars().into_iter().cloned()).collect()
    }

    /// Every constraint currently held.
    pub fn constraints(&self) -> Vec<DiffConstraint> {
        let mut out: Vec<DiffConstraint> = self.unary.values().cloned().collect();
        out.extend(self.binary.iter().map(|((x, y), q)| DiffConstraint::Diff(x.clone(), q.clone(), y.clone())));
        if self.bot {
            out.push(DiffConstraint::Bot);
        }
        out
    }

    fn apply(&mut self, rule: &'static str, premises: Vec<DiffConstraint>, conclusion: DiffConstraint) -> bool {
        if self.bot {
            return false;
        }
        debug_assert!(diff_rule_valid(rule, &premises, &conclusion));
        let ps: Vec<Sentence> = premises.iter().map(sentence).collect();
        let before = self.ds.edges().len();
        self.ds.add_edge(ps, sentence(&conclusion), rule, vec![]);
        if self.ds.edges().len() > before {
            self.steps.push(DiffStep {
                rule,
                side_condition: side_condition(rule, &premises),
                premises,
                conclusion: conclusion.clone(),
            });
        }
        let new = self.store(&conclusion);
        if new && !self.inputs.contains(&conclusion) {
            self.derived.insert(conclusion);
        }
        new
    }

    /// Stores `c`, eagerly firing the three rules that derive `⊥`.
    /// Returns whether the store changed.
    fn store(&mut self, c: &DiffConstraint) -> bool {
        use DiffConstraint::*;
        match c {
            Bot => {
                self.bot = true;
                true
            }
            Eq(x, q) => match self.unary.get(x).cloned() {
                Some(Eq(_, p)) if &p != q => {
                    self.apply(R_NEQ, vec![Eq(x.clone(), p), c.clone()], Bot);
                    false
                }
                Some(Eq(..)) => false,
                Some(Gt(_, p)) if q <= &p => {
                    self.apply(R_LT, vec![c.clone(), Gt(x.clone(), p)], Bot);
                    false
                }
                _ => {
                    self.unary.insert(x.clone(), c.clone());
                    true
                }
            },
            Gt(x, q) => match self.unary.get(x).cloned() {
                Some(Eq(_, p)) if &p <= q => {
                    self.apply(R_LT, vec![Eq(x.clone(), p), c.clone()], Bot);
                    false
                }
                Some(Eq(..)) => false,
                Some(Gt(_, p)) if &p >= q => false,
                _ => {
                    self.unary.insert(x.clone(), c.clone());
                    true
                }
            },
            Diff(x, q, y) => {
                let key = (x.clone(), y.clone());
                match self.binary.get(&key).cloned() {
                    Some(p) if &p != q => {
                        self.apply(R_NEQ_PLUS, vec![Diff(x.clone(), p, y.clone()), c.clone()], Bot);
                        false
                    }
                    Some(_) => false,
                    None => {
                        self.binary.insert(key, q.clone());
                        true
                    }
                }
            }
        }
    }

    fn eqs(&self) -> Vec<(String, Rational)> {
        self.unary
            .values()
            .filter_map(|c| match c {
                DiffConstraint::Eq(x, q) => Some((x.clone(), q.clone())),
                _ => None,
            })
            .collect()
    }

    fn edges(&self) -> Vec<(String, Rational, String)> {
        self.binary.iter().filter(|((x, y), _)| x != y).map(|((x, y), q)| (x.clone(), q.clone(), y.clone())).collect()
    }

    fn run(&mut self) {
        use DiffConstraint::*;
        let eqs = self.eqs();
        for (x, q) in &eqs {
            for (y, p) in &eqs {
                if x != y {
                    self.apply(R_MINUS, vec![Eq(x.clone(), q.clone()), Eq(y.clone(), p.clone())], Diff(x.clone(), p - q, y.clone()));
                }
            }
        }
        for (x, q, y) in self.edges() {
            self.apply(R_REV, vec![Diff(x.clone(), q.clone(), y.clone())], Diff(y, -q, x));
        }
        for x in self.variables() {
            self.apply(R_ZERO, vec![], Diff(x.clone(), Rational::zero(), x));
        }
        loop {
            let mut changed = false;
            let edges = self.edges();
            let mut from: BTreeMap<&String, Vec<(&Rational, &String)>> = BTreeMap::new();
            for (y, p, z) in &edges {
                from.entry(y).or_default().push((p, z));
            }
            for (x, q, y) in &edges {
                for (p, z) in from.get(y).cloned().unwrap_or_default() {
                    let c = Diff(x.clone(), q + p, z.clone());
                    changed |= self.apply(R_PLUS, vec![Diff(x.clone(), q.clone(), y.clone()), Diff(y.clone(), p.clone(), z.clone())], c);
                }
            }
            if !changed || self.bot {
                break;
            }
        }
        loop {
            let mut changed = false;
            for (x, q) in self.eqs() {
                for (x2, p, y) in self.edges() {
                    if x2 == x {
                        let c = Eq(y.clone(), &q + &p);
                        changed |= self.apply(R_EQ, vec![Eq(x.clone(), q.clone()), Diff(x2, p, y)], c);
                    }
                }
            }
            if !changed || self.bot {
                break;
            }
        }
        let gts: Vec<(String, Rational)> = self
            .unary
            .values()
            .filter_map(|c| match c {
                Gt(x, q) => Some((x.clone(), q.clone())),
                _ => None,
            })
            .collect();
        let mut best: BTreeMap<String, (Rational, String, Rational, Rational)> = BTreeMap::new();
        for (x, q) in &gts {
            for (x2, p, y) in self.edges() {
                if &x2 != x {
                    continue;
                }
                let v = q + &p;
                match best.get(&y) {
                    Some((b, ..)) if b >= &v => {}
                    _ => {
                        best.insert(y, (v, x.clone(), q.clone(), p));
                    }
                }
            }
        }
        for (y, (v, x, q, p)) in best {
            self.apply(R_GT, vec![Gt(x.clone(), q), Diff(x, p, y.clone())], Gt(y, v));
        }
    }

    fn holds_directly(&self, beta: &DiffConstraint) -> bool {
        use DiffConstraint::*;
        if self.inputs.contains(beta) {
            return true;
        }
        match beta {
            Bot => self.bot,
            Eq(x, _) | Gt(x, _) => self.unary.get(x) == Some(beta),
            Diff(x, q, y) => self.binary.get(&(x.clone(), y.clone())) == Some(q),
        }
    }

    /// The rule closing the gap between the saturation and `β`, if any.
    fn bridge(&self, beta: &DiffConstraint) -> Option<(&'static str, Vec<DiffConstraint>)> {
        use DiffConstraint::*;
        match beta {
            Diff(x, q, y) if x == y && q.is_zero() => Some((R_ZERO, vec![])),
            Gt(x, q) => match self.unary.get(x) {
                Some(Eq(_, p)) if p > q => Some((R_GT_PLUS, vec![Eq(x.clone(), p.clone())])),
                Some(Gt(_, p)) if p > q => Some((R_GT_MINUS, vec![Gt(x.clone(), p.clone())])),
                _ => None,
            },
            _ => None,
        }
    }

    /// Decision procedure: `⊥` or `β` saturated, or one of the two bound
    /// rules for `x > q`.
    pub fn entails(&self, beta: &DiffConstraint) -> bool {
        self.bot || self.holds_directly(beta) || self.bridge(beta).is_some()
    }

    pub fn structure_for(&self, beta: &DiffConstraint) -> (bool, DerivationStructure) {
        let mut ds = self.ds.clone();
        if self.holds_directly(beta) {
            return (true, ds);
        }
        if let Some((rule, ps)) = self.bridge(beta) {
            ds.add_edge(ps.iter().map(sentence).collect(), sentence(beta), rule, vec![]);
            return (true, ds);
        }
        if self.bot {
            if let Some(own) = self.away_from_bot(beta) {
                ds.absorb(&own);
                return (true, ds);
            }
            ds.add_edge(vec![sentence(&DiffConstraint::Bot)], sentence(beta), R_BOT, vec![]);
            return (true, ds);
        }
        (false, ds)
    }

    /// Derivation of `β` from the inputs sharing variables with it, when
    /// those alone are satisfiable and suffice.
    fn away_from_bot(&self, beta: &DiffConstraint) -> Option<DerivationStructure> {
        let mut vars: BTreeSet<&String> = beta.vars().into_iter().collect();
        let mut part: Vec<DiffConstraint> = Vec::new();
        loop {
            let before = part.len();
            for c in &self.inputs {
                if !part.contains(c) && c.vars().iter().any(|v| vars.contains(v)) {
                    vars.extend(c.vars());
                    part.push(c.clone());
                }
            }
            if part.len() == before {
                break;
            }
        }
        if part.is_empty() || part.len() == self.inputs.len() {
            return None;
        }
        let sub = DiffState::saturate(&part);
        if sub.bot {
            return None;
        }
        match sub.structure_for(beta) {
            (true, ds) => Some(ds),
            _ => None,
        }
    }

    pub fn proof(&self, beta: &DiffConstraint, metric: ProofMetric) -> Option<Proof> {
        let (ok, ds) = self.structure_for(beta);
        if !ok {
            return None;
        }
        ds.extract_proof(&sentence(beta), metric).ok()
    }

    pub fn unsat_proof(&self, metric: ProofMetric) -> Option<Proof> {
        if !self.bot {
            return None;
        }
        self.ds.extract_proof(&sentence(&DiffConstraint::Bot), metric).ok()
    }

    /// Assignment satisfying the inputs and violating `β`.
    pub fn witness(&self, beta: Option<&DiffConstraint>) -> Result<Assignment, DiffError> {
        use DiffConstraint::*;
        if self.bot {
            return Err(DiffError::Infeasible("the constraints are unsatisfiable".into()));
        }
        if let Some(b) = beta {
            if self.entails(b) {
                return Err(DiffError::Infeasible(format!("{} is entailed", b)));
            }
        }
        let mut vars = self.variables();
        if let Some(b) = beta {
            vars.extend(b.vars().into_iter().cloned());
        }
        // Cliques of the (complete, symmetric) difference graph, anchored at
        // their least variable.
        let mut anchor: BTreeMap<String, String> = BTreeMap::new();
        let mut offset: BTreeMap<String, Rational> = BTreeMap::new();
        for v in &vars {
            if anchor.contains_key(v) {
                continue;
            }
            anchor.insert(v.clone(), v.clone());
            offset.insert(v.clone(), Rational::zero());
            for ((x, y), q) in &self.binary {
                if x == v && y != v && !anchor.contains_key(y) {
                    anchor.insert(y.clone(), v.clone());
                    offset.insert(y.clone(), q.clone());
                }
            }
        }
        let mut fixed: BTreeMap<String, Rational> = BTreeMap::new();
        let mut lower: BTreeMap<String, Rational> = BTreeMap::new();
        for v in &vars {
            let a = &anchor[v];
            match self.unary.get(v) {
                Some(Eq(_, q)) => {
                    fixed.insert(a.clone(), q - &offset[v]);
                }
                Some(Gt(_, q)) => {
                    let l = q - &offset[v];
                    if lower.get(a).map(|cur| &l > cur).unwrap_or(true) {
                        lower.insert(a.clone(), l);
                    }
                }
                _ => {}
            }
        }
        let mut value: BTreeMap<String, Rational> = BTreeMap::new();
        for (v, a) in &anchor {
            if v != a {
                continue;
            }
            let val = match (fixed.get(a), lower.get(a)) {
                (Some(f), _) => f.clone(),
                (None, Some(l)) => Rational::from_integer(l.floor().to_integer()) + Rational::from_integer(1.into()),
                (None, None) => Rational::zero(),
            };
            value.insert(a.clone(), val);
        }
        let assign = |value: &BTreeMap<String, Rational>| -> Assignment {
            vars.iter().map(|v| (v.clone(), &value[&anchor[v]] + &offset[v])).collect()
        };
        if let Some(b) = beta {
            match b {
                Gt(x, q) => {
                    let a = &anchor[x];
                    if !fixed.contains_key(a) {
                        value.insert(a.clone(), q - &offset[x]);
                    }
                }
                Eq(x, _) | Diff(x, _, _) => {
                    if b.holds(&assign(&value)) {
                        let y = match b {
                            Diff(_, _, y) => y,
                            _ => x,
                        };
                        let pick = [&anchor[y], &anchor[x]].into_iter().find(|a| !fixed.contains_key(*a)).cloned();
                        if let Some(a) = pick {
                            let bumped = &value[&a] + Rational::from_integer(1.into());
                            value.insert(a, bumped);
                        }
                    }
                }
                Bot => {}
            }
        }
        let f = assign(&value);
        if !self.inputs.iter().all(|c| c.holds(&f)) || beta.map(|b| b.holds(&f)).unwrap_or(false) {
            return Err(DiffError::Infeasible("witness construction failed".into()));
        }
        Ok(f)
    }
}

pub fn diff_saturate(ds: &[DiffConstraint]) -> (DiffState, DerivationStructure) {
    let s = DiffState::saturate(ds);
    let d = s.ds.clone();
    (s, d)
}

pub fn diff_entails(ds: &[DiffConstraint], beta: &DiffConstraint) -> (bool, DerivationStructure) {
    DiffState::saturate(ds).structure_for(beta)
}

pub fn diff_witness(ds: &[DiffConstraint], beta: Option<&DiffConstraint>) -> Result<Assignment, DiffError> {
    DiffState::saturate(ds).witness(beta)
}
