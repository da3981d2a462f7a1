//! Derivation structures (labelled hypergraphs of recorded inferences) and
//! the tree-shaped proofs extracted from them.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{CdKind, Concept, Constraint, Gci, Rational};
use crate::parse::{parse_concept, parse_constraint, parse_gci, ParseError};

pub const AXIOM: &str = "axiom";
pub const TAUTOLOGY: &str = "tautology";

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sentence {
    Gci(Gci),
    Constraint(Constraint),
    Clause(Vec<Concept>),
}

impl Sentence {
    pub fn kind(&self) -> &'static str {
        match self {
            Sentence::Gci(_) => "gci",
            Sentence::Constraint(_) => "constraint",
            Sentence::Clause(_) => "clause",
        }
    }

    pub fn as_gci(&self) -> Option<&Gci> {
        match self {
            Sentence::Gci(g) => Some(g),
            _ => None,
        }
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sentence::Gci(g) => write!(f, "{}", g),
            Sentence::Constraint(c) => write!(f, "{}", c),
            Sentence::Clause(lits) if lits.is_empty() => f.write_str("Bot"),
            Sentence::Clause(lits) => {
                write!(f, "{}", Concept::disj(lits.iter().cloned()))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub premises: Vec<usize>,
    pub conclusion: usize,
    pub rule: String,
    pub label: Vec<Rational>,
}

#[derive(Clone, Debug, Default)]
pub struct DerivationStructure {
    nodes: Vec<Sentence>,
    index: HashMap<Sentence, usize>,
    edges: Vec<Edge>,
    seen: HashSet<(usize, Vec<usize>, String, Vec<Rational>)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProofMetric {
    Size,
    Depth,
    None,
}

impl FromStr for ProofMetric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "size" => Ok(ProofMetric::Size),
            "depth" => Ok(ProofMetric::Depth),
            "none" => Ok(ProofMetric::None),
            other => Err(format!("unknown metric '{}'", other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error("goal is not derivable: {0}")]
    NotDerivable(String),
    #[error("malformed proof: {0}")]
    Malformed(String),
    #[error("invalid proof file: {0}")]
    Json(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    cost: u64,
    rule: String,
    premises: Vec<String>,
    label: Vec<String>,
    edge: usize,
}

impl DerivationStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, s: Sentence) -> usize {
        if let Some(&i) = self.index.get(&s) {
            return i;
        }
        let i = self.nodes.len();
        self.index.insert(s.clone(), i);
        self.nodes.push(s);
        i
    }

    pub fn find(&self, s: &Sentence) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn sentence(&self, i: usize) -> &Sentence {
        &self.nodes[i]
    }

    pub fn nodes(&self) -> &[Sentence] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn add_edge(&mut self, premises: Vec<Sentence>, conclusion: Sentence, rule: &str, label: Vec<Rational>) {
        let ps: Vec<usize> = premises.into_iter().map(|p| self.node(p)).collect();
        let c = self.node(conclusion);
        self.add_edge_ids(ps, c, rule, label);
    }

    pub fn add_edge_ids(&mut self, premises: Vec<usize>, conclusion: usize, rule: &str, label: Vec<Rational>) {
        let key = (conclusion, premises.clone(), rule.to_string(), label.clone());
        if self.seen.insert(key) {
            self.edges.push(Edge { premises, conclusion, rule: rule.to_string(), label });
        }
    }

    pub fn add_axiom(&mut self, s: Sentence) {
        self.add_edge(vec![], s, AXIOM, vec![]);
    }

    pub fn add_tautology(&mut self, s: Sentence) {
        self.add_edge(vec![], s, TAUTOLOGY, vec![]);
    }

    /// Copies every edge of `other` into `self`.
    pub fn absorb(&mut self, other: &DerivationStructure) {
        for e in &other.edges {
            let ps = e.premises.iter().map(|&p| other.nodes[p].clone()).collect();
            self.add_edge(ps, other.nodes[e.conclusion].clone(), &e.rule, e.label.clone());
        }
    }

    fn best_edges(&self, metric: ProofMetric) -> Vec<Option<usize>> {
        let n = self.nodes.len();
        let mut users: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut remaining: Vec<usize> = Vec::with_capacity(self.edges.len());
        for (ei, e) in self.edges.iter().enumerate() {
            let mut distinct = e.premises.clone();
            distinct.sort_unstable();
            distinct.dedup();
            for &p in &distinct {
                users[p].push(ei);
            }
            remaining.push(distinct.len());
        }
        let mut best: Vec<Option<usize>> = vec![None; n];
        if metric == ProofMetric::None {
            let mut queue: VecDeque<usize> = (0..self.edges.len()).filter(|&e| remaining[e] == 0).collect();
            while let Some(ei) = queue.pop_front() {
                let c = self.edges[ei].conclusion;
                if best[c].is_some() {
                    continue;
                }
                best[c] = Some(ei);
                for &u in &users[c] {
                    remaining[u] -= 1;
                    if remaining[u] == 0 {
                        queue.push_back(u);
                    }
                }
            }
            return best;
        }
        let labels: Vec<String> = self.nodes.iter().map(|s| s.to_string()).collect();
        let mut cost: Vec<u64> = vec![u64::MAX; n];
        let mut done = vec![false; n];
        let mut heap: BinaryHeap<Reverse<(Candidate, usize)>> = BinaryHeap::new();
        let push = |heap: &mut BinaryHeap<Reverse<(Candidate, usize)>>, ei: usize, cost: &[u64]| {
            let e = &self.edges[ei];
            let c = match metric {
                ProofMetric::Depth => 1 + e.premises.iter().map(|&p| cost[p]).max().unwrap_or(0),
                _ => e.premises.iter().fold(1u64, |acc, &p| acc.saturating_add(cost[p])),
            };
            let cand = Candidate {
                cost: c,
                rule: e.rule.clone(),
                premises: e.premises.iter().map(|&p| labels[p].clone()).collect(),
                label: e.label.iter().map(|q| q.to_string()).collect(),
                edge: ei,
            };
            heap.push(Reverse((cand, e.conclusion)));
        };
        for ei in 0..self.edges.len() {
            if remaining[ei] == 0 {
                push(&mut heap, ei, &cost);
            }
        }
        while let Some(Reverse((cand, node))) = heap.pop() {
            if done[node] {
                continue;
            }
            done[node] = true;
            cost[node] = cand.cost;
            best[node] = Some(cand.edge);
            for &u in &users[node] {
                remaining[u] -= 1;
                if remaining[u] == 0 {
                    push(&mut heap, u, &cost);
                }
            }
        }
        best
    }

    pub fn derivable(&self, s: &Sentence) -> bool {
        match self.find(s) {
            Some(i) => self.best_edges(ProofMetric::None)[i].is_some(),
            None => false,
        }
    }

    /// Minimal proof of `goal` under `metric`, with ties broken on
    /// (metric value, rule name, premise labels).
    pub fn extract_proof(&self, goal: &Sentence, metric: ProofMetric) -> Result<Proof, ProofError> {
        let g = self.find(goal).ok_or_else(|| ProofError::NotDerivable(goal.to_string()))?;
        let best = self.best_edges(metric);
        if best[g].is_none() {
            return Err(ProofError::NotDerivable(goal.to_string()));
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut proof = Proof { goal: goal.clone(), nodes: Vec::new(), steps: Vec::new() };
        // Iterative post-order so deep chains cannot overflow the stack.
        let mut stack: Vec<(usize, bool)> = vec![(g, false)];
        while let Some((v, expanded)) = stack.pop() {
            if ids.contains_key(&v) {
                continue;
            }
            let e = &self.edges[best[v].unwrap()];
            if !expanded {
                stack.push((v, true));
                for &p in e.premises.iter().rev() {
                    if !ids.contains_key(&p) {
                        stack.push((p, false));
                    }
                }
                continue;
            }
            let id = proof.nodes.len();
            proof.nodes.push(self.nodes[v].clone());
            ids.insert(v, id);
            if !e.premises.is_empty() {
                proof.steps.push(Step {
                    conclusion: id,
                    premises: e.premises.iter().map(|p| ids[p]).collect(),
                    rule: e.rule.clone(),
                    label: e.label.clone(),
                });
            }
        }
        Ok(proof)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    pub conclusion: usize,
    pub premises: Vec<usize>,
    pub rule: String,
    pub label: Vec<Rational>,
}

/// Tree-shaped proof; shared sub-proofs are stored once. Premises always
/// precede their conclusions and the sink comes last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    pub goal: Sentence,
    pub nodes: Vec<Sentence>,
    pub steps: Vec<Step>,
}

#[derive(Serialize, Deserialize)]
struct JsonNode {
    id: usize,
    label: String,
    kind: String,
}

#[derive(Serialize, Deserialize)]
struct JsonInference {
    conclusion: usize,
    premises: Vec<usize>,
    rule: String,
    label: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct JsonProof {
    goal: String,
    nodes: Vec<JsonNode>,
    inferences: Vec<JsonInference>,
}

fn parse_sentence(label: &str, kind: &str, cd: CdKind) -> Result<Sentence, ProofError> {
    match kind {
        "gci" => Ok(Sentence::Gci(parse_gci(label, cd)?)),
        "constraint" => Ok(Sentence::Constraint(parse_constraint(label, cd)?)),
        "clause" => {
            if label.trim() == "Bot" {
                return Ok(Sentence::Clause(vec![]));
            }
            let c = parse_concept(label, cd)?;
            let mut lits = Vec::new();
            let mut stack = vec![c];
            while let Some(x) = stack.pop() {
                match x {
                    Concept::Or(a, b) => {
                        stack.push(*b);
                        stack.push(*a);
                    }
                    other => lits.push(other),
                }
            }
            Ok(Sentence::Clause(lits))
        }
        other => Err(ProofError::Json(format!("unknown node kind '{}'", other))),
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn label_text(label: &[Rational]) -> String {
    if label.is_empty() {
        String::new()
    } else {
        format!(" [{}]", label.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(", "))
    }
}

impl Proof {
    /// A one-node proof: the goal is itself a leaf.
    pub fn leaf(goal: Sentence) -> Proof {
        Proof { goal: goal.clone(), nodes: vec![goal], steps: vec![] }
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn step_for(&self, node: usize) -> Option<&Step> {
        self.steps.iter().find(|s| s.conclusion == node)
    }

    fn step_index(&self) -> Vec<Option<usize>> {
        let mut by = vec![None; self.nodes.len()];
        for (i, s) in self.steps.iter().enumerate() {
            by[s.conclusion] = Some(i);
        }
        by
    }

    pub fn leaves(&self) -> Vec<&Sentence> {
        let by = self.step_index();
        self.nodes.iter().enumerate().filter(|(i, _)| by[*i].is_none()).map(|(_, s)| s).collect()
    }

    /// Number of vertices on the longest sink-to-leaf path.
    pub fn depth(&self) -> usize {
        let by = self.step_index();
        let mut d = vec![1usize; self.nodes.len()];
        for i in 0..self.nodes.len() {
            if let Some(si) = by[i] {
                d[i] = 1 + self.steps[si].premises.iter().map(|&p| d[p]).max().unwrap_or(0);
            }
        }
        d.last().copied().unwrap_or(0)
    }

    /// Vertex count of the fully unfolded tree.
    pub fn tree_size(&self) -> u64 {
        let by = self.step_index();
        let mut t = vec![1u64; self.nodes.len()];
        for i in 0..self.nodes.len() {
            if let Some(si) = by[i] {
                t[i] = self.steps[si].premises.iter().fold(1u64, |a, &p| a.saturating_add(t[p]));
            }
        }
        t.last().copied().unwrap_or(0)
    }

    /// Leaves become axioms; steps are replayed as edges.
    pub fn to_structure(&self) -> DerivationStructure {
        let mut ds = DerivationStructure::new();
        let by = self.step_index();
        for (i, s) in self.nodes.iter().enumerate() {
            if by[i].is_none() {
                ds.add_axiom(s.clone());
            }
        }
        for st in &self.steps {
            let ps = st.premises.iter().map(|&p| self.nodes[p].clone()).collect();
            ds.add_edge(ps, self.nodes[st.conclusion].clone(), &st.rule, st.label.clone());
        }
        ds
    }

    /// Applies `f` to every sentence and re-extracts, merging nodes that
    /// become equal.
    pub fn map_sentences(&self, f: impl Fn(&Sentence) -> Sentence, metric: ProofMetric) -> Proof {
        let mut ds = DerivationStructure::new();
        let by = self.step_index();
        for (i, s) in self.nodes.iter().enumerate() {
            if by[i].is_none() {
                ds.add_axiom(f(s));
            }
        }
        for st in &self.steps {
            let c = f(&self.nodes[st.conclusion]);
            let ps: Vec<Sentence> = st.premises.iter().map(|&p| f(&self.nodes[p])).collect();
            if ps.len() == 1 && ps[0] == c {
                continue;
            }
            ds.add_edge(ps, c, &st.rule, st.label.clone());
        }
        ds.extract_proof(&f(&self.goal), metric).expect("mapping preserves derivability")
    }

    pub fn to_json(&self) -> String {
        let jp = JsonProof {
            goal: self.goal.to_string(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(i, s)| JsonNode { id: i, label: s.to_string(), kind: s.kind().to_string() })
                .collect(),
            inferences: self
                .steps
                .iter()
                .map(|s| JsonInference {
                    conclusion: s.conclusion,
                    premises: s.premises.clone(),
                    rule: s.rule.clone(),
                    label: s.label.iter().map(|q| q.to_string()).collect(),
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&jp).expect("serializable");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str, cd: CdKind) -> Result<Proof, ProofError> {
        let jp: JsonProof = serde_json::from_str(text).map_err(|e| ProofError::Json(e.to_string()))?;
        let mut nodes = Vec::with_capacity(jp.nodes.len());
        for (i, n) in jp.nodes.iter().enumerate() {
            if n.id != i {
                return Err(ProofError::Json(format!("node ids must be 0..n in order, found {}", n.id)));
            }
            nodes.push(parse_sentence(&n.label, &n.kind, cd)?);
        }
        let goal_kind = nodes.last().map(|s| s.kind()).unwrap_or("gci");
        let goal = parse_sentence(&jp.goal, goal_kind, cd)?;
        let mut steps = Vec::new();
        for inf in jp.inferences {
            let mut label = Vec::new();
            for q in &inf.label {
                label.push(
                    crate::model::parse_rational(q).ok_or_else(|| ProofError::Json(format!("bad rational '{}'", q)))?,
                );
            }
            if inf.conclusion >= nodes.len() || inf.premises.iter().any(|&p| p >= nodes.len()) {
                return Err(ProofError::Json("inference refers to an unknown node".into()));
            }
            steps.push(Step { conclusion: inf.conclusion, premises: inf.premises, rule: inf.rule, label });
        }
        Ok(Proof { goal, nodes, steps })
    }

    /// Statements are boxes; steps with several premises get an elliptical
    /// rule node, single-premise steps a labelled edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph proof {\n  rankdir=BT;\n  node [shape=box];\n");
        for (i, s) in self.nodes.iter().enumerate() {
            out.push_str(&format!("  n{} [label=\"{}\"];\n", i, dot_escape(&s.to_string())));
        }
        for (k, st) in self.steps.iter().enumerate() {
            let text = dot_escape(&format!("{}{}", st.rule, label_text(&st.label)));
            if st.premises.len() == 1 {
                out.push_str(&format!("  n{} -> n{} [label=\"{}\"];\n", st.premises[0], st.conclusion, text));
            } else {
                out.push_str(&format!("  r{} [shape=ellipse, label=\"{}\"];\n", k, text));
                for p in &st.premises {
                    out.push_str(&format!("  n{} -> r{};\n", p, k));
                }
                out.push_str(&format!("  r{} -> n{};\n", k, st.conclusion));
            }
        }
        out.push_str("}\n");
        out
    }

    /// Number of node statements in the DOT rendering.
    pub fn dot_node_count(&self) -> usize {
        self.nodes.len() + self.steps.iter().filter(|s| s.premises.len() != 1).count()
    }
}
