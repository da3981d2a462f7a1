//! Finite interpretations and model checking.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{Assignment, Concept, Gci, Ontology};

/// Elements are indices into `domain`; each carries a name and the values
/// of its concrete features.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Interpretation {
    pub domain: Vec<String>,
    pub values: Vec<Assignment>,
    pub concepts: BTreeMap<String, BTreeSet<usize>>,
    pub roles: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl Interpretation {
    pub fn element(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == name)
    }

    pub fn extension(&self, c: &Concept) -> BTreeSet<usize> {
        let all = || (0..self.domain.len()).collect::<BTreeSet<usize>>();
        match c {
            Concept::Top => all(),
            Concept::Bot => BTreeSet::new(),
            Concept::Name(n) => self.concepts.get(n).cloned().unwrap_or_default(),
            Concept::And(a, b) => self.extension(a).intersection(&self.extension(b)).copied().collect(),
            Concept::Or(a, b) => self.extension(a).union(&self.extension(b)).copied().collect(),
            Concept::Not(a) => all().difference(&self.extension(a)).copied().collect(),
            Concept::Exists(r, f) => {
                let fx = self.extension(f);
                self.roles
                    .get(r)
                    .map(|edges| edges.iter().filter(|(_, e)| fx.contains(e)).map(|(d, _)| *d).collect())
                    .unwrap_or_default()
            }
            Concept::Forall(r, f) => {
                let fx = self.extension(f);
                let empty = BTreeSet::new();
                let edges = self.roles.get(r).unwrap_or(&empty);
                all().into_iter().filter(|d| edges.iter().all(|(s, e)| s != d || fx.contains(e))).collect()
            }
            Concept::Atom(a) => (0..self.domain.len())
                .filter(|&i| self.values.get(i).map(|v| a.holds(v)).unwrap_or(false))
                .collect(),
        }
    }

    pub fn satisfies(&self, g: &Gci) -> bool {
        self.extension(&g.lhs).is_subset(&self.extension(&g.rhs))
    }

    pub fn is_model(&self, o: &Ontology) -> bool {
        !self.domain.is_empty() && o.axioms.iter().all(|g| self.satisfies(g))
    }
}
