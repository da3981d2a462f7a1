//! Replacing constraint atoms `[α]` by fresh concept names `A_α`.

use std::collections::BTreeMap;

use crate::model::{Concept, Constraint, Gci, Ontology};

/// Prefix of generated names; `$` cannot occur in parsed identifiers.
pub const ABSTRACT_PREFIX: &str = "$c";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbstractionMap {
    by_key: BTreeMap<Constraint, String>,
    repr: BTreeMap<String, Constraint>,
    order: Vec<String>,
}

impl AbstractionMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Name for `c`, allocating one on first sight. Scalar multiples of a
    /// linear equation share a name; the first spelling seen is kept.
    pub fn name_for(&mut self, c: &Constraint) -> String {
        let key = c.canonical();
        if let Some(n) = self.by_key.get(&key) {
            return n.clone();
        }
        let n = format!("{}{}", ABSTRACT_PREFIX, self.order.len());
        self.by_key.insert(key, n.clone());
        self.repr.insert(n.clone(), c.clone());
        self.order.push(n.clone());
        n
    }

    pub fn lookup(&self, c: &Constraint) -> Option<&String> {
        self.by_key.get(&c.canonical())
    }

    /// Name whose stored spelling is exactly `c`.
    pub fn exact(&self, c: &Constraint) -> Option<&String> {
        self.lookup(c).filter(|n| self.repr.get(*n) == Some(c))
    }

    pub fn constraint(&self, name: &str) -> Option<&Constraint> {
        self.repr.get(name)
    }

    pub fn is_abstract(name: &str) -> bool {
        name.starts_with(ABSTRACT_PREFIX)
    }

    /// Names in allocation order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Position of a name in allocation order.
    pub fn index(&self, name: &str) -> Option<usize> {
        name.strip_prefix(ABSTRACT_PREFIX)?.parse().ok()
    }

    pub fn abstract_concept(&mut self, c: &Concept) -> Concept {
        match c {
            Concept::Atom(a) => Concept::Name(self.name_for(a)),
            Concept::And(a, b) => Concept::and(self.abstract_concept(a), self.abstract_concept(b)),
            Concept::Or(a, b) => Concept::or(self.abstract_concept(a), self.abstract_concept(b)),
            Concept::Exists(r, d) => Concept::exists(r, self.abstract_concept(d)),
            Concept::Forall(r, d) => Concept::forall(r, self.abstract_concept(d)),
            Concept::Not(d) => Concept::not(self.abstract_concept(d)),
            other => other.clone(),
        }
    }

    /// Abstraction without allocating: unknown atoms stay as they are.
    pub fn abstract_known(&self, c: &Concept) -> Concept {
        c.map(&|x| match x {
            Concept::Atom(a) => self.lookup(a).map(|n| Concept::Name(n.clone())),
            _ => None,
        })
    }

    pub fn abstract_gci(&mut self, g: &Gci) -> Gci {
        Gci::new(self.abstract_concept(&g.lhs), self.abstract_concept(&g.rhs))
    }

    pub fn concretize(&self, c: &Concept) -> Concept {
        c.map(&|x| match x {
            Concept::Name(n) => self.repr.get(n).map(|a| Concept::Atom(a.clone())),
            _ => None,
        })
    }

    pub fn concretize_gci(&self, g: &Gci) -> Gci {
        Gci::new(self.concretize(&g.lhs), self.concretize(&g.rhs))
    }
}

/// `O ↦ O^{-D}` together with the map used.
pub fn abstract_constraints(o: &Ontology) -> (Ontology, AbstractionMap) {
    let mut map = AbstractionMap::new();
    let axioms = o.axioms.iter().map(|g| map.abstract_gci(g)).collect();
    (Ontology::new(axioms, o.kind), map)
}
