//! Abstract syntax shared by every reasoner: exact rationals, constraints,
//! concepts, GCIs and ontologies.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().ok()?;
    let den: BigInt = den.parse().ok()?;
    if den.is_zero() {
        return None;
    }
    Some(Rational::new(num, den))
}

pub type Assignment = BTreeMap<String, Rational>;

/// `Σ aᵢ·xᵢ = b` with no zero coefficients stored.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinConstraint {
    pub coeffs: BTreeMap<String, Rational>,
    pub rhs: Rational,
}

impl LinConstraint {
    pub fn new<I, S>(terms: I, rhs: Rational) -> Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        for (v, a) in terms {
            *coeffs.entry(v.into()).or_insert_with(Rational::zero) += a;
        }
        coeffs.retain(|_, a| !a.is_zero());
        LinConstraint { coeffs, rhs }
    }

    /// Integer-coefficient shorthand used heavily in tests and generators.
    pub fn ints(terms: &[(&str, i64)], rhs: i64) -> Self {
        Self::new(terms.iter().map(|(v, a)| (v.to_string(), rat(*a))), rat(rhs))
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.is_empty() && self.rhs.is_zero()
    }

    pub fn is_contradiction(&self) -> bool {
        self.coeffs.is_empty() && !self.rhs.is_zero()
    }

    pub fn coeff(&self, var: &str) -> Rational {
        self.coeffs.get(var).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return LinConstraint::new(Vec::<(String, Rational)>::new(), Rational::zero());
        }
        LinConstraint {
            coeffs: self.coeffs.iter().map(|(v, a)| (v.clone(), a * c)).collect(),
            rhs: &self.rhs * c,
        }
    }

    /// `Σ cᵢ·premiseᵢ` as a formal linear form.
    pub fn combine(parts: &[(&Rational, &LinConstraint)]) -> Self {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        let mut rhs = Rational::zero();
        for (c, l) in parts {
            for (v, a) in &l.coeffs {
                *coeffs.entry(v.clone()).or_insert_with(Rational::zero) += a * *c;
            }
            rhs += &l.rhs * *c;
        }
        coeffs.retain(|_, a| !a.is_zero());
        LinConstraint { coeffs, rhs }
    }

    /// Leading variable: the least one in the fixed lexicographic order.
    pub fn leading(&self) -> Option<(&String, &Rational)> {
        self.coeffs.iter().next()
    }

    /// Leading coefficient scaled to 1; `0 = b` becomes `0 = 0` or `0 = 1`.
    pub fn canonical(&self) -> Self {
        match self.leading() {
            Some((_, a)) => self.scale(&a.recip()),
            None if self.rhs.is_zero() => self.clone(),
            None => LinConstraint::new(Vec::<(String, Rational)>::new(), Rational::one()),
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn value(&self, a: &Assignment) -> Option<Rational> {
        let mut s = Rational::zero();
        for (v, c) in &self.coeffs {
            s += c * a.get(v)?;
        }
        Some(s)
    }

    pub fn holds(&self, a: &Assignment) -> bool {
        self.value(a).map(|s| s == self.rhs).unwrap_or(false)
    }
}

impl fmt::Display for LinConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 = {}", self.rhs);
        }
        for (i, (v, a)) in self.coeffs.iter().enumerate() {
            let mag = a.abs();
            if i == 0 {
                if a.is_negative() {
                    write!(f, "-")?;
                }
            } else if a.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if mag.is_one() {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{} {}", mag, v)?;
            }
        }
        write!(f, " = {}", self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiffConstraint {
    Eq(String, Rational),
    Gt(String, Rational),
    /// `x + q = y`
    Diff(String, Rational, String),
    Bot,
}

impl DiffConstraint {
    pub fn eq(x: &str, q: i64) -> Self {
        DiffConstraint::Eq(x.to_string(), rat(q))
    }
    pub fn gt(x: &str, q: i64) -> Self {
        DiffConstraint::Gt(x.to_string(), rat(q))
    }
    pub fn diff(x: &str, q: i64, y: &str) -> Self {
        DiffConstraint::Diff(x.to_string(), rat(q), y.to_string())
    }

    pub fn vars(&self) -> Vec<&String> {
        match self {
            DiffConstraint::Eq(x, _) | DiffConstraint::Gt(x, _) => vec![x],
            DiffConstraint::Diff(x, _, y) if x == y => vec![x],
            DiffConstraint::Diff(x, _, y) => vec![x, y],
            DiffConstraint::Bot => vec![],
        }
    }

    pub fn holds(&self, a: &Assignment) -> bool {
        match self {
            DiffConstraint::Eq(x, q) => a.get(x).map(|v| v == q).unwrap_or(false),
            DiffConstraint::Gt(x, q) => a.get(x).map(|v| v > q).unwrap_or(false),
            DiffConstraint::Diff(x, q, y) => match (a.get(x), a.get(y)) {
                (Some(vx), Some(vy)) => &(vx + q) == vy,
                _ => false,
            },
            DiffConstraint::Bot => false,
        }
    }
}

impl fmt::Display for DiffConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffConstraint::Eq(x, q) => write!(f, "{} = {}", x, q),
            DiffConstraint::Gt(x, q) => write!(f, "{} > {}", x, q),
            DiffConstraint::Diff(x, q, y) if q.is_negative() => {
                write!(f, "{} - {} = {}", x, -q, y)
            }
            DiffConstraint::Diff(x, q, y) => write!(f, "{} + {} = {}", x, q, y),
            DiffConstraint::Bot => write!(f, "Bot"),
        }
    }
}

/// A concrete-domain constraint as it appears inside `[...]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Lin(LinConstraint),
    Diff(DiffConstraint),
    /// `⊤(x)`: the feature `x` has a value.
    Defined(String),
}

impl Constraint {
    pub fn vars(&self) -> Vec<String> {
        match self {
            Constraint::Lin(l) => l.vars().cloned().collect(),
            Constraint::Diff(d) => d.vars().into_iter().cloned().collect(),
            Constraint::Defined(x) => vec![x.clone()],
        }
    }

    pub fn is_bot(&self) -> bool {
        match self {
            Constraint::Lin(l) => l.is_contradiction(),
            Constraint::Diff(d) => *d == DiffConstraint::Bot,
            Constraint::Defined(_) => false,
        }
    }

    /// Identity used by the abstraction map.
    pub fn canonical(&self) -> Constraint {
        match self {
            Constraint::Lin(l) => Constraint::Lin(l.canonical()),
            other => other.clone(),
        }
    }

    pub fn holds(&self, a: &Assignment) -> bool {
        match self {
            Constraint::Lin(l) => l.holds(a),
            Constraint::Diff(d) => d.holds(a),
            Constraint::Defined(x) => a.contains_key(x),
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Lin(l) => write!(f, "{}", l),
            Constraint::Diff(d) => write!(f, "{}", d),
            Constraint::Defined(x) => write!(f, "Top({})", x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CdKind {
    Lin,
    Diff,
    None,
}

impl fmt::Display for CdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CdKind::Lin => "lin",
            CdKind::Diff => "diff",
            CdKind::None => "none",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    Top,
    Bot,
    Name(String),
    And(Box<Concept>, Box<Concept>),
    Or(Box<Concept>, Box<Concept>),
    Exists(String, Box<Concept>),
    Forall(String, Box<Concept>),
    Not(Box<Concept>),
    Atom(Constraint),
}

impl Concept {
    pub fn name(n: &str) -> Concept {
        Concept::Name(n.to_string())
    }
    pub fn and(a: Concept, b: Concept) -> Concept {
        Concept::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Concept, b: Concept) -> Concept {
        Concept::Or(Box::new(a), Box::new(b))
    }
    pub fn exists(r: &str, c: Concept) -> Concept {
        Concept::Exists(r.to_string(), Box::new(c))
    }
    pub fn forall(r: &str, c: Concept) -> Concept {
        Concept::Forall(r.to_string(), Box::new(c))
    }
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }
    pub fn lin(l: LinConstraint) -> Concept {
        Concept::Atom(Constraint::Lin(l))
    }
    pub fn diff(d: DiffConstraint) -> Concept {
        Concept::Atom(Constraint::Diff(d))
    }

    /// Left-nested conjunction; `⊤` for no conjuncts.
    pub fn conj(parts: impl IntoIterator<Item = Concept>) -> Concept {
        let mut it = parts.into_iter();
        match it.next() {
            None => Concept::Top,
            Some(first) => it.fold(first, Concept::and),
        }
    }

    /// Left-nested disjunction; `⊥` for no disjuncts.
    pub fn disj(parts: impl IntoIterator<Item = Concept>) -> Concept {
        let mut it = parts.into_iter();
        match it.next() {
            None => Concept::Bot,
            Some(first) => it.fold(first, Concept::or),
        }
    }

    pub fn conjuncts(&self) -> Vec<&Concept> {
        match self {
            Concept::And(a, b) => {
                let mut v = a.conjuncts();
                v.extend(b.conjuncts());
                v
            }
            other => vec![other],
        }
    }

    pub fn children(&self) -> Vec<&Concept> {
        match self {
            Concept::And(a, b) | Concept::Or(a, b) => vec![a, b],
            Concept::Exists(_, c) | Concept::Forall(_, c) | Concept::Not(c) => vec![c],
            _ => vec![],
        }
    }

    pub fn collect_subconcepts(&self, out: &mut BTreeSet<Concept>) {
        if out.insert(self.clone()) {
            for c in self.children() {
                c.collect_subconcepts(out);
            }
        }
    }

    pub fn atoms(&self, out: &mut Vec<Constraint>) {
        match self {
            Concept::Atom(c) => out.push(c.clone()),
            other => {
                for c in other.children() {
                    c.atoms(out);
                }
            }
        }
    }

    /// Within EL⊥[D]: no negation, disjunction or value restriction.
    pub fn is_el(&self) -> bool {
        match self {
            Concept::Not(_) | Concept::Or(..) | Concept::Forall(..) => false,
            other => other.children().iter().all(|c| c.is_el()),
        }
    }

    /// Rewrites every concept bottom-up.
    pub fn map(&self, f: &impl Fn(&Concept) -> Option<Concept>) -> Concept {
        if let Some(c) = f(self) {
            return c;
        }
        match self {
            Concept::And(a, b) => Concept::and(a.map(f), b.map(f)),
            Concept::Or(a, b) => Concept::or(a.map(f), b.map(f)),
            Concept::Exists(r, c) => Concept::exists(r, c.map(f)),
            Concept::Forall(r, c) => Concept::forall(r, c.map(f)),
            Concept::Not(c) => Concept::not(c.map(f)),
            other => other.clone(),
        }
    }

    /// All linear atoms rewritten to their canonical scaling.
    pub fn canonical(&self) -> Concept {
        self.map(&|c| match c {
            Concept::Atom(a) => Some(Concept::Atom(a.canonical())),
            _ => None,
        })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, prec: u8) -> fmt::Result {
        match self {
            Concept::Top => f.write_str("Top"),
            Concept::Bot => f.write_str("Bot"),
            Concept::Name(n) => f.write_str(n),
            Concept::Atom(c) => write!(f, "[{}]", c),
            Concept::Or(a, b) => {
                if prec > 0 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 0)?;
                f.write_str(" or ")?;
                b.fmt_prec(f, 1)?;
                if prec > 0 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Concept::And(a, b) => {
                if prec > 1 {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, 1)?;
                f.write_str(" and ")?;
                b.fmt_prec(f, 2)?;
                if prec > 1 {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Concept::Not(c) => {
                f.write_str("not ")?;
                c.fmt_prec(f, 2)
            }
            Concept::Exists(r, c) => {
                write!(f, "some {} ", r)?;
                c.fmt_prec(f, 2)
            }
            Concept::Forall(r, c) => {
                write!(f, "all {} ", r)?;
                c.fmt_prec(f, 2)
            }
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gci {
    pub lhs: Concept,
    pub rhs: Concept,
}

impl Gci {
    pub fn new(lhs: Concept, rhs: Concept) -> Self {
        Gci { lhs, rhs }
    }

    pub fn canonical(&self) -> Gci {
        Gci::new(self.lhs.canonical(), self.rhs.canonical())
    }

    pub fn map(&self, f: &impl Fn(&Concept) -> Option<Concept>) -> Gci {
        Gci::new(self.lhs.map(f), self.rhs.map(f))
    }
}

impl fmt::Display for Gci {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} SubClassOf {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ontology {
    pub axioms: Vec<Gci>,
    pub kind: CdKind,
}

impl Ontology {
    pub fn new(axioms: Vec<Gci>, kind: CdKind) -> Self {
        Ontology { axioms, kind }
    }

    pub fn empty() -> Self {
        Ontology { axioms: Vec::new(), kind: CdKind::None }
    }

    pub fn is_el(&self) -> bool {
        self.axioms.iter().all(|g| g.lhs.is_el() && g.rhs.is_el())
    }

    /// Distinct constraints in order of first occurrence.
    pub fn constraints(&self) -> Vec<Constraint> {
        let mut all = Vec::new();
        for g in &self.axioms {
            g.lhs.atoms(&mut all);
            g.rhs.atoms(&mut all);
        }
        let mut seen = BTreeSet::new();
        all.retain(|c| seen.insert(c.clone()));
        all
    }
}

impl fmt::Display for Ontology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.axioms {
            writeln!(f, "{} .", g)?;
        }
        Ok(())
    }
}

/// `sub(O)`: every subterm of every axiom side, plus `⊤` and `⊥`.
pub fn subconcepts(o: &Ontology) -> BTreeSet<Concept> {
    let mut out = BTreeSet::new();
    out.insert(Concept::Top);
    out.insert(Concept::Bot);
    for g in &o.axioms {
        g.lhs.collect_subconcepts(&mut out);
        g.rhs.collect_subconcepts(&mut out);
    }
    out
}
