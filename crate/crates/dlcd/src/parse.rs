//! Line-oriented ontology syntax.
//!
//! ```text
//! # comment
//! Domain lin .
//! Patient and [sys - dia - pp = 0] SubClassOf NeedAttention .
//! A SubClassOf some r (B and not C) .
//! ```

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{CdKind, Concept, Constraint, DiffConstraint, Gci, LinConstraint, Ontology, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error(
        "{line}:{col}: linear and difference constraints cannot be mixed (their union is not convex)"
    )]
    MixedDomains { line: usize, col: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(BigInt),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (sl, sc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: sl, col: sc });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            col += i - start;
            let s: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Num(s.parse().unwrap()), line: sl, col: sc });
        } else if "().[]+-=>/".contains(c) {
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Sym(c), line: sl, col: sc });
        } else {
            return Err(ParseError::Syntax { line: sl, col: sc, msg: format!("unexpected character '{}'", c) });
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

const KEYWORDS: [&str; 9] = ["SubClassOf", "and", "or", "some", "all", "not", "Top", "Bot", "Domain"];

/// Atom as read, before the ontology-wide domain is known.
#[derive(Debug, Clone)]
struct RawAtom {
    lin: LinConstraint,
    /// Read literally as `x = q` or `x + q = y`, before terms cancel.
    literal: Option<DiffConstraint>,
    gt: bool,
    line: usize,
    col: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    atoms: Vec<RawAtom>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        if self.is_sym(c) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected '{}'", c))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_kw(kw) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected '{}'", kw))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => self.err(format!("expected {}", what)),
        }
    }

    fn concept(&mut self) -> Result<Concept, ParseError> {
        let mut c = self.conjunction()?;
        while self.is_kw("or") {
            self.next();
            let d = self.conjunction()?;
            c = Concept::or(c, d);
        }
        Ok(c)
    }

    fn conjunction(&mut self) -> Result<Concept, ParseError> {
        let mut c = self.unary()?;
        while self.is_kw("and") {
            self.next();
            let d = self.unary()?;
            c = Concept::and(c, d);
        }
        Ok(c)
    }

    fn unary(&mut self) -> Result<Concept, ParseError> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) if s == "not" => {
                self.next();
                Ok(Concept::not(self.unary()?))
            }
            Tok::Ident(s) if s == "some" || s == "all" => {
                let exists = s == "some";
                self.next();
                let r = self.ident("role name")?;
                let c = self.unary()?;
                Ok(if exists { Concept::exists(&r, c) } else { Concept::forall(&r, c) })
            }
            Tok::Ident(s) if s == "Top" => {
                self.next();
                Ok(Concept::Top)
            }
            Tok::Ident(s) if s == "Bot" => {
                self.next();
                Ok(Concept::Bot)
            }
            Tok::Ident(_) => Ok(Concept::Name(self.ident("concept")?)),
            Tok::Sym('(') => {
                self.next();
                let c = self.concept()?;
                self.expect_sym(')')?;
                Ok(c)
            }
            Tok::Sym('[') => {
                self.next();
                self.atom(t.line, t.col)
            }
            _ => self.err("expected a concept"),
        }
    }

    fn atom(&mut self, line: usize, col: usize) -> Result<Concept, ParseError> {
        if self.is_kw("Top") {
            self.next();
            self.expect_sym('(')?;
            let x = self.ident("feature name")?;
            self.expect_sym(')')?;
            self.expect_sym(']')?;
            return Ok(Concept::Atom(Constraint::Defined(x)));
        }
        let (lc, lk) = self.linexpr()?;
        let gt = if self.is_sym('=') {
            false
        } else if self.is_sym('>') {
            true
        } else {
            return self.err("expected '=' or '>'");
        };
        self.next();
        let (rc, rk) = self.linexpr()?;
        self.expect_sym(']')?;
        let one = Rational::one();
        let single = |m: &BTreeMap<String, Rational>| match m.iter().next() {
            Some((v, a)) if m.len() == 1 && *a == one => Some(v.clone()),
            _ => None,
        };
        let literal = match (single(&lc), rc.is_empty(), single(&rc)) {
            (Some(x), true, _) if !gt => Some(DiffConstraint::Eq(x, &rk - &lk)),
            (Some(x), _, Some(y)) if !gt && rk.is_zero() => Some(DiffConstraint::Diff(x, lk.clone(), y)),
            _ => None,
        };
        let mut terms: Vec<(String, Rational)> = lc.into_iter().collect();
        terms.extend(rc.into_iter().map(|(v, a)| (v, -a)));
        let lin = LinConstraint::new(terms, rk - lk);
        if gt {
            let shaped = lin.coeffs.len() == 1 && lin.coeffs.values().all(|a| a.is_one());
            if !shaped {
                return Err(ParseError::Syntax { line, col, msg: "'>' atoms must have the form [x > q]".into() });
            }
        }
        let idx = self.atoms.len();
        self.atoms.push(RawAtom { lin: lin.clone(), literal, gt, line, col });
        // Placeholder carrying the atom index; replaced once the domain is known.
        Ok(Concept::Atom(Constraint::Defined(format!("\u{0}{}", idx))))
    }

    /// Returns the variable coefficients and the constant term.
    fn linexpr(&mut self) -> Result<(BTreeMap<String, Rational>, Rational), ParseError> {
        let mut coeffs: BTreeMap<String, Rational> = BTreeMap::new();
        let mut constant = Rational::zero();
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            if self.is_sym('+') || self.is_sym('-') {
                if self.is_sym('-') {
                    sign = -sign;
                }
                self.next();
            } else if !first {
                break;
            }
            first = false;
            let mut num: Option<Rational> = None;
            if let Tok::Num(n) = &self.peek().tok {
                let n = n.clone();
                self.next();
                let mut q = Rational::from_integer(n);
                if self.is_sym('/') {
                    self.next();
                    match &self.peek().tok {
                        Tok::Num(d) if !d.is_zero() => {
                            q /= Rational::from_integer(d.clone());
                            self.next();
                        }
                        _ => return self.err("expected a nonzero denominator"),
                    }
                }
                num = Some(q);
            }
            let var = match &self.peek().tok {
                Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                    let s = s.clone();
                    self.next();
                    Some(s)
                }
                _ => None,
            };
            match (num, var) {
                (Some(q), Some(v)) => *coeffs.entry(v).or_insert_with(Rational::zero) += sign * q,
                (None, Some(v)) => *coeffs.entry(v).or_insert_with(Rational::zero) += sign,
                (Some(q), None) => constant += sign * q,
                (None, None) => return self.err("expected a number or a feature"),
            }
        }
        Ok((coeffs, constant))
    }

    fn gci(&mut self) -> Result<Gci, ParseError> {
        let lhs = self.concept()?;
        self.expect_kw("SubClassOf")?;
        let rhs = self.concept()?;
        Ok(Gci::new(lhs, rhs))
    }
}

fn diff_shape(l: &LinConstraint) -> Option<DiffConstraint> {
    let one = Rational::one();
    let terms: Vec<(&String, &Rational)> = l.coeffs.iter().collect();
    match terms.as_slice() {
        [(x, a)] if **a == one => Some(DiffConstraint::Eq((*x).clone(), l.rhs.clone())),
        [(u, a), (v, b)] if **a == one && **b == -one.clone() => {
            Some(DiffConstraint::Diff((*u).clone(), -l.rhs.clone(), (*v).clone()))
        }
        [(u, a), (v, b)] if **a == -one.clone() && **b == one => {
            Some(DiffConstraint::Diff((*v).clone(), -l.rhs.clone(), (*u).clone()))
        }
        _ => None,
    }
}

/// Picks the domain for a set of raw atoms, honouring an explicit hint.
fn resolve_kind(atoms: &[RawAtom], hint: CdKind) -> Result<CdKind, ParseError> {
    let mut lin_only: Option<&RawAtom> = None;
    let mut diff_only: Option<&RawAtom> = None;
    for a in atoms {
        if a.gt {
            if lin_only.is_some() {
                return Err(ParseError::MixedDomains { line: a.line, col: a.col });
            }
            diff_only.get_or_insert(a);
        } else if a.literal.is_none() && diff_shape(&a.lin).is_none() {
            if diff_only.is_some() {
                return Err(ParseError::MixedDomains { line: a.line, col: a.col });
            }
            lin_only.get_or_insert(a);
        }
    }
    match hint {
        CdKind::Lin => {
            if let Some(a) = diff_only {
                return Err(ParseError::MixedDomains { line: a.line, col: a.col });
            }
            Ok(CdKind::Lin)
        }
        CdKind::Diff => {
            if let Some(a) = lin_only {
                return Err(ParseError::MixedDomains { line: a.line, col: a.col });
            }
            Ok(CdKind::Diff)
        }
        CdKind::None => Ok(if lin_only.is_some() {
            CdKind::Lin
        } else if !atoms.is_empty() {
            CdKind::Diff
        } else {
            CdKind::None
        }),
    }
}

fn finish_atom(a: &RawAtom, kind: CdKind) -> Constraint {
    if a.gt {
        let (x, _) = a.lin.coeffs.iter().next().unwrap();
        return Constraint::Diff(DiffConstraint::Gt(x.clone(), a.lin.rhs.clone()));
    }
    match kind {
        CdKind::Diff => Constraint::Diff(
            a.literal.clone().or_else(|| diff_shape(&a.lin)).expect("checked by resolve_kind"),
        ),
        _ => Constraint::Lin(a.lin.clone()),
    }
}

fn substitute(c: &Concept, atoms: &[RawAtom], kind: CdKind) -> Concept {
    c.map(&|x| match x {
        Concept::Atom(Constraint::Defined(tag)) if tag.starts_with('\u{0}') => {
            let idx: usize = tag[1..].parse().unwrap();
            Some(Concept::Atom(finish_atom(&atoms[idx], kind)))
        }
        _ => None,
    })
}

fn domain_directive(p: &mut Parser) -> Result<Option<CdKind>, ParseError> {
    if !p.is_kw("Domain") {
        return Ok(None);
    }
    p.next();
    let kind = match &p.peek().tok {
        Tok::Ident(s) if s == "lin" => CdKind::Lin,
        Tok::Ident(s) if s == "diff" => CdKind::Diff,
        Tok::Ident(s) if s == "none" => CdKind::None,
        _ => return p.err("expected 'lin', 'diff' or 'none'"),
    };
    p.next();
    p.expect_sym('.')?;
    Ok(Some(kind))
}

pub fn parse_ontology(text: &str) -> Result<Ontology, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, atoms: Vec::new() };
    let mut axioms = Vec::new();
    let mut hint = CdKind::None;
    let mut declared = false;
    while p.peek().tok != Tok::Eof {
        if let Some(k) = domain_directive(&mut p)? {
            hint = k;
            declared = true;
            continue;
        }
        axioms.push(p.gci()?);
        p.expect_sym('.')?;
    }
    let mut kind = resolve_kind(&p.atoms, hint)?;
    if declared && p.atoms.is_empty() {
        kind = hint;
    }
    let axioms = axioms
        .iter()
        .map(|g| Gci::new(substitute(&g.lhs, &p.atoms, kind), substitute(&g.rhs, &p.atoms, kind)))
        .collect();
    Ok(Ontology::new(axioms, kind))
}

fn parse_single<T>(
    text: &str,
    kind: CdKind,
    f: impl FnOnce(&mut Parser) -> Result<T, ParseError>,
    fin: impl FnOnce(T, &[RawAtom], CdKind) -> T,
) -> Result<T, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, atoms: Vec::new() };
    let v = f(&mut p)?;
    if p.is_sym('.') {
        p.next();
    }
    if p.peek().tok != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    let kind = resolve_kind(&p.atoms, kind)?;
    Ok(fin(v, &p.atoms, kind))
}

/// Parses one GCI (trailing `.` optional); atoms are read in `kind` when given.
pub fn parse_gci(text: &str, kind: CdKind) -> Result<Gci, ParseError> {
    parse_single(text, kind, |p| p.gci(), |g, atoms, k| {
        Gci::new(substitute(&g.lhs, atoms, k), substitute(&g.rhs, atoms, k))
    })
}

pub fn parse_concept(text: &str, kind: CdKind) -> Result<Concept, ParseError> {
    parse_single(text, kind, |p| p.concept(), |c, atoms, k| substitute(&c, atoms, k))
}

/// Reads a bare constraint such as `4 x - 6 y = 1` or `Bot`.
pub fn parse_constraint(text: &str, kind: CdKind) -> Result<Constraint, ParseError> {
    let t = text.trim();
    if t == "Bot" {
        return Ok(match kind {
            CdKind::Lin => Constraint::Lin(LinConstraint::ints(&[], 1)),
            _ => Constraint::Diff(DiffConstraint::Bot),
        });
    }
    match parse_concept(&format!("[{}]", t), kind)? {
        Concept::Atom(c) => Ok(c),
        _ => unreachable!(),
    }
}

/// Text form that parses back to the same ontology.
pub fn serialize_ontology(o: &Ontology) -> String {
    let mut s = String::new();
    if o.kind != CdKind::None {
        s.push_str(&format!("Domain {} .\n", o.kind));
    }
    s.push_str(&o.to_string());
    s
}
