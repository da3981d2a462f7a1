//! Deterministic benchmark families and a random EL⊥[D] generator.
//!
//! * `artificial` (lin): a chain `A ⊑ C₀ ⊑ … ⊑ C_{n−1} ⊑ B`; each link
//!   needs one linear constraint derived from the `n` constraints on `A`.
//! * `diet` (lin): per-product nutrient calories summed by `n`-variable
//!   equations; a balanced meal is 55% carbs, 20% protein, 25% fat.
//! * `dsbj` (diff): the subject moves in `n` legs from a known start and
//!   ends at a safe distance.
//! * `dobj` (diff): `n` objects placed relative to each other, no absolute
//!   positions; the first and last are far enough apart.
//! * `random`: small random ontologies (lin for even seeds, diff for odd).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::eld::EldReasoner;
use crate::model::{rat, ratio, CdKind, Concept, Constraint, DiffConstraint, Gci, LinConstraint, Ontology, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Diet,
    Artificial,
    Dsbj,
    Dobj,
    Random,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Diet, Family::Artificial, Family::Dsbj, Family::Dobj, Family::Random];
}

impl FromStr for Family {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diet" => Ok(Family::Diet),
            "artificial" => Ok(Family::Artificial),
            "dsbj" => Ok(Family::Dsbj),
            "dobj" => Ok(Family::Dobj),
            "random" => Ok(Family::Random),
            other => Err(BenchError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Diet => "diet",
            Family::Artificial => "artificial",
            Family::Dsbj => "dsbj",
            Family::Dobj => "dobj",
            Family::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("unknown benchmark family '{0}'")]
    UnknownFamily(String),
    #[error("n must be at least 1")]
    ZeroSize,
    #[error("generated goal {0} is not entailed")]
    Unverified(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

impl BenchSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        BenchSpec { family, n, seed }
    }
}

/// Number of distinct constraints the family produces for `n`.
pub fn constraint_count(family: Family, n: usize) -> Option<usize> {
    match family {
        Family::Artificial if n == 1 => Some(1),
        Family::Artificial => Some(2 * n),
        Family::Diet => Some(3 * n + 7),
        Family::Dsbj => Some(n + 2),
        Family::Dobj => Some(n + 1),
        Family::Random => None,
    }
}

fn name(s: impl Into<String>) -> Concept {
    Concept::Name(s.into())
}

fn lin(terms: Vec<(String, Rational)>, rhs: Rational) -> Concept {
    Concept::lin(LinConstraint::new(terms, rhs))
}

fn artificial(n: usize, rng: &mut ChaCha8Rng) -> (Ontology, Gci) {
    let v = |k: usize| format!("v{}", k);
    let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
    let mut axioms = vec![Gci::new(name("A"), name("C0"))];
    // v_k − v_{k+1} = c_k for k < n, v_n = c_n.
    for k in 1..=n {
        let terms = if k < n { vec![(v(k), rat(1)), (v(k + 1), rat(-1))] } else { vec![(v(k), rat(1))] };
        axioms.push(Gci::new(name("A"), lin(terms, rat(c[k - 1]))));
    }
    let total: i64 = c.iter().sum();
    for i in 0..n {
        // v_1 + i·v_n, which needs every given constraint.
        let beta = lin(vec![(v(1), rat(1)), (v(n), rat(i as i64))], rat(total + i as i64 * c[n - 1]));
        let next = if i + 1 == n { name("B") } else { name(format!("C{}", i + 1)) };
        axioms.push(Gci::new(Concept::and(name(format!("C{}", i)), beta), next));
    }
    (Ontology::new(axioms, CdKind::Lin), Gci::new(name("A"), name("B")))
}

/// Splits `total` into `n` positive rational parts with random weights.
fn split(total: &Rational, n: usize, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=5)).collect();
    let sum: i64 = w.iter().sum();
    w.iter().map(|&x| total * ratio(x, sum)).collect()
}

fn diet(n: usize, rng: &mut ChaCha8Rng) -> (Ontology, Gci) {
    let k = rng.gen_range(1..=20);
    let nutrients = [("carb", 11 * k), ("prot", 4 * k), ("fat", 5 * k)];
    let mut axioms = Vec::new();
    for (nut, amount) in nutrients {
        let parts = split(&rat(amount), n, rng);
        let mut sum = vec![(nut.to_string(), rat(-1))];
        for (j, q) in parts.into_iter().enumerate() {
            let var = format!("{}{}", nut, j + 1);
            axioms.push(Gci::new(name("Meal"), lin(vec![(var.clone(), rat(1))], q)));
            sum.push((var, rat(1)));
        }
        axioms.push(Gci::new(name("Meal"), lin(sum, rat(0))));
    }
    let total = vec![("carb".into(), rat(1)), ("prot".into(), rat(1)), ("fat".into(), rat(1)), ("total".into(), rat(-1))];
    axioms.push(Gci::new(name("Meal"), lin(total, rat(0))));
    let share = |nut: &str, a: i64, b: i64| lin(vec![(nut.to_string(), rat(a)), ("total".into(), rat(-b))], rat(0));
    let balanced = Concept::conj([share("carb", 20, 11), share("prot", 5, 1), share("fat", 4, 1)]);
    axioms.push(Gci::new(balanced, name("BalancedMeal")));
    (Ontology::new(axioms, CdKind::Lin), Gci::new(name("Meal"), name("BalancedMeal")))
}

fn small(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2))
}

fn dsbj(n: usize, rng: &mut ChaCha8Rng) -> (Ontology, Gci) {
    let pos = |k: usize| format!("pos{}", k);
    let start = rat(rng.gen_range(0..=5));
    let mut axioms = vec![Gci::new(name("Drone"), Concept::diff(DiffConstraint::Eq(pos(0), start.clone())))];
    let mut at = start;
    for k in 0..n {
        let d = ratio(rng.gen_range(1..=6), rng.gen_range(1..=2));
        at += &d;
        axioms.push(Gci::new(name("Drone"), Concept::diff(DiffConstraint::Diff(pos(k), d, pos(k + 1)))));
    }
    let safe = at - rat(rng.gen_range(1..=3));
    axioms.push(Gci::new(Concept::diff(DiffConstraint::Gt(pos(n), safe)), name("SafeDistance")));
    (Ontology::new(axioms, CdKind::Diff), Gci::new(name("Drone"), name("SafeDistance")))
}

fn dobj(n: usize, rng: &mut ChaCha8Rng) -> (Ontology, Gci) {
    let obj = |k: usize| format!("obj{}", k);
    let mut axioms = Vec::new();
    let mut gap = rat(0);
    for k in 0..n {
        let d = ratio(rng.gen_range(1..=6), rng.gen_range(1..=2));
        gap += &d;
        axioms.push(Gci::new(name("Scene"), Concept::diff(DiffConstraint::Diff(obj(k), d, obj(k + 1)))));
    }
    let alert = Concept::diff(DiffConstraint::Diff(obj(n), -gap, obj(0)));
    axioms.push(Gci::new(alert, name("NeedAttention")));
    (Ontology::new(axioms, CdKind::Diff), Gci::new(name("Scene"), name("NeedAttention")))
}

/// Shape of random ontologies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomParams {
    pub axioms: usize,
    pub constraints: usize,
    pub variables: usize,
    pub names: usize,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams { axioms: 15, constraints: 6, variables: 4, names: 6 }
    }
}

fn random_lin(pool: &[Constraint], vars: &[String], rng: &mut ChaCha8Rng) -> LinConstraint {
    loop {
        let c = if pool.len() >= 2 && rng.gen_bool(0.35) {
            let a = pool.choose(rng).unwrap();
            let b = pool.choose(rng).unwrap();
            match (a, b) {
                (Constraint::Lin(a), Constraint::Lin(b)) => {
                    let (p, q) = (small(rng), small(rng));
                    LinConstraint::combine(&[(&p, a), (&q, b)])
                }
                _ => continue,
            }
        } else {
            let k = rng.gen_range(1..=vars.len().min(3));
            let chosen: Vec<&String> = vars.choose_multiple(rng, k).collect();
            let terms: Vec<(String, Rational)> = chosen
                .into_iter()
                .map(|v| {
                    let a = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
                    (v.clone(), rat(a))
                })
                .collect();
            LinConstraint::new(terms, small(rng))
        };
        if !c.is_trivial() && !c.is_contradiction() {
            return c;
        }
    }
}

fn random_diff(pool: &[Constraint], vars: &[String], rng: &mut ChaCha8Rng) -> DiffConstraint {
    if pool.len() >= 2 && rng.gen_bool(0.3) {
        // Compose two binary constraints when they chain.
        let a = pool.choose(rng).unwrap();
        let b = pool.choose(rng).unwrap();
        if let (Constraint::Diff(DiffConstraint::Diff(x, p, y)), Constraint::Diff(DiffConstraint::Diff(y2, q, z))) = (a, b) {
            if y == y2 && x != z {
                return DiffConstraint::Diff(x.clone(), p + q, z.clone());
            }
        }
    }
    let x = vars.choose(rng).unwrap().clone();
    match rng.gen_range(0..3) {
        0 => DiffConstraint::Eq(x, small(rng)),
        1 => DiffConstraint::Gt(x, small(rng)),
        _ => {
            let others: Vec<&String> = vars.iter().filter(|v| **v != x).collect();
            match others.choose(rng) {
                Some(y) => DiffConstraint::Diff(x, small(rng), (*y).clone()),
                None => DiffConstraint::Eq(x, small(rng)),
            }
        }
    }
}

/// Random EL⊥[D] ontology from uniformly sampled axiom templates.
pub fn random_ontology(kind: CdKind, params: RandomParams, rng: &mut ChaCha8Rng) -> Ontology {
    let vars: Vec<String> = ["x", "y", "z", "w", "u", "v"].iter().take(params.variables.max(1)).map(|s| s.to_string()).collect();
    let mut pool: Vec<Constraint> = Vec::new();
    let want = rng.gen_range(1..=params.constraints.max(1));
    let mut tries = 0;
    while pool.len() < want && tries < 100 {
        tries += 1;
        let c = match kind {
            CdKind::Diff => Constraint::Diff(random_diff(&pool, &vars, rng)),
            _ => Constraint::Lin(random_lin(&pool, &vars, rng)),
        };
        if !pool.contains(&c) {
            pool.push(c);
        }
    }
    let names: Vec<Concept> = (0..params.names.max(1)).map(|i| name(format!("A{}", i))).collect();
    let roles = ["r", "s"];
    let pick = |rng: &mut ChaCha8Rng| names.choose(rng).unwrap().clone();
    let atom = |rng: &mut ChaCha8Rng| Concept::Atom(pool.choose(rng).unwrap().clone());
    let m = rng.gen_range(1..=params.axioms.max(1));
    let mut axioms = Vec::new();
    while axioms.len() < m {
        let g = match rng.gen_range(0..7) {
            0 => Gci::new(pick(rng), pick(rng)),
            1 => Gci::new(Concept::and(pick(rng), pick(rng)), pick(rng)),
            2 => Gci::new(pick(rng), Concept::exists(roles.choose(rng).unwrap(), pick(rng))),
            3 => Gci::new(Concept::exists(roles.choose(rng).unwrap(), pick(rng)), pick(rng)),
            4 => Gci::new(pick(rng), atom(rng)),
            5 => Gci::new(atom(rng), pick(rng)),
            _ => Gci::new(Concept::and(atom(rng), pick(rng)), pick(rng)),
        };
        if g.lhs != g.rhs && !axioms.contains(&g) {
            axioms.push(g);
        }
    }
    let kind = if pool.is_empty() { CdKind::None } else { kind };
    Ontology::new(axioms, kind)
}

fn random_instance(n: usize, seed: u64, rng: &mut ChaCha8Rng) -> (Ontology, Gci) {
    let kind = if seed.is_multiple_of(2) { CdKind::Lin } else { CdKind::Diff };
    let params = RandomParams { axioms: n.clamp(1, 15) + 3, ..RandomParams::default() };
    let o = random_ontology(kind, params, rng);
    let r = EldReasoner::new(&o, &[]);
    let cl = r.classification();
    let mut candidates: Vec<(Concept, Concept)> = cl
        .iter()
        .filter(|(c, d)| matches!(c, Concept::Name(_)) && c != d && *d != Concept::Top)
        .map(|(c, d)| (c.clone(), d.clone()))
        .collect();
    if candidates.is_empty() {
        candidates.push((name("A0"), Concept::Top));
    }
    let (c, d) = candidates.choose(rng).unwrap().clone();
    (o, Gci::new(c, d))
}

/// Ontology and entailed goal for `spec`; the goal is re-checked with the
/// EL⊥[D] classifier before it is returned.
pub fn generate_benchmark(spec: &BenchSpec) -> Result<(Ontology, Gci), BenchError> {
    if spec.n == 0 {
        return Err(BenchError::ZeroSize);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (o, goal) = match spec.family {
        Family::Artificial => artificial(spec.n, &mut rng),
        Family::Diet => diet(spec.n, &mut rng),
        Family::Dsbj => dsbj(spec.n, &mut rng),
        Family::Dobj => dobj(spec.n, &mut rng),
        Family::Random => random_instance(spec.n, spec.seed, &mut rng),
    };
    let r = EldReasoner::new(&o, &[goal.lhs.clone(), goal.rhs.clone()]);
    if r.entails(&goal) != Some(true) {
        return Err(BenchError::Unverified(goal.to_string()));
    }
    Ok((o, goal))
}

/// Text form written by the `bench` command: the goal as a comment, then
/// the ontology.
pub fn benchmark_text(o: &Ontology, goal: &Gci) -> String {
    format!("# goal: {}\n{}", goal, crate::parse::serialize_ontology(o))
}
