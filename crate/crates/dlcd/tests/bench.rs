use std::collections::BTreeSet;

use dlcd::alc::alc_prove;
use dlcd::bench::*;
use dlcd::check::check_proof;
use dlcd::eld::{eld_classify, eld_prove};
use dlcd::{parse_ontology, CdKind, Constraint, ProofMetric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn distinct_constraints(o: &dlcd::Ontology) -> usize {
    o.constraints().iter().map(|c| c.canonical()).collect::<BTreeSet<Constraint>>().len()
}

fn artificial_size(n: usize) -> usize {
    let (o, g) = generate_benchmark(&BenchSpec::new(Family::Artificial, n, 1)).unwrap();
    eld_prove(&o, &g, ProofMetric::Size).unwrap().size()
}

/// Least-squares fit of `a n² + b n + c` through the normal equations.
fn quadratic_fit(points: &[(f64, f64)]) -> [f64; 3] {
    let mut m = [[0.0f64; 4]; 3];
    for &(x, y) in points {
        let row = [x * x, x, 1.0];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * y;
        }
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for k in col..4 {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    [m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]]
}

#[test]
fn generation_is_deterministic() {
    let spec = BenchSpec::new(Family::Dsbj, 3, 42);
    let (a, ga) = generate_benchmark(&spec).unwrap();
    let (b, gb) = generate_benchmark(&spec).unwrap();
    assert_eq!(benchmark_text(&a, &ga), benchmark_text(&b, &gb));
    let other = generate_benchmark(&BenchSpec::new(Family::Random, 3, 43)).unwrap();
    let again = generate_benchmark(&BenchSpec::new(Family::Random, 3, 43)).unwrap();
    assert_eq!(benchmark_text(&other.0, &other.1), benchmark_text(&again.0, &again.1));
}

#[test]
fn families_use_their_domains() {
    let kinds = [(Family::Diet, CdKind::Lin), (Family::Artificial, CdKind::Lin), (Family::Dsbj, CdKind::Diff), (Family::Dobj, CdKind::Diff)];
    for (fam, kind) in kinds {
        let (o, _) = generate_benchmark(&BenchSpec::new(fam, 2, 0)).unwrap();
        assert_eq!(o.kind, kind, "{}", fam);
        assert!(o.is_el());
    }
    assert!(generate_benchmark(&BenchSpec::new(Family::Diet, 0, 0)).is_err());
    assert!("nope".parse::<Family>().is_err());
}

#[test]
fn constraint_counts_follow_the_formulas() {
    for fam in Family::ALL {
        for n in 1..=8 {
            for seed in [0, 5] {
                let (o, _) = generate_benchmark(&BenchSpec::new(fam, n, seed)).unwrap();
                if let Some(k) = constraint_count(fam, n) {
                    assert_eq!(distinct_constraints(&o), k, "{} n={}", fam, n);
                }
            }
        }
    }
    for n in 2..=8 {
        assert_eq!(constraint_count(Family::Artificial, n), Some(2 * n));
        assert_eq!(constraint_count(Family::Dsbj, n + 1).unwrap() - constraint_count(Family::Dsbj, n).unwrap(), 1);
    }
}

#[test]
fn smallest_artificial_instance() {
    let (o, g) = generate_benchmark(&BenchSpec::new(Family::Artificial, 1, 9)).unwrap();
    let p = eld_prove(&o, &g, ProofMetric::Size).unwrap();
    assert!(p.size() >= 4, "{}", p.size());
    assert!(check_proof(&p, &o).is_valid());
}

#[test]
fn artificial_proofs_grow_quadratically() {
    let pts: Vec<(f64, f64)> = [2usize, 4, 8].iter().map(|&n| (n as f64, artificial_size(n) as f64)).collect();
    let [a, b, c] = quadratic_fit(&pts);
    assert!(a >= -1e-9, "a = {}", a);
    for &(x, y) in &pts {
        assert!((a * x * x + b * x + c - y).abs() < 1e-6);
    }
}

#[test]
fn random_parameters_are_respected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = RandomParams::default();
    for kind in [CdKind::Lin, CdKind::Diff] {
        let o = random_ontology(kind, p, &mut rng);
        assert!(o.axioms.len() <= p.axioms);
        assert!(distinct_constraints(&o) <= p.constraints);
        assert!(o.is_el());
        let text = dlcd::serialize_ontology(&o);
        assert_eq!(parse_ontology(&text).unwrap().axioms, o.axioms);
    }
}

#[test]
fn generated_goals_hold_and_proofs_check() {
    for fam in Family::ALL {
        for n in 1..=4 {
            let (o, g) = generate_benchmark(&BenchSpec::new(fam, n, 7)).unwrap();
            assert!(eld_classify(&o).0.contains(&g.lhs, &g.rhs), "{} n={}", fam, n);
            let p = eld_prove(&o, &g, ProofMetric::Size).unwrap();
            let rep = check_proof(&p, &o);
            assert!(rep.is_valid(), "{} n={}\n{}", fam, n, rep);
            let p = alc_prove(&o, &g, ProofMetric::Size).unwrap();
            let rep = check_proof(&p, &o);
            assert!(rep.is_valid(), "alc {} n={}\n{}", fam, n, rep);
        }
    }
}
