use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dlcd::alc::{alc_entails, alc_prove, AlcError};
use dlcd::bench::{benchmark_text, generate_benchmark, BenchSpec, Family};
use dlcd::check::check_proof;
use dlcd::el::Classification;
use dlcd::eld::{eld_classify, eld_prove, EldError};
use dlcd::{parse_gci, parse_ontology, subconcepts, Gci, Ontology, Proof, ProofMetric};

#[derive(Parser)]
#[command(name = "dlcd", version, about = "EL and ALC reasoning with linear and difference constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Logic {
    El,
    Alc,
}

#[derive(Clone, Copy, ValueEnum)]
enum Minimize {
    Size,
    Depth,
    None,
}

impl From<Minimize> for ProofMetric {
    fn from(m: Minimize) -> Self {
        match m {
            Minimize::Size => ProofMetric::Size,
            Minimize::Depth => ProofMetric::Depth,
            Minimize::None => ProofMetric::None,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print every derived subsumption, one per line
    Classify { file: PathBuf },
    /// Prove a GCI and write the proof as JSON (and DOT)
    Prove {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        goal: String,
        /// Defaults to el when ontology and goal are in EL, alc otherwise
        #[arg(long, value_enum)]
        logic: Option<Logic>,
        #[arg(long, value_enum, default_value = "size")]
        minimize: Minimize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check a proof file against an ontology
    Check {
        #[arg(long)]
        ontology: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Write a generated benchmark ontology
    Bench {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Outcome of a command that ran to completion.
enum Verdict {
    Yes,
    No,
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load(path: &Path) -> Result<Ontology> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_ontology(&text).with_context(|| format!("parsing {}", path.display()))
}

fn alc_classification(o: &Ontology) -> Result<Classification> {
    let concepts: Vec<_> = subconcepts(o).into_iter().collect();
    let mut pairs = BTreeSet::new();
    for c in &concepts {
        for d in &concepts {
            if alc_entails(o, &Gci::new(c.clone(), d.clone()))? {
                pairs.insert((c.clone(), d.clone()));
            }
        }
    }
    Ok(Classification::new(pairs))
}

fn classify(file: &Path) -> Result<Verdict> {
    let o = load(file)?;
    let cl = if o.is_el() { eld_classify(&o).0 } else { alc_classification(&o)? };
    emit(&cl.to_string())?;
    Ok(Verdict::Yes)
}

fn prove(
    ontology: &Path,
    goal: &str,
    logic: Option<Logic>,
    metric: ProofMetric,
    out: Option<&Path>,
    dot: Option<&Path>,
) -> Result<Verdict> {
    let o = load(ontology)?;
    let goal = parse_gci(goal, o.kind).context("parsing the goal")?;
    let el = o.is_el() && goal.lhs.is_el() && goal.rhs.is_el();
    let logic = logic.unwrap_or(if el { Logic::El } else { Logic::Alc });
    let result: Result<Proof, String> = match logic {
        Logic::El => match eld_prove(&o, &goal, metric) {
            Ok(p) => Ok(p),
            Err(EldError::NotEntailed(g)) => Err(g),
            Err(e @ EldError::NotEl(_)) => return Err(e.into()),
        },
        Logic::Alc => match alc_prove(&o, &goal, metric) {
            Ok(p) => Ok(p),
            Err(AlcError::NotEntailed(g)) => Err(g),
            Err(e) => return Err(e.into()),
        },
    };
    let p = match result {
        Ok(p) => p,
        Err(g) => {
            eprintln!("not entailed: {}", g);
            return Ok(Verdict::No);
        }
    };
    match out {
        Some(path) => fs::write(path, p.to_json()).with_context(|| format!("writing {}", path.display()))?,
        None => emit(&p.to_json())?,
    }
    if let Some(path) = dot {
        fs::write(path, p.to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Verdict::Yes)
}

fn check(ontology: &Path, proof: &Path) -> Result<Verdict> {
    let o = load(ontology)?;
    let text = fs::read_to_string(proof).with_context(|| format!("reading {}", proof.display()))?;
    let p = Proof::from_json(&text, o.kind).with_context(|| format!("parsing {}", proof.display()))?;
    let report = check_proof(&p, &o);
    if report.is_valid() {
        emit("valid\n")?;
        Ok(Verdict::Yes)
    } else {
        emit(&report.to_string())?;
        Ok(Verdict::No)
    }
}

fn bench(family: Family, n: usize, seed: u64, out: &Path) -> Result<Verdict> {
    let (o, goal) = generate_benchmark(&BenchSpec::new(family, n, seed))?;
    fs::write(out, benchmark_text(&o, &goal)).with_context(|| format!("writing {}", out.display()))?;
    emit(&format!("{}\n", goal))?;
    Ok(Verdict::Yes)
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Classify { file } => classify(&file),
        Command::Prove { ontology, goal, logic, minimize, out, dot } => {
            prove(&ontology, &goal, logic, minimize.into(), out.as_deref(), dot.as_deref())
        }
        Command::Check { ontology, proof } => check(&ontology, &proof),
        Command::Bench { family, n, seed, out } => bench(family, n, seed, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(2)
        }
    }
}
