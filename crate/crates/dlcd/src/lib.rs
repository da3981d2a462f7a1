//! Reasoning for EL⊥ and ALC extended with the concrete domains of linear
//! equations and of difference constraints over the rationals, with
//! proofs that mix description-logic and arithmetic steps.

pub mod abstraction;
pub mod alc;
pub mod bench;
pub mod cd;
pub mod check;
pub mod diff;
pub mod el;
pub mod eld;
pub mod lin;
pub mod interp;
pub mod model;
pub mod parse;
pub mod proof;

pub use abstraction::{abstract_constraints, AbstractionMap};
pub use model::{
    rat, ratio, subconcepts, Assignment, CdKind, Concept, Constraint, DiffConstraint, Gci, LinConstraint, Ontology,
    Rational,
};
pub use parse::{parse_concept, parse_constraint, parse_gci, parse_ontology, serialize_ontology, ParseError};
pub use proof::{DerivationStructure, Proof, ProofError, ProofMetric, Sentence};
