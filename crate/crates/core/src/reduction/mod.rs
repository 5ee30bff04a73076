//! Reduction from NAE-3SAT to the discrepancy problem.
//!
//! The pipeline has two stages. [`nae3sat_to_ks_form`] rewrites an arbitrary
//! 3-CNF into a restricted form where every literal occurs at most twice,
//! every variable has a literal occurring exactly twice, and clauses overlap
//! in at most one literal. [`ks_form_to_instance`] then turns a restricted
//! formula into an isotropic vector instance whose exact half-splits are the
//! NAE-satisfying assignments, and [`find_violation`] certifies that any
//! other subset is far from a half-split.

mod cnf;
mod dimacs;
mod gadget;
mod ks_form;
mod violation;

use thiserror::Error;

use crate::instance::InstanceError;

pub use cnf::{nae_brute_solve, nae_eval, random_3cnf, CnfFormula, Literal, DEFAULT_VAR_LIMIT};
pub use dimacs::{emit_dimacs, parse_dimacs};
pub use gadget::{
    assignment_to_subset, ks_form_to_instance, subset_to_assignment, Decoded, ReductionLayout,
};
pub use ks_form::{nae3sat_to_ks_form, validate_ks_form, KsFormReport, KsViolation, VarSplit};
pub use violation::{find_violation, Violation, ViolationCase, WITNESS_FLOOR};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("clause {clause} has {len} literals, expected 3")]
    Not3Cnf { clause: usize, len: usize },
    #[error("variable {var} out of range for {num_vars} variables")]
    VarOutOfRange { var: usize, num_vars: usize },
    #[error("assignment has {actual} values for {expected} variables")]
    BadAssignment { expected: usize, actual: usize },
    #[error("{vars} variables exceed the brute-force limit of {limit}")]
    TooLarge { vars: usize, limit: usize },
    #[error("formula is not in restricted form: {0:?}")]
    NotKsForm(Vec<KsViolation>),
    #[error("variables {0:?} occur in only one polarity")]
    MissingPolarity(Vec<usize>),
    #[error("assignment does not NAE-satisfy clause {clause}")]
    NotSatisfying { clause: usize },
    #[error("layout does not match instance: {0}")]
    LayoutMismatch(String),
    #[error("internal reduction failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}
