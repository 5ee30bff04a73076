//! Certificates that a subset is not close to a half-split.
//!
//! For a subset that does not encode an NAE-satisfying assignment, a unit
//! vector `y` with `|yᵀ A_S y − ½| ≥ 1/(8√2)` is produced from the first
//! applicable situation:
//!
//! 1. some variable has other than four of its eight vectors in `S`, so its
//!    dimension is off by at least 1/8;
//! 2. some literal has one to three of its four vectors, which leaves an
//!    off-diagonal entry of magnitude at least 1/(8√2) among the dimensions
//!    of a twice-occurring literal of that variable;
//! 3. the decoded assignment leaves a clause all-equal, so that clause's
//!    dimension is off by at least 1/4.

use serde::Serialize;

use super::cnf::{first_failing_clause, Literal};
use super::gadget::{subset_to_assignment, Decoded, ReductionLayout};
use super::ReductionError;
use crate::instance::Instance;
use crate::linalg::SymMatrix;

/// The guaranteed deviation `1/(8√2)`, rounded to f64.
pub const WITNESS_FLOOR: f64 = 0.088_388_347_648_318_43;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum ViolationCase {
    VariableCount { var: usize, count: usize },
    PartialLiteral { literal: i64, present: usize, dims: [usize; 2] },
    UnsatisfiedClause { clause: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Witness { y: Vec<f64>, value: f64, case: ViolationCase },
    IsEncodingSatisfying { assignment: Vec<bool> },
}

fn deviation(a: &SymMatrix, y: &[f64]) -> f64 {
    (a.quad_form(y) - 0.5).abs()
}

fn indicator(dim: usize, at: usize) -> Vec<f64> {
    let mut y = vec![0.0; dim];
    y[at] = 1.0;
    y
}

fn check_layout(layout: &ReductionLayout, inst: &Instance) -> Result<(), ReductionError> {
    if inst.dim() != layout.dim() || inst.len() != layout.vector_count() {
        return Err(ReductionError::LayoutMismatch(format!(
            "instance is {}×{}, layout expects {}×{}",
            inst.len(),
            inst.dim(),
            layout.vector_count(),
            layout.dim()
        )));
    }
    let (expected, _) = super::gadget::ks_form_to_instance(layout.formula())?;
    for (i, (u, v)) in inst.vectors().zip(expected.vectors()).enumerate() {
        if u.iter().zip(v).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(ReductionError::LayoutMismatch(format!("vector {i} differs from the layout")));
        }
    }
    Ok(())
}

/// Finds a violation witness for `subset`, or reports that the subset
/// decodes to an NAE-satisfying assignment.
pub fn find_violation(
    layout: &ReductionLayout,
    inst: &Instance,
    subset: &[usize],
) -> Result<Violation, ReductionError> {
    check_layout(layout, inst)?;
    let subset = inst.normalize_subset(subset)?;
    let a = inst.outer_sum(&subset);
    let d = inst.dim();
    let mut present = vec![false; inst.len()];
    for &i in &subset {
        present[i] = true;
    }
    let count = |lit: Literal| layout.literal_vecs(lit).iter().filter(|&&i| present[i]).count();

    for var in 0..layout.num_vars() {
        let n = count(Literal::pos(var)) + count(Literal::neg(var));
        if n != 4 {
            let y = indicator(d, layout.var_dim(var));
            let value = deviation(&a, &y);
            return Ok(Violation::Witness {
                y,
                value,
                case: ViolationCase::VariableCount { var, count: n },
            });
        }
    }

    for var in 0..layout.num_vars() {
        for lit in [Literal::pos(var), Literal::neg(var)] {
            let k = count(lit);
            if !(1..=3).contains(&k) {
                continue;
            }
            // With four vectors in total, the complement is partial too.
            let lit = if layout.clauses_of(lit).len() == 2 { lit } else { lit.negated() };
            let clauses = layout.clauses_of(lit);
            let (dx, cj, ck) = (
                layout.var_dim(var),
                layout.clause_dim(clauses[0]),
                layout.clause_dim(clauses[1]),
            );
            let [p, q] = [[dx, cj], [dx, ck], [cj, ck]]
                .into_iter()
                .max_by(|x, y| a.get(x[0], x[1]).abs().total_cmp(&a.get(y[0], y[1]).abs()))
                .expect("three pairs");
            let off = a.get(p, q);
            let sign = if (a.get(p, p) + a.get(q, q) - 1.0) * off >= 0.0 { 1.0 } else { -1.0 };
            let mut y = vec![0.0; d];
            y[p] = std::f64::consts::FRAC_1_SQRT_2;
            y[q] = sign * std::f64::consts::FRAC_1_SQRT_2;
            let value = deviation(&a, &y);
            return Ok(Violation::Witness {
                y,
                value,
                case: ViolationCase::PartialLiteral {
                    literal: lit.to_dimacs(),
                    present: count(lit),
                    dims: [p, q],
                },
            });
        }
    }

    let assignment = match subset_to_assignment(layout, &subset) {
        Decoded::Assignment(x) => x,
        Decoded::NotDecodable { var } => {
            return Err(ReductionError::Internal(format!("variable {var} passed the count checks but does not decode")))
        }
    };
    match first_failing_clause(layout.formula(), &assignment) {
        Some(clause) => {
            let y = indicator(d, layout.clause_dim(clause));
            let value = deviation(&a, &y);
            Ok(Violation::Witness {
                y,
                value,
                case: ViolationCase::UnsatisfiedClause { clause },
            })
        }
        None => Ok(Violation::IsEncodingSatisfying { assignment }),
    }
}
