//! The restricted clause form and the rewriting that produces it.
//!
//! A formula is in restricted form when
//! 1. every clause has three literals (enforced by the type),
//! 2. each literal occurs in at most two clauses,
//! 3. each variable has a literal occurring in exactly two clauses, and
//! 4. two clauses share at most one literal and no clause repeats a variable.

use std::collections::HashMap;

use serde::Serialize;

use super::cnf::{CnfFormula, Literal};
use super::ReductionError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition")]
pub enum KsViolation {
    /// Condition 2.
    LiteralOverused { literal: i64, clauses: usize },
    /// Condition 3; also raised for variables that never occur.
    NoDoubleOccurrence { var: usize },
    /// Condition 4, repeated variable inside one clause.
    RepeatedVariable { clause: usize, var: usize },
    /// Condition 4, two clauses with two or more literals in common.
    SharedLiterals { first: usize, second: usize, shared: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KsFormReport {
    pub violations: Vec<KsViolation>,
    /// Variables lacking a positive or a negative occurrence.
    pub missing_polarity: Vec<usize>,
}

impl KsFormReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Valid and every variable occurs in both polarities.
    pub fn is_reducible(&self) -> bool {
        self.is_valid() && self.missing_polarity.is_empty()
    }
}

/// Clauses containing each literal, indexed `[var][polarity slot]`.
pub(crate) fn literal_clauses(f: &CnfFormula) -> Vec<[Vec<usize>; 2]> {
    let mut occ = vec![[Vec::new(), Vec::new()]; f.num_vars()];
    for (j, clause) in f.clauses().iter().enumerate() {
        for lit in clause {
            let list: &mut Vec<usize> = &mut occ[lit.var][lit.polarity_slot()];
            if list.last() != Some(&j) {
                list.push(j);
            }
        }
    }
    occ
}

pub fn validate_ks_form(f: &CnfFormula) -> KsFormReport {
    let occ = literal_clauses(f);
    let mut violations = Vec::new();
    let mut missing_polarity = Vec::new();

    for (var, lists) in occ.iter().enumerate() {
        for (slot, list) in lists.iter().enumerate() {
            if list.len() > 2 {
                let lit = Literal { var, positive: slot == 0 };
                violations.push(KsViolation::LiteralOverused {
                    literal: lit.to_dimacs(),
                    clauses: list.len(),
                });
            }
        }
        if lists[0].len() != 2 && lists[1].len() != 2 {
            violations.push(KsViolation::NoDoubleOccurrence { var });
        }
        if lists[0].is_empty() || lists[1].is_empty() {
            missing_polarity.push(var);
        }
    }

    for (j, clause) in f.clauses().iter().enumerate() {
        let mut vars: Vec<usize> = clause.iter().map(|l| l.var).collect();
        vars.sort_unstable();
        if let Some(w) = vars.windows(2).find(|w| w[0] == w[1]) {
            violations.push(KsViolation::RepeatedVariable { clause: j, var: w[0] });
        }
    }

    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for lists in &occ {
        for list in lists {
            for (a, &first) in list.iter().enumerate() {
                for &second in &list[a + 1..] {
                    *shared.entry((first, second)).or_default() += 1;
                }
            }
        }
    }
    let mut pairs: Vec<_> = shared.into_iter().filter(|&(_, n)| n > 1).collect();
    pairs.sort_unstable();
    violations.extend(
        pairs
            .into_iter()
            .map(|((first, second), shared)| KsViolation::SharedLiterals { first, second, shared }),
    );

    KsFormReport {
        violations,
        missing_polarity,
    }
}

/// Where one original variable went in the rewritten formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarSplit {
    /// Copies replacing each occurrence: positive occurrences first.
    pub copies: Vec<usize>,
    /// Auxiliary variables of the odd-length equality chain.
    pub chain: Vec<usize>,
}

/// Rewrites a 3-CNF into restricted form with the same NAE-satisfiability.
///
/// Clauses containing both `x` and `x̄` are always NAE-satisfied and are
/// dropped first. Then any variable with a single occurrence is removed
/// together with its clause, repeated until no such variable remains. Each
/// surviving variable with `n` occurrences becomes `n` fresh copies, tied
/// together by link clauses `(x_i ∨ x̄_{i+1} ∨ y_i)` and an odd chain
/// `(ȳ_i ∨ ȳ_{i+1} ∨ y_{i+2})` of length `n' ≥ max(n, 3)`.
///
/// The map has one entry per original variable, `None` when removed.
pub fn nae3sat_to_ks_form(f: &CnfFormula) -> Result<(CnfFormula, Vec<Option<VarSplit>>), ReductionError> {
    let clauses = f.clauses();
    let mut active: Vec<bool> = clauses
        .iter()
        .map(|c| !c.iter().any(|l| c.contains(&l.negated())))
        .collect();

    let mut count = vec![0usize; f.num_vars()];
    for (c, _) in clauses.iter().zip(&active).filter(|(_, &a)| a) {
        for lit in c {
            count[lit.var] += 1;
        }
    }
    loop {
        let Some(var) = count.iter().position(|&n| n == 1) else { break };
        let j = (0..clauses.len())
            .find(|&j| active[j] && clauses[j].iter().any(|l| l.var == var))
            .expect("counted occurrence has a clause");
        active[j] = false;
        for lit in &clauses[j] {
            count[lit.var] -= 1;
        }
    }

    let kept: Vec<usize> = (0..clauses.len()).filter(|&j| active[j]).collect();
    let mut out: Vec<[Literal; 3]> = kept.iter().map(|&j| clauses[j]).collect();
    let mut gadgets: Vec<[Literal; 3]> = Vec::new();
    let mut varmap: Vec<Option<VarSplit>> = vec![None; f.num_vars()];
    let mut next_var = 0usize;

    // Occurrence sites per variable, positive ones first, located before
    // any renaming so fresh indices cannot be confused with old ones.
    let mut sites: Vec<[Vec<(usize, usize)>; 2]> = vec![[Vec::new(), Vec::new()]; f.num_vars()];
    for (row, clause) in out.iter().enumerate() {
        for (pos, lit) in clause.iter().enumerate() {
            sites[lit.var][lit.polarity_slot()].push((row, pos));
        }
    }

    for var in 0..f.num_vars() {
        if count[var] == 0 {
            continue;
        }
        let sites: Vec<(usize, usize)> = sites[var].concat();
        let n = sites.len();
        let n_chain = if n % 2 == 1 { n } else { n + 1 }.max(3);
        let copies: Vec<usize> = (next_var..next_var + n).collect();
        let chain: Vec<usize> = (next_var + n..next_var + n + n_chain).collect();
        next_var += n + n_chain;

        for (&(row, pos), &copy) in sites.iter().zip(&copies) {
            out[row][pos].var = copy;
        }
        for i in 0..n {
            gadgets.push([
                Literal::pos(copies[i]),
                Literal::neg(copies[(i + 1) % n]),
                Literal::pos(chain[i]),
            ]);
        }
        for i in 0..n_chain {
            gadgets.push([
                Literal::neg(chain[i]),
                Literal::neg(chain[(i + 1) % n_chain]),
                Literal::pos(chain[(i + 2) % n_chain]),
            ]);
        }
        varmap[var] = Some(VarSplit { copies, chain });
    }

    out.extend(gadgets);
    let result = CnfFormula::new(next_var, out)?;
    let report = validate_ks_form(&result);
    if !report.is_reducible() {
        return Err(ReductionError::Internal(format!(
            "rewritten formula fails restricted-form checks: {report:?}"
        )));
    }
    Ok((result, varmap))
}
