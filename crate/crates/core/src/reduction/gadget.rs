//! Vector gadgets for a restricted-form formula.
//!
//! Dimensions: one per clause, then one per variable. Vectors: one per
//! clause with entry ½ on its own dimension, then for every variable four
//! vectors for the positive literal followed by four for the negative one.
//! A literal occurring in clauses `j < k` gets
//!
//! | vector | on `j` | on `k` | on the variable |
//! |--------|--------|--------|-----------------|
//! | 1      | ¼      | ¼      | 1/√8            |
//! | 2      | ¼      | ¼      | −1/√8           |
//! | 3      | ¼      | −¼     | 1/√8            |
//! | 4      | ¼      | −¼     | −1/√8           |
//!
//! and a literal occurring once simply has no `k` entry.

use serde_json::{json, Map, Value};

use super::cnf::{first_failing_clause, CnfFormula, Literal};
use super::ks_form::{literal_clauses, validate_ks_form};
use super::ReductionError;
use crate::instance::Instance;

/// Isotropy tolerance for constructed instances.
const ISO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionLayout {
    formula: CnfFormula,
    /// Clauses containing each literal, ascending, indexed `[var][slot]`.
    literal_clauses: Vec<[Vec<usize>; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Assignment(Vec<bool>),
    /// The variable whose eight vectors are not exactly one full quadruple.
    NotDecodable { var: usize },
}

fn entry_signs(k: usize) -> (f64, f64) {
    let second = if k < 2 { 1.0 } else { -1.0 };
    let var = if k % 2 == 0 { 1.0 } else { -1.0 };
    (second, var)
}

impl ReductionLayout {
    fn new(formula: CnfFormula) -> Self {
        let literal_clauses = literal_clauses(&formula);
        Self {
            formula,
            literal_clauses,
        }
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    pub fn num_clauses(&self) -> usize {
        self.formula.num_clauses()
    }

    pub fn num_vars(&self) -> usize {
        self.formula.num_vars()
    }

    pub fn dim(&self) -> usize {
        self.num_clauses() + self.num_vars()
    }

    pub fn vector_count(&self) -> usize {
        self.num_clauses() + 8 * self.num_vars()
    }

    pub fn clause_dim(&self, clause: usize) -> usize {
        clause
    }

    pub fn var_dim(&self, var: usize) -> usize {
        self.num_clauses() + var
    }

    pub fn clause_vec(&self, clause: usize) -> usize {
        clause
    }

    /// Indices of the four vectors of a literal.
    pub fn literal_vecs(&self, lit: Literal) -> [usize; 4] {
        let base = self.num_clauses() + 8 * lit.var + 4 * lit.polarity_slot();
        [base, base + 1, base + 2, base + 3]
    }

    /// Clauses containing `lit`, ascending.
    pub fn clauses_of(&self, lit: Literal) -> &[usize] {
        &self.literal_clauses[lit.var][lit.polarity_slot()]
    }

    fn literal_vector(&self, lit: Literal, k: usize) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        let (second, var) = entry_signs(k);
        let clauses = self.clauses_of(lit);
        v[self.clause_dim(clauses[0])] = 0.25;
        if let Some(&ck) = clauses.get(1) {
            v[self.clause_dim(ck)] = 0.25 * second;
        }
        v[self.var_dim(lit.var)] = var / 8f64.sqrt();
        v
    }

    /// JSON form with 1-based signed literal keys and 0-based clause keys.
    pub fn to_json(&self) -> Value {
        let mut clause_dims = Map::new();
        let mut clause_vecs = Map::new();
        for j in 0..self.num_clauses() {
            clause_dims.insert(j.to_string(), json!(self.clause_dim(j)));
            clause_vecs.insert(j.to_string(), json!(self.clause_vec(j)));
        }
        let mut var_dims = Map::new();
        let mut literal_vecs = Map::new();
        let mut lit_clauses = Map::new();
        for var in 0..self.num_vars() {
            var_dims.insert((var + 1).to_string(), json!(self.var_dim(var)));
            for lit in [Literal::pos(var), Literal::neg(var)] {
                let key = lit.to_dimacs().to_string();
                literal_vecs.insert(key.clone(), json!(self.literal_vecs(lit)));
                lit_clauses.insert(key, json!(self.clauses_of(lit)));
            }
        }
        json!({
            "num_vars": self.num_vars(),
            "num_clauses": self.num_clauses(),
            "clause_dims": clause_dims,
            "var_dims": var_dims,
            "clause_vecs": clause_vecs,
            "literal_vecs": literal_vecs,
            "literal_clauses": lit_clauses,
        })
    }

    /// Rebuilds a layout from [`to_json`](Self::to_json) output, checking
    /// that every index agrees with the canonical layout.
    pub fn from_json(value: &Value) -> Result<Self, ReductionError> {
        let bad = |msg: &str| ReductionError::LayoutMismatch(msg.to_string());
        let count = |key: &str| {
            value[key]
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| bad(&format!("missing `{key}`")))
        };
        let num_vars = count("num_vars")?;
        let num_clauses = count("num_clauses")?;

        let mut members: Vec<Vec<Literal>> = vec![Vec::new(); num_clauses];
        for var in 0..num_vars {
            for lit in [Literal::pos(var), Literal::neg(var)] {
                let key = lit.to_dimacs().to_string();
                let list = value["literal_clauses"][&key]
                    .as_array()
                    .ok_or_else(|| bad(&format!("missing clauses for literal {key}")))?;
                for j in list {
                    let j = j.as_u64().map(|x| x as usize).filter(|&j| j < num_clauses);
                    members[j.ok_or_else(|| bad("clause index out of range"))?].push(lit);
                }
            }
        }
        let clauses = members
            .into_iter()
            .enumerate()
            .map(|(j, lits)| {
                <[Literal; 3]>::try_from(lits).map_err(|_| bad(&format!("clause {j} does not have 3 literals")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let layout = Self::new(CnfFormula::new(num_vars, clauses)?);
        let canonical = layout.to_json();
        for key in ["clause_dims", "var_dims", "clause_vecs", "literal_vecs", "literal_clauses"] {
            if value[key] != canonical[key] {
                return Err(bad(&format!("`{key}` disagrees with the canonical layout")));
            }
        }
        Ok(layout)
    }
}

/// Builds the isotropic instance for a restricted-form formula in which
/// every variable occurs in both polarities. The instance is validated;
/// a formula with no clauses has no instance and is rejected.
pub fn ks_form_to_instance(f: &CnfFormula) -> Result<(Instance, ReductionLayout), ReductionError> {
    let report = validate_ks_form(f);
    if !report.is_valid() {
        return Err(ReductionError::NotKsForm(report.violations));
    }
    if !report.missing_polarity.is_empty() {
        return Err(ReductionError::MissingPolarity(report.missing_polarity));
    }
    let layout = ReductionLayout::new(f.clone());
    let mut rows = Vec::with_capacity(layout.vector_count());
    for j in 0..layout.num_clauses() {
        let mut v = vec![0.0; layout.dim()];
        v[layout.clause_dim(j)] = 0.5;
        rows.push(v);
    }
    for var in 0..layout.num_vars() {
        for lit in [Literal::pos(var), Literal::neg(var)] {
            for k in 0..4 {
                rows.push(layout.literal_vector(lit, k));
            }
        }
    }
    let inst = Instance::new(layout.dim(), rows)?.validate(ISO_TOL)?;
    Ok((inst, layout))
}

/// The exact half-split encoding an NAE-satisfying assignment: the four
/// vectors of every true literal plus the vectors of clauses with exactly
/// one true literal.
pub fn assignment_to_subset(layout: &ReductionLayout, assignment: &[bool]) -> Result<Vec<usize>, ReductionError> {
    let f = &layout.formula;
    if assignment.len() != f.num_vars() {
        return Err(ReductionError::BadAssignment {
            expected: f.num_vars(),
            actual: assignment.len(),
        });
    }
    if let Some(clause) = first_failing_clause(f, assignment) {
        return Err(ReductionError::NotSatisfying { clause });
    }
    let mut subset: Vec<usize> = f
        .clauses()
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().filter(|l| l.value(assignment)).count() == 1)
        .map(|(j, _)| layout.clause_vec(j))
        .collect();
    for (var, &value) in assignment.iter().enumerate() {
        let lit = Literal { var, positive: value };
        subset.extend(layout.literal_vecs(lit));
    }
    subset.sort_unstable();
    Ok(subset)
}

/// Reads an assignment back from a subset. Indices past the layout are
/// ignored; clause vectors play no part.
pub fn subset_to_assignment(layout: &ReductionLayout, subset: &[usize]) -> Decoded {
    let mut present = vec![false; layout.vector_count()];
    for &i in subset {
        if let Some(p) = present.get_mut(i) {
            *p = true;
        }
    }
    let mut assignment = Vec::with_capacity(layout.num_vars());
    for var in 0..layout.num_vars() {
        let full = |lit| layout.literal_vecs(lit).iter().filter(|&&i| present[i]).count();
        match (full(Literal::pos(var)), full(Literal::neg(var))) {
            (4, 0) => assignment.push(true),
            (0, 4) => assignment.push(false),
            _ => return Decoded::NotDecodable { var },
        }
    }
    Decoded::Assignment(assignment)
}
