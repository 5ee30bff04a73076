use std::fmt;

use super::ReductionError;
use crate::rng::SplitMix64;

pub const DEFAULT_VAR_LIMIT: usize = 24;

/// A variable (0-based) with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Self { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Self { var, positive: false }
    }

    pub fn negated(self) -> Self {
        Self {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Signed 1-based DIMACS number.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(x: i64) -> Option<Self> {
        if x == 0 {
            return None;
        }
        Some(Self {
            var: (x.unsigned_abs() - 1) as usize,
            positive: x > 0,
        })
    }

    /// 0 for the positive literal, 1 for the negative one.
    pub(crate) fn polarity_slot(self) -> usize {
        usize::from(!self.positive)
    }

    #[inline]
    pub fn value(self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self, ReductionError> {
        for clause in &clauses {
            for lit in clause {
                if lit.var >= num_vars {
                    return Err(ReductionError::VarOutOfRange { var: lit.var, num_vars });
                }
            }
        }
        Ok(Self { num_vars, clauses })
    }

    /// Builds a formula from DIMACS-style signed literals.
    pub fn from_signed(num_vars: usize, clauses: &[[i64; 3]]) -> Result<Self, ReductionError> {
        let clauses = clauses
            .iter()
            .map(|c| {
                let lits = c.map(Literal::from_dimacs);
                match lits {
                    [Some(a), Some(b), Some(c)] => Ok([a, b, c]),
                    _ => Err(ReductionError::ParseError {
                        line: 0,
                        msg: "literal 0 inside a clause".into(),
                    }),
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }
}

fn clause_nae(clause: &[Literal; 3], assignment: &[bool]) -> bool {
    let t = clause.iter().filter(|l| l.value(assignment)).count();
    t == 1 || t == 2
}

/// True iff every clause has at least one true and one false literal.
pub fn nae_eval(f: &CnfFormula, assignment: &[bool]) -> Result<bool, ReductionError> {
    if assignment.len() != f.num_vars {
        return Err(ReductionError::BadAssignment {
            expected: f.num_vars,
            actual: assignment.len(),
        });
    }
    Ok(f.clauses.iter().all(|c| clause_nae(c, assignment)))
}

/// Index of the first clause that is not NAE-satisfied.
pub(crate) fn first_failing_clause(f: &CnfFormula, assignment: &[bool]) -> Option<usize> {
    f.clauses.iter().position(|c| !clause_nae(c, assignment))
}

/// First NAE-satisfying assignment in lexicographic order with `true`
/// before `false` at each position, or `None` if there is none.
pub fn nae_brute_solve(f: &CnfFormula, var_limit: usize) -> Result<Option<Vec<bool>>, ReductionError> {
    if f.num_vars > var_limit {
        return Err(ReductionError::TooLarge {
            vars: f.num_vars,
            limit: var_limit,
        });
    }
    // Clauses grouped by the last variable they mention, so each is checked
    // as soon as it is fully assigned.
    let mut ready: Vec<Vec<usize>> = vec![Vec::new(); f.num_vars];
    for (j, c) in f.clauses.iter().enumerate() {
        let last = c.iter().map(|l| l.var).max().expect("three literals");
        ready[last].push(j);
    }
    let mut assignment = vec![true; f.num_vars];

    fn descend(f: &CnfFormula, ready: &[Vec<usize>], assignment: &mut Vec<bool>, k: usize) -> bool {
        if k == assignment.len() {
            return true;
        }
        for value in [true, false] {
            assignment[k] = value;
            if ready[k].iter().all(|&j| clause_nae(&f.clauses[j], assignment)) && descend(f, ready, assignment, k + 1) {
                return true;
            }
        }
        false
    }

    Ok(descend(f, &ready, &mut assignment, 0).then_some(assignment))
}

/// Uniform random 3-CNF with three distinct variables per clause.
pub fn random_3cnf(num_vars: usize, num_clauses: usize, seed: u64) -> Result<CnfFormula, ReductionError> {
    if num_vars < 3 {
        return Err(ReductionError::VarOutOfRange { var: 2, num_vars });
    }
    let mut rng = SplitMix64::new(seed);
    let clauses = (0..num_clauses)
        .map(|_| {
            let mut vars = [0usize; 3];
            for i in 0..3 {
                vars[i] = loop {
                    let v = rng.below(num_vars as u64) as usize;
                    if !vars[..i].contains(&v) {
                        break v;
                    }
                };
            }
            vars.map(|var| Literal {
                var,
                positive: rng.coin(),
            })
        })
        .collect();
    CnfFormula::new(num_vars, clauses)
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn all_assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
        (0u32..1 << n).map(move |bits| (0..n).map(|i| bits >> (n - 1 - i) & 1 == 0).collect())
    }

    #[test]
    fn nae_eval_examples() {
        let f = CnfFormula::from_signed(3, &[[1, 2, 3]]).unwrap();
        assert!(nae_eval(&f, &[true, false, false]).unwrap());
        assert!(!nae_eval(&f, &[true, true, true]).unwrap());
        assert!(!nae_eval(&f, &[false, false, false]).unwrap());
        assert!(nae_eval(&f_sat3(), &[true, false, true]).unwrap());
        assert_eq!(
            nae_eval(&f, &[true]),
            Err(ReductionError::BadAssignment { expected: 3, actual: 1 })
        );
    }

    #[test]
    fn brute_solve_fixtures() {
        assert_eq!(nae_brute_solve(&f_sat3(), DEFAULT_VAR_LIMIT).unwrap(), Some(vec![true, false, true]));
        assert_eq!(nae_brute_solve(&f_unsat4(), DEFAULT_VAR_LIMIT).unwrap(), None);
        let empty = CnfFormula::new(0, vec![]).unwrap();
        assert_eq!(nae_brute_solve(&empty, DEFAULT_VAR_LIMIT).unwrap(), Some(vec![]));
        let big = CnfFormula::new(30, vec![]).unwrap();
        assert!(matches!(nae_brute_solve(&big, 24), Err(ReductionError::TooLarge { .. })));
    }

    #[test]
    fn fixture_truth_tables() {
        let sat: Vec<_> = all_assignments(3).filter(|a| nae_eval(&f_sat3(), a).unwrap()).collect();
        assert_eq!(sat.first(), Some(&vec![true, false, true]));
        // NAE solutions come in complementary pairs
        for a in &sat {
            let c: Vec<bool> = a.iter().map(|x| !x).collect();
            assert!(sat.contains(&c));
        }
        assert!(all_assignments(3).all(|a| !nae_eval(&f_unsat4(), &a).unwrap()));
    }

    #[test]
    fn brute_solve_matches_truth_table() {
        for seed in 0..200 {
            let f = random_3cnf(5, 1 + (seed as usize % 8), seed).unwrap();
            let expected = all_assignments(5).find(|a| nae_eval(&f, a).unwrap());
            assert_eq!(nae_brute_solve(&f, DEFAULT_VAR_LIMIT).unwrap(), expected, "seed {seed}");
        }
    }

    #[test]
    fn literals_round_trip_dimacs() {
        for x in [1i64, -1, 7, -12] {
            assert_eq!(Literal::from_dimacs(x).unwrap().to_dimacs(), x);
        }
        assert_eq!(Literal::from_dimacs(0), None);
        assert_eq!(Literal::pos(2).negated(), Literal::neg(2));
    }

    #[test]
    fn out_of_range_variable_rejected() {
        assert!(matches!(
            CnfFormula::from_signed(2, &[[1, 2, 3]]),
            Err(ReductionError::VarOutOfRange { var: 2, num_vars: 2 })
        ));
    }
}
