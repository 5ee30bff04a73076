//! Ground-truth discrepancy by subset enumeration.
//!
//! `W(I) = min_S ‖A_S − ½I‖` over all subsets `S`. The exhaustive walk
//! visits subsets in Gray-code order and keeps `A_S` current with one
//! rank-one update per step. A branch-and-bound variant covers instances
//! somewhat past the exhaustive limit.
//!
//! Reported values are always recomputed from scratch for the reported
//! subset, and ties are broken by the smallest subset bitmask, so results do
//! not depend on how the index space is split across workers.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::instance::Instance;
use crate::linalg::{self, LinalgError, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{m} vectors exceed the enumeration limit of {limit}")]
    TooLarge { m: usize, limit: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub const DEFAULT_M_LIMIT: usize = 24;
/// Hard ceiling for both modes: subsets are tracked as `u64` masks.
pub const MAX_M: usize = 63;

/// Incremental values within this of the incumbent are re-evaluated from scratch.
const CANDIDATE_SLACK: f64 = 1e-9;
/// Branch-and-bound prunes once the bound is within this of the incumbent.
const PRUNE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    #[serde(rename = "w")]
    pub w_value: f64,
    #[serde(rename = "subset")]
    pub argmin_subset: Vec<usize>,
    #[serde(rename = "examined")]
    pub subsets_examined: u64,
}

fn mask_to_subset(mask: u64, m: usize) -> Vec<usize> {
    (0..m).filter(|&i| mask >> i & 1 == 1).collect()
}

fn fresh_value(inst: &Instance, mask: u64) -> Result<f64, LinalgError> {
    let s = mask_to_subset(mask, inst.len());
    linalg::spectral_distance_half(&inst.outer_sum(&s))
}

/// Lower bound on `‖A − ½I‖` from the diagonal (each entry is a Rayleigh quotient).
#[inline]
fn diag_bound(a: &SymMatrix) -> f64 {
    (0..a.dim())
        .map(|j| (a.get(j, j) - 0.5).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    mask: u64,
}

impl Best {
    const NONE: Best = Best {
        value: f64::INFINITY,
        mask: u64::MAX,
    };

    fn better(self, other: Best) -> Best {
        match self.value.total_cmp(&other.value) {
            std::cmp::Ordering::Less => self,
            std::cmp::Ordering::Greater => other,
            std::cmp::Ordering::Equal => {
                if self.mask <= other.mask {
                    self
                } else {
                    other
                }
            }
        }
    }
}

/// Walks all subsets whose top bits equal `prefix`, in Gray-code order over
/// the low `low_bits` indices.
fn walk_block(inst: &Instance, low_bits: usize, prefix: u64) -> Result<Best, LinalgError> {
    let m = inst.len();
    let base = prefix << low_bits;
    let mut a = inst.outer_sum(&mask_to_subset(base, m));
    let mut best = Best::NONE;
    let mut mask = base;

    let consider = |a: &SymMatrix, mask: u64, best: &mut Best| -> Result<(), LinalgError> {
        if diag_bound(a) > best.value + CANDIDATE_SLACK {
            return Ok(());
        }
        let approx = linalg::spectral_distance_half(a)?;
        if approx > best.value + CANDIDATE_SLACK {
            return Ok(());
        }
        let exact = fresh_value(inst, mask)?;
        *best = best.better(Best { value: exact, mask });
        Ok(())
    };

    consider(&a, mask, &mut best)?;
    for k in 1u64..(1u64 << low_bits) {
        let bit = k.trailing_zeros() as usize;
        mask ^= 1 << bit;
        let sign = if mask >> bit & 1 == 1 { 1.0 } else { -1.0 };
        a.add_outer(sign, inst.vector(bit));
        consider(&a, mask, &mut best)?;
    }
    Ok(best)
}

fn finish(inst: &Instance, best: Best, examined: u64) -> OracleResult {
    OracleResult {
        w_value: best.value,
        argmin_subset: mask_to_subset(best.mask, inst.len()),
        subsets_examined: examined,
    }
}

/// Exhaustive `W(I)` over all `2^m` subsets.
pub fn brute_force_w(inst: &Instance, m_limit: usize) -> Result<OracleResult, OracleError> {
    brute_force_w_threads(inst, m_limit, None)
}

/// Exhaustive `W(I)`, splitting the index space into fixed blocks that run
/// on up to `threads` workers.
pub fn brute_force_w_threads(
    inst: &Instance,
    m_limit: usize,
    threads: Option<usize>,
) -> Result<OracleResult, OracleError> {
    let m = inst.len();
    let limit = m_limit.min(MAX_M);
    if m > limit {
        return Err(OracleError::TooLarge { m, limit });
    }
    let high_bits = m.min(6);
    let low_bits = m - high_bits;
    let run = || -> Result<Best, LinalgError> {
        (0..1u64 << high_bits)
            .into_par_iter()
            .map(|prefix| walk_block(inst, low_bits, prefix))
            .try_reduce(|| Best::NONE, |a, b| Ok(a.better(b)))
    };
    let best = match threads {
        Some(t) if t > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .expect("thread pool")
            .install(run)?,
        _ => (0..1u64 << high_bits)
            .map(|prefix| walk_block(inst, low_bits, prefix))
            .try_fold(Best::NONE, |acc, b| b.map(|b| acc.better(b)))?,
    };
    Ok(finish(inst, best, 1u64 << m))
}

/// Whether some subset meets `‖A_S − ½I‖ ≤ c√α`, with the argmin as witness.
pub fn eq1_feasible(inst: &Instance, c: f64, m_limit: usize) -> Result<(bool, Option<Vec<usize>>), OracleError> {
    let r = brute_force_w(inst, m_limit)?;
    Ok(decide(inst, c, r))
}

fn decide(inst: &Instance, c: f64, r: OracleResult) -> (bool, Option<Vec<usize>>) {
    let feasible = r.w_value <= c * inst.alpha().sqrt();
    (feasible, feasible.then_some(r.argmin_subset))
}

struct Search<'a> {
    inst: &'a Instance,
    /// `suffix[k] = Σ_{j ≥ k} v_j v_jᵀ`.
    suffix: Vec<SymMatrix>,
    best: Best,
    /// Stop at the first leaf at or below this value.
    target: Option<f64>,
    nodes: u64,
    done: bool,
}

impl Search<'_> {
    fn visit(&mut self, k: usize, mask: u64, included: &SymMatrix) -> Result<(), LinalgError> {
        if self.done {
            return Ok(());
        }
        self.nodes += 1;
        let m = self.inst.len();
        if k == m {
            let value = fresh_value(self.inst, mask)?;
            self.best = self.best.better(Best { value, mask });
            if self.target.is_some_and(|t| value <= t) {
                self.done = true;
            }
            return Ok(());
        }

        let cutoff = match self.target {
            Some(t) => t.min(self.best.value),
            None => self.best.value,
        };
        let (_, inc_max) = linalg::eig_extremes(included)?;
        let reach = included.add_scaled(1.0, &self.suffix[k])?;
        let (reach_min, _) = linalg::eig_extremes(&reach)?;
        let bound = (inc_max - 0.5).max(0.5 - reach_min).max(0.0);
        let prune = match self.target {
            Some(_) => bound > cutoff,
            None => bound >= cutoff - PRUNE_SLACK,
        };
        if prune {
            return Ok(());
        }

        let mut with = included.clone();
        with.add_outer(1.0, self.inst.vector(k));
        self.visit(k + 1, mask | 1 << k, &with)?;
        self.visit(k + 1, mask, included)
    }
}

fn run_search(inst: &Instance, target: Option<f64>) -> Result<(Best, u64), OracleError> {
    let m = inst.len();
    if m > MAX_M {
        return Err(OracleError::TooLarge { m, limit: MAX_M });
    }
    let mut suffix = vec![SymMatrix::zeros(inst.dim()); m + 1];
    for k in (0..m).rev() {
        let mut s = suffix[k + 1].clone();
        s.add_outer(1.0, inst.vector(k));
        suffix[k] = s;
    }
    let mut search = Search {
        inst,
        suffix,
        best: Best::NONE,
        target,
        nodes: 0,
        done: false,
    };
    search.visit(0, 0, &SymMatrix::zeros(inst.dim()))?;
    Ok((search.best, search.nodes))
}

/// `W(I)` by depth-first branch and bound.
///
/// A partial assignment with included sum `A` and undecided sum `R` is cut
/// when `max(λ_max(A) − ½, ½ − λ_min(A + R))` cannot beat the incumbent:
/// every completion has `A ⪯ A_S ⪯ A + R`. The value matches the
/// exhaustive walk to within 1e-12; `subsets_examined` counts search nodes.
pub fn branch_and_bound_w(inst: &Instance) -> Result<OracleResult, OracleError> {
    let (best, nodes) = run_search(inst, None)?;
    Ok(finish(inst, best, nodes))
}

/// Pruned feasibility test for `‖A_S − ½I‖ ≤ c√α`; stops at the first witness.
pub fn eq1_feasible_pruned(inst: &Instance, c: f64) -> Result<(bool, Option<Vec<usize>>), OracleError> {
    let threshold = c * inst.alpha().sqrt();
    let (best, _) = run_search(inst, Some(threshold))?;
    if best.value <= threshold {
        Ok((true, Some(mask_to_subset(best.mask, inst.len()))))
    } else {
        Ok((false, None))
    }
}
