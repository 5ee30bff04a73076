//! Subset search for isotropic vector discrepancy.
//!
//! Given vectors `v_1..v_m` in `R^d` with `Σ v_i v_iᵀ = I` and
//! `max ‖v_i‖² = α`, find `S` with `A_S = Σ_{i∈S} v_i v_iᵀ` spectrally close
//! to `½I`. The crate provides a level-set search driven by an online
//! spectral sparsifier, an exhaustive oracle for small instances, and the
//! NAE-3SAT reduction that shows the exact problem is hard.

pub mod instance;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod reduction;
pub mod rng;
pub mod solver;
pub mod sparsifier;

pub use instance::{check_subset, gen_planted, gen_random, Instance, InstanceError, SubsetReport};
pub use linalg::{LinalgError, SymMatrix, Tolerances};
pub use oracle::{brute_force_w, OracleError, OracleResult};
pub use reduction::{CnfFormula, Literal, ReductionError, ReductionLayout};
pub use rng::SplitMix64;
pub use solver::{solve, solve_with, SolveOptions, SolveOutcome, SolveStatus, SolverError, SolverParams};
pub use sparsifier::{SparsifierError, SparsifierState};
