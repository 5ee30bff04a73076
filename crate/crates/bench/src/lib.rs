//! Fixtures shared by the benchmarks.

use ks_core::instance::{gen_random, Instance};
use ks_core::linalg::SymMatrix;
use ks_core::reduction::CnfFormula;

/// `(a∨b∨c), (ā∨b̄∨c), (a∨b̄∨c̄)`: NAE-satisfiable.
pub fn sat3() -> CnfFormula {
    CnfFormula::from_signed(3, &[[1, 2, 3], [-1, -2, 3], [1, -2, -3]]).expect("fixture is well formed")
}

/// `sat3` plus `(ā∨b∨c̄)`: not NAE-satisfiable.
pub fn unsat4() -> CnfFormula {
    CnfFormula::from_signed(3, &[[1, 2, 3], [-1, -2, 3], [1, -2, -3], [-1, 2, -3]])
        .expect("fixture is well formed")
}

/// Second-moment matrix of a random isotropic sample with a diagonal shift.
pub fn random_spd(d: usize, seed: u64) -> SymMatrix {
    let inst: Instance = gen_random(d, 3 * d, seed).expect("enough vectors");
    let mut m = inst.outer_sum(&(0..d).collect::<Vec<_>>());
    m.add_diag(0.1);
    m
}
