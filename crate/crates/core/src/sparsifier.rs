//! Online row-sampling spectral sparsifier.
//!
//! Vectors arrive one at a time. Each is kept with probability
//! `p = min(b (1 + μ) vᵀ (B + (δ/μ) I)^{-1} v, 1)` where `b = 8 ln(d) / μ²`,
//! and a kept vector is added to `B` with weight `1/p`. The uniform draw is
//! supplied by the caller so that a stream is fully replayable.

use thiserror::Error;

use crate::linalg::{self, LinalgError, SymMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifierError {
    #[error("bad sparsifier parameters: {0}")]
    BadParams(String),
    #[error("dimension 1 gives b = 8 ln(1)/μ² = 0; sampling needs d ≥ 2")]
    DegenerateDimension,
    #[error("vector has a non-finite entry or wrong length")]
    InvalidVector,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One accepted sample: the vector index and its weight `1/p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub index: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifierState {
    matrix: SymMatrix,
    ledger: Vec<LedgerEntry>,
    mu: f64,
    delta: f64,
    /// `δ/μ`, fixed at construction.
    regularizer: f64,
    oversampling: f64,
}

/// The oversampling factor `b = 8 ln(d) / μ²` (natural log).
pub fn oversampling_factor(d: usize, mu: f64) -> f64 {
    8.0 * (d as f64).ln() / (mu * mu)
}

impl SparsifierState {
    /// Empty state with `B = 0`.
    pub fn new(d: usize, mu: f64, delta: f64) -> Result<Self, SparsifierError> {
        Self::build(d, mu, delta, delta / mu)
    }

    /// Empty state parameterized by the regularizer `λ = δ/μ` directly, so
    /// that `δ = μλ` and the shift used in sampling is exactly `λ`.
    pub fn with_regularizer(d: usize, mu: f64, lambda: f64) -> Result<Self, SparsifierError> {
        Self::build(d, mu, mu * lambda, lambda)
    }

    fn build(d: usize, mu: f64, delta: f64, regularizer: f64) -> Result<Self, SparsifierError> {
        if d == 0 {
            return Err(SparsifierError::BadParams("dimension must be positive".into()));
        }
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(SparsifierError::BadParams(format!("mu = {mu} not in (0, 1]")));
        }
        if !(delta > 0.0 && delta.is_finite() && regularizer > 0.0) {
            return Err(SparsifierError::BadParams(format!("delta = {delta} must be positive")));
        }
        Ok(Self {
            matrix: SymMatrix::zeros(d),
            ledger: Vec::new(),
            mu,
            delta,
            regularizer,
            oversampling: oversampling_factor(d, mu),
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn sample_count(&self) -> usize {
        self.ledger.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn regularizer(&self) -> f64 {
        self.regularizer
    }

    pub fn oversampling(&self) -> f64 {
        self.oversampling
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Sampling probability for `v` against the current `B`.
    pub fn sample_probability(&self, v: &[f64]) -> Result<f64, SparsifierError> {
        if v.len() != self.dim() || !v.iter().all(|x| x.is_finite()) {
            return Err(SparsifierError::InvalidVector);
        }
        if self.dim() == 1 {
            return Err(SparsifierError::DegenerateDimension);
        }
        if v.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let w = linalg::spd_solve(&self.matrix, self.regularizer, v)?;
        let leverage: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        Ok((self.oversampling * (1.0 + self.mu) * leverage).min(1.0))
    }

    /// Feeds vector `v` (with index `index`) using the uniform draw `u`.
    ///
    /// Returns the successor state and whether the vector was sampled. The
    /// vector is kept iff `p > 0` and `u ≤ p`.
    pub fn observe(&self, index: usize, v: &[f64], u: f64) -> Result<(Self, bool), SparsifierError> {
        let p = self.sample_probability(v)?;
        if p > 0.0 && u <= p {
            let mut next = self.clone();
            let weight = 1.0 / p;
            next.matrix.add_outer(weight, v);
            next.ledger.push(LedgerEntry { index, weight });
            Ok((next, true))
        } else {
            Ok((self.clone(), false))
        }
    }

    /// Rebuilds `B` from the ledger.
    pub fn recompute_matrix<'a, F>(&self, vector: F) -> SymMatrix
    where
        F: Fn(usize) -> &'a [f64],
    {
        SymMatrix::weighted_outer_sum(
            self.dim(),
            self.ledger.iter().map(|e| (e.weight, vector(e.index))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::gen_random;
    use crate::rng::SplitMix64;

    #[test]
    fn new_state_examples() {
        let s = SparsifierState::new(3, 0.5, 0.1).unwrap();
        assert_eq!(s.matrix(), &SymMatrix::zeros(3));
        assert_eq!(s.sample_count(), 0);
        assert!(matches!(
            SparsifierState::new(3, 0.0, 0.1),
            Err(SparsifierError::BadParams(_))
        ));
        assert!(matches!(
            SparsifierState::new(3, 0.5, 0.0),
            Err(SparsifierError::BadParams(_))
        ));
        let s = SparsifierState::new(1, 1.0, 1.0).unwrap();
        assert_eq!(s.matrix(), &SymMatrix::zeros(1));
    }

    #[test]
    fn probability_on_empty_state_saturates() {
        let s = SparsifierState::new(2, 1.0, 1.0).unwrap();
        assert!((s.oversampling() - 8.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(s.sample_probability(&[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(s.sample_probability(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn probability_against_heavy_state() {
        let mut s = SparsifierState::new(2, 1.0, 1.0).unwrap();
        s.matrix = SymMatrix::scaled_identity(2, 100.0);
        let p = s.sample_probability(&[0.01, 0.0]).unwrap();
        let expected = 8.0 * 2f64.ln() * 2.0 * (1e-4 / 101.0);
        assert!((p - expected).abs() < 1e-18);
        assert!((p - 1.098e-5).abs() < 1e-8);
    }

    #[test]
    fn errors() {
        let s = SparsifierState::new(1, 1.0, 1.0).unwrap();
        assert_eq!(s.sample_probability(&[1.0]), Err(SparsifierError::DegenerateDimension));
        let s = SparsifierState::new(2, 1.0, 1.0).unwrap();
        assert_eq!(
            s.sample_probability(&[f64::NAN, 0.0]),
            Err(SparsifierError::InvalidVector)
        );
    }

    #[test]
    fn forced_and_null_observations() {
        let s = SparsifierState::new(2, 0.5, 0.1).unwrap();
        let (next, sampled) = s.observe(4, &[0.3, 0.4], 1.0).unwrap();
        assert!(sampled);
        assert_eq!(next.ledger(), &[LedgerEntry { index: 4, weight: 1.0 }]);

        let (same, sampled) = next.observe(5, &[0.0, 0.0], 0.0).unwrap();
        assert!(!sampled);
        assert_eq!(same, next);
    }

    #[test]
    fn replayed_stream_matches_ledger() {
        let inst = gen_random(10, 2000, 9).unwrap();
        let mut rng = SplitMix64::new(1);
        let mut s = SparsifierState::new(10, 1.0, 0.5).unwrap();
        let mut count = 0;
        for (i, v) in inst.vectors().enumerate().take(200) {
            let before = s.sample_count();
            let (next, _) = s.observe(i, v, rng.next_f64()).unwrap();
            assert!(next.sample_count() >= before);
            s = next;
            count = s.sample_count();
            let (lo, _) = linalg::eig_extremes(s.matrix()).unwrap();
            assert!(lo >= -1e-12);
        }
        assert!(count > 0 && count < 200, "count {count}");
        assert!(s.ledger().iter().all(|e| e.weight >= 1.0));
        let recomputed = s.recompute_matrix(|i| inst.vector(i));
        let diff = recomputed.add_scaled(-1.0, s.matrix()).unwrap();
        assert!(diff.frobenius_norm() <= 1e-9);
    }

    #[test]
    fn observe_is_deterministic() {
        let inst = gen_random(4, 30, 2).unwrap();
        let run = || {
            let mut s = SparsifierState::new(4, 1.0, 0.5).unwrap();
            let mut rng = SplitMix64::new(8);
            for (i, v) in inst.vectors().enumerate() {
                s = s.observe(i, v, rng.next_f64()).unwrap().0;
            }
            s
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn regularizer_constructor_keeps_lambda_exact() {
        let lam = 1.0 / (8.0 * 2f64.sqrt());
        let s = SparsifierState::with_regularizer(5, 0.3 / 6.0, lam).unwrap();
        assert_eq!(s.regularizer(), lam);
        assert_eq!(s.delta(), (0.3 / 6.0) * lam);
    }
}
