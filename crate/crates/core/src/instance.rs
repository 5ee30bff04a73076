//! Isotropic vector families, the two subset conditions, and seeded generators.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, LinalgError, SymMatrix, Tolerances};
use crate::rng::SplitMix64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no vectors or zero dimension")]
    EmptyInstance,
    #[error("vector {index} has length {len}, expected {dim}")]
    RaggedVector { index: usize, len: usize, dim: usize },
    #[error("vector {index} has a non-finite entry")]
    NonFinite { index: usize },
    #[error("instance is not isotropic: ‖Σ v vᵀ − I‖ = {deviation:e} exceeds {tolerance:e}")]
    NotIsotropic { deviation: f64, tolerance: f64 },
    #[error("bad subset: {0}")]
    BadSubset(String),
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A family of `m` real `d`-vectors with `alpha = max ‖v_i‖²`.
///
/// Vectors are stored flat; `alpha` is always recomputed from the entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    dim: usize,
    data: Vec<f64>,
    alpha: f64,
    isotropy_deviation: Option<f64>,
}

impl Instance {
    /// Builds an unvalidated instance.
    pub fn new(dim: usize, vectors: Vec<Vec<f64>>) -> Result<Self, InstanceError> {
        if dim == 0 || vectors.is_empty() {
            return Err(InstanceError::EmptyInstance);
        }
        let mut data = Vec::with_capacity(dim * vectors.len());
        for (index, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(InstanceError::RaggedVector {
                    index,
                    len: v.len(),
                    dim,
                });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(InstanceError::NonFinite { index });
            }
            data.extend_from_slice(v);
        }
        let alpha = data
            .chunks_exact(dim)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self {
            dim,
            data,
            alpha,
            isotropy_deviation: None,
        })
    }

    /// Checks isotropy and marks the instance validated.
    pub fn validate(mut self, iso_tol: f64) -> Result<Self, InstanceError> {
        let deviation = self.measure_isotropy()?;
        if !(deviation <= iso_tol) {
            return Err(InstanceError::NotIsotropic {
                deviation,
                tolerance: iso_tol,
            });
        }
        self.isotropy_deviation = Some(deviation);
        Ok(self)
    }

    /// `‖Σ v vᵀ − I‖` in spectral norm.
    pub fn measure_isotropy(&self) -> Result<f64, InstanceError> {
        let mut total = self.outer_sum_all();
        total.add_diag(-1.0);
        let (lo, hi) = linalg::eig_extremes(&total)?;
        Ok(lo.abs().max(hi.abs()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_validated(&self) -> bool {
        self.isotropy_deviation.is_some()
    }

    pub fn isotropy_deviation(&self) -> Option<f64> {
        self.isotropy_deviation
    }

    #[inline]
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vectors().map(<[f64]>::to_vec).collect()
    }

    /// `A_S = Σ_{i∈S} v_i v_iᵀ`, summed in the order given.
    pub fn outer_sum(&self, subset: &[usize]) -> SymMatrix {
        SymMatrix::weighted_outer_sum(self.dim, subset.iter().map(|&i| (1.0, self.vector(i))))
    }

    pub fn outer_sum_all(&self) -> SymMatrix {
        SymMatrix::weighted_outer_sum(self.dim, self.vectors().map(|v| (1.0, v)))
    }

    /// Sorts, deduplicates and range-checks a subset.
    pub fn normalize_subset(&self, subset: &[usize]) -> Result<Vec<usize>, InstanceError> {
        let mut s = subset.to_vec();
        s.sort_unstable();
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(InstanceError::BadSubset("duplicate index".into()));
        }
        if let Some(&last) = s.last() {
            if last >= self.len() {
                return Err(InstanceError::BadSubset(format!(
                    "index {last} out of range for {} vectors",
                    self.len()
                )));
            }
        }
        Ok(s)
    }

    /// Applies `x ↦ q x` to every vector, where `q` is given row-major.
    pub fn transformed(&self, q: &[Vec<f64>]) -> Result<Self, InstanceError> {
        let rows = self
            .vectors()
            .map(|v| {
                q.iter()
                    .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
                    .collect()
            })
            .collect();
        Instance::new(q.len(), rows)
    }
}

/// Eigenvalue extremes of `A_S` and the two band conditions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subset: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub satisfies_eq1: bool,
    pub satisfies_eq2: bool,
    pub c: f64,
    pub epsilon: f64,
}

impl SubsetReport {
    /// Builds the report from eigenvalue extremes. Comparisons have no slack.
    pub fn from_extremes(
        subset: Vec<usize>,
        lambda_min: f64,
        lambda_max: f64,
        alpha: f64,
        c: f64,
        epsilon: f64,
    ) -> Self {
        let radius = c * alpha.sqrt();
        let lo = 0.5 - radius;
        let hi = 0.5 + radius;
        Self {
            subset,
            lambda_min,
            lambda_max,
            satisfies_eq1: lo <= lambda_min && lambda_max <= hi,
            satisfies_eq2: (1.0 - epsilon) * lo <= lambda_min && lambda_max <= (1.0 + epsilon) * hi,
            c,
            epsilon,
        }
    }

    /// `‖A_S − ½I‖` from the stored extremes.
    pub fn distance_half(&self) -> f64 {
        linalg::distance_half_from_extremes(self.lambda_min, self.lambda_max)
    }
}

/// Evaluates both band conditions for the subset `subset` of `inst`.
pub fn check_subset(
    inst: &Instance,
    subset: &[usize],
    c: f64,
    epsilon: f64,
) -> Result<SubsetReport, InstanceError> {
    let s = inst.normalize_subset(subset)?;
    let a = inst.outer_sum(&s);
    let (lo, hi) = linalg::eig_extremes(&a)?;
    Ok(SubsetReport::from_extremes(s, lo, hi, inst.alpha, c, epsilon))
}

fn gaussian_rows(rng: &mut SplitMix64, d: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|_| (0..d).map(|_| rng.gaussian()).collect())
        .collect()
}

/// Whitens `rows` so their outer products sum to `target · I`.
fn whiten(d: usize, rows: Vec<Vec<f64>>, target: f64) -> Result<Vec<Vec<f64>>, InstanceError> {
    let second = SymMatrix::weighted_outer_sum(d, rows.iter().map(|v| (1.0, v.as_slice())));
    let w = match linalg::inv_sqrt(&second) {
        Ok(w) => w.scaled(target.sqrt()),
        Err(LinalgError::NotPositiveDefinite { lambda_min }) => {
            return Err(InstanceError::DegenerateSample(format!(
                "second-moment matrix is singular (lambda_min = {lambda_min:e})"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(rows.iter().map(|v| w.mul_vec(v)).collect())
}

/// `m` whitened Gaussian vectors in dimension `d`.
pub fn gen_random(d: usize, m: usize, seed: u64) -> Result<Instance, InstanceError> {
    if d == 0 || m == 0 {
        return Err(InstanceError::EmptyInstance);
    }
    if m < d {
        return Err(InstanceError::DegenerateSample(format!(
            "{m} vectors cannot span dimension {d}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let rows = whiten(d, gaussian_rows(&mut rng, d, m), 1.0)?;
    Instance::new(d, rows)?.validate(1e-9)
}

/// An isotropic instance with a planted exact half.
///
/// Draws `k` Gaussian vectors, whitens them to sum to `½I`, and emits each
/// twice in adjacent positions, so `m = 2k`. The planted subset is the even
/// indices `{0, 2, …, 2k − 2}`; its complement is the odd indices.
pub fn gen_planted(d: usize, k: usize, seed: u64) -> Result<(Instance, Vec<usize>), InstanceError> {
    if d == 0 || k == 0 {
        return Err(InstanceError::EmptyInstance);
    }
    if k < d {
        return Err(InstanceError::DegenerateSample(format!(
            "{k} vectors cannot span dimension {d}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let half = whiten(d, gaussian_rows(&mut rng, d, k), 0.5)?;
    let rows = half.iter().flat_map(|v| [v.clone(), v.clone()]).collect();
    let inst = Instance::new(d, rows)?.validate(1e-9)?;
    Ok((inst, (0..k).map(|i| 2 * i).collect()))
}

/// Default isotropy gate.
pub const DEFAULT_ISO_TOL: f64 = Tolerances::DEFAULT.iso_tol;
