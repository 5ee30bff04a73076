//! Dense symmetric matrix kernels for small dimensions.
//!
//! Everything here is sized for `d` up to a few hundred: cyclic Jacobi for
//! eigenvalues, Cholesky for shifted SPD solves, and the PSD-order checks
//! used by the sparsifier and the discrepancy oracle.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("linear system is numerically singular (pivot {pivot:e} at row {row})")]
    SingularSystem { row: usize, pivot: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
}

/// Numerical thresholds shared by the kernels in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Jacobi stops once the off-diagonal Frobenius norm is below this times `‖M‖_F`.
    pub jacobi_rel_tol: f64,
    pub jacobi_max_sweeps: usize,
    /// Cholesky pivots at or below this times the largest diagonal entry count as zero.
    pub cholesky_rel_pivot: f64,
    /// Smallest eigenvalue accepted by [`inv_sqrt`].
    pub pd_floor: f64,
    /// Slack allowed on `lambda_min ≥ 0` in the PSD-order checks.
    pub psd_slack: f64,
    /// Default isotropy gate for instances.
    pub iso_tol: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        jacobi_rel_tol: 1e-12,
        jacobi_max_sweeps: 100,
        cholesky_rel_pivot: 1e-14,
        pd_floor: 1e-12,
        psd_slack: 1e-9,
        iso_tol: 1e-8,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// A dense symmetric `d × d` matrix stored row-major.
///
/// Symmetry is exact: every mutating method writes both triangles with the
/// same value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "SymMatrix dimension must be positive");
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, 1.0)
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = scale;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = x;
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged, empty, or asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        if dim == 0 {
            return Err(LinalgError::InvalidMatrix("empty matrix".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(LinalgError::InvalidMatrix(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(LinalgError::InvalidMatrix(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds `Σ w_k · v_k v_kᵀ`.
    pub fn weighted_outer_sum<'a, I>(dim: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (f64, &'a [f64])>,
    {
        let mut m = Self::zeros(dim);
        for (w, v) in terms {
            m.add_outer(w, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Rank-one update `self += weight · v vᵀ`.
    pub fn add_outer(&mut self, weight: f64, v: &[f64]) {
        let d = self.dim;
        assert_eq!(v.len(), d, "vector length must match matrix dimension");
        for i in 0..d {
            let wi = weight * v[i];
            if wi == 0.0 {
                continue;
            }
            for j in i..d {
                let x = self.data[i * d + j] + wi * v[j];
                self.data[i * d + j] = x;
                self.data[j * d + i] = x;
            }
        }
    }

    pub fn add_diag(&mut self, shift: f64) {
        for i in 0..self.dim {
            self.data[i * self.dim + i] += shift;
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: f64, other: &SymMatrix) -> Result<Self, LinalgError> {
        self.expect_dim(other.dim)?;
        Ok(Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Quadratic form `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Product `self · other · self`, symmetrized from the upper triangle.
    pub fn sandwich(&self, other: &SymMatrix) -> Result<Self, LinalgError> {
        self.expect_dim(other.dim)?;
        let d = self.dim;
        let mut tmp = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    tmp[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in i..d {
                let x: f64 = (0..d).map(|k| tmp[i * d + k] * self.data[k * d + j]).sum();
                out.set(i, j, x);
            }
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn expect_dim(&self, dim: usize) -> Result<(), LinalgError> {
        if self.dim != dim {
            return Err(LinalgError::DimMismatch {
                expected: self.dim,
                actual: dim,
            });
        }
        Ok(())
    }

    fn ensure_finite(&self) -> Result<(), LinalgError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LinalgError::InvalidMatrix("non-finite entry".into()))
        }
    }
}

/// Eigenvalues (ascending) and, optionally, eigenvectors as columns of a row-major `d × d` array.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

/// Cyclic Jacobi eigen-decomposition.
pub fn jacobi_eigen(m: &SymMatrix, want_vectors: bool, tol: &Tolerances) -> Result<Eigen, LinalgError> {
    m.ensure_finite()?;
    let d = m.dim;
    let mut a = m.data.clone();
    let mut v = want_vectors.then(|| {
        let mut id = vec![0.0; d * d];
        for i in 0..d {
            id[i * d + i] = 1.0;
        }
        id
    });
    let threshold = tol.jacobi_rel_tol * m.frobenius_norm();

    for _ in 0..tol.jacobi_max_sweeps {
        let off: f64 = (0..d)
            .flat_map(|i| ((i + 1)..d).map(move |j| (i, j)))
            .map(|(i, j)| 2.0 * a[i * d + j] * a[i * d + j])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[p * d + p] = app - t * apq;
                a[q * d + q] = aqq + t * apq;
                a[p * d + q] = 0.0;
                a[q * d + p] = 0.0;
                for r in 0..d {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[r * d + p];
                    let arq = a[r * d + q];
                    let nrp = arp - s * (arq + tau * arp);
                    let nrq = arq + s * (arp - tau * arq);
                    a[r * d + p] = nrp;
                    a[p * d + r] = nrp;
                    a[r * d + q] = nrq;
                    a[q * d + r] = nrq;
                }
                if let Some(v) = v.as_mut() {
                    for r in 0..d {
                        let vrp = v[r * d + p];
                        let vrq = v[r * d + q];
                        v[r * d + p] = vrp - s * (vrq + tau * vrp);
                        v[r * d + q] = vrq + s * (vrp - tau * vrq);
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].total_cmp(&a[j * d + j]));
    let values = order.iter().map(|&i| a[i * d + i]).collect();
    let vectors = v.map(|v| {
        let mut sorted = vec![0.0; d * d];
        for (col, &src) in order.iter().enumerate() {
            for r in 0..d {
                sorted[r * d + col] = v[r * d + src];
            }
        }
        sorted
    });
    Ok(Eigen { values, vectors })
}

/// Smallest and largest eigenvalue of `m`.
pub fn eig_extremes(m: &SymMatrix) -> Result<(f64, f64), LinalgError> {
    if m.dim == 1 {
        m.ensure_finite()?;
        return Ok((m.data[0], m.data[0]));
    }
    let e = jacobi_eigen(m, false, &Tolerances::DEFAULT)?;
    Ok((e.values[0], e.values[m.dim - 1]))
}

/// Solves `(m + shift·I) w = v` by Cholesky factorization.
pub fn spd_solve(m: &SymMatrix, shift: f64, v: &[f64]) -> Result<Vec<f64>, LinalgError> {
    m.ensure_finite()?;
    if v.len() != m.dim {
        return Err(LinalgError::DimMismatch {
            expected: m.dim,
            actual: v.len(),
        });
    }
    let d = m.dim;
    let tol = Tolerances::DEFAULT;
    let mut l = vec![0.0; d * d];
    let max_diag = (0..d)
        .map(|i| (m.get(i, i) + shift).abs())
        .fold(0.0_f64, f64::max);
    let floor = tol.cholesky_rel_pivot * max_diag;

    for j in 0..d {
        let mut diag = m.get(j, j) + shift;
        for k in 0..j {
            diag -= l[j * d + k] * l[j * d + k];
        }
        if !(diag > floor) {
            return Err(LinalgError::SingularSystem { row: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut x = m.get(i, j);
            for k in 0..j {
                x -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = x / ljj;
        }
    }

    let mut y = vec![0.0; d];
    for i in 0..d {
        let mut x = v[i];
        for k in 0..i {
            x -= l[i * d + k] * y[k];
        }
        y[i] = x / l[i * d + i];
    }
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let mut x = y[i];
        for k in (i + 1)..d {
            x -= l[k * d + i] * w[k];
        }
        w[i] = x / l[i * d + i];
    }
    Ok(w)
}

/// Symmetric inverse square root `M^{-1/2}`.
pub fn inv_sqrt(m: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let tol = Tolerances::DEFAULT;
    let e = jacobi_eigen(m, true, &tol)?;
    let lambda_min = e.values[0];
    if !(lambda_min > tol.pd_floor) {
        return Err(LinalgError::NotPositiveDefinite { lambda_min });
    }
    let d = m.dim;
    let vecs = e.vectors.expect("eigenvectors requested");
    let scale: Vec<f64> = e.values.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut out = SymMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let x: f64 = (0..d)
                .map(|k| vecs[i * d + k] * scale[k] * vecs[j * d + k])
                .sum();
            out.set(i, j, x);
        }
    }
    Ok(out)
}

/// Whether `(1 − mu)·a − delta·I ⪯ b ⪯ (1 + mu)·a + delta·I`, up to the PSD slack.
pub fn psd_sandwich_check(a: &SymMatrix, b: &SymMatrix, mu: f64, delta: f64) -> Result<bool, LinalgError> {
    a.expect_dim(b.dim)?;
    let slack = Tolerances::DEFAULT.psd_slack;

    let mut lower = b.add_scaled(-(1.0 - mu), a)?;
    lower.add_diag(delta);
    let (lo_min, _) = eig_extremes(&lower)?;

    let mut upper = a.scaled(1.0 + mu).add_scaled(-1.0, b)?;
    upper.add_diag(delta);
    let (up_min, _) = eig_extremes(&upper)?;

    Ok(lo_min >= -slack && up_min >= -slack)
}

/// Spectral-norm distance `‖M − ½I‖`, the worst-direction deviation of the
/// Rayleigh quotient from one half.
pub fn spectral_distance_half(m: &SymMatrix) -> Result<f64, LinalgError> {
    let (lo, hi) = eig_extremes(m)?;
    Ok(distance_half_from_extremes(lo, hi))
}

#[inline]
pub fn distance_half_from_extremes(lambda_min: f64, lambda_max: f64) -> f64 {
    (lambda_max - 0.5).max(0.5 - lambda_min)
}
