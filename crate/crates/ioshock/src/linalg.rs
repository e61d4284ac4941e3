//! Dense numerical kernels for small systems: LU factorization with partial
//! pivoting, power iteration for dominant eigenpairs, and the Leontief
//! (total-requirements) system built from technical coefficients.
//!
//! Everything here is sized for sectoral tables (tens of rows), so direct
//! methods are used throughout; no sparsity, no Krylov iterations.

use thiserror::Error;

/// Refuse to invert `I - theta` when the spectral-radius estimate of `theta`
/// is at or above this threshold.
pub const SPECTRAL_RADIUS_LIMIT: f64 = 0.999;

/// Default convergence tolerance for [`power_iteration`].
pub const POWER_ITERATION_TOL: f64 = 1e-12;

/// Default iteration cap for [`power_iteration`].
pub const POWER_ITERATION_MAX_ITERS: usize = 10_000;

/// Max-norm bound required of `L(I - theta) - I` after inversion.
pub const LEONTIEF_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is singular or near-singular{}", match spectral_radius {
        Some(r) => format!(" (spectral-radius estimate {r})"),
        None => String::new(),
    })]
    Singular { spectral_radius: Option<f64> },
    #[error("solution residual {residual:e} exceeds tolerance {tol:e}; system is too ill-conditioned")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("power iteration did not converge within {max_iters} iterations (last estimate {estimate})")]
    NonConvergence { max_iters: usize, estimate: f64 },
    #[error("positive flow {value} into zero-production sector {col} (row {row})")]
    FlowIntoZeroProduction { row: usize, col: usize, value: f64 },
}

/// Row-major dense matrix of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row slices, rejecting NaN/infinite entries.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::Dimension(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
                entries.push(v);
            }
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(value.is_finite());
        self.entries[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.row(row).iter().sum()
    }

    pub fn col_sum(&self, col: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, col)).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// Largest absolute entry; 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    // pivot[k] = row swapped into position k at step k
    pivots: Vec<usize>,
}

pub fn lu_factor(a: &DenseMatrix) -> Result<LuFactors, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::Dimension(format!(
            "LU factorization needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut pivots = vec![0usize; n];
    let scale = a.max_abs();
    let pivot_floor = scale * (n as f64) * f64::EPSILON;

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_val = lu.get(k, k).abs();
        for i in (k + 1)..n {
            let v = lu.get(i, k).abs();
            if v > pivot_val {
                pivot_val = v;
                pivot_row = i;
            }
        }
        if pivot_val <= pivot_floor {
            return Err(LinalgError::Singular {
                spectral_radius: None,
            });
        }
        pivots[k] = pivot_row;
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(pivot_row, j));
                lu.set(pivot_row, j, tmp);
            }
        }
        let pivot = lu.get(k, k);
        for i in (k + 1)..n {
            let factor = lu.get(i, k) / pivot;
            lu.set(i, k, factor);
            if factor != 0.0 {
                for j in (k + 1)..n {
                    let v = lu.get(i, j) - factor * lu.get(k, j);
                    lu.set(i, j, v);
                }
            }
        }
    }
    Ok(LuFactors { lu, pivots })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    /// Solves `A y = b` using the stored factors.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let mut y = b.to_vec();
        for k in 0..n {
            y.swap(k, self.pivots[k]);
            let yk = y[k];
            if yk != 0.0 {
                for i in (k + 1)..n {
                    y[i] -= self.lu.get(i, k) * yk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut sum = y[k];
            for j in (k + 1)..n {
                sum -= self.lu.get(k, j) * y[j];
            }
            y[k] = sum / self.lu.get(k, k);
        }
        y
    }
}

/// Solves `A y = b` by LU with partial pivoting and verifies the residual
/// `max |A y - b| <= 1e-9 (1 + max |b|)`.
pub fn solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    if a.rows() != b.len() {
        return Err(LinalgError::Dimension(format!(
            "matrix is {}x{} but rhs has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let factors = lu_factor(a)?;
    let y = factors.solve(b);
    let ay = a.matvec(&y);
    let residual = ay
        .iter()
        .zip(b)
        .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    let bound = 1e-9 * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    if residual > bound {
        return Err(LinalgError::ResidualTooLarge {
            residual,
            tol: bound,
        });
    }
    Ok(y)
}

/// Dominant eigenpair of a nonnegative square matrix by power iteration.
///
/// Starts from the uniform positive vector, estimates the eigenvalue as the
/// norm growth per step, and stops once successive estimates differ by less
/// than `tol`. Returns the nonnegative unit eigenvector alongside.
pub fn power_iteration(
    m: &DenseMatrix,
    tol: f64,
    max_iters: usize,
) -> Result<(f64, Vec<f64>), LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::Dimension(format!(
            "power iteration needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut last = f64::NAN;
    for _ in 0..max_iters {
        let w = m.matvec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            // v lies in (or has decayed into) the kernel; dominant value is 0
            return Ok((0.0, v));
        }
        for (slot, x) in v.iter_mut().zip(&w) {
            *slot = x / norm;
        }
        if (norm - last).abs() < tol {
            return Ok((norm, v));
        }
        last = norm;
    }
    Err(LinalgError::NonConvergence {
        max_iters,
        estimate: last,
    })
}

/// Spectral-radius estimate with the module defaults. Non-convergence falls
/// back to the last estimate rather than failing: the estimate is only used
/// to refuse clearly non-invertible systems.
pub fn spectral_radius_estimate(m: &DenseMatrix) -> Result<f64, LinalgError> {
    match power_iteration(m, POWER_ITERATION_TOL, POWER_ITERATION_MAX_ITERS) {
        Ok((value, _)) => Ok(value),
        Err(LinalgError::NonConvergence { estimate, .. }) if estimate.is_finite() => Ok(estimate),
        Err(e) => Err(e),
    }
}

/// Technical coefficients `theta[i][j] = z[i][j] / x[j]`.
///
/// Columns with `x[j] = 0` are all-zero; a positive flow into such a column
/// is an inconsistent table and is rejected.
pub fn technical_coefficients(z: &DenseMatrix, x: &[f64]) -> Result<DenseMatrix, LinalgError> {
    if !z.is_square() || z.cols() != x.len() {
        return Err(LinalgError::Dimension(format!(
            "flow matrix is {}x{} but production has length {}",
            z.rows(),
            z.cols(),
            x.len()
        )));
    }
    let n = z.rows();
    let mut theta = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = z.get(i, j);
            if x[j] > 0.0 {
                theta.set(i, j, v / x[j]);
            } else if v > 0.0 {
                return Err(LinalgError::FlowIntoZeroProduction {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(theta)
}

/// Total-requirements matrix `L = (I - theta)^{-1}` by direct factorization.
///
/// Refuses when the spectral-radius estimate of `theta` reaches
/// [`SPECTRAL_RADIUS_LIMIT`], and verifies `max |L(I - theta) - I| <= 1e-9`.
pub fn leontief_inverse(theta: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    let radius = spectral_radius_estimate(theta)?;
    if radius >= SPECTRAL_RADIUS_LIMIT {
        return Err(LinalgError::Singular {
            spectral_radius: Some(radius),
        });
    }
    let n = theta.rows();
    let i_minus = identity_minus(theta);
    let factors = lu_factor(&i_minus).map_err(|e| match e {
        LinalgError::Singular { .. } => LinalgError::Singular {
            spectral_radius: Some(radius),
        },
        other => other,
    })?;
    let mut inv = DenseMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let col = factors.solve(&unit);
        unit[j] = 0.0;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    let residual = inv.matmul(&i_minus).max_abs_diff(&DenseMatrix::identity(n));
    if residual > LEONTIEF_RESIDUAL_TOL {
        return Err(LinalgError::ResidualTooLarge {
            residual,
            tol: LEONTIEF_RESIDUAL_TOL,
        });
    }
    Ok(inv)
}

pub(crate) fn identity_minus(theta: &DenseMatrix) -> DenseMatrix {
    let n = theta.rows();
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = if i == j { 1.0 } else { 0.0 };
            m.set(i, j, v - theta.get(i, j));
        }
    }
    m
}

/// Technical coefficients plus the total-requirements matrix for one economy.
#[derive(Debug, Clone)]
pub struct LeontiefSystem {
    theta: DenseMatrix,
    leontief: DenseMatrix,
    spectral_radius_estimate: f64,
}

impl LeontiefSystem {
    /// Builds the system from a flow matrix and its production vector.
    pub fn new(z: &DenseMatrix, x: &[f64]) -> Result<Self, LinalgError> {
        let theta = technical_coefficients(z, x)?;
        let spectral_radius_estimate = spectral_radius_estimate(&theta)?;
        if spectral_radius_estimate >= SPECTRAL_RADIUS_LIMIT {
            return Err(LinalgError::Singular {
                spectral_radius: Some(spectral_radius_estimate),
            });
        }
        let leontief = leontief_inverse(&theta)?;
        Ok(Self {
            theta,
            leontief,
            spectral_radius_estimate,
        })
    }

    pub fn from_theta(theta: DenseMatrix) -> Result<Self, LinalgError> {
        let spectral_radius_estimate = spectral_radius_estimate(&theta)?;
        let leontief = leontief_inverse(&theta)?;
        Ok(Self {
            theta,
            leontief,
            spectral_radius_estimate,
        })
    }

    pub fn theta(&self) -> &DenseMatrix {
        &self.theta
    }

    pub fn leontief(&self) -> &DenseMatrix {
        &self.leontief
    }

    pub fn spectral_radius_estimate(&self) -> f64 {
        self.spectral_radius_estimate
    }

    pub fn sector_count(&self) -> usize {
        self.theta.rows()
    }

    /// Production implied by a final-demand vector: `x = L d`.
    pub fn production_for_demand(&self, demand: &[f64]) -> Vec<f64> {
        self.leontief.matvec(demand)
    }
}
