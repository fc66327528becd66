//! Dense real linear algebra at desk scale.
//!
//! Everything here is row-major and allocation-per-result; the statistical
//! code above works with dimensions in the tens, so clarity wins over BLAS.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the parameter space: a finite real vector of fixed length.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Size("parameter vector must have length >= 1".into()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameter vector"));
        }
        Ok(ParamVector(entries))
    }

    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "parameter dimension must be >= 1");
        ParamVector(vec![0.0; d])
    }

    /// Standard basis vector `e_i` in `R^d`.
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = Self::zeros(d);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &ParamVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        let sq = self.norm_sq();
        if sq.is_finite() {
            return sq.sqrt();
        }
        // rescale to avoid overflow
        let scale = self.0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        scale * self.0.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &ParamVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// `self + alpha * other`, rejecting non-finite results.
    pub fn add_scaled(&self, alpha: f64, other: &ParamVector) -> Result<ParamVector> {
        check_dim(self.dim(), other.dim())?;
        ParamVector::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        )
    }

    pub fn scaled(&self, alpha: f64) -> Result<ParamVector> {
        ParamVector::new(self.0.iter().map(|a| alpha * a).collect())
    }

    /// Rescale to unit Euclidean norm; the zero vector is returned unchanged.
    pub fn normalized(&self) -> ParamVector {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            ParamVector(self.0.iter().map(|a| a / n).collect())
        }
    }
}

impl TryFrom<Vec<f64>> for ParamVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ParamVector::new(v)
    }
}

impl From<ParamVector> for Vec<f64> {
    fn from(v: ParamVector) -> Vec<f64> {
        v.0
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::Dimension { expected, got })
    } else {
        Ok(())
    }
}

/// General dense real matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = 1.0;
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, x) in diag.iter().enumerate() {
            m.data[i * d + i] = *x;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        if r == 0 {
            return Err(Error::Size("matrix must have at least one row".into()));
        }
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            check_dim(c, row.len())?;
            data.extend_from_slice(row);
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[ParamVector]) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Size("need at least one column".into()));
        }
        let r = cols[0].dim();
        let mut m = Matrix::zeros(r, cols.len());
        for (j, c) in cols.iter().enumerate() {
            check_dim(r, c.dim())?;
            for i in 0..r {
                m.set(i, j, c[i]);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        check_dim(self.cols, other.rows)?;
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(l, j);
                }
            }
        }
        Ok(out)
    }

    pub fn mul_slice(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, v.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn mul_vec(&self, v: &ParamVector) -> Result<ParamVector> {
        ParamVector::new(self.mul_slice(v.as_slice())?)
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = (0..self.rows).map(|i| self.row(i)).collect();
        f.debug_list().entries(rows).finish()
    }
}

const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Symmetric positive semi-definite covariance matrix.
///
/// Symmetry is checked on construction. Positive semi-definiteness is
/// checked only on request ([`CovMatrix::check_psd`]) and in debug builds.
#[derive(Clone, PartialEq)]
pub struct CovMatrix(Matrix);

impl CovMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Size(format!(
                "covariance must be square, got {}x{}",
                m.rows, m.cols
            )));
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("covariance matrix"));
        }
        let scale = m.norm().max(1.0);
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if (m.get(i, j) - m.get(j, i)).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::Numerical(format!(
                        "covariance not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let cov = CovMatrix(m);
        debug_assert!(cov.check_psd().is_ok(), "covariance not PSD");
        Ok(cov)
    }

    pub fn identity(d: usize) -> Self {
        CovMatrix(Matrix::identity(d))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        CovMatrix::new(Matrix::diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `<Σ v, v>`.
    pub fn quad_form(&self, v: &ParamVector) -> Result<f64> {
        let sv = mat_vec(self, v)?;
        Ok(sv.dot(v))
    }

    pub fn check_psd(&self) -> Result<()> {
        let (vals, _) = symmetric_eigen(&self.0)?;
        let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let tol = PSD_TOL * self.0.norm().max(f64::MIN_POSITIVE);
        if min < -tol {
            Err(Error::Numerical(format!(
                "covariance has negative eigenvalue {min:e}"
            )))
        } else {
            Ok(())
        }
    }

    /// Symmetric square root via eigendecomposition, clamping negative
    /// eigenvalues at zero.
    pub fn sqrt(&self) -> Result<Matrix> {
        let (vals, vecs) = symmetric_eigen(&self.0)?;
        let d = self.dim();
        let mut out = Matrix::zeros(d, d);
        for (k, lambda) in vals.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            for i in 0..d {
                let vik = vecs.get(i, k) * s;
                for j in 0..d {
                    out.data[i * d + j] += vik * vecs.get(j, k);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for CovMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Covariance-times-vector.
pub fn mat_vec(m: &CovMatrix, v: &ParamVector) -> Result<ParamVector> {
    m.0.mul_vec(v)
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors stored as columns.
/// Intended for d <= 64; convergence is quadratic once off-diagonal mass is
/// small.
pub fn symmetric_eigen(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    if m.rows != m.cols {
        return Err(Error::Size("eigendecomposition needs a square matrix".into()));
    }
    let d = m.rows;
    let mut a = m.clone();
    let mut v = Matrix::identity(d);
    let scale = m.norm();
    if scale == 0.0 {
        return Ok((vec![0.0; d], v));
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j) * a.get(i, j))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            let vals = (0..d).map(|i| a.get(i, i)).collect();
            return Ok((vals, v));
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a.get(p, q);
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..d {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..d {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    Err(Error::Numerical("Jacobi eigensolver did not converge".into()))
}
