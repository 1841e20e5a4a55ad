//! Dense linear algebra at a configurable working precision.
//!
//! Gram systems go through a Cholesky factorisation, Vandermonde-type systems
//! through LU with partial pivoting. No regularisation is ever added; an
//! ill-conditioned system is either solved at the requested precision or
//! reported as a failure that calls for more bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::PrecisionConfig;
use crate::scalar::{Precision, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            data.extend(row);
        }
        Self::from_vec(nrows, ncols, data)
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite matrix entry at {bad}")));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds an `rows x cols` matrix entry by entry.
    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> S,
    {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_vec(rows, cols, data)
    }

    pub fn from_f64_rows(rows: &[Vec<f64>], prec: Precision) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| S::from_f64(v, prec)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize, prec: Precision) -> Self {
        let mut data = vec![S::zero(prec); n * n];
        for i in 0..n {
            data[i * n + i] = S::one(prec);
        }
        Matrix { rows: n, cols: n, data }
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

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul_vec(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs().to_f64()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(Scalar::to_f64).collect(),
        }
    }

    fn precision(&self) -> Precision {
        self.data.first().map_or(Precision::Machine, Scalar::precision)
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut it = a.iter().zip(b).map(|(x, y)| x.clone() * y.clone());
    match it.next() {
        Some(first) => it.fold(first, |acc, t| acc + t),
        None => S::from_i64(0, Precision::Machine),
    }
}

pub fn norm_inf<S: Scalar>(v: &[S]) -> f64 {
    v.iter().map(|x| x.abs().to_f64()).fold(0.0, f64::max)
}

/// Condition estimate exceeded the configured threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionWarning {
    pub condition: f64,
    pub threshold: f64,
    pub precision: Precision,
}

/// Solution of a linear system with its diagnostics.
#[derive(Clone, Debug)]
pub struct LinearSolve<S> {
    pub x: Vec<S>,
    /// `||A x - b||_inf`, evaluated at working precision.
    pub residual: f64,
    /// Estimate of the infinity-norm condition number.
    pub condition: f64,
    pub warning: Option<ConditionWarning>,
}

fn check_precision<S: Scalar>(prec: &PrecisionConfig) -> Result<()> {
    if S::supports(prec.precision) {
        Ok(())
    } else {
        Err(Error::PrecisionMismatch(prec.precision))
    }
}

fn check_system<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Result<()> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            a.rows, a.cols
        )));
    }
    if b.len() != a.rows {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            got: b.len(),
        });
    }
    Ok(())
}

/// Lower-triangular Cholesky factor `L` with `A = L L^T`.
#[derive(Clone, Debug)]
pub struct Cholesky<S> {
    n: usize,
    l: Vec<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn factor(a: &Matrix<S>) -> Result<Self> {
        let n = a.rows;
        let prec = a.precision();
        let mut l = vec![S::zero(prec); n * n];
        for j in 0..n {
            let mut diag = a.get(j, j).clone();
            for k in 0..j {
                diag = diag - l[j * n + k].square();
            }
            if !(diag > S::zero(prec)) {
                return Err(Error::NumericallyIndefinite {
                    precision: prec,
                    step: j,
                    pivot: diag.to_f64(),
                });
            }
            let ljj = diag.sqrt();
            for i in j + 1..n {
                let mut s = a.get(i, j).clone();
                for k in 0..j {
                    s = s - l[i * n + k].clone() * l[j * n + k].clone();
                }
                l[i * n + j] = s / ljj.clone();
            }
            l[j * n + j] = ljj;
        }
        Ok(Cholesky { n, l })
    }

    /// Entry `(i, j)` of the lower factor.
    pub fn factor_entry(&self, i: usize, j: usize) -> &S {
        &self.l[i * self.n + j]
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y: Vec<S> = b.to_vec();
        for i in 0..n {
            let mut s = y[i].clone();
            for k in 0..i {
                s = s - self.l[i * n + k].clone() * y[k].clone();
            }
            y[i] = s / self.l[i * n + i].clone();
        }
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s = s - self.l[k * n + i].clone() * y[k].clone();
            }
            y[i] = s / self.l[i * n + i].clone();
        }
        y
    }

    fn inverse_norm_inf(&self, prec: Precision) -> f64 {
        inverse_norm_inf(self.n, prec, |e| self.solve(e))
    }
}

/// `P A = L U` with partial pivoting, packed in one matrix.
#[derive(Clone, Debug)]
pub struct Lu<S> {
    n: usize,
    lu: Vec<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    pub fn factor(a: &Matrix<S>) -> Result<Self> {
        let n = a.rows;
        let prec = a.precision();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best.is_zero() {
                return Err(Error::Singular { precision: prec, step: k });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k].clone();
            for i in k + 1..n {
                let factor = lu[i * n + k].clone() / pivot.clone();
                for j in k + 1..n {
                    let v = lu[i * n + j].clone() - factor.clone() * lu[k * n + j].clone();
                    lu[i * n + j] = v;
                }
                lu[i * n + k] = factor;
            }
        }
        Ok(Lu { n, lu, perm })
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.n;
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p].clone()).collect();
        for i in 0..n {
            let mut s = y[i].clone();
            for k in 0..i {
                s = s - self.lu[i * n + k].clone() * y[k].clone();
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i].clone();
            for k in i + 1..n {
                s = s - self.lu[i * n + k].clone() * y[k].clone();
            }
            y[i] = s / self.lu[i * n + i].clone();
        }
        y
    }

    fn inverse_norm_inf(&self, prec: Precision) -> f64 {
        inverse_norm_inf(self.n, prec, |e| self.solve(e))
    }
}

/// `||A^{-1}||_inf` from `n` solves against unit vectors.
fn inverse_norm_inf<S: Scalar>(n: usize, prec: Precision, solve: impl Fn(&[S]) -> Vec<S>) -> f64 {
    let mut row_sums = vec![0.0f64; n];
    for j in 0..n {
        let mut e = vec![S::zero(prec); n];
        e[j] = S::one(prec);
        let col = solve(&e);
        for (sum, v) in row_sums.iter_mut().zip(&col) {
            *sum += v.abs().to_f64();
        }
    }
    row_sums.into_iter().fold(0.0, f64::max)
}

fn residual<S: Scalar>(a: &Matrix<S>, x: &[S], b: &[S]) -> f64 {
    (0..a.rows)
        .map(|i| (dot(a.row(i), x) - b[i].clone()).abs().to_f64())
        .fold(0.0, f64::max)
}

fn warning_for(condition: f64, prec: &PrecisionConfig) -> Option<ConditionWarning> {
    (condition > prec.condition_warn_threshold).then_some(ConditionWarning {
        condition,
        threshold: prec.condition_warn_threshold,
        precision: prec.precision,
    })
}

/// Solves a symmetric positive-definite system by Cholesky factorisation.
pub fn solve_spd<S: Scalar>(a: &Matrix<S>, b: &[S], prec: &PrecisionConfig) -> Result<LinearSolve<S>> {
    check_precision::<S>(prec)?;
    check_system(a, b)?;
    if !a.is_symmetric() {
        return Err(Error::InvalidArgument("matrix is not symmetric".into()));
    }
    let chol = Cholesky::factor(a)?;
    let x = chol.solve(b);
    let condition = a.norm_inf() * chol.inverse_norm_inf(a.precision());
    Ok(LinearSolve {
        residual: residual(a, &x, b),
        warning: warning_for(condition, prec),
        condition,
        x,
    })
}

/// Solves a general square system by LU factorisation with partial pivoting.
pub fn solve_general<S: Scalar>(a: &Matrix<S>, b: &[S], prec: &PrecisionConfig) -> Result<LinearSolve<S>> {
    check_precision::<S>(prec)?;
    check_system(a, b)?;
    let lu = Lu::factor(a)?;
    let x = lu.solve(b);
    let condition = a.norm_inf() * lu.inverse_norm_inf(a.precision());
    Ok(LinearSolve {
        residual: residual(a, &x, b),
        warning: warning_for(condition, prec),
        condition,
        x,
    })
}

/// `kappa_inf(A)`, or `+inf` when the factorisation meets an exact zero pivot.
pub fn condition_estimate<S: Scalar>(a: &Matrix<S>, prec: &PrecisionConfig) -> Result<f64> {
    check_precision::<S>(prec)?;
    if !a.is_square() || a.rows == 0 {
        return Err(Error::InvalidArgument("condition estimate needs a non-empty square matrix".into()));
    }
    match Lu::factor(a) {
        Ok(lu) => Ok(a.norm_inf() * lu.inverse_norm_inf(a.precision())),
        Err(Error::Singular { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}
