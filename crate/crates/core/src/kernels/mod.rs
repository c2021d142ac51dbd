//! Dense matrix kernels over 64-bit floats.
//!
//! All kernels are deterministic: summation runs in ascending index order
//! and no kernel reorders work between calls, so identical inputs give
//! bit-identical outputs.

#![allow(clippy::needless_range_loop)]

mod cholesky;
mod eigen;
mod gauss_jordan;
mod lu;
mod qr;
mod svd;

use std::fmt;

use thiserror::Error;

pub use cholesky::cholesky;
pub use eigen::{eigen_sym, SymmetricEigen};
pub use gauss_jordan::{gauss_jordan_inverse, inverse};
pub use lu::{determinant, lu_inverse, solve, Lu};
pub use qr::{qr, Qr};
pub use svd::{rank, svd, Svd};

/// Iteration budget for the Jacobi kernels: `MAX_SWEEPS_PER_DIM * n` sweeps.
pub const MAX_SWEEPS_PER_DIM: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("{op}: dimension mismatch ({}x{} vs {}x{})", left.0, left.1, right.0, right.1)]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: matrix must be square, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{op}: needs at least as many rows as columns, got {rows}x{cols}")]
    TooFewRows {
        op: &'static str,
        rows: usize,
        cols: usize,
    },
    #[error("{op}: matrix is singular")]
    Singular { op: &'static str },
    #[error("qr: matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },
    #[error("unsupported: non-symmetric eigenproblem")]
    NonSymmetricEigen,
    #[error("{op}: matrix is not symmetric")]
    NotSymmetric { op: &'static str },
    #[error("chf: matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("{op}: no convergence after {sweeps} sweeps")]
    NoConvergence { op: &'static str, sweeps: usize },
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    Empty { rows: usize, cols: usize },
    #[error("matrix data has {actual} elements, expected {expected}")]
    BadLength { expected: usize, actual: usize },
    #[error("matrix contains a non-finite value")]
    NonFinite,
}

/// Dense `rows x cols` matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, KernelError> {
        if rows == 0 || cols == 0 {
            return Err(KernelError::Empty { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(KernelError::BadLength {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(KernelError::NonFinite);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, KernelError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(KernelError::BadLength {
                expected: c,
                actual: bad.len(),
            });
        }
        let mut data = Vec::with_capacity(r * c);
        for j in 0..c {
            data.extend(rows.iter().map(|row| row[j]));
        }
        Matrix::new(r, c, data)
    }

    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self, KernelError> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if let Some(bad) = cols.iter().find(|col| col.len() != r) {
            return Err(KernelError::BadLength {
                expected: r,
                actual: bad.len(),
            });
        }
        Matrix::new(r, c, cols.concat())
    }

    pub(crate) fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.rows)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Largest absolute element.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest element-wise absolute difference; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub(crate) fn is_symmetric(&self) -> bool {
        let tol = 1e-9 * self.max_abs();
        (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementwise {
    Add,
    Sub,
    Emu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Product {
    /// `a * b`
    Mmu,
    /// `a' * b`
    Cpd,
    /// `a * b'`
    Opd,
}

pub fn elementwise(code: Elementwise, a: &Matrix, b: &Matrix) -> Result<Matrix, KernelError> {
    if a.shape() != b.shape() {
        return Err(KernelError::DimensionMismatch {
            op: match code {
                Elementwise::Add => "add",
                Elementwise::Sub => "sub",
                Elementwise::Emu => "emu",
            },
            left: a.shape(),
            right: b.shape(),
        });
    }
    let f: fn(f64, f64) -> f64 = match code {
        Elementwise::Add => |x, y| x + y,
        Elementwise::Sub => |x, y| x - y,
        Elementwise::Emu => |x, y| x * y,
    };
    Ok(Matrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    })
}

pub fn product(code: Product, a: &Matrix, b: &Matrix) -> Result<Matrix, KernelError> {
    let (op, ok) = match code {
        Product::Mmu => ("mmu", a.cols == b.rows),
        Product::Cpd => ("cpd", a.rows == b.rows),
        Product::Opd => ("opd", a.cols == b.cols),
    };
    if !ok {
        return Err(KernelError::DimensionMismatch {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    // Accessors chosen so every entry is sum over the shared index k, ascending.
    let (n, m, inner) = match code {
        Product::Mmu => (a.rows, b.cols, a.cols),
        Product::Cpd => (a.cols, b.cols, a.rows),
        Product::Opd => (a.rows, b.rows, a.cols),
    };
    let left = |i: usize, k: usize| match code {
        Product::Mmu | Product::Opd => a.get(i, k),
        Product::Cpd => a.get(k, i),
    };
    let right = |k: usize, j: usize| match code {
        Product::Mmu | Product::Cpd => b.get(k, j),
        Product::Opd => b.get(j, k),
    };
    let mut out = Matrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..inner {
                acc += left(i, k) * right(k, j);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

pub fn transpose(a: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(a.cols, a.rows);
    for j in 0..a.cols {
        for i in 0..a.rows {
            out.set(j, i, a.get(i, j));
        }
    }
    out
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(y) {
        acc += a * b;
    }
    acc
}

pub(crate) fn require_square(op: &'static str, a: &Matrix) -> Result<(), KernelError> {
    if a.is_square() {
        Ok(())
    } else {
        Err(KernelError::NotSquare {
            op,
            rows: a.rows,
            cols: a.cols,
        })
    }
}

pub(crate) fn require_tall(op: &'static str, a: &Matrix) -> Result<(), KernelError> {
    if a.rows >= a.cols {
        Ok(())
    } else {
        Err(KernelError::TooFewRows {
            op,
            rows: a.rows,
            cols: a.cols,
        })
    }
}

#[cfg(test)]
pub(crate) fn m(rows: &[&[f64]]) -> Matrix {
    Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}
