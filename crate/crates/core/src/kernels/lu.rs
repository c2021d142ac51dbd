use super::{require_square, KernelError, Matrix};

const PIVOT_TOLERANCE: f64 = 1e-12;

/// LU factorization with partial row pivoting: `P a = L U`, with unit lower
/// triangular `L` and `U` packed into one row-major buffer.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
    sign: f64,
    scale: f64,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Self, KernelError> {
        require_square("lu", a)?;
        let n = a.rows();
        let mut lu = a.to_rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if lu[i][k].abs() > lu[p][k].abs() {
                    p = i;
                }
            }
            if p != k {
                lu.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = lu[k][k];
            if pivot == 0.0 {
                continue;
            }
            for i in k + 1..n {
                let f = lu[i][k] / pivot;
                lu[i][k] = f;
                for j in k + 1..n {
                    lu[i][j] -= f * lu[k][j];
                }
            }
        }
        Ok(Lu {
            n,
            lu,
            perm,
            sign,
            scale: a.max_abs(),
        })
    }

    pub fn determinant(&self) -> f64 {
        (0..self.n).fold(self.sign, |d, i| d * self.lu[i][i])
    }

    fn is_singular(&self) -> bool {
        let threshold = PIVOT_TOLERANCE * self.scale;
        self.scale == 0.0 || (0..self.n).any(|i| self.lu[i][i].abs() < threshold)
    }

    fn solve_column(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i][k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.lu[i][k] * x[k];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }
}

/// Solves `a x = v` for square `a` and a single right-hand column `v`.
pub fn solve(a: &Matrix, v: &Matrix) -> Result<Matrix, KernelError> {
    require_square("sol", a)?;
    if v.rows() != a.rows() || v.cols() != 1 {
        return Err(KernelError::DimensionMismatch {
            op: "sol",
            left: a.shape(),
            right: v.shape(),
        });
    }
    let lu = Lu::factor(a)?;
    if lu.is_singular() {
        return Err(KernelError::Singular { op: "sol" });
    }
    Matrix::from_columns(vec![lu.solve_column(v.column(0))])
}

/// Inverse by LU factorization; an independent route to the Gauss-Jordan
/// kernel.
pub fn lu_inverse(a: &Matrix) -> Result<Matrix, KernelError> {
    require_square("inv", a)?;
    let lu = Lu::factor(a)?;
    if lu.is_singular() {
        return Err(KernelError::Singular { op: "inv" });
    }
    let n = a.rows();
    let cols = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            lu.solve_column(&e)
        })
        .collect();
    Matrix::from_columns(cols)
}

pub fn determinant(a: &Matrix) -> Result<f64, KernelError> {
    require_square("det", a)?;
    Ok(Lu::factor(a)?.determinant())
}
