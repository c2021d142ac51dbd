//! Matrix inversion by Gauss-Jordan elimination expressed purely as
//! whole-column operations: scale a column, subtract a scaled column from
//! another, and pick a single element. The input matrix is driven to the
//! identity by column operations; the same operations applied to an
//! identity matrix accumulate the inverse.
//!
//! Pivoting swaps columns: at step `i` the column with the largest
//! magnitude in row `i` becomes the pivot column.

use super::{KernelError, Matrix};

/// Relative pivot threshold below which the matrix is treated as singular.
const PIVOT_TOLERANCE: f64 = 1e-12;

/// `sel(B, i)`: the `i`-th value of a column.
#[inline]
fn pick(col: &[f64], i: usize) -> f64 {
    col[i]
}

/// `B <- B / v`
fn scale_column(col: &mut [f64], v: f64) {
    for x in col {
        *x /= v;
    }
}

/// `B_j <- B_j - B_i * v`
fn subtract_scaled(target: &mut [f64], source: &[f64], v: f64) {
    for (t, s) in target.iter_mut().zip(source) {
        *t -= s * v;
    }
}

/// Inverts the square matrix given as a list of columns and returns the
/// columns of the inverse.
pub fn gauss_jordan_inverse(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, KernelError> {
    let n = columns.len();
    if n == 0 {
        return Err(KernelError::Empty { rows: 0, cols: 0 });
    }
    if let Some(bad) = columns.iter().find(|c| c.len() != n) {
        return Err(KernelError::NotSquare {
            op: "inv",
            rows: bad.len(),
            cols: n,
        });
    }
    let scale = columns
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return Err(KernelError::Singular { op: "inv" });
    }
    let threshold = PIVOT_TOLERANCE * scale;

    let mut b: Vec<Vec<f64>> = columns.to_vec();
    let mut br: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    for i in 0..n {
        let mut p = i;
        for j in i + 1..n {
            if pick(&b[j], i).abs() > pick(&b[p], i).abs() {
                p = j;
            }
        }
        if pick(&b[p], i).abs() < threshold {
            return Err(KernelError::Singular { op: "inv" });
        }
        b.swap(i, p);
        br.swap(i, p);

        let v1 = pick(&b[i], i);
        scale_column(&mut b[i], v1);
        scale_column(&mut br[i], v1);

        let pivot_col = b[i].clone();
        let pivot_res = br[i].clone();
        for j in 0..n {
            if j != i {
                let v2 = pick(&b[j], i);
                subtract_scaled(&mut b[j], &pivot_col, v2);
                subtract_scaled(&mut br[j], &pivot_res, v2);
            }
        }
    }
    Ok(br)
}

/// Matrix wrapper around [`gauss_jordan_inverse`].
pub fn inverse(a: &Matrix) -> Result<Matrix, KernelError> {
    super::require_square("inv", a)?;
    let cols: Vec<Vec<f64>> = a.columns().map(<[f64]>::to_vec).collect();
    Matrix::from_columns(gauss_jordan_inverse(&cols)?)
}
