use super::{require_square, KernelError, Matrix};

/// Upper-triangular `u` with `u' u = a`.
pub fn cholesky(a: &Matrix) -> Result<Matrix, KernelError> {
    require_square("chf", a)?;
    if !a.is_symmetric() {
        return Err(KernelError::NotSymmetric { op: "chf" });
    }
    let n = a.rows();
    let mut u = Matrix::zeros(n, n);
    for i in 0..n {
        let mut d = a.get(i, i);
        for k in 0..i {
            d -= u.get(k, i) * u.get(k, i);
        }
        if d <= 0.0 {
            return Err(KernelError::NotPositiveDefinite);
        }
        let pivot = d.sqrt();
        u.set(i, i, pivot);
        for j in i + 1..n {
            let mut s = a.get(i, j);
            for k in 0..i {
                s -= u.get(k, i) * u.get(k, j);
            }
            u.set(i, j, s / pivot);
        }
    }
    Ok(u)
}
