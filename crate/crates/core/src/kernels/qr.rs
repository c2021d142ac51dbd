use super::{dot, require_tall, KernelError, Matrix};

const RANK_TOLERANCE: f64 = 1e-12;

/// Thin QR factors: `q` is `m x n` with orthonormal columns, `r` is `n x n`
/// upper triangular with a negative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Qr {
    pub q: Matrix,
    pub r: Matrix,
}

/// Householder QR. Each reflection maps the pivot column onto
/// `-sign(x0) * |x| * e1`. Afterwards any row of `r` with a positive
/// diagonal is negated together with the matching column of `q`, so the
/// factors do not depend on the order of the input rows.
pub fn qr(a: &Matrix) -> Result<Qr, KernelError> {
    require_tall("qr", a)?;
    let (m, n) = a.shape();
    let threshold = RANK_TOLERANCE * a.frobenius();
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let x = &w.column(k)[k..];
        let norm = dot(x, x).sqrt();
        if norm <= threshold {
            return Err(KernelError::RankDeficient { column: k });
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vv = dot(&v, &v);
        for j in k..n {
            let col = &mut w.column_mut(j)[k..];
            let f = 2.0 * dot(&v, col) / vv;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        // exact zeros below the diagonal
        w.column_mut(k)[k] = alpha;
        for c in &mut w.column_mut(k)[k + 1..] {
            *c = 0.0;
        }
        reflectors.push(v);
    }

    let mut r = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            r.set(i, j, w.get(i, j));
        }
    }

    // q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q.set(j, j, 1.0);
    }
    for (k, v) in reflectors.iter().enumerate().rev() {
        let vv = dot(v, v);
        for j in 0..n {
            let col = &mut q.column_mut(j)[k..];
            let f = 2.0 * dot(v, col) / vv;
            for (c, vi) in col.iter_mut().zip(v) {
                *c -= f * vi;
            }
        }
    }

    for k in 0..n {
        if r.get(k, k) > 0.0 {
            for j in k..n {
                r.set(k, j, -r.get(k, j));
            }
            for c in q.column_mut(k) {
                *c = -*c;
            }
        }
    }
    Ok(Qr { q, r })
}
