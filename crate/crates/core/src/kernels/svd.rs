//! Singular value decomposition by one-sided (Hestenes) Jacobi rotations.

use super::{dot, require_tall, transpose, KernelError, Matrix, MAX_SWEEPS_PER_DIM};

/// `a = u * [d; 0] * v'` with `u` square (`m x m`), `d` the `n x n` diagonal
/// of non-increasing singular values and `v` square (`n x n`).
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub u: Matrix,
    pub d: Matrix,
    pub v: Matrix,
}

impl Svd {
    pub fn singular_values(&self) -> Vec<f64> {
        (0..self.d.rows()).map(|i| self.d.get(i, i)).collect()
    }
}

pub fn svd(a: &Matrix) -> Result<Svd, KernelError> {
    require_tall("svd", a)?;
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let max_sweeps = MAX_SWEEPS_PER_DIM * n;
    // columns this short are numerically zero and need no further rotation
    let zero_column = (f64::EPSILON * a.frobenius()).powi(2);

    let mut sweep = 0;
    loop {
        if sweep == max_sweeps {
            return Err(KernelError::NoConvergence {
                op: "svd",
                sweeps: sweep,
            });
        }
        sweep += 1;

        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(w.column(p), w.column(p));
                let beta = dot(w.column(q), w.column(q));
                let gamma = dot(w.column(p), w.column(q));
                if gamma == 0.0
                    || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt()
                    || alpha.min(beta) <= zero_column
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = w.columns().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let sigma_max = norms[order[0]];
    let negligible = (m.max(n) as f64) * f64::EPSILON * sigma_max;

    let mut u = Matrix::zeros(m, m);
    let mut v_sorted = Matrix::zeros(n, n);
    let mut d = Matrix::zeros(n, n);
    let mut filled = 0;
    for (k, &j) in order.iter().enumerate() {
        let mut vj = v.column(j).to_vec();
        let sigma = norms[j];
        let mut uj: Vec<f64> = if sigma > negligible {
            w.column(j).iter().map(|x| x / sigma).collect()
        } else {
            Vec::new()
        };
        // largest-magnitude component of each right singular vector positive
        let lead = vj
            .iter()
            .enumerate()
            .fold(0, |b, (i, x)| if x.abs() > vj[b].abs() { i } else { b });
        if vj[lead] < 0.0 {
            vj.iter_mut().for_each(|x| *x = -*x);
            uj.iter_mut().for_each(|x| *x = -*x);
        }
        v_sorted.column_mut(k).copy_from_slice(&vj);
        if sigma > negligible {
            d.set(k, k, sigma);
            u.column_mut(k).copy_from_slice(&uj);
            filled = k + 1;
        }
    }
    complete_basis(&mut u, filled);
    Ok(Svd { u, d, v: v_sorted })
}

fn rotate(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..a.rows() {
        let x = a.get(i, p);
        let y = a.get(i, q);
        a.set(i, p, c * x - s * y);
        a.set(i, q, s * x + c * y);
    }
}

/// Extends the first `filled` orthonormal columns of square `u` to a full
/// orthonormal basis, drawing from the standard basis vector with the
/// largest component outside the current span each time.
fn complete_basis(u: &mut Matrix, filled: usize) {
    let m = u.rows();
    for k in filled..m {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..m {
            let mut cand = vec![0.0; m];
            cand[e] = 1.0;
            // project out twice for numerical orthogonality
            for _ in 0..2 {
                for j in 0..k {
                    let col = u.column(j);
                    let f = dot(col, &cand);
                    for (c, x) in cand.iter_mut().zip(col) {
                        *c -= f * x;
                    }
                }
            }
            let norm = dot(&cand, &cand).sqrt();
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, cand));
            }
        }
        let (norm, cand) = best.expect("m > 0");
        for (dst, x) in u.column_mut(k).iter_mut().zip(&cand) {
            *dst = x / norm;
        }
    }
}

/// Numerical rank: singular values above `max(m, n) * eps * sigma_max`.
pub fn rank(a: &Matrix) -> Result<usize, KernelError> {
    let tall = if a.rows() >= a.cols() {
        a.clone()
    } else {
        transpose(a)
    };
    let s = svd(&tall)?.singular_values();
    let tol = (a.rows().max(a.cols()) as f64) * f64::EPSILON * s[0];
    Ok(s.iter().filter(|&&x| x > tol).count())
}
