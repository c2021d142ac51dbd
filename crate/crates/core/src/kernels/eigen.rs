use super::{require_square, KernelError, Matrix, MAX_SWEEPS_PER_DIM};

const CONVERGENCE: f64 = 1e-12;

/// Eigenvalues as an `n x 1` column (descending) and unit eigenvectors as
/// the columns of an `n x n` matrix, in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Matrix,
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for symmetric matrices. Each eigenvector is
/// signed so that its largest-magnitude component is positive.
pub fn eigen_sym(a: &Matrix) -> Result<SymmetricEigen, KernelError> {
    require_square("eigen", a)?;
    if !a.is_symmetric() {
        return Err(KernelError::NonSymmetricEigen);
    }
    let n = a.rows();
    let mut s = a.to_rows();
    // symmetrize exactly so rotations keep both triangles identical
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (s[i][j] + s[j][i]);
            s[i][j] = avg;
            s[j][i] = avg;
        }
    }
    let mut v = Matrix::identity(n);
    let scale = a.frobenius();
    let max_sweeps = MAX_SWEEPS_PER_DIM * n;

    let mut sweep = 0;
    loop {
        let mut off = 0.0;
        for (i, row) in s.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if i != j {
                    off += x * x;
                }
            }
        }
        if off.sqrt() <= CONVERGENCE * scale {
            break;
        }
        if sweep == max_sweeps {
            return Err(KernelError::NoConvergence {
                op: "eigen",
                sweeps: sweep,
            });
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = s[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (s[q][q] - s[p][p]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for row in s.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - sn * y;
                    row[q] = sn * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (s[p][k], s[q][k]);
                    s[p][k] = c * x - sn * y;
                    s[q][k] = sn * x + c * y;
                }
                s[p][q] = 0.0;
                s[q][p] = 0.0;
                for i in 0..n {
                    let (x, y) = (v.get(i, p), v.get(i, q));
                    v.set(i, p, c * x - sn * y);
                    v.set(i, q, sn * x + c * y);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[j][j].total_cmp(&s[i][i]));
    let mut values = Matrix::zeros(n, 1);
    let mut vectors = Matrix::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        values.set(k, 0, s[j][j]);
        let mut col = v.column(j).to_vec();
        let lead = col
            .iter()
            .enumerate()
            .fold(0, |b, (i, x)| if x.abs() > col[b].abs() { i } else { b });
        if col[lead] < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
        vectors.column_mut(k).copy_from_slice(&col);
    }
    Ok(SymmetricEigen { values, vectors })
}
