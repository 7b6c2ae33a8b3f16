//! Small dense linear algebra kernels used by the calibration fits.
//!
//! The designs here are tiny (at most a few hundred rows by seven columns
//! or a 6x6 covariance), so hand-rolled Householder QR and cyclic Jacobi
//! sweeps are plenty and keep the numerics self-contained.

use crate::error::{Error, Result};

/// Column-count by row-count dense matrix in row-major storage.
#[derive(Debug, Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Least-squares solution of `X b = y` via Householder QR.
///
/// Returns the coefficients together with the inverse Gram diagonal
/// `diag((X^T X)^{-1})` needed for standard errors.
pub struct LstSq {
    pub coefficients: Vec<f64>,
    pub inv_gram_diag: Vec<f64>,
}

pub fn lstsq_qr(x: &Mat, y: &[f64]) -> Result<LstSq> {
    let n = x.rows;
    let p = x.cols;
    assert_eq!(y.len(), n);
    if n < p {
        return Err(Error::TooFewObservations { n, p });
    }

    // In-place Householder factorisation of a working copy, applying the
    // reflectors to the right-hand side as we go.
    let mut a = x.clone();
    let mut rhs = y.to_vec();

    // Column norms for the relative rank test.
    let mut col_norms = vec![0.0f64; p];
    for j in 0..p {
        let mut s = 0.0;
        for i in 0..n {
            s += a.at(i, j) * a.at(i, j);
        }
        col_norms[j] = s.sqrt();
    }

    for k in 0..p {
        // Householder vector for column k, rows k..n.
        let mut norm = 0.0;
        for i in k..n {
            norm += a.at(i, k) * a.at(i, k);
        }
        norm = norm.sqrt();
        if norm <= 1e-12 * col_norms[k].max(1e-300) || norm == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }
        let alpha = if a.at(k, k) >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n - k];
        v[0] = a.at(k, k) - alpha;
        for i in (k + 1)..n {
            v[i - k] = a.at(i, k);
        }
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv == 0.0 {
            return Err(Error::RankDeficient { column: k });
        }

        *a.at_mut(k, k) = alpha;
        for i in (k + 1)..n {
            *a.at_mut(i, k) = 0.0;
        }
        for j in (k + 1)..p {
            let mut dot = 0.0;
            for i in k..n {
                dot += v[i - k] * a.at(i, j);
            }
            let scale = 2.0 * dot / vtv;
            for i in k..n {
                *a.at_mut(i, j) -= scale * v[i - k];
            }
        }
        let mut dot = 0.0;
        for i in k..n {
            dot += v[i - k] * rhs[i];
        }
        let scale = 2.0 * dot / vtv;
        for i in k..n {
            rhs[i] -= scale * v[i - k];
        }
    }

    // Rank check on the diagonal of R relative to the column scale.
    for j in 0..p {
        if a.at(j, j).abs() <= 1e-10 * col_norms[j].max(1e-300) {
            return Err(Error::RankDeficient { column: j });
        }
    }

    // Back substitution: R b = Q^T y.
    let mut b = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = rhs[i];
        for j in (i + 1)..p {
            s -= a.at(i, j) * b[j];
        }
        b[i] = s / a.at(i, i);
    }

    // R^{-1} by back substitution, then diag((X^T X)^{-1}) = row norms of R^{-1}.
    let mut rinv = Mat::zeros(p, p);
    for col in 0..p {
        let mut e = vec![0.0; p];
        e[col] = 1.0;
        for i in (0..=col).rev() {
            let mut s = e[i];
            for j in (i + 1)..p {
                s -= a.at(i, j) * rinv.at(j, col);
            }
            *rinv.at_mut(i, col) = s / a.at(i, i);
        }
    }
    let inv_gram_diag = (0..p)
        .map(|i| (0..p).map(|j| rinv.at(i, j) * rinv.at(i, j)).sum())
        .collect();

    Ok(LstSq {
        coefficients: b,
        inv_gram_diag,
    })
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues in descending order and the matching eigenvectors
/// as rows of an orthonormal matrix.
pub fn symmetric_eigen(m: &Mat) -> (Vec<f64>, Mat) {
    let n = m.rows;
    assert_eq!(m.rows, m.cols, "matrix must be square");
    let mut a = m.clone();
    // v accumulates the rotations; starts as identity.
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }

    let off = |a: &Mat| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a.at(i, j) * a.at(i, j);
                }
            }
        }
        s
    };

    let scale: f64 = (0..n)
        .map(|i| a.at(i, i).abs())
        .fold(0.0, f64::max)
        .max(off(&a).sqrt())
        .max(1e-300);
    let tol = (scale * 1e-14) * (scale * 1e-14);

    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.at(p, q);
                if apq.abs() <= scale * 1e-300 {
                    continue;
                }
                let app = a.at(p, p);
                let aqq = a.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a.at(k, p);
                    let akq = a.at(k, q);
                    *a.at_mut(k, p) = c * akp - s * akq;
                    *a.at_mut(k, q) = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a.at(p, k);
                    let aqk = a.at(q, k);
                    *a.at_mut(p, k) = c * apk - s * aqk;
                    *a.at_mut(q, k) = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    *v.at_mut(k, p) = c * vkp - s * vkq;
                    *v.at_mut(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.at(j, j).partial_cmp(&a.at(i, i)).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.at(i, i)).collect();
    let mut vectors = Mat::zeros(n, n);
    for (row, &col) in order.iter().enumerate() {
        for k in 0..n {
            *vectors.at_mut(row, k) = v.at(k, col);
        }
    }
    (eigenvalues, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qr_exact_line_through_two_points() {
        // y = 1 + 2x through (0,1), (1,3).
        let x = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0]]);
        let fit = lstsq_qr(&x, &[1.0, 3.0]).unwrap();
        assert!((fit.coefficients[0] - 1.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn qr_rejects_collinear_design() {
        let x = Mat::from_rows(&[
            vec![1.0, 2.0, 4.0],
            vec![1.0, 3.0, 6.0],
            vec![1.0, 4.0, 8.0],
            vec![1.0, 5.0, 10.0],
        ]);
        assert!(matches!(
            lstsq_qr(&x, &[1.0, 2.0, 3.0, 4.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn jacobi_recovers_diagonal_eigenpairs() {
        let m = Mat::from_rows(&[
            vec![4.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.25],
        ]);
        let (vals, vecs) = symmetric_eigen(&m);
        assert!((vals[0] - 4.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 0.25).abs() < 1e-12);
        assert!((vecs.at(0, 0).abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_vectors_are_orthonormal() {
        let m = Mat::from_rows(&[
            vec![2.0, 0.5, 0.1],
            vec![0.5, 1.0, -0.3],
            vec![0.1, -0.3, 0.7],
        ]);
        let (vals, vecs) = symmetric_eigen(&m);
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| vecs.at(i, k) * vecs.at(j, k)).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10, "gram[{i}][{j}] = {dot}");
            }
        }
        // A v = lambda v for each pair.
        for e in 0..n {
            for r in 0..n {
                let av: f64 = (0..n).map(|k| m.at(r, k) * vecs.at(e, k)).sum();
                assert!((av - vals[e] * vecs.at(e, r)).abs() < 1e-10);
            }
        }
    }
}
