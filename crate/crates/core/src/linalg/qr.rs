//! Householder QR with column pivoting and the rank/kernel/solve routines
//! built on it.

use super::mat::{re, Field, Mat, Scalar};
use super::Tolerance;
use crate::error::{Error, Result};

/// `a * P = Q * R` with `Q` unitary (m×m), `R` upper trapezoidal (m×n) and
/// `perm[k]` the original index of column `k`.
pub(crate) struct PivotedQr {
    pub q: Mat,
    pub r: Mat,
    pub perm: Vec<usize>,
}

fn phase(z: Scalar) -> Scalar {
    let n = z.norm();
    if n == 0.0 {
        re(1.0)
    } else {
        z / n
    }
}

pub(crate) fn pivoted_qr(a: &Mat) -> PivotedQr {
    let (m, n) = (a.rows(), a.cols());
    let field = a.field();
    let mut r = a.clone();
    let mut q = Mat::identity(m).with_field(field);
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..m.min(n) {
        // pivot: remaining column with largest trailing norm
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..n {
            let s: f64 = (k..m).map(|i| r[(i, j)].norm_sqr()).sum();
            if s > best_norm {
                best_norm = s;
                best = j;
            }
        }
        if best != k {
            for i in 0..m {
                let tmp = r[(i, k)];
                r[(i, k)] = r[(i, best)];
                r[(i, best)] = tmp;
            }
            perm.swap(k, best);
        }

        let norm_x = best_norm.max(0.0).sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let alpha = -phase(r[(k, k)]) * norm_x;
        let mut v: Vec<Scalar> = (k..m).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in &mut v {
            *z /= vnorm;
        }
        // R <- (I - 2 v v^H) R on rows k.., columns k..
        for j in k..n {
            let dot: Scalar = v.iter().enumerate().map(|(t, vi)| vi.conj() * r[(k + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                r[(k + t, j)] -= vi * dot * 2.0;
            }
        }
        for i in (k + 1)..m {
            r[(i, k)] = re(0.0);
        }
        // Q <- Q (I - 2 v v^H)
        for i in 0..m {
            let dot: Scalar = v.iter().enumerate().map(|(t, vi)| q[(i, k + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] -= dot * vi.conj() * 2.0;
            }
        }
    }
    if field == Field::Real {
        r = r.with_field(Field::Real);
        q = q.with_field(Field::Real);
    }
    PivotedQr { q, r, perm }
}

impl PivotedQr {
    /// Number of leading diagonal entries of `R` above `rel * max(|R_00|, scale)`.
    pub fn rank(&self, rel: f64, scale: f64) -> usize {
        let k = self.r.rows().min(self.r.cols());
        if k == 0 {
            return 0;
        }
        let first = self.r[(0, 0)].norm();
        let thr = rel * first.max(scale);
        (0..k).take_while(|&i| self.r[(i, i)].norm() > thr).count()
    }
}

/// Numerical rank with threshold `tol.rank_rel` times the first pivot.
pub fn rank(a: &Mat, tol: &Tolerance) -> usize {
    rank_scaled(a, tol.rank_rel, 0.0)
}

/// Rank with the threshold floored at `rel * scale`, for matrices whose
/// exact value may be zero (where the first pivot is pure round-off).
pub(crate) fn rank_scaled(a: &Mat, rel: f64, scale: f64) -> usize {
    if a.rows() == 0 || a.cols() == 0 {
        return 0;
    }
    pivoted_qr(a).rank(rel, scale)
}

/// Orthonormal basis of the numerical nullspace of `a`.
pub fn kernel_basis(a: &Mat, tol: &Tolerance) -> Mat {
    kernel_scaled(a, tol.rank_rel, 0.0)
}

pub(crate) fn kernel_scaled(a: &Mat, rel: f64, scale: f64) -> Mat {
    let n = a.cols();
    if a.rows() == 0 {
        return Mat::identity(n).with_field(a.field());
    }
    // null(a) = orthogonal complement of range(a^H)
    let qr = pivoted_qr(&a.adjoint());
    let r = qr.rank(rel, scale);
    qr.q.cols_range(r, n)
}

/// The `dim` directions least excited by `a`, taken from the trailing
/// columns of the pivoted factorization of `a^H` regardless of threshold.
pub(crate) fn kernel_forced(a: &Mat, dim: usize) -> Mat {
    let n = a.cols();
    let qr = pivoted_qr(&a.adjoint());
    qr.q.cols_range(n - dim.min(n), n)
}

/// Orthonormal basis for the span of `a`, whose columns are known to be
/// independent (no rank decision).
pub(crate) fn orthonormal_columns(a: &Mat) -> Mat {
    if a.cols() == 0 {
        return a.clone();
    }
    let q = pivoted_qr(a).q.cols_range(0, a.cols().min(a.rows()));
    q.with_field(a.field())
}

/// Orthonormal basis for the column span of `a` (rank decided by `rel`).
pub(crate) fn orthonormal_span(a: &Mat, rel: f64) -> Mat {
    if a.cols() == 0 {
        return Mat::zeros(a.rows(), 0, a.field());
    }
    let qr = pivoted_qr(a);
    let r = qr.rank(rel, 0.0);
    qr.q.cols_range(0, r)
}

/// Solve `a x = b` for square, numerically nonsingular `a`.
pub fn solve(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<Mat> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    b.ensure_finite()?;
    if b.rows() != n {
        return Err(Error::DimensionMismatch(format!(
            "right-hand side has {} rows, matrix is {n}x{n}",
            b.rows()
        )));
    }
    let qr = pivoted_qr(a);
    let rank = qr.rank(tol.rank_rel, 0.0);
    if rank < n {
        return Err(Error::Singular { rank, dim: n });
    }
    let field = a.field().join(b.field());
    let y = qr.q.adjoint().matmul(b);
    let mut z = Mat::zeros(n, b.cols(), field);
    for c in 0..b.cols() {
        for i in (0..n).rev() {
            let mut s = y[(i, c)];
            for j in (i + 1)..n {
                s -= qr.r[(i, j)] * z[(j, c)];
            }
            z[(i, c)] = s / qr.r[(i, i)];
        }
    }
    // undo the column permutation
    let mut x = Mat::zeros(n, b.cols(), field);
    for (k, &p) in qr.perm.iter().enumerate() {
        for c in 0..b.cols() {
            x[(p, c)] = z[(k, c)];
        }
    }
    Ok(x.with_field(field))
}

pub fn inverse(a: &Mat, tol: &Tolerance) -> Result<Mat> {
    let n = a.ensure_square()?;
    solve(a, &Mat::identity(n).with_field(a.field()), tol)
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(a: &Mat) -> Result<Scalar> {
    let n = a.ensure_square()?;
    let mut m = a.clone();
    let mut d = re(1.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&x, &y| m[(x, k)].norm().total_cmp(&m[(y, k)].norm()))
            .unwrap();
        if m[(p, k)].norm() == 0.0 {
            return Ok(re(0.0));
        }
        if p != k {
            for j in 0..n {
                let tmp = m[(k, j)];
                m[(k, j)] = m[(p, j)];
                m[(p, j)] = tmp;
            }
            d = -d;
        }
        let piv = m[(k, k)];
        d *= piv;
        for i in (k + 1)..n {
            let f = m[(i, k)] / piv;
            for j in k..n {
                let t = m[(k, j)];
                m[(i, j)] -= f * t;
            }
        }
    }
    if a.field() == Field::Real {
        d.im = 0.0;
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::nilpotent_block;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&Mat::identity(3), &tol()), 3);
        assert_eq!(rank(&Mat::zeros(4, 2, Field::Real), &tol()), 0);
        assert_eq!(rank(&nilpotent_block(3), &tol()), 2);
        assert_eq!(rank(&Mat::zeros(0, 0, Field::Real), &tol()), 0);
    }

    #[test]
    fn kernel_examples() {
        let k = kernel_basis(&nilpotent_block(2), &tol());
        assert_eq!(k.cols(), 1);
        assert!((k[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(k[(1, 0)].norm() < 1e-14);

        assert_eq!(kernel_basis(&Mat::identity(2), &tol()).cols(), 0);

        let k = kernel_basis(&Mat::diag_real(&[0.0, 0.0, 5.0]), &tol());
        assert_eq!(k.cols(), 2);
        for j in 0..2 {
            assert!(k[(2, j)].norm() < 1e-14);
        }
        assert_eq!(k.field(), Field::Real);
    }

    #[test]
    fn solve_examples() {
        let b = Mat::from_real(2, 1, &[3.0, -1.0]);
        assert!(solve(&Mat::identity(2), &b, &tol()).unwrap().approx_eq(&b, 1e-15));
        let x = solve(&Mat::diag_real(&[2.0, 4.0]), &Mat::from_real(2, 1, &[2.0, 8.0]), &tol()).unwrap();
        assert!(x.approx_eq(&Mat::from_real(2, 1, &[1.0, 2.0]), 1e-15));
    }

    #[test]
    fn solve_reports_rank_of_singular_input() {
        let a = Mat::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let err = solve(&a, &Mat::identity(2), &tol()).unwrap_err();
        assert_eq!(err, Error::Singular { rank: 1, dim: 2 });
    }

    #[test]
    fn solve_rejects_nan() {
        let mut a = Mat::identity(2);
        a[(0, 1)] = re(f64::NAN);
        assert!(matches!(solve(&a, &Mat::identity(2), &tol()), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn det_small() {
        let a = Mat::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!((det(&a).unwrap() - re(-2.0)).norm() < 1e-14);
    }
}
