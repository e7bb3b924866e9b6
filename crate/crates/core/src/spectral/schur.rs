//! Eigenvalues by Householder reduction to upper Hessenberg form followed by
//! shifted complex QR iteration with Givens rotations and deflation.

use crate::error::{Error, Result};
use crate::linalg::{re, Mat, Scalar};

const MAX_ITER_PER_EIGENVALUE: usize = 60;

pub(crate) fn hessenberg(a: &Mat) -> Mat {
    let n = a.rows();
    let mut h = a.clone().with_field(crate::linalg::Field::Complex);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Scalar> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let ph = if x[0].norm() == 0.0 { re(1.0) } else { x[0] / x[0].norm() };
        let mut v = x;
        v[0] += ph * norm_x;
        let vn = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in &mut v {
            *z /= vn;
        }
        // H <- (I - 2vv^H) H
        for j in 0..n {
            let dot: Scalar = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= vi * dot * 2.0;
            }
        }
        // H <- H (I - 2vv^H)
        for i in 0..n {
            let dot: Scalar = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= dot * vi.conj() * 2.0;
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = re(0.0);
        }
    }
    h
}

fn wilkinson(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Scalar {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d) * 0.5;
    let l1 = mid + disc;
    let l2 = mid - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues of a square matrix, with multiplicity.
pub(crate) fn eigenvalues(a: &Mat) -> Result<Vec<Scalar>> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = hessenberg(a);
    let mut eig = vec![re(0.0); n];
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let anorm = h.norm_fro().max(f64::MIN_POSITIVE);

    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // locate the active unreduced window [lo, hi]
        let mut lo = hi;
        while lo > 0 {
            // normwise criterion: zero-diagonal defective blocks converge
            // only linearly and would never pass a purely local test
            let s = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if h[(lo, lo - 1)].norm() <= f64::EPSILON * s.max(anorm) {
                h[(lo, lo - 1)] = re(0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }

        iter += 1;
        total += 1;
        if iter > MAX_ITER_PER_EIGENVALUE {
            return Err(Error::NoConvergence { iterations: total });
        }
        let mu = if iter % 11 == 0 {
            // exceptional shift to break cycles
            h[(hi, hi)] + re(h[(hi, hi - 1)].norm() * 0.75) + Scalar::new(0.0, h[(hi, hi - 1)].norm() * 0.4375)
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rot = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let x = h[(k, k)];
            let y = h[(k + 1, k)];
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let (c, s) = if r == 0.0 { (re(1.0), re(0.0)) } else { (x / r, y / r) };
            for j in k..=hi {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = c.conj() * p + s.conj() * q;
                h[(k + 1, j)] = -s * p + c * q;
            }
            rot.push((c, s));
        }
        for (idx, k) in (lo..hi).enumerate() {
            let (c, s) = rot[idx];
            let top = (k + 2).min(hi);
            for i in lo..=top {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s;
                h[(i, k + 1)] = -p * s.conj() + q * c.conj();
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(eig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Field;
    use crate::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sorted(mut v: Vec<Scalar>) -> Vec<Scalar> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample::gaussian(&mut rng, 6, 6);
        let h = hessenberg(&a);
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.norm_fro() - a.norm_fro()).abs() < 1e-12);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], re(0.0));
            }
        }
    }

    #[test]
    fn diagonal_and_rotation() {
        let e = sorted(eigenvalues(&Mat::diag_real(&[3.0, -1.0, 2.0])).unwrap());
        let want = [-1.0, 2.0, 3.0];
        for (z, w) in e.iter().zip(want) {
            assert!((z - re(w)).norm() < 1e-14);
        }
        let rot = Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let e = sorted(eigenvalues(&rot).unwrap());
        assert!((e[0] - Scalar::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Scalar::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn similarity_transform_of_planted_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let d = Mat::diag_real(&[-2.0, -0.5, 0.25, 1.0, 4.0]);
        let s = sample::conditioned(&mut rng, 5, 100.0);
        let a = s.matmul(&d).matmul(&crate::linalg::inverse(&s, &Default::default()).unwrap());
        let e = sorted(eigenvalues(&a).unwrap());
        for (z, w) in e.iter().zip([-2.0, -0.5, 0.25, 1.0, 4.0]) {
            assert!((z - re(w)).norm() < 1e-10, "{z} vs {w}");
        }
    }

    #[test]
    fn complex_input() {
        let a = Mat::diag(&[Scalar::new(1.0, 2.0), Scalar::new(-3.0, 0.5)], Field::Complex);
        let e = sorted(eigenvalues(&a).unwrap());
        assert!((e[0] - Scalar::new(-3.0, 0.5)).norm() < 1e-14);
        assert!((e[1] - Scalar::new(1.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn trace_and_count_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=12 {
            let a = sample::gaussian(&mut rng, n, n);
            let e = eigenvalues(&a).unwrap();
            assert_eq!(e.len(), n);
            let tr: Scalar = e.iter().sum();
            assert!((tr - a.trace()).norm() < 1e-9 * (1.0 + a.norm_fro()));
        }
    }

    #[test]
    fn empty_matrix() {
        assert!(eigenvalues(&Mat::zeros(0, 0, Field::Real)).unwrap().is_empty());
    }
}
