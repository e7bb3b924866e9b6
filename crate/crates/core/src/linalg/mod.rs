//! Dense real/complex matrices, rank and nullspace decisions, linear solves and
//! the matrix exponential.

mod expm;
mod mat;
mod qr;

pub use expm::{expv, matexp};
pub use mat::{re, Field, Mat, Scalar};
pub use qr::{det, inverse, kernel_basis, rank, solve};
pub(crate) use qr::{kernel_forced, kernel_scaled, orthonormal_columns, orthonormal_span, pivoted_qr, rank_scaled};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerical thresholds used for every rank, clustering and residual
/// decision.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative singular/pivot threshold for rank decisions.
    pub rank_rel: f64,
    /// Relative eigenvalue clustering radius (times the matrix norm).
    pub eig_cluster_rel: f64,
    /// Absolute residual bound for verification.
    pub residual_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rank_rel: 1e-10, eig_cluster_rel: 1e-8, residual_abs: 1e-8 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.rank_rel) || !ok(self.eig_cluster_rel) || !ok(self.residual_abs) {
            return Err(Error::InvalidArgument("tolerances must be finite and strictly positive".into()));
        }
        if self.rank_rel >= 1.0 || self.eig_cluster_rel >= 1.0 {
            return Err(Error::InvalidArgument("rank_rel and eig_cluster_rel must be below 1".into()));
        }
        Ok(())
    }
}

/// `basis^H A basis`: the operator induced on an invariant subspace with
/// orthonormal basis.
pub fn restrict(a: &Mat, basis: &Mat) -> Mat {
    basis.adjoint().matmul(&a.matmul(basis)).with_field(a.field().join(basis.field()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::special::nilpotent_block;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::default().validate().is_ok());
        assert!(Tolerance { rank_rel: 0.0, ..Default::default() }.validate().is_err());
        assert!(Tolerance { eig_cluster_rel: 1.5, ..Default::default() }.validate().is_err());
        assert!(Tolerance { residual_abs: f64::NAN, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn matexp_at_zero_is_identity() {
        let a = Mat::from_real_rows(&[&[1.0, 2.0], &[-3.0, 0.5]]);
        assert!(matexp(&a, 0.0).unwrap().approx_eq(&Mat::identity(2), 0.0));
    }

    #[test]
    fn matexp_nilpotent_two() {
        for &t in &[-3.0, 0.25, 1.0, 40.0] {
            let e = matexp(&nilpotent_block(2), t).unwrap();
            assert!(e.approx_eq(&Mat::from_real_rows(&[&[1.0, t], &[0.0, 1.0]]), 1e-12 * (1.0 + t.abs())));
        }
    }

    #[test]
    fn matexp_rotation_and_diagonal() {
        let rot = Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let e = matexp(&rot, 1.3).unwrap();
        let (c, s) = (1.3f64.cos(), 1.3f64.sin());
        assert!(e.approx_eq(&Mat::from_real_rows(&[&[c, -s], &[s, c]]), 1e-14));

        let d = Mat::diag_real(&[-2.0, 0.5, 3.0]);
        let e = matexp(&d, 7.0).unwrap();
        for (i, &l) in [-2.0f64, 0.5, 3.0].iter().enumerate() {
            let want = (7.0 * l).exp();
            assert!((e[(i, i)].re - want).abs() <= 1e-12 * want, "{} vs {}", e[(i, i)].re, want);
        }
    }

    #[test]
    fn matexp_large_norm_diagonal_is_componentwise_accurate() {
        // ||tA|| = 1000
        let d = Mat::diag_real(&[-1.0, 0.25, 1.0]);
        let e = matexp(&d, 1000.0).unwrap();
        let want = [(-1000.0f64).exp(), 250f64.exp(), 1000f64.exp()];
        for i in 0..3 {
            if want[i].is_finite() && want[i] > 0.0 {
                assert!((e[(i, i)].re / want[i] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matexp_rejects_non_square() {
        assert!(matches!(matexp(&Mat::zeros(2, 3, Field::Real), 1.0), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn solve_random_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let tol = Tolerance::default();
        for _ in 0..20 {
            let a = sample::conditioned(&mut rng, 5, 10.0);
            let b = sample::gaussian(&mut rng, 5, 2);
            let x = solve(&a, &b, &tol).unwrap();
            let r = (&a.matmul(&x) - &b).norm_fro();
            assert!(r <= tol.residual_abs * (1.0 + b.norm_fro()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn flow_axiom(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = sample::gaussian(&mut rng, 6, 6);
            let nrm = a.norm_fro();
            if nrm > 5.0 {
                a = a.scale_real(5.0 / nrm);
            }
            let lhs = matexp(&a, s + t).unwrap();
            let rhs = matexp(&a, s).unwrap().matmul(&matexp(&a, t).unwrap());
            let scale = 1.0 + lhs.norm_fro();
            prop_assert!(lhs.max_abs_diff(&rhs) <= Tolerance::default().residual_abs * scale);
        }

        #[test]
        fn rank_nullity(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, r in 0usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = r.min(rows).min(cols);
            let a = sample::gaussian(&mut rng, rows, r).matmul(&sample::gaussian(&mut rng, r, cols));
            let tol = Tolerance::default();
            prop_assert_eq!(rank(&a, &tol) + kernel_basis(&a, &tol).cols(), cols);
            prop_assert_eq!(rank(&a, &tol), r);
        }

        #[test]
        fn matexp_commutes_with_similarity(seed in any::<u64>(), t in -1.5f64..1.5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = sample::gaussian(&mut rng, 5, 5);
            let s = sample::conditioned(&mut rng, 5, 1e3);
            let tol = Tolerance::default();
            let s_inv = inverse(&s, &tol).unwrap();
            let lhs = matexp(&s.matmul(&a).matmul(&s_inv), t).unwrap();
            let rhs = s.matmul(&matexp(&a, t).unwrap()).matmul(&s_inv);
            // entries of S e^{tA} S^-1 carry cond(S) amplification
            let scale = 1.0 + rhs.norm_fro();
            prop_assert!(lhs.max_abs_diff(&rhs) <= tol.residual_abs * scale);
        }
    }
}
