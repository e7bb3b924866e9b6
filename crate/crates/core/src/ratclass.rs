//! Rational classes of the frequencies of a bounded linear flow, their
//! common minimal periods, and dimensions of periodic subspaces.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_span, restrict, Field, Mat, Tolerance};
use crate::spectral::{analyze, analyze_scaled, Analysis};

pub const DEFAULT_QMAX: u64 = 64;

/// Frequencies rationally dependent on the smallest one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalClass {
    /// Ascending; the first member is the generator.
    pub members: Vec<f64>,
    pub generator: f64,
    /// Reduced `(p, q)` with `member ≈ (p/q)·generator`.
    pub ratios: Vec<(u64, u64)>,
    pub period: f64,
    /// Eigenspace dimension (complex) of each member.
    pub member_dims: Vec<usize>,
    /// Relative residual `|s/s₁ − p/q| / (s/s₁)` of each accepted ratio.
    pub margins: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalPartition {
    /// `dim ker A`.
    pub fixed_dim: usize,
    /// Ordered by largest member, descending.
    pub classes: Vec<RationalClass>,
    /// Smallest relative residual among rejected ratios, if any were
    /// rejected: how close the partition came to merging two classes.
    pub closest_rejection: Option<f64>,
}

impl RationalPartition {
    /// Dimension of the bounded subspace.
    pub fn bounded_dim(&self) -> usize {
        self.fixed_dim + self.classes.iter().map(|c| 2 * c.member_dims.iter().sum::<usize>()).sum::<usize>()
    }
}

/// Best rational approximation `p/q` of `x > 0` with `q ≤ qmax`, from the
/// continued fraction convergents and the last semiconvergent.
pub fn best_rational(x: f64, qmax: u64) -> (u64, u64) {
    assert!(x > 0.0 && x.is_finite() && qmax >= 1);
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a >= (u64::MAX / 4) as f64 {
            break;
        }
        let a = a as u64;
        let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0));
        let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0));
        let (Some(p2), Some(q2)) = (p2, q2) else { break };
        if q2 > qmax {
            let k = (qmax - q0) / q1;
            let (ps, qs) = (k * p1 + p0, k * q1 + q0);
            if k > 0 && (x - ps as f64 / qs as f64).abs() < (x - p1 as f64 / q1 as f64).abs() {
                return (ps, qs);
            }
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac <= 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    (p1, q1)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `T = (2π/s₁)·lcm(q_i)`.
pub fn class_period(cls: &RationalClass) -> Result<f64> {
    let mut l: u64 = 1;
    for &(_, q) in &cls.ratios {
        let g = gcd(l, q);
        l = (l / g)
            .checked_mul(q)
            .filter(|&v| v <= i64::MAX as u64)
            .ok_or_else(|| Error::Overflow(format!("lcm of ratio denominators exceeds 2^63 at q={q}")))?;
    }
    Ok(2.0 * PI / cls.generator * l as f64)
}

/// Analysis of a generator required to be bounded: purely imaginary and
/// semisimple spectrum. Complex input is realified.
pub(crate) fn bounded_analysis(a: &Mat, tol: &Tolerance, which: &str) -> Result<Analysis> {
    let a = if a.field() == Field::Complex { crate::equiv::realify(a) } else { a.clone() };
    require_bounded(analyze(&a, tol)?, which)
}

fn require_bounded(an: Analysis, which: &str) -> Result<Analysis> {
    for c in &an.clusters {
        if c.value.re != 0.0 {
            return Err(Error::NotBounded {
                which: which.into(),
                detail: format!("eigenvalue {} has nonzero real part", c.value),
            });
        }
        if c.weyr.len() > 1 {
            return Err(Error::NotBounded {
                which: which.into(),
                detail: format!("eigenvalue {} is not semisimple (Weyr {:?})", c.value, c.weyr),
            });
        }
    }
    Ok(an)
}

/// Rational classes of the flow restricted to its bounded subspace; works
/// for any generator. Complex input is realified.
pub fn bounded_part_partition(a: &Mat, tol: &Tolerance, qmax: u64) -> Result<RationalPartition> {
    if qmax == 0 {
        return Err(Error::InvalidArgument("qmax must be at least 1".into()));
    }
    let ra = crate::equiv::realify(a);
    let bnd = crate::cores::bounded_subspace(&ra, tol)?;
    let q = orthonormal_span(&bnd.basis, tol.rank_rel.sqrt());
    let an = require_bounded(analyze_scaled(&restrict(&ra, &q), tol, ra.norm_fro())?, "a")?;
    partition_of(&an, tol, qmax)
}

pub fn rational_partition(a: &Mat, tol: &Tolerance, qmax: u64) -> Result<RationalPartition> {
    if qmax == 0 {
        return Err(Error::InvalidArgument("qmax must be at least 1".into()));
    }
    let an = bounded_analysis(a, tol, "a")?;
    partition_of(&an, tol, qmax)
}

pub(crate) fn partition_of(an: &Analysis, tol: &Tolerance, qmax: u64) -> Result<RationalPartition> {
    let fixed_dim = an.clusters.iter().filter(|c| c.value.im == 0.0).map(|c| c.alg_mult()).sum();
    let mut freqs: Vec<(f64, usize)> =
        an.clusters.iter().filter(|c| c.pair).map(|c| (c.value.im, c.alg_mult())).collect();
    freqs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut assigned = vec![false; freqs.len()];
    let mut classes = Vec::new();
    let mut closest_rejection: Option<f64> = None;
    for i in 0..freqs.len() {
        if assigned[i] {
            continue;
        }
        let s1 = freqs[i].0;
        let mut cls = RationalClass {
            members: Vec::new(),
            generator: s1,
            ratios: Vec::new(),
            period: 0.0,
            member_dims: Vec::new(),
            margins: Vec::new(),
        };
        for j in i..freqs.len() {
            if assigned[j] {
                continue;
            }
            let r = freqs[j].0 / s1;
            let (p, q) = best_rational(r, qmax);
            let margin = (r - p as f64 / q as f64).abs() / r;
            if margin <= tol.eig_cluster_rel {
                assigned[j] = true;
                cls.members.push(freqs[j].0);
                cls.ratios.push((p, q));
                cls.member_dims.push(freqs[j].1);
                cls.margins.push(margin);
            } else {
                closest_rejection = Some(closest_rejection.map_or(margin, |m: f64| m.min(margin)));
            }
        }
        cls.period = class_period(&cls)?;
        classes.push(cls);
    }
    classes.sort_by(|x, y| {
        let mx = x.members.last().copied().unwrap_or(0.0);
        let my = y.members.last().copied().unwrap_or(0.0);
        my.total_cmp(&mx)
    });
    Ok(RationalPartition { fixed_dim, classes, closest_rejection })
}

/// `dim Per_T`: the fixed space plus every frequency `s` with `T·s/2π ∈ ℕ`.
pub fn periodic_dim(a: &Mat, t: f64, tol: &Tolerance) -> Result<usize> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {t}")));
    }
    let an = bounded_analysis(a, tol, "a")?;
    let mut dim = 0;
    for c in &an.clusters {
        if c.value.im == 0.0 {
            dim += c.alg_mult();
        } else {
            let k = t * c.value.im / (2.0 * PI);
            if (k - k.round()).abs() <= tol.eig_cluster_rel * k.max(1.0) {
                dim += 2 * c.alg_mult();
            }
        }
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{inverse, matexp};
    use crate::sample::{self, real_pair_block};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn rotations(freqs: &[f64]) -> Mat {
        let blocks: Vec<Mat> = freqs.iter().map(|&s| real_pair_block(0.0, s, 1)).collect();
        let refs: Vec<&Mat> = blocks.iter().collect();
        Mat::block_diag(&refs)
    }

    /// Least `T = k·2π/s₁` making every `T·s/2π` an integer, by search.
    fn brute_force_period(members: &[f64]) -> f64 {
        let base = 2.0 * PI / members[0];
        for k in 1..10_000 {
            let t = base * k as f64;
            if members.iter().all(|&s| {
                let x = t * s / (2.0 * PI);
                (x - x.round()).abs() < 1e-9
            }) {
                return t;
            }
        }
        panic!("no period below the search bound");
    }

    #[test]
    fn continued_fractions() {
        assert_eq!(best_rational(1.5, 64), (3, 2));
        assert_eq!(best_rational(3.0, 64), (3, 1));
        assert_eq!(best_rational(PI, 7), (22, 7));
        assert_eq!(best_rational(PI, 64), (201, 64));
        assert_eq!(best_rational(PI, 113), (355, 113));
        assert_eq!(best_rational(0.1, 64), (1, 10));
    }

    #[test]
    fn integer_multiples_form_one_class() {
        let p = rational_partition(&rotations(&[1.0, 2.0, 3.0]), &tol(), DEFAULT_QMAX).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.classes[0].ratios, vec![(1, 1), (2, 1), (3, 1)]);
        assert!((p.classes[0].period - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn pi_splits_classes() {
        let p = rational_partition(&rotations(&[1.0, PI]), &tol(), DEFAULT_QMAX).unwrap();
        assert_eq!(p.classes.len(), 2);
        assert!(p.closest_rejection.unwrap() > tol().eig_cluster_rel);
        // ordered by largest member descending
        assert!((p.classes[0].generator - PI).abs() < 1e-9);
    }

    #[test]
    fn half_integer_ratio() {
        let p = rational_partition(&rotations(&[1.0, 1.5]), &tol(), DEFAULT_QMAX).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.classes[0].ratios, vec![(1, 1), (3, 2)]);
        assert!((p.classes[0].period - 4.0 * PI).abs() < 1e-9);
        assert!((p.classes[0].period - brute_force_period(&[1.0, 1.5])).abs() < 1e-10);
    }

    #[test]
    fn period_examples() {
        let cls = |members: Vec<f64>, ratios: Vec<(u64, u64)>| RationalClass {
            generator: members[0],
            member_dims: vec![1; members.len()],
            margins: vec![0.0; members.len()],
            members,
            ratios,
            period: 0.0,
        };
        assert!((class_period(&cls(vec![1.0], vec![(1, 1)])).unwrap() - 2.0 * PI).abs() < 1e-12);
        let c = cls(vec![2.0, 3.0], vec![(1, 1), (3, 2)]);
        let t = class_period(&c).unwrap();
        assert!((t - 2.0 * PI).abs() < 1e-12);
        assert!((t - brute_force_period(&[2.0, 3.0])).abs() < 1e-10);
        let big = cls(vec![1.0, 1.0, 1.0], vec![(1, 1), (1, 1 << 40), (1, (1 << 40) - 1)]);
        assert!(matches!(class_period(&big), Err(Error::Overflow(_))));
    }

    #[test]
    fn periodic_dimensions() {
        let rot = rotations(&[1.0]);
        assert_eq!(periodic_dim(&rot, 2.0 * PI, &tol()).unwrap(), 2);
        assert_eq!(periodic_dim(&rot, PI, &tol()).unwrap(), 0);
        assert_eq!(periodic_dim(&rotations(&[1.0, 2.0]), 2.0 * PI, &tol()).unwrap(), 4);
        assert_eq!(periodic_dim(&rotations(&[1.0, 2.0]), PI, &tol()).unwrap(), 2);
        let with_fix = Mat::block_diag(&[&rot, &Mat::zeros(1, 1, Field::Real)]);
        assert_eq!(periodic_dim(&with_fix, 1.0, &tol()).unwrap(), 1);
    }

    #[test]
    fn bounded_part_of_unbounded_flow() {
        let a = Mat::block_diag(&[&rotations(&[1.0, 1.5]), &Mat::diag_real(&[2.0, -1.0]), &crate::special::nilpotent_block(2)]);
        let p = bounded_part_partition(&a, &tol(), DEFAULT_QMAX).unwrap();
        assert_eq!(p.classes.len(), 1);
        assert_eq!(p.fixed_dim, 1);
        assert!((p.classes[0].period - 4.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn unbounded_inputs_rejected() {
        let e = rational_partition(&Mat::diag_real(&[1.0, -1.0]), &tol(), 64);
        assert!(matches!(e, Err(Error::NotBounded { .. })));
        let e = rational_partition(&crate::special::nilpotent_block(2), &tol(), 64);
        assert!(matches!(e, Err(Error::NotBounded { .. })));
    }

    #[test]
    fn period_is_minimal_on_each_class() {
        let a = rotations(&[1.0, 1.5, PI]);
        let p = rational_partition(&a, &tol(), DEFAULT_QMAX).unwrap();
        for cls in &p.classes {
            // class subspace: coordinates of the member rotation planes
            let idx: Vec<usize> = cls
                .members
                .iter()
                .flat_map(|&s| {
                    let k = [1.0, 1.5, PI].iter().position(|&x| (x - s).abs() < 1e-9).unwrap();
                    [2 * k, 2 * k + 1]
                })
                .collect();
            let basis = orthonormal_span(&Mat::identity(6).select_cols(&idx), 1e-12);
            let at = |t: f64| crate::linalg::restrict(&matexp(&a, t).unwrap(), &basis);
            let id = Mat::identity(idx.len());
            assert!(at(cls.period).approx_eq(&id, 1e-8));
            for k in 1..100 {
                let t = cls.period * k as f64 / 100.0;
                assert!(!at(t).approx_eq(&id, 1e-8), "t={t}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn similarity_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = rotations(&[1.0, 1.5, PI, 2.0]);
            let s = sample::conditioned(&mut rng, 8, 1e3);
            let b = s.matmul(&a).matmul(&inverse(&s, &tol()).unwrap());
            let pa = rational_partition(&a, &tol(), DEFAULT_QMAX).unwrap();
            let pb = rational_partition(&b, &tol(), DEFAULT_QMAX).unwrap();
            prop_assert_eq!(pa.classes.len(), pb.classes.len());
            for (x, y) in pa.classes.iter().zip(&pb.classes) {
                prop_assert_eq!(&x.ratios, &y.ratios);
                prop_assert!((x.period - y.period).abs() < 1e-6 * x.period);
            }
        }
    }
}
