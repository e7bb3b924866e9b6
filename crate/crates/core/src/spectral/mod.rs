//! Eigenvalue clusters, Weyr and Jordan structure, Jordan bases and the
//! stable/central/unstable splitting.

mod cluster;
mod schur;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, orthonormal_columns, pivoted_qr, re, Field, Mat, Scalar, Tolerance};
use crate::sample::real_pair_block;

pub(crate) use cluster::{analyze, analyze_scaled, cmp_eigenvalues, Analysis, Cluster};

/// One eigenvalue cluster with its Weyr characteristic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigCluster {
    pub value: Scalar,
    pub alg_mult: usize,
    /// `w_k = dim ker (A − λ)^k − dim ker (A − λ)^{k−1}`.
    pub weyr: Vec<usize>,
}

/// Block sizes at one eigenvalue, sorted descending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanBlocks {
    pub eigenvalue: Scalar,
    pub sizes: Vec<usize>,
}

impl JordanBlocks {
    /// Number of blocks of size exactly `n`.
    pub fn count(&self, n: usize) -> usize {
        self.sizes.iter().filter(|&&s| s == n).count()
    }
}

/// Jordan structure. Over the real field a non-real eigenvalue is listed
/// once, with positive imaginary part, and stands for the conjugate pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JordanStructure {
    pub field: Field,
    pub blocks: Vec<JordanBlocks>,
}

impl JordanStructure {
    pub fn is_pair(&self, b: &JordanBlocks) -> bool {
        self.field == Field::Real && b.eigenvalue.im > 0.0
    }

    /// Ambient dimension (real dimension over the real field).
    pub fn dim(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.sizes.iter().sum::<usize>() * if self.is_pair(b) { 2 } else { 1 })
            .sum()
    }

    /// Block sizes at the eigenvalue within `tol` of `value`, if any.
    pub fn sizes_at(&self, value: Scalar, tol: f64) -> Option<&[usize]> {
        self.blocks.iter().find(|b| (b.eigenvalue - value).norm() <= tol).map(|b| b.sizes.as_slice())
    }
}

/// Position of one Jordan block inside a Jordan basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPos {
    pub eigenvalue: Scalar,
    /// Complex block size; a real pair block occupies `2·size` columns.
    pub size: usize,
    pub offset: usize,
    pub pair: bool,
}

impl BlockPos {
    pub fn width(&self) -> usize {
        if self.pair {
            2 * self.size
        } else {
            self.size
        }
    }
}

/// Basis `P` with `P⁻¹AP` in (real) Jordan form. Chain vectors of each block
/// appear in order `b_1 = N^{s−1}v, …, b_s = v`; a real pair block stores
/// `[u_1..u_s, v_1..v_s]` with `w_k = u_k − i v_k` the complex chain.
#[derive(Clone, Debug)]
pub struct JordanBasis {
    pub p: Mat,
    pub structure: JordanStructure,
    pub blocks: Vec<BlockPos>,
}

impl JordanBasis {
    /// The Jordan form matching `blocks`.
    pub fn form(&self) -> Mat {
        jordan_form(&self.blocks, self.p.field())
    }
}

/// Block-diagonal (real) Jordan matrix for a block list.
pub fn jordan_form(blocks: &[BlockPos], field: Field) -> Mat {
    let mats: Vec<Mat> = blocks
        .iter()
        .map(|b| {
            if b.pair {
                real_pair_block(b.eigenvalue.re, b.eigenvalue.im, b.size)
            } else {
                crate::special::nilpotent_block(b.size).with_field(field).shift(-b.eigenvalue)
            }
        })
        .collect();
    let refs: Vec<&Mat> = mats.iter().collect();
    Mat::block_diag(&refs).with_field(field)
}

/// Stable, central and unstable invariant subspaces with their spectral
/// projections.
#[derive(Clone, Debug)]
pub struct ScuSplit {
    pub dim_s: usize,
    pub dim_c: usize,
    pub dim_u: usize,
    pub basis_s: Mat,
    pub basis_c: Mat,
    pub basis_u: Mat,
    pub proj_s: Mat,
    pub proj_c: Mat,
    pub proj_u: Mat,
}

fn structure_of(an: &Analysis) -> JordanStructure {
    let blocks = an
        .clusters
        .iter()
        .map(|c| {
            let mut sizes = Vec::new();
            for s in (1..=c.weyr.len()).rev() {
                let next = c.weyr.get(s).copied().unwrap_or(0);
                sizes.extend(std::iter::repeat_n(s, c.weyr[s - 1] - next));
            }
            JordanBlocks { eigenvalue: c.value, sizes }
        })
        .collect();
    JordanStructure { field: an.field, blocks }
}

pub fn eigen_clusters(a: &Mat, tol: &Tolerance) -> Result<Vec<EigCluster>> {
    let an = analyze(a, tol)?;
    let mut out = Vec::new();
    for c in &an.clusters {
        out.push(EigCluster { value: c.value, alg_mult: c.alg_mult(), weyr: c.weyr.clone() });
        if c.pair {
            out.push(EigCluster { value: c.value.conj(), alg_mult: c.alg_mult(), weyr: c.weyr.clone() });
        }
    }
    out.sort_by(|x, y| cmp_eigenvalues(x.value, y.value, an.threshold));
    Ok(out)
}

pub fn jordan_structure(a: &Mat, tol: &Tolerance) -> Result<JordanStructure> {
    Ok(structure_of(&analyze(a, tol)?))
}

/// Jordan structure with thresholds relative to at least `scale`.
pub(crate) fn jordan_structure_scaled(a: &Mat, tol: &Tolerance, scale: f64) -> Result<JordanStructure> {
    Ok(structure_of(&analyze_scaled(a, tol, scale)?))
}

/// Jordan chains of one cluster, largest blocks first.
fn cluster_chains(a: &Mat, c: &Cluster) -> Vec<Vec<Vec<Scalar>>> {
    let n = a.rows();
    let nm = a.shift(c.value);
    let depth = c.weyr.len();
    let mut heads: Vec<(usize, Vec<Scalar>)> = Vec::new();
    for s in (1..=depth).rev() {
        let count = c.weyr[s - 1] - c.weyr.get(s).copied().unwrap_or(0);
        if count == 0 {
            continue;
        }
        let mut span: Vec<Mat> = Vec::new();
        if s > 1 {
            span.push(c.chain[s - 2].clone());
        }
        for (t, v) in &heads {
            let mut x = v.clone();
            for _ in 0..(t - s) {
                x = nm.mul_vec(&x);
            }
            span.push(Mat::column_vector(&x, nm.field()));
        }
        let ks = &c.chain[s - 1];
        let x = if span.is_empty() {
            ks.clone()
        } else {
            let refs: Vec<&Mat> = span.iter().collect();
            let q = orthonormal_columns(&Mat::hstack(&refs, n));
            ks - &q.matmul(&q.adjoint().matmul(ks))
        };
        let q = pivoted_qr(&x).q;
        for j in 0..count {
            heads.push((s, q.col(j)));
        }
    }
    heads
        .into_iter()
        .map(|(s, v)| {
            let mut chain = vec![v];
            for _ in 1..s {
                let next = nm.mul_vec(chain.last().unwrap());
                chain.push(next);
            }
            chain.reverse();
            let scale = chain.iter().map(|x| x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).fold(0.0, f64::max);
            if scale > 0.0 {
                for x in &mut chain {
                    for z in x.iter_mut() {
                        *z /= scale;
                    }
                }
            }
            chain
        })
        .collect()
}

/// Frobenius-norm condition estimate `‖P‖·‖P⁻¹‖`.
fn condition(p: &Mat) -> Result<f64> {
    let tol = Tolerance { rank_rel: 1e-14, ..Tolerance::default() };
    match inverse(p, &tol) {
        Ok(inv) => Ok(p.norm_fro() * inv.norm_fro()),
        Err(Error::Singular { .. }) => Err(Error::IllConditioned { condition: f64::INFINITY }),
        Err(e) => Err(e),
    }
}

/// Jordan basis over the field of `a`: real Jordan form for real input,
/// complex Jordan form otherwise.
pub fn jordan_basis(a: &Mat, tol: &Tolerance) -> Result<JordanBasis> {
    jordan_basis_scaled(a, tol, 0.0)
}

/// Jordan basis with thresholds relative to at least `scale`.
pub(crate) fn jordan_basis_scaled(a: &Mat, tol: &Tolerance, scale: f64) -> Result<JordanBasis> {
    let an = analyze_scaled(a, tol, scale)?;
    let n = an.dim;
    let field = an.field;
    let mut cols: Vec<Vec<Scalar>> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    for c in &an.clusters {
        for chain in cluster_chains(a, c) {
            let offset = cols.len();
            let size = chain.len();
            if c.pair {
                cols.extend(chain.iter().map(|w| w.iter().map(|z| re(z.re)).collect::<Vec<_>>()));
                cols.extend(chain.iter().map(|w| w.iter().map(|z| re(-z.im)).collect::<Vec<_>>()));
            } else {
                cols.extend(chain);
            }
            blocks.push(BlockPos { eigenvalue: c.value, size, offset, pair: c.pair });
        }
    }
    let p = Mat::from_fn(n, n, field, |i, j| cols[j][i]);
    let basis = JordanBasis { p, structure: structure_of(&an), blocks };
    if n > 0 {
        let cond = condition(&basis.p)?;
        let resid = (&a.matmul(&basis.p) - &basis.p.matmul(&basis.form())).norm_fro();
        if !(resid <= tol.residual_abs * an.norm * cond) {
            return Err(Error::IllConditioned { condition: cond });
        }
    }
    Ok(basis)
}

/// Invertible real `P` with `P⁻¹AP` in real Jordan form.
pub fn real_jordan_basis(a: &Mat, tol: &Tolerance) -> Result<(Mat, JordanStructure)> {
    if a.field() != Field::Real {
        return Err(Error::FieldMismatch("real Jordan basis requires a real matrix".into()));
    }
    let b = jordan_basis(a, tol)?;
    Ok((b.p, b.structure))
}

pub fn scu_split(a: &Mat, tol: &Tolerance) -> Result<ScuSplit> {
    let an = analyze(a, tol)?;
    let n = an.dim;
    let field = an.field;
    let mut groups: [Vec<Mat>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for c in &an.clusters {
        let k = c.eigenspace();
        let b = if c.pair { orthonormal_columns(&Mat::hstack(&[&k.real_part(), &k.imag_part()], n)) } else { k.clone() };
        let g = if c.value.re < -an.threshold {
            0
        } else if c.value.re > an.threshold {
            2
        } else {
            1
        };
        groups[g].push(b.with_field(field));
    }
    let bases: Vec<Mat> = groups
        .iter()
        .map(|g| {
            let refs: Vec<&Mat> = g.iter().collect();
            orthonormal_columns(&Mat::hstack(&refs, n)).with_field(field)
        })
        .collect();
    let dims: Vec<usize> = bases.iter().map(Mat::cols).collect();
    let p = Mat::hstack(&[&bases[0], &bases[1], &bases[2]], n);
    let pinv = if n == 0 { p.clone() } else { inverse(&p, tol)? };
    let mut projs = Vec::new();
    let mut r0 = 0;
    for (b, &d) in bases.iter().zip(&dims) {
        projs.push(b.matmul(&pinv.submatrix(r0, r0 + d, 0, n)).with_field(field));
        r0 += d;
    }
    let [proj_s, proj_c, proj_u]: [Mat; 3] = projs.try_into().expect("three projections");
    let [basis_s, basis_c, basis_u]: [Mat; 3] = bases.try_into().expect("three bases");
    Ok(ScuSplit { dim_s: dims[0], dim_c: dims[1], dim_u: dims[2], basis_s, basis_c, basis_u, proj_s, proj_c, proj_u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kernel_basis, rank};
    use crate::sample::{self, PlantedBlock};
    use crate::special::nilpotent_block;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn similar(a: &Mat, s: &Mat) -> Mat {
        s.matmul(a).matmul(&inverse(s, &tol()).unwrap())
    }

    /// Independent Weyr oracle: ranks of powers of `A − λI` at the exact
    /// eigenvalue.
    fn weyr_oracle(a: &Mat, lambda: Scalar) -> Vec<usize> {
        let n = a.rows();
        let nm = a.shift(lambda);
        let mut prev = 0;
        let mut out = Vec::new();
        for k in 1..=n {
            let d = n - rank(&nm.pow(k), &tol());
            if d == prev {
                break;
            }
            out.push(d - prev);
            prev = d;
        }
        out
    }

    #[test]
    fn clusters_of_nilpotent_three() {
        let c = eigen_clusters(&nilpotent_block(3), &tol()).unwrap();
        assert_eq!(c, vec![EigCluster { value: re(0.0), alg_mult: 3, weyr: vec![1, 1, 1] }]);
        assert_eq!(weyr_oracle(&nilpotent_block(3), re(0.0)), vec![1, 1, 1]);
    }

    #[test]
    fn clusters_of_diagonal() {
        let c = eigen_clusters(&Mat::diag_real(&[1.0, 1.0, 2.0]), &tol()).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0].value - re(2.0)).norm() < 1e-12);
        assert_eq!((c[0].alg_mult, c[0].weyr.clone()), (1, vec![1]));
        assert!((c[1].value - re(1.0)).norm() < 1e-12);
        assert_eq!((c[1].alg_mult, c[1].weyr.clone()), (2, vec![2]));
    }

    #[test]
    fn clusters_of_rotation() {
        let rot = Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let c = eigen_clusters(&rot, &tol()).unwrap();
        assert_eq!(c.len(), 2);
        assert!((c[0].value - Scalar::new(0.0, 1.0)).norm() < 1e-12);
        assert!((c[1].value - Scalar::new(0.0, -1.0)).norm() < 1e-12);
        assert!(c.iter().all(|x| x.alg_mult == 1));
    }

    #[test]
    fn structure_examples() {
        let s = jordan_structure(&nilpotent_block(5), &tol()).unwrap();
        assert_eq!(s.blocks, vec![JordanBlocks { eigenvalue: re(0.0), sizes: vec![5] }]);
        let s = jordan_structure(&Mat::diag_real(&[0.0, 0.0]), &tol()).unwrap();
        assert_eq!(s.blocks, vec![JordanBlocks { eigenvalue: re(0.0), sizes: vec![1, 1] }]);
        let s = jordan_structure(&real_pair_block(0.0, 1.0, 2), &tol()).unwrap();
        assert_eq!(s.field, Field::Real);
        assert_eq!(s.blocks.len(), 1);
        assert!((s.blocks[0].eigenvalue - Scalar::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(s.blocks[0].sizes, vec![2]);
        assert_eq!(s.dim(), 4);
        // oracle: rank sequence of (A² + I)^k
        let a = real_pair_block(0.0, 1.0, 2);
        let q = &a.matmul(&a) + &Mat::identity(4);
        assert_eq!(4 - rank(&q, &tol()), 2);
        assert_eq!(4 - rank(&q.matmul(&q), &tol()), 4);
    }

    #[test]
    fn empty_matrix_everywhere() {
        let z = Mat::zeros(0, 0, Field::Real);
        assert!(eigen_clusters(&z, &tol()).unwrap().is_empty());
        assert!(jordan_structure(&z, &tol()).unwrap().blocks.is_empty());
        let split = scu_split(&z, &tol()).unwrap();
        assert_eq!((split.dim_s, split.dim_c, split.dim_u), (0, 0, 0));
        assert_eq!(real_jordan_basis(&z, &tol()).unwrap().0.rows(), 0);
    }

    #[test]
    fn jordan_basis_of_jordan_input() {
        let a = Mat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let (p, s) = real_jordan_basis(&a, &tol()).unwrap();
        assert_eq!(s.sizes_at(re(1.0), 1e-12), Some(&[2][..]));
        let pinv = inverse(&p, &tol()).unwrap();
        let j = pinv.matmul(&a).matmul(&p);
        assert!(j.approx_eq(&a, 1e-12));
    }

    #[test]
    fn jordan_basis_of_similar_nilpotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s = sample::gaussian(&mut rng, 3, 3);
        let a = similar(&nilpotent_block(3), &s);
        let b = jordan_basis(&a, &tol()).unwrap();
        assert_eq!(b.structure.blocks[0].sizes, vec![3]);
        let cond = condition(&b.p).unwrap();
        let resid = (&a.matmul(&b.p) - &b.p.matmul(&b.form())).norm_fro();
        assert!(resid <= tol().residual_abs * a.norm_fro() * cond);
    }

    #[test]
    fn jordan_basis_rejects_complex_field() {
        let a = Mat::identity(2).with_field(Field::Complex);
        assert!(matches!(real_jordan_basis(&a, &tol()), Err(Error::FieldMismatch(_))));
        assert!(jordan_basis(&a, &tol()).is_ok());
    }

    #[test]
    fn scu_examples() {
        let s = scu_split(&Mat::diag_real(&[-1.0, 0.0, 2.0]), &tol()).unwrap();
        assert_eq!((s.dim_s, s.dim_c, s.dim_u), (1, 1, 1));
        let s = scu_split(&Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]), &tol()).unwrap();
        assert_eq!((s.dim_s, s.dim_c, s.dim_u), (0, 2, 0));
        let s = scu_split(&Mat::diag_real(&[1.0, -1.0]), &tol()).unwrap();
        assert_eq!((s.dim_s, s.dim_c, s.dim_u), (1, 0, 1));
    }

    #[test]
    fn kernel_of_central_block() {
        let a = sample::planted_matrix(&[
            PlantedBlock::Real { eigenvalue: 0.0, size: 2 },
            PlantedBlock::Real { eigenvalue: -3.0, size: 1 },
        ]);
        let s = scu_split(&a, &tol()).unwrap();
        assert_eq!(s.dim_c, 2);
        assert_eq!(kernel_basis(&s.basis_c.adjoint().matmul(&a.matmul(&s.basis_c)), &tol()).cols(), 1);
    }

    fn assert_structure_eq(x: &JordanStructure, y: &JordanStructure) {
        assert_eq!(x.blocks.len(), y.blocks.len(), "{x:?} vs {y:?}");
        for (bx, by) in x.blocks.iter().zip(&y.blocks) {
            assert!((bx.eigenvalue - by.eigenvalue).norm() < 1e-6, "{x:?} vs {y:?}");
            assert_eq!(bx.sizes, by.sizes);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn structure_is_similarity_invariant(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planted = sample::random_structure(&mut rng, 8);
            let a = sample::planted_matrix(&planted);
            let s = sample::conditioned(&mut rng, a.rows(), 1e3);
            let b = similar(&a, &s);
            let sa = jordan_structure(&a, &tol()).unwrap();
            let sb = jordan_structure(&b, &tol()).unwrap();
            assert_structure_eq(&sa, &sb);
            prop_assert_eq!(sa.dim(), a.rows());
            let clusters = eigen_clusters(&b, &tol()).unwrap();
            prop_assert_eq!(clusters.iter().map(|c| c.alg_mult).sum::<usize>(), a.rows());
            for c in &clusters {
                prop_assert!(c.weyr.windows(2).all(|w| w[0] >= w[1]));
                prop_assert_eq!(c.weyr.iter().sum::<usize>(), c.alg_mult);
            }
        }

        #[test]
        fn projections_commute_and_sum_to_identity(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planted = sample::random_structure(&mut rng, 8);
            let a = sample::planted_matrix(&planted);
            let s = sample::conditioned(&mut rng, a.rows(), 10.0);
            let b = similar(&a, &s);
            let split = scu_split(&b, &tol()).unwrap();
            let n = b.rows();
            prop_assert_eq!(split.dim_s + split.dim_c + split.dim_u, n);
            let sum = &(&split.proj_s + &split.proj_c) + &split.proj_u;
            prop_assert!(sum.approx_eq(&Mat::identity(n), tol().residual_abs));
            for p in [&split.proj_s, &split.proj_c, &split.proj_u] {
                let scale = 1.0 + p.norm_fro() * b.norm_fro();
                prop_assert!(p.matmul(&b).max_abs_diff(&b.matmul(p)) <= tol().residual_abs * scale);
                prop_assert!(p.matmul(p).max_abs_diff(p) <= tol().residual_abs * (1.0 + p.norm_fro()));
            }
        }

        #[test]
        fn hyperbolic_has_no_central_part(seed in any::<u64>(), n in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = sample::gaussian(&mut rng, n, n);
            // shift the spectrum away from the imaginary axis
            let d: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 3.0 } else { -3.0 }).collect();
            let a = &Mat::diag_real(&d) + &g.scale_real(0.2 / (1.0 + g.norm_fro()));
            let split = scu_split(&a, &tol()).unwrap();
            prop_assert_eq!(split.dim_c, 0);
        }

        #[test]
        fn jordan_basis_residual(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let planted = sample::random_structure(&mut rng, 8);
            let a = sample::planted_matrix(&planted);
            let s = sample::conditioned(&mut rng, a.rows(), 10.0);
            let b = similar(&a, &s);
            let jb = jordan_basis(&b, &tol()).unwrap();
            prop_assert_eq!(jb.p.field(), Field::Real);
            let cond = condition(&jb.p).unwrap();
            let resid = (&b.matmul(&jb.p) - &jb.p.matmul(&jb.form())).norm_fro();
            prop_assert!(resid <= tol().residual_abs * b.norm_fro() * cond);
        }
    }
}
