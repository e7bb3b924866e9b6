//! Seeded random matrices for stress tests and self-checks: Gaussian
//! matrices, orthogonal factors, transforms with a prescribed condition
//! number, and generators with planted real Jordan structure.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{re, Field, Mat, Scalar};
use crate::special::nilpotent_block;

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, Field::Real, |_, _| re(StandardNormal.sample(rng)))
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, Field::Complex, |_, _| {
        Scalar::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

/// Haar-ish random orthogonal matrix (Q factor of a Gaussian matrix).
pub fn orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Mat {
    let g = gaussian(rng, n, n);
    crate::linalg::orthonormal_span(&g, 1e-14)
}

/// Random real `n×n` transform with 2-norm condition number at most `cond`:
/// `U diag(σ) V` with log-uniform singular values in `[1, cond]`.
pub fn conditioned<R: Rng + ?Sized>(rng: &mut R, n: usize, cond: f64) -> Mat {
    assert!(cond >= 1.0);
    let u = orthogonal(rng, n);
    let v = orthogonal(rng, n);
    let mut sig: Vec<f64> = (0..n).map(|_| cond.powf(rng.random::<f64>())).collect();
    if n >= 2 {
        sig[0] = 1.0;
        sig[n - 1] = cond;
    }
    u.matmul(&Mat::diag_real(&sig)).matmul(&v)
}

/// One block of a planted real Jordan form.
#[derive(Clone, Debug, PartialEq)]
pub enum PlantedBlock {
    /// `λ I + J_m` with real λ.
    Real { eigenvalue: f64, size: usize },
    /// Real block of complex size `m` for `a ± ib`, real dimension `2m`.
    Pair { re: f64, im: f64, size: usize },
}

impl PlantedBlock {
    pub fn real_dim(&self) -> usize {
        match *self {
            PlantedBlock::Real { size, .. } => size,
            PlantedBlock::Pair { size, .. } => 2 * size,
        }
    }

    pub fn matrix(&self) -> Mat {
        match *self {
            PlantedBlock::Real { eigenvalue, size } => {
                nilpotent_block(size).shift(re(-eigenvalue))
            }
            PlantedBlock::Pair { re: a, im: b, size } => real_pair_block(a, b, size),
        }
    }
}

/// `[[aI + J, -bI], [bI, aI + J]]` of size `2m`.
pub fn real_pair_block(a: f64, b: f64, m: usize) -> Mat {
    let j = nilpotent_block(m).shift(re(-a));
    let bi = Mat::identity(m).scale_real(b);
    let mut out = Mat::zeros(2 * m, 2 * m, Field::Real);
    out.set_block(0, 0, &j);
    out.set_block(0, m, &bi.scale_real(-1.0));
    out.set_block(m, 0, &bi);
    out.set_block(m, m, &j);
    out
}

pub fn planted_matrix(blocks: &[PlantedBlock]) -> Mat {
    let mats: Vec<Mat> = blocks.iter().map(PlantedBlock::matrix).collect();
    let refs: Vec<&Mat> = mats.iter().collect();
    Mat::block_diag(&refs)
}

/// Random mix of zero, imaginary-pair and hyperbolic blocks with total real
/// dimension in `1..=max_dim`. Eigenvalues are drawn from small separated
/// sets so that clusters stay resolvable.
pub fn random_structure<R: Rng + ?Sized>(rng: &mut R, max_dim: usize) -> Vec<PlantedBlock> {
    let target = rng.random_range(1..=max_dim);
    let mut dim = 0;
    let mut blocks = Vec::new();
    let freqs = [1.0, 2.0, 3.5];
    let hyper = [-2.0, -1.0, 1.0, 1.5];
    while dim < target {
        let left = target - dim;
        let kind = rng.random_range(0..3u8);
        let block = match kind {
            0 => PlantedBlock::Real { eigenvalue: 0.0, size: rng.random_range(1..=left.min(5)) },
            1 if left >= 2 => PlantedBlock::Pair {
                re: 0.0,
                im: freqs[rng.random_range(0..freqs.len())],
                size: rng.random_range(1..=(left / 2).min(3)),
            },
            2 if left >= 2 && rng.random_bool(0.3) => PlantedBlock::Pair {
                re: hyper[rng.random_range(0..hyper.len())],
                im: freqs[rng.random_range(0..freqs.len())],
                size: 1,
            },
            _ => PlantedBlock::Real {
                eigenvalue: hyper[rng.random_range(0..hyper.len())],
                size: rng.random_range(1..=left.min(2)),
            },
        };
        dim += block.real_dim();
        blocks.push(block);
    }
    blocks
}
