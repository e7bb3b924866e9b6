//! Special matrices behind the nilpotent-block computations: the power
//! diagonal `D_m(ω)`, the nilpotent Jordan block `J_m`, the reciprocal Gamma
//! function, and the Toeplitz-type matrix `Δ_{m,n}^{[ω]}` whose entries are
//! reciprocal Gamma values.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{re, Field, Mat, Scalar};

/// `diag[1, ω, …, ω^{m-1}]`.
pub fn diag_powers(m: usize, omega: Scalar) -> Mat {
    let field = if omega.im == 0.0 { Field::Real } else { Field::Complex };
    let mut p = re(1.0);
    let mut d = Vec::with_capacity(m);
    for _ in 0..m {
        d.push(p);
        p *= omega;
    }
    Mat::diag(&d, field)
}

/// Nilpotent Jordan block: ones on the superdiagonal.
pub fn nilpotent_block(m: usize) -> Mat {
    Mat::from_fn(m, m, Field::Real, |i, j| if j == i + 1 { re(1.0) } else { re(0.0) })
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Exact zero is returned within this distance of a non-positive integer.
const POLE_SNAP: f64 = 1e-12;

/// `1/Γ(z)`, an entire function: exactly zero at `0, -1, -2, …`.
pub fn recip_gamma(z: Scalar) -> Scalar {
    if z.im == 0.0 {
        return re(recip_gamma_real(z.re));
    }
    if z.re < 0.5 {
        // 1/Γ(z) = Γ(1-z) sin(πz) / π
        let s = (z * PI).sin();
        return s / lanczos_recip(Complex64::new(1.0, 0.0) - z) / PI;
    }
    lanczos_recip(z)
}

fn recip_gamma_real(x: f64) -> f64 {
    let nearest = x.round();
    if nearest <= 0.0 && (x - nearest).abs() <= POLE_SNAP {
        return 0.0;
    }
    if x < 0.5 {
        // sin(πx) evaluated on the reduced argument for accuracy at large |x|
        let k = nearest;
        let sign = if (k as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let s = sign * (PI * (x - k)).sin();
        return s * gamma_pos(1.0 - x) / PI;
    }
    1.0 / gamma_pos(x)
}

/// Γ(x) for x ≥ 0.5 via the Lanczos series; integers use the exact factorial.
fn gamma_pos(x: f64) -> f64 {
    if x == x.round() && x <= 171.0 {
        return (1..x as u64).fold(1.0, |acc, k| acc * k as f64);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * w.powf(x + 0.5) * (-w).exp() * sum
}

fn lanczos_recip(z: Complex64) -> Complex64 {
    let x = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let w = x + LANCZOS_G + 0.5;
    let log_gamma = 0.5 * (2.0 * PI).ln() + (x + 0.5) * w.ln() - w + sum.ln();
    (-log_gamma).exp()
}

/// Shape and parameter of a `Δ_{m,n}^{[ω]}` matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSpec {
    pub m: usize,
    pub n: usize,
    pub omega: Scalar,
}

impl DeltaSpec {
    pub fn new(m: usize, n: usize, omega: Scalar) -> Result<DeltaSpec> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument("Δ needs m, n ≥ 1".into()));
        }
        Ok(DeltaSpec { m, n, omega })
    }

    pub fn real(m: usize, n: usize, omega: f64) -> Result<DeltaSpec> {
        DeltaSpec::new(m, n, re(omega))
    }
}

/// Entry `(r, c)` (1-based) is `1/Γ(ω + c − r + 1)`.
pub fn delta_matrix(spec: &DeltaSpec) -> Mat {
    let field = if spec.omega.im == 0.0 { Field::Real } else { Field::Complex };
    Mat::from_fn(spec.m, spec.n, field, |i, j| {
        // 0-based i, j: ω + (j+1) − (i+1) + 1
        recip_gamma(spec.omega + re(j as f64 - i as f64 + 1.0))
    })
}

/// Zero-sized blocks are legal (they appear when `j = m`).
fn delta(m: usize, n: usize, omega: f64) -> Mat {
    if m == 0 || n == 0 {
        return Mat::zeros(m, n, Field::Real);
    }
    delta_matrix(&DeltaSpec { m, n, omega: re(omega) })
}

/// `e^{tJ_m}` assembled blockwise from `D` and `Δ` matrices, with row split
/// `(j, m−j)` and column split `(m−j, j)`:
///
/// ```text
/// [ D_j⁻¹ Δ_{j,m−j}^{[0]} D_{m−j}              t^{m−j}  D_j⁻¹ Δ_{j,j}^{[m−j]} D_j     ]
/// [ t^{−j} D_{m−j}⁻¹ Δ_{m−j,m−j}^{[−j]} D_{m−j}  t^{m−2j} D_{m−j}⁻¹ Δ_{m−j,j}^{[m−2j]} D_j ]
/// ```
/// with every `D` evaluated at `t`.
pub fn exp_block_partition(m: usize, j: usize, t: f64) -> Result<Mat> {
    if j == 0 || j > m {
        return Err(Error::InvalidArgument(format!("need 1 ≤ j ≤ m, got j={j}, m={m}")));
    }
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument("the block partition needs a finite t ≠ 0".into()));
    }
    let k = m - j;
    let d = |size: usize| diag_powers(size, re(t));
    let d_inv = |size: usize| diag_powers(size, re(1.0 / t));
    let tp = |p: i32| t.powi(p);

    let top_left = d_inv(j).matmul(&delta(j, k, 0.0)).matmul(&d(k));
    let top_right = d_inv(j).matmul(&delta(j, j, k as f64)).matmul(&d(j)).scale_real(tp(k as i32));
    let bottom_left = d_inv(k).matmul(&delta(k, k, -(j as f64))).matmul(&d(k)).scale_real(tp(-(j as i32)));
    let bottom_right = d_inv(k)
        .matmul(&delta(k, j, k as f64 - j as f64))
        .matmul(&d(j))
        .scale_real(tp(k as i32 - j as i32));

    let mut out = Mat::zeros(m, m, Field::Real);
    out.set_block(0, 0, &top_left);
    out.set_block(0, k, &top_right);
    out.set_block(j, 0, &bottom_left);
    out.set_block(j, k, &bottom_right);
    Ok(out)
}

/// `e^{tJ_m}` from the terminating series, entry `(r, c) = t^{c−r}/(c−r)!`.
pub fn exp_nilpotent(m: usize, t: f64) -> Mat {
    Mat::from_fn(m, m, Field::Real, |r, c| {
        if c < r {
            re(0.0)
        } else {
            let k = c - r;
            let fact: f64 = (1..=k).map(|x| x as f64).product();
            re(t.powi(k as i32) / fact)
        }
    })
}

/// Sampling resolution for [`lower_bound_nu_with`].
#[derive(Clone, Copy, Debug)]
pub struct NuGrid {
    /// Log-spaced magnitudes per sign of t in `[1e-3, 1e3]`.
    pub t_points: usize,
    /// Fixed pseudo-random unit vectors (the ± coordinate vectors are added).
    pub x_points: usize,
}

impl Default for NuGrid {
    fn default() -> Self {
        NuGrid { t_points: 241, x_points: 256 }
    }
}

/// Empirical lower-bound constant: the minimum over the default grid of
/// `‖e^{tJ_m}x‖·√(1+t^{2m−2})` for unit `x`. A numeric estimate, not a proof.
pub fn lower_bound_nu(m: usize) -> f64 {
    lower_bound_nu_with(m, NuGrid::default())
}

pub fn lower_bound_nu_with(m: usize, grid: NuGrid) -> f64 {
    assert!(m >= 1, "lower_bound_nu needs m ≥ 1");
    let mut ts = vec![0.0];
    let steps = grid.t_points.max(2);
    for k in 0..steps {
        let u = -3.0 + 6.0 * k as f64 / (steps - 1) as f64;
        let t = 10f64.powf(u);
        ts.push(t);
        ts.push(-t);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + m as u64);
    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(grid.x_points + 2 * m);
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; m];
            e[i] = s;
            xs.push(e);
        }
    }
    while xs.len() < grid.x_points + 2 * m {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            xs.push(v.iter().map(|x| x / n).collect());
        }
    }
    let mut best = f64::INFINITY;
    for &t in &ts {
        let e = exp_nilpotent(m, t);
        let weight = (1.0 + t.powi(2 * m as i32 - 2)).sqrt();
        for x in &xs {
            let y: f64 = (0..m)
                .map(|r| {
                    let s: f64 = (r..m).map(|c| e[(r, c)].re * x[c]).sum();
                    s * s
                })
                .sum::<f64>()
                .sqrt();
            best = best.min(y * weight);
        }
    }
    best
}
