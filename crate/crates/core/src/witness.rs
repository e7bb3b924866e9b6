//! Numerical witnesses: conjugacy residuals of certificates, explicit core
//! membership sequences for nilpotent and imaginary-pair blocks, and an
//! empirical orbit-boundedness probe.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expv, inverse, matexp, rank, re, Field, Mat, Scalar, Tolerance};
use crate::special::{delta_matrix, DeltaSpec};

/// Times at which certificates are checked.
pub const CONJUGACY_GRID: [f64; 8] = [-20.0, -5.0, -1.0, -0.1, 0.1, 1.0, 5.0, 20.0];

/// Factor applied to `residual_abs` for exponential-based checks.
pub const CONJUGACY_SLACK: f64 = 1e2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    /// Time at which `max_residual` occurred.
    pub worst_t: f64,
    pub grid: Vec<f64>,
    pub bound: f64,
    pub pass: bool,
}

/// Checks `h·e^{ta} = e^{αtb}·h` on [`CONJUGACY_GRID`]. The residual at each
/// `t` is `‖h e^{ta} − e^{αtb} h‖_F / ((1 + ‖h‖_F)·max(1, ‖e^{ta}‖_F, ‖e^{αtb}‖_F))`;
/// the extra exponential factor keeps hyperbolic parts, whose exponentials
/// reach `e^{20|λ|}`, on a relative footing.
pub fn verify_conjugacy(a: &Mat, b: &Mat, h: &Mat, alpha: f64, tol: &Tolerance) -> Result<ResidualReport> {
    tol.validate()?;
    let n = a.ensure_square()?;
    if b.ensure_square()? != n || h.rows() != n || h.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "a is {n}×{n}, b is {}×{}, h is {}×{}",
            b.rows(),
            b.cols(),
            h.rows(),
            h.cols()
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    h.ensure_finite()?;
    let r = rank(h, tol);
    if r < n {
        return Err(Error::Singular { rank: r, dim: n });
    }
    let hn = h.norm_fro();
    let mut max_residual = 0.0;
    let mut worst_t = CONJUGACY_GRID[0];
    for &t in &CONJUGACY_GRID {
        let ea = matexp(a, t)?;
        let eb = matexp(b, alpha * t)?;
        let diff = (&h.matmul(&ea) - &eb.matmul(h)).norm_fro();
        let res = diff / ((1.0 + hn) * 1f64.max(ea.norm_fro()).max(eb.norm_fro()));
        if !(res <= max_residual) {
            max_residual = res;
            worst_t = t;
        }
    }
    let bound = tol.residual_abs * CONJUGACY_SLACK;
    Ok(ResidualReport { max_residual, worst_t, grid: CONJUGACY_GRID.to_vec(), bound, pass: max_residual <= bound })
}

/// Irreducible central block carrying a witness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessBlock {
    /// `J_m`.
    Nilpotent(usize),
    /// `[[J_m, −bI], [bI, J_m]]` of real dimension `2m`.
    Pair { size: usize, freq: f64 },
}

impl From<usize> for WitnessBlock {
    fn from(m: usize) -> Self {
        WitnessBlock::Nilpotent(m)
    }
}

fn delta(m: usize, n: usize, omega: f64) -> Mat {
    delta_matrix(&DeltaSpec { m, n, omega: re(omega) })
}

fn invert_delta(m: usize, omega: f64) -> Result<Mat> {
    let tol = Tolerance { rank_rel: 1e-14, ..Tolerance::default() };
    inverse(&delta(m, m, omega), &tol).map_err(|_| {
        Error::Inconsistent(format!("Δ_{{{m},{m}}}^[{omega}] is numerically singular"))
    })
}

/// `t^{shift}·D_r(t)⁻¹·K·D_c(t)` entrywise, so no large intermediate
/// products are formed.
fn conjugate_by_powers(k: &Mat, t: f64, shift: i32) -> Mat {
    Mat::from_fn(k.rows(), k.cols(), k.field(), |r, c| k.data()[r * k.cols() + c] * t.powi(shift - r as i32 + c as i32))
}

/// Witness for `J_m` alone. `v.len()` selects the construction:
/// `⌊m/2⌋` gives a zero-core sequence (`Φ_t x_t → 0`), `⌈m/2⌉` for odd `m`
/// a core sequence (`Φ_t x_t` bounded).
fn nilpotent_witness(m: usize, v: &[Scalar], t: f64) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    let d = m / 2;
    let zero = re(0.0);
    if v.len() == d {
        if d == 0 {
            return Ok((vec![zero; m], vec![zero; m]));
        }
        let vm = Mat::column_vector(v, field_of(v));
        let (tail, image) = if m % 2 == 1 {
            // rows split (d+1, d), columns split (d, d+1)
            let inv = invert_delta(d + 1, d as f64)?;
            let k = inv.matmul(&delta(d + 1, d, 0.0));
            let tail = conjugate_by_powers(&k, t, -(d as i32)).scale_real(-1.0).matmul(&vm);
            let k2 = delta(d, d + 1, -1.0).matmul(&k);
            let image = conjugate_by_powers(&k2, t, -(d as i32) - 1).scale_real(-1.0).matmul(&vm);
            (tail, image)
        } else {
            let inv = invert_delta(d, d as f64)?;
            let k = inv.matmul(&delta(d, d, 0.0));
            let tail = conjugate_by_powers(&k, t, -(d as i32)).scale_real(-1.0).matmul(&vm);
            let k2 = delta(d, d, 0.0).matmul(&k);
            let image = conjugate_by_powers(&k2, t, -(d as i32)).scale_real(-1.0).matmul(&vm);
            (tail, image)
        };
        let mut x = v.to_vec();
        x.extend(tail.col(0));
        let mut y = vec![zero; m - image.rows()];
        y.extend(image.col(0));
        return Ok((x, y));
    }
    if m % 2 == 1 && v.len() == d + 1 {
        if d == 0 {
            return Ok((v.to_vec(), v.to_vec()));
        }
        // rows split (d, d+1), columns split (d+1, d)
        let w = Mat::column_vector(v, field_of(v));
        let inv = invert_delta(d, (d + 1) as f64)?;
        let k = inv.matmul(&delta(d, d + 1, 0.0));
        let tail = conjugate_by_powers(&k, t, -(d as i32) - 1).scale_real(-1.0).matmul(&w);
        let k2 = &delta(d + 1, d + 1, -(d as f64)) - &delta(d + 1, d, 1.0).matmul(&k);
        let image = conjugate_by_powers(&k2, t, -(d as i32)).matmul(&w);
        let mut x = v.to_vec();
        x.extend(tail.col(0));
        let mut y = vec![zero; d];
        y.extend(image.col(0));
        return Ok((x, y));
    }
    let want = if m % 2 == 1 { format!("{d} or {}", d + 1) } else { d.to_string() };
    Err(Error::InvalidArgument(format!("witness vector for a block of size {m} must have length {want}, got {}", v.len())))
}

/// Returns `(x_t, Φ_t x_t)` for the flow of `block`, assembled from the
/// blockwise closed form of `e^{tJ_m}`. For a nilpotent block of size `m`,
/// `v` has length `⌊m/2⌋` (zero-core: `x_t → [v; 0]`, `Φ_t x_t → 0` as
/// `|t| → ∞`) or, for odd `m`, `⌈m/2⌉` (core: `Φ_t x_t` stays bounded).
/// A pair block takes the concatenation of two such vectors, one per half.
pub fn core_witness(block: impl Into<WitnessBlock>, v: &[Scalar], t: f64) -> Result<(Vec<Scalar>, Vec<Scalar>)> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::InvalidArgument("core witnesses need a finite t ≠ 0".into()));
    }
    if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidArgument("witness vector must be finite".into()));
    }
    match block.into() {
        WitnessBlock::Nilpotent(m) => {
            if m == 0 {
                return Err(Error::InvalidArgument("block size must be at least 1".into()));
            }
            nilpotent_witness(m, v, t)
        }
        WitnessBlock::Pair { size, freq } => {
            if size == 0 || !(freq > 0.0 && freq.is_finite()) {
                return Err(Error::InvalidArgument("pair blocks need size ≥ 1 and a positive frequency".into()));
            }
            if v.len() % 2 != 0 {
                return Err(Error::InvalidArgument("pair witness vectors split into two equal halves".into()));
            }
            let (v1, v2) = v.split_at(v.len() / 2);
            let (x1, y1) = nilpotent_witness(size, v1, t)?;
            let (x2, y2) = nilpotent_witness(size, v2, t)?;
            let (c, s) = ((freq * t).cos(), (freq * t).sin());
            let mut x = x1;
            x.extend(x2);
            let mut y: Vec<Scalar> = y1.iter().zip(&y2).map(|(p, q)| p * c - q * s).collect();
            y.extend(y1.iter().zip(&y2).map(|(p, q)| p * s + q * c));
            Ok((x, y))
        }
    }
}

/// Empirical proxy for a bounded orbit: `‖e^{ta}x‖ ≤ 10³·(1 + ‖x‖)` at
/// `samples` evenly spaced `t ∈ [−horizon, horizon]`. Falsifiable, not a
/// proof; slowly growing orbits need a horizon beyond their growth scale.
pub fn orbit_bounded(a: &Mat, x: &[Scalar], horizon: f64, samples: usize) -> Result<bool> {
    a.ensure_finite()?;
    let bound = 1e3 * (1.0 + norm(x));
    let samples = samples.max(2);
    for k in 0..samples {
        let t = -horizon + 2.0 * horizon * k as f64 / (samples - 1) as f64;
        let y = expv(a, t, x)?;
        if !(norm(&y) <= bound) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn norm(x: &[Scalar]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn field_of(v: &[Scalar]) -> Field {
    if v.iter().all(|z| z.im == 0.0) {
        Field::Real
    } else {
        Field::Complex
    }
}
