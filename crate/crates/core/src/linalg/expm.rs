//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant.

use super::mat::Mat;
use super::qr::solve;
use super::Tolerance;
use crate::error::Result;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

/// `e^{tA}`.
pub fn matexp(a: &Mat, t: f64) -> Result<Mat> {
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    let field = a.field();
    if n == 0 || t == 0.0 {
        return Ok(Mat::identity(n).with_field(field));
    }
    let ta = a.scale_real(t);
    let norm = ta.norm_one();
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = ta.scale_real(2f64.powi(-s));

    let id = Mat::identity(n).with_field(field);
    let a2 = scaled.matmul(&scaled);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Mat {
        let mut m = a6.scale_real(c6);
        m = &m + &a4.scale_real(c4);
        m = &m + &a2.scale_real(c2);
        &m + &id.scale_real(c0)
    };
    let u_inner = &a6.matmul(&lin(b[13], b[11], b[9], 0.0)) + &lin(b[7], b[5], b[3], b[1]);
    let u = scaled.matmul(&u_inner);
    let v = &a6.matmul(&lin(b[12], b[10], b[8], 0.0)) + &lin(b[6], b[4], b[2], b[0]);

    // The Padé denominator is well conditioned for ||A|| <= theta13; a tiny
    // rank threshold keeps solve from rejecting it.
    let tol = Tolerance { rank_rel: 1e-15, ..Tolerance::default() };
    let mut r = solve(&(&v - &u), &(&v + &u), &tol)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r.with_field(field))
}

/// `e^{tA} x` for a single vector.
pub fn expv(a: &Mat, t: f64, x: &[super::Scalar]) -> Result<Vec<super::Scalar>> {
    Ok(matexp(a, t)?.mul_vec(x))
}
