//! Cores, zero-cores, iterated cores and the bounded-orbit subspace of a real
//! linear flow, read off a real Jordan basis, plus the dimension profile
//! `c_n(s)` / `d_n(s)` that recovers central Jordan block counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kernel_scaled, orthonormal_columns, orthonormal_span, rank_scaled, restrict, Field, Mat, Scalar, Tolerance};
use crate::spectral::{jordan_basis, jordan_basis_scaled, BlockPos, JordanBasis};

/// Invariant subspace with an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: Mat,
    pub ambient_dim: usize,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    fn from_columns(cols: Mat) -> Subspace {
        let ambient_dim = cols.rows();
        Subspace { basis: orthonormal_columns(&cols), ambient_dim }
    }

    /// `self ⊆ other`, decided by the rank of the stacked bases.
    pub fn is_within(&self, other: &Subspace, tol: &Tolerance) -> bool {
        let stacked = Mat::hstack(&[&other.basis, &self.basis], self.ambient_dim);
        rank_scaled(&stacked, span_rel(tol), 1.0) == other.dim()
    }

    /// `dim(self ∩ other)`.
    pub fn intersection_dim(&self, other: &Subspace, tol: &Tolerance) -> usize {
        let stacked = Mat::hstack(&[&self.basis, &other.basis], self.ambient_dim);
        self.dim() + other.dim() - rank_scaled(&stacked, span_rel(tol), 1.0)
    }
}

/// Threshold for comparing computed orthonormal bases: chain vectors carry
/// errors well above `rank_rel` once blocks are defective.
fn span_rel(tol: &Tolerance) -> f64 {
    tol.rank_rel.sqrt()
}

/// `n` with its base-2 digits in ascending order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryIndex {
    pub n: u64,
    pub digits: Vec<u8>,
}

impl BinaryIndex {
    pub fn new(n: u64) -> BinaryIndex {
        let mut digits = Vec::new();
        let mut k = n;
        while k > 0 {
            digits.push((k & 1) as u8);
            k >>= 1;
        }
        BinaryIndex { n, digits }
    }
}

/// `c_n(s)` for `n = 0..=ambient_dim` and `d_n(s) = c_{n−1}(s) − c_n(s)`
/// for `n = 1..=ambient_dim`, at one central frequency `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub s: f64,
    pub c: Vec<usize>,
    pub d: Vec<usize>,
}

impl FrequencyProfile {
    /// `d_n(s)`, zero outside the tabulated range.
    pub fn d(&self, n: usize) -> usize {
        if n == 0 {
            0
        } else {
            self.d.get(n - 1).copied().unwrap_or(0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreProfile {
    pub ambient_dim: usize,
    /// Frequency 0 first, then positive central frequencies ascending.
    pub frequencies: Vec<FrequencyProfile>,
}

impl CoreProfile {
    pub fn at(&self, s: f64, tol: f64) -> Option<&FrequencyProfile> {
        self.frequencies.iter().find(|f| (f.s - s).abs() <= tol)
    }
}

fn require_real(a: &Mat) -> Result<()> {
    a.ensure_square()?;
    if a.field() != Field::Real {
        return Err(Error::FieldMismatch("cores are defined for real generators; realify complex input first".into()));
    }
    Ok(())
}

fn is_central(b: &BlockPos) -> bool {
    b.eigenvalue.re == 0.0
}

/// Columns of the Jordan basis selected by `count(block size)` leading chain
/// vectors per central block (both halves of a pair block).
fn leading_chain_vectors(jb: &JordanBasis, count: impl Fn(usize) -> usize) -> Subspace {
    let mut idx = Vec::new();
    for b in jb.blocks.iter().filter(|b| is_central(b)) {
        let k = count(b.size).min(b.size);
        idx.extend(b.offset..b.offset + k);
        if b.pair {
            idx.extend(b.offset + b.size..b.offset + b.size + k);
        }
    }
    Subspace::from_columns(jb.p.select_cols(&idx))
}

fn core_from_basis(jb: &JordanBasis) -> Subspace {
    leading_chain_vectors(jb, |m| m.div_ceil(2))
}

fn zero_core_from_basis(jb: &JordanBasis) -> Subspace {
    leading_chain_vectors(jb, |m| m / 2)
}

pub fn core(a: &Mat, tol: &Tolerance) -> Result<Subspace> {
    require_real(a)?;
    Ok(core_from_basis(&jordan_basis(a, tol)?))
}

pub fn zero_core(a: &Mat, tol: &Tolerance) -> Result<Subspace> {
    require_real(a)?;
    Ok(zero_core_from_basis(&jordan_basis(a, tol)?))
}

/// Eigenvectors of the purely imaginary (including zero) spectrum.
pub fn bounded_subspace(a: &Mat, tol: &Tolerance) -> Result<Subspace> {
    iterated_core(a, 0, tol)
}

/// Closed form: each central block of size `m > n` contributes its
/// eigenvector (both halves for a pair block).
fn iterated_core_closed(jb: &JordanBasis, n: u64) -> Subspace {
    leading_chain_vectors(jb, |m| usize::from(m as u64 > n))
}

/// Recursive form: core for digit 0, zero-core for digit 1, on successive
/// restrictions, then cores until the dimension stops changing.
fn iterated_core_recursive(a: &Mat, n: u64, tol: &Tolerance) -> Result<Subspace> {
    let dim = a.rows();
    let scale = a.norm_fro();
    let mut w = Mat::identity(dim);
    let mut b = a.clone();
    let digits = BinaryIndex::new(n).digits;
    let cap = digits.len() + dim + 1;
    for step in 0..cap {
        if w.cols() == 0 {
            break;
        }
        let jb = jordan_basis_scaled(&b, tol, scale)?;
        let next = match digits.get(step) {
            Some(1) => zero_core_from_basis(&jb),
            Some(_) => core_from_basis(&jb),
            None => {
                let c = core_from_basis(&jb);
                if c.dim() == b.rows() {
                    break;
                }
                c
            }
        };
        w = w.matmul(&next.basis);
        b = restrict(&b, &next.basis);
    }
    Ok(Subspace { basis: w, ambient_dim: dim })
}

/// `C^{ε(n)}`, computed recursively and in closed form; the two must agree.
pub fn iterated_core(a: &Mat, n: u64, tol: &Tolerance) -> Result<Subspace> {
    require_real(a)?;
    let jb = jordan_basis(a, tol)?;
    iterated_core_checked(a, &jb, n, tol)
}

/// Both forms of `C^{ε(n)}` without the agreement check:
/// `(recursive, closed)`.
pub fn iterated_core_forms(a: &Mat, n: u64, tol: &Tolerance) -> Result<(Subspace, Subspace)> {
    require_real(a)?;
    let jb = jordan_basis(a, tol)?;
    Ok((iterated_core_recursive(a, n, tol)?, iterated_core_closed(&jb, n)))
}

fn iterated_core_checked(a: &Mat, jb: &JordanBasis, n: u64, tol: &Tolerance) -> Result<Subspace> {
    let closed = iterated_core_closed(jb, n);
    let rec = iterated_core_recursive(a, n, tol)?;
    if closed.dim() != rec.dim() || !rec.is_within(&closed, tol) {
        return Err(Error::Inconsistent(format!(
            "iterated core for n={n}: recursive dimension {} vs closed form {}",
            rec.dim(),
            closed.dim()
        )));
    }
    Ok(closed)
}

/// Real span of `ker(A − isI)` (of `ker A` for `s = 0`).
fn eigenspace_real(a: &Mat, s: f64, tol: &Tolerance) -> Subspace {
    let dim = a.rows();
    let k = kernel_scaled(&a.shift(Scalar::new(0.0, s)), tol.rank_rel, a.norm_fro());
    let cols = if s == 0.0 {
        k.with_field(Field::Real)
    } else {
        orthonormal_span(&Mat::hstack(&[&k.real_part(), &k.imag_part()], dim), span_rel(tol))
    };
    Subspace { basis: cols, ambient_dim: dim }
}

pub fn core_profile(a: &Mat, tol: &Tolerance) -> Result<CoreProfile> {
    require_real(a)?;
    let dim = a.rows();
    let jb = jordan_basis(a, tol)?;
    let mut freqs = vec![0.0];
    for b in jb.blocks.iter().filter(|b| b.pair && is_central(b)) {
        if !freqs.contains(&b.eigenvalue.im) {
            freqs.push(b.eigenvalue.im);
        }
    }
    freqs[1..].sort_by(f64::total_cmp);
    let spaces: Vec<Subspace> = freqs.iter().map(|&s| eigenspace_real(a, s, tol)).collect();
    let mut c = vec![Vec::with_capacity(dim + 1); freqs.len()];
    for n in 0..=dim {
        let it = iterated_core_checked(a, &jb, n as u64, tol)?;
        for (cs, x) in c.iter_mut().zip(&spaces) {
            cs.push(x.intersection_dim(&it, tol));
        }
    }
    let frequencies = freqs
        .into_iter()
        .zip(c)
        .map(|(s, c)| {
            let d = c.windows(2).map(|w| w[0].saturating_sub(w[1])).collect();
            FrequencyProfile { s, c, d }
        })
        .collect();
    Ok(CoreProfile { ambient_dim: dim, frequencies })
}
