//! Equivalence decisions: similarity up to a positive scale, smooth and
//! topological verdicts over ℝ and ℂ, bounded-flow verdicts with their
//! rational-class correspondence, and realification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inverse, re, restrict, Field, Mat, Scalar, Tolerance};
use crate::ratclass::{bounded_analysis, partition_of, DEFAULT_QMAX};
use crate::spectral::{analyze_scaled, jordan_basis_scaled, scu_split, Analysis, JordanBasis};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Topological,
    Smooth,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::Topological => "topological",
            Relation::Smooth => "smooth",
        })
    }
}

/// Admissible scales `α` with `a` similar to `α·b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Alphas {
    /// Both nilpotent with equal block multisets: every `α > 0` works.
    All,
    /// Ascending.
    Finite(Vec<f64>),
}

impl Alphas {
    /// Smallest admissible scale, `1` for `All`.
    pub fn preferred(&self) -> Option<f64> {
        match self {
            Alphas::All => Some(1.0),
            Alphas::Finite(v) => v.first().copied(),
        }
    }

    pub fn contains(&self, alpha: f64, rel: f64) -> bool {
        match self {
            Alphas::All => alpha > 0.0,
            Alphas::Finite(v) => v.iter().any(|&x| (x - alpha).abs() <= rel * alpha.abs()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScaledSimilarity {
    pub holds: bool,
    pub alphas: Alphas,
    /// `H` with `H·a = α·b·H` for `alpha`, when a Jordan basis could be built.
    pub transform: Option<Mat>,
    pub alpha: Option<f64>,
    pub reason: Reason,
}

/// Which criterion decided a verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reason {
    DimensionMismatch { dim_a: usize, dim_b: usize },
    StableUnstableMismatch { dim_s: [usize; 2], dim_u: [usize; 2] },
    /// Both nilpotent with equal Jordan block multisets.
    NilpotentMatch,
    NilpotentMismatch,
    /// Exactly one side is nilpotent.
    NilpotencyDiffers,
    /// Jordan structures agree under `λ ↦ αλ`.
    ScaledStructureMatch { alpha: f64 },
    /// No candidate scale maps one spectrum onto the other with equal
    /// block structure.
    NoAdmissibleScale { candidates: usize },
    /// Equal stable and unstable dimensions and scaled-similar central parts.
    CentralScaledSimilar { dim_s: usize, dim_c: usize, dim_u: usize, central: Box<Reason> },
    CentralNotScaledSimilar { dim_s: usize, dim_c: usize, dim_u: usize, central: Box<Reason> },
}

/// Where a certificate applies: the whole space, or the central parts
/// (`a`, `b` then hold the restricted generators).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Full,
    Central,
}

/// `H·e^{ta} = e^{αtb}·H`, checkable with `witness::verify_conjugacy`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub scope: Scope,
    pub alpha: f64,
    pub h: Mat,
    pub a: Mat,
    pub b: Mat,
}

/// Period ratios between matched rational classes of two bounded flows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalCorrespondence {
    pub classes_a: usize,
    pub classes_b: usize,
    pub periods_a: Vec<f64>,
    pub periods_b: Vec<f64>,
    /// `T_b / T_a` per matched class; all equal to `α` for equivalent flows.
    pub period_ratios: Vec<f64>,
    pub consistent: bool,
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub relation: Relation,
    pub field: Field,
    pub equivalent: bool,
    pub alpha: Option<f64>,
    pub certificate: Option<Certificate>,
    pub reason: Reason,
    pub rational: Option<RationalCorrespondence>,
}

/// `[[Re a, −Im a], [Im a, Re a]]`; real input is returned unchanged.
pub fn realify(a: &Mat) -> Mat {
    if a.field() == Field::Real {
        return a.clone();
    }
    let (r, i) = (a.real_part(), a.imag_part());
    let mut out = Mat::zeros(2 * a.rows(), 2 * a.cols(), Field::Real);
    out.set_block(0, 0, &r);
    out.set_block(0, a.cols(), &i.scale_real(-1.0));
    out.set_block(a.rows(), 0, &i);
    out.set_block(a.rows(), a.cols(), &r);
    out
}

/// Every cluster with its conjugate listed separately: `(value, weyr)`.
fn spectrum(an: &Analysis) -> Vec<(Scalar, &[usize])> {
    let mut out = Vec::new();
    for c in &an.clusters {
        out.push((c.value, c.weyr.as_slice()));
        if c.pair {
            out.push((c.value.conj(), c.weyr.as_slice()));
        }
    }
    out
}

fn is_nilpotent(an: &Analysis) -> bool {
    an.clusters.iter().all(|c| c.value == re(0.0))
}

/// Does `λ ↦ αλ` carry the spectrum of `b` onto that of `a` with equal
/// Weyr characteristics?
fn structures_match(sa: &[(Scalar, &[usize])], sb: &[(Scalar, &[usize])], alpha: f64, thr: f64) -> bool {
    if sa.len() != sb.len() {
        return false;
    }
    let mut used = vec![false; sb.len()];
    for (la, wa) in sa {
        let hit = sb.iter().enumerate().position(|(j, (mb, wb))| {
            !used[j] && (la - mb * alpha).norm() <= thr && wa == wb
        });
        match hit {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

fn check_same_field(a: &Mat, b: &Mat) -> Result<()> {
    if a.field() != b.field() {
        return Err(Error::FieldMismatch(format!(
            "cannot compare a {} generator with a {} one (realify the complex one first)",
            a.field(),
            b.field()
        )));
    }
    Ok(())
}

pub fn similar_up_to_scale(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<ScaledSimilarity> {
    similar_scaled(a, b, tol, (0.0, 0.0))
}

/// As `similar_up_to_scale`, with each side's thresholds relative to at
/// least the given scale; used for restrictions of larger generators.
fn similar_scaled(a: &Mat, b: &Mat, tol: &Tolerance, scales: (f64, f64)) -> Result<ScaledSimilarity> {
    check_same_field(a, b)?;
    let (na, nb) = (a.ensure_square()?, b.ensure_square()?);
    let no = |reason| ScaledSimilarity { holds: false, alphas: Alphas::Finite(Vec::new()), transform: None, alpha: None, reason };
    if na != nb {
        return Ok(no(Reason::DimensionMismatch { dim_a: na, dim_b: nb }));
    }
    let (an_a, an_b) = (analyze_scaled(a, tol, scales.0)?, analyze_scaled(b, tol, scales.1)?);
    let (sa, sb) = (spectrum(&an_a), spectrum(&an_b));

    let (nil_a, nil_b) = (is_nilpotent(&an_a), is_nilpotent(&an_b));
    if nil_a || nil_b {
        if nil_a != nil_b {
            return Ok(no(Reason::NilpotencyDiffers));
        }
        if !structures_match(&sa, &sb, 1.0, 0.0) {
            return Ok(no(Reason::NilpotentMismatch));
        }
        let transform = conjugator(a, b, 1.0, tol, scales)?;
        return Ok(ScaledSimilarity {
            holds: true,
            alphas: Alphas::All,
            transform,
            alpha: Some(1.0),
            reason: Reason::NilpotentMatch,
        });
    }

    let lambda0 = sa.iter().map(|x| x.0).max_by(|x, y| x.norm().total_cmp(&y.norm())).expect("non-nilpotent");
    let mut candidates: Vec<f64> = Vec::new();
    for (mu, _) in &sb {
        if mu.norm() == 0.0 {
            continue;
        }
        let r = lambda0 / mu;
        if r.re > 0.0 && r.im.abs() <= 1e-6 * r.norm() {
            let alpha = r.norm();
            if !candidates.iter().any(|&c| (c - alpha).abs() <= 1e-8 * alpha) {
                candidates.push(alpha);
            }
        }
    }
    candidates.sort_by(f64::total_cmp);
    let mut admissible = Vec::new();
    for &alpha in &candidates {
        let thr = tol.eig_cluster_rel * an_a.norm.max(alpha * an_b.norm);
        if structures_match(&sa, &sb, alpha, thr) {
            admissible.push(alpha);
        }
    }
    if admissible.is_empty() {
        return Ok(no(Reason::NoAdmissibleScale { candidates: candidates.len() }));
    }
    let alpha = admissible[0];
    let transform = conjugator(a, b, alpha, tol, scales)?;
    Ok(ScaledSimilarity {
        holds: true,
        alphas: Alphas::Finite(admissible),
        transform,
        alpha: Some(alpha),
        reason: Reason::ScaledStructureMatch { alpha },
    })
}

/// `H = Q_b·P_a⁻¹` with `Q_b` the Jordan basis of `b`, its blocks reordered
/// to match those of `a` and chain vector `k` scaled by `α^{−(k−1)}`, so that
/// `α·b·Q_b = Q_b·J_a`. `None` when either Jordan basis is ill-conditioned.
fn conjugator(a: &Mat, b: &Mat, alpha: f64, tol: &Tolerance, scales: (f64, f64)) -> Result<Option<Mat>> {
    let (ja, jb) = match (jordan_basis_scaled(a, tol, scales.0), jordan_basis_scaled(b, tol, scales.1)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(Error::IllConditioned { .. }), _) | (_, Err(Error::IllConditioned { .. })) => return Ok(None),
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let n = a.rows();
    if n == 0 {
        return Ok(Some(Mat::zeros(0, 0, a.field())));
    }
    let thr = tol.eig_cluster_rel * a.norm_fro().max(scales.0).max(alpha * b.norm_fro().max(scales.1));
    let q = match matched_columns(&ja, &jb, alpha, thr) {
        Some(q) => q,
        None => return Ok(None),
    };
    let pinv = match inverse(&ja.p, &Tolerance { rank_rel: 1e-14, ..*tol }) {
        Ok(p) => p,
        Err(Error::Singular { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    Ok(Some(q.matmul(&pinv).with_field(a.field())))
}

fn matched_columns(ja: &JordanBasis, jb: &JordanBasis, alpha: f64, thr: f64) -> Option<Mat> {
    let n = ja.p.rows();
    let mut q = Mat::zeros(n, n, jb.p.field());
    let mut used = vec![false; jb.blocks.len()];
    for ba in &ja.blocks {
        let j = jb.blocks.iter().enumerate().position(|(j, bb)| {
            !used[j] && bb.size == ba.size && bb.pair == ba.pair && (ba.eigenvalue - bb.eigenvalue * alpha).norm() <= thr
        })?;
        used[j] = true;
        let bb = &jb.blocks[j];
        let halves = if bb.pair { 2 } else { 1 };
        for h in 0..halves {
            for k in 0..bb.size {
                let scale = alpha.powi(-(k as i32));
                let col: Vec<Scalar> = jb.p.col(bb.offset + h * bb.size + k).iter().map(|z| z * scale).collect();
                q.set_col(ba.offset + h * ba.size + k, &col);
            }
        }
    }
    Some(q)
}

pub fn smooth_verdict(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<Verdict> {
    check_same_field(a, b)?;
    let s = similar_up_to_scale(a, b, tol)?;
    let certificate = match (&s.transform, s.alpha) {
        (Some(h), Some(alpha)) if s.holds => {
            Some(Certificate { scope: Scope::Full, alpha, h: h.clone(), a: a.clone(), b: b.clone() })
        }
        _ => None,
    };
    Ok(Verdict {
        relation: Relation::Smooth,
        field: a.field(),
        equivalent: s.holds,
        alpha: s.alpha,
        certificate,
        reason: s.reason,
        rational: None,
    })
}

pub fn topological_verdict(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<Verdict> {
    check_same_field(a, b)?;
    let field = a.field();
    let (ra, rb) = (realify(a), realify(b));
    let (na, nb) = (ra.ensure_square()?, rb.ensure_square()?);
    let mut v = Verdict {
        relation: Relation::Topological,
        field,
        equivalent: false,
        alpha: None,
        certificate: None,
        reason: Reason::DimensionMismatch { dim_a: na, dim_b: nb },
        rational: None,
    };
    if na != nb {
        return Ok(v);
    }
    let (sa, sb) = (scu_split(&ra, tol)?, scu_split(&rb, tol)?);
    if sa.dim_s != sb.dim_s || sa.dim_u != sb.dim_u {
        v.reason = Reason::StableUnstableMismatch { dim_s: [sa.dim_s, sb.dim_s], dim_u: [sa.dim_u, sb.dim_u] };
        return Ok(v);
    }
    let ca = restrict(&ra, &sa.basis_c);
    let cb = restrict(&rb, &sb.basis_c);
    let s = similar_scaled(&ca, &cb, tol, (ra.norm_fro(), rb.norm_fro()))?;
    let (dim_s, dim_c, dim_u) = (sa.dim_s, sa.dim_c, sa.dim_u);
    let central = Box::new(s.reason.clone());
    v.equivalent = s.holds;
    v.alpha = s.alpha;
    if s.holds {
        v.reason = Reason::CentralScaledSimilar { dim_s, dim_c, dim_u, central };
        if let (Some(h), Some(alpha)) = (s.transform, s.alpha) {
            v.certificate = Some(Certificate { scope: Scope::Central, alpha, h, a: ca, b: cb });
        }
    } else {
        v.reason = Reason::CentralNotScaledSimilar { dim_s, dim_c, dim_u, central };
    }
    Ok(v)
}

/// Topological verdict for bounded flows, with the rational classes of the
/// two spectra matched and their period ratios reported.
pub fn bounded_verdict(a: &Mat, b: &Mat, tol: &Tolerance) -> Result<Verdict> {
    bounded_verdict_with(a, b, tol, DEFAULT_QMAX)
}

pub fn bounded_verdict_with(a: &Mat, b: &Mat, tol: &Tolerance, qmax: u64) -> Result<Verdict> {
    check_same_field(a, b)?;
    let an_a = bounded_analysis(a, tol, "a")?;
    let an_b = bounded_analysis(b, tol, "b")?;
    let mut v = topological_verdict(a, b, tol)?;
    let pa = partition_of(&an_a, tol, qmax)?;
    let pb = partition_of(&an_b, tol, qmax)?;
    let periods_a: Vec<f64> = pa.classes.iter().map(|c| c.period).collect();
    let periods_b: Vec<f64> = pb.classes.iter().map(|c| c.period).collect();
    let period_ratios: Vec<f64> = periods_a.iter().zip(&periods_b).map(|(ta, tb)| tb / ta).collect();
    let consistent = periods_a.len() == periods_b.len()
        && match v.alpha {
            Some(alpha) if v.equivalent => period_ratios.iter().all(|r| (r - alpha).abs() <= 1e-6 * alpha),
            _ => false,
        };
    v.rational = Some(RationalCorrespondence {
        classes_a: periods_a.len(),
        classes_b: periods_b.len(),
        periods_a,
        periods_b,
        period_ratios,
        consistent,
    });
    Ok(v)
}

/// Verdict for the requested relation.
pub fn verdict(relation: Relation, a: &Mat, b: &Mat, tol: &Tolerance) -> Result<Verdict> {
    match relation {
        Relation::Topological => topological_verdict(a, b, tol),
        Relation::Smooth => smooth_verdict(a, b, tol),
    }
}
