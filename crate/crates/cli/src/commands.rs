use std::path::Path;

use linflow::canonical::{catalog_2x2, descriptor, partition_by_class};
use linflow::cores::core_profile;
use linflow::equiv::{bounded_verdict_with, realify, verdict, Relation, Verdict};
use linflow::linalg::{det, inverse, matexp};
use linflow::ratclass::bounded_part_partition;
use linflow::special::{delta_matrix, diag_powers, exp_block_partition, nilpotent_block, recip_gamma, DeltaSpec};
use linflow::spectral::{eigen_clusters, jordan_structure, scu_split};
use linflow::witness::verify_conjugacy;
use linflow::{Error, Field, Mat, Scalar, Tolerance};
use rayon::prelude::*;

use crate::args::{CompareArgs, GlobalOpts};
use crate::error::CliError;
use crate::matrix_io::{load, MatrixDocument};
use crate::report::*;

/// Result of one command: its outcome, the inputs read, and the exit code.
pub struct Run {
    pub inputs: Vec<InputInfo>,
    pub outcome: Outcome,
    pub exit_code: u8,
}

pub fn classify(input: &str, g: &GlobalOpts) -> Result<Run, CliError> {
    let tol = g.tolerance();
    let a = load(input, g.field())?;
    let dim = a.ensure_square()?;
    let split = scu_split(&a, &tol)?;
    let ra = realify(&a);
    let partition = bounded_part_partition(&a, &tol, g.qmax)?;
    let bounded_dim = partition.bounded_dim();
    let result = ClassifyResult {
        field: a.field(),
        dim,
        split: Split { dim_s: split.dim_s, dim_c: split.dim_c, dim_u: split.dim_u },
        eigenvalues: eigen_clusters(&a, &tol)?,
        jordan: jordan_structure(&a, &tol)?,
        topological: descriptor(&a, Relation::Topological, &tol)?,
        smooth: descriptor(&a, Relation::Smooth, &tol)?,
        bounded: BoundedSummary {
            real_dim: ra.rows(),
            bounded_dim,
            fixed_dim: partition.fixed_dim,
            all_bounded: bounded_dim == ra.rows(),
        },
        cores: core_profile(&ra, &tol)?,
        rational: (!partition.classes.is_empty()).then_some(partition),
    };
    Ok(Run { inputs: vec![InputInfo::new(input, &a)], outcome: Outcome::Classify(Box::new(result)), exit_code: 0 })
}

/// Topological verdicts of two bounded flows also carry their rational
/// class correspondence.
fn decide(relation: Relation, a: &Mat, b: &Mat, tol: &Tolerance, qmax: u64) -> Result<Verdict, Error> {
    if relation == Relation::Topological {
        match bounded_verdict_with(a, b, tol, qmax) {
            Err(Error::NotBounded { .. }) => {}
            other => return other,
        }
    }
    verdict(relation, a, b, tol)
}

fn compare_pair(
    a: &Mat,
    b: &Mat,
    relation: Relation,
    realified: bool,
    g: &GlobalOpts,
    certificate_out: Option<&Path>,
) -> Result<(CompareResult, u8), CliError> {
    let tol = g.tolerance();
    let (a, b) = if realified { (realify(a), realify(b)) } else { (a.clone(), b.clone()) };
    let v = decide(relation, &a, &b, &tol, g.qmax)?;
    let certificate = match &v.certificate {
        None => None,
        Some(c) => {
            let residual = verify_conjugacy(&c.a, &c.b, &c.h, c.alpha, &tol)?;
            let doc = MatrixDocument::from_mat(&c.h);
            let written_to = match certificate_out {
                Some(p) => {
                    let text = serde_json::to_string_pretty(&doc).expect("matrix document serializes") + "\n";
                    std::fs::write(p, text)
                        .map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?;
                    Some(p.display().to_string())
                }
                None => None,
            };
            Some(CertificateReport { scope: c.scope, alpha: c.alpha, h: doc, residual, written_to })
        }
    };
    if let Some(c) = &certificate {
        if !c.residual.pass {
            return Err(Error::Inconsistent(format!(
                "certificate residual {} exceeds {}",
                c.residual.max_residual, c.residual.bound
            ))
            .into());
        }
    }
    let code = if v.equivalent { 0 } else { 1 };
    let result = CompareResult {
        relation: v.relation,
        field: v.field,
        realified,
        equivalent: v.equivalent,
        alpha: v.alpha,
        reason: v.reason,
        rational: v.rational,
        certificate,
    };
    Ok((result, code))
}

pub fn compare(args: &CompareArgs, g: &GlobalOpts) -> Result<Run, CliError> {
    let relation = Relation::from(args.relation);
    if let Some(batch) = &args.batch {
        if args.certificate_out.is_some() {
            return Err(CliError::Input("--certificate-out cannot be combined with --batch".into()));
        }
        return compare_batch(batch, relation, args.realify, g);
    }
    let (sa, sb) = (args.a.as_deref().unwrap_or_default(), args.b.as_deref().unwrap_or_default());
    let a = load(sa, g.field())?;
    let b = load(sb, g.field())?;
    let inputs = vec![InputInfo::new(sa, &a), InputInfo::new(sb, &b)];
    let (result, exit_code) = compare_pair(&a, &b, relation, args.realify, g, args.certificate_out.as_deref())?;
    Ok(Run { inputs, outcome: Outcome::Compare(Box::new(result)), exit_code })
}

fn batch_item(line: usize, text: &str, relation: Relation, realified: bool, g: &GlobalOpts) -> BatchItem {
    let mut item = BatchItem { line, inputs: Vec::new(), exit_code: 0, verdict: None, error: None };
    let mut run = || -> Result<(CompareResult, u8), CliError> {
        let Some((sa, sb)) = text.split_once('|') else {
            return Err(CliError::Input(format!("line {line}: expected 'A | B'")));
        };
        let (sa, sb) = (sa.trim(), sb.trim());
        let a = load(sa, g.field()).map_err(|e| e.context(&format!("line {line}")))?;
        let b = load(sb, g.field()).map_err(|e| e.context(&format!("line {line}")))?;
        item.inputs = vec![InputInfo::new(sa, &a), InputInfo::new(sb, &b)];
        compare_pair(&a, &b, relation, realified, g, None)
    };
    match run() {
        Ok((v, code)) => {
            item.verdict = Some(v);
            item.exit_code = code;
        }
        Err(e) => {
            item.exit_code = e.exit_code();
            item.error = Some(e.to_string());
        }
    }
    item
}

fn compare_batch(path: &Path, relation: Relation, realified: bool, g: &GlobalOpts) -> Result<Run, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    // par_iter().collect() keeps input order
    let comparisons: Vec<BatchItem> =
        lines.par_iter().map(|&(n, l)| batch_item(n, l, relation, realified, g)).collect();
    let exit_code = comparisons.iter().map(|c| c.exit_code).max().unwrap_or(0);
    Ok(Run { inputs: Vec::new(), outcome: Outcome::Batch(BatchResult { relation, comparisons }), exit_code })
}

/// Classes of a symmetric verdict matrix, grouped by first member; the flag
/// reports whether the relation is transitive on the given entries.
fn classes_of(v: &[Vec<bool>]) -> (Vec<Vec<usize>>, bool) {
    let n = v.len();
    let mut seen = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let cls: Vec<usize> = (i..n).filter(|&j| v[i][j]).collect();
        for &j in &cls {
            seen[j] = true;
        }
        classes.push(cls);
    }
    let mut label = vec![0; n];
    for (k, c) in classes.iter().enumerate() {
        for &i in c {
            label[i] = k;
        }
    }
    let transitive = (0..n).all(|i| (0..n).all(|j| v[i][j] == (label[i] == label[j])));
    (classes, transitive)
}

pub fn enum2(relation: Relation, g: &GlobalOpts) -> Result<Run, CliError> {
    let tol = g.tolerance();
    let catalog = catalog_2x2(relation);
    let n = catalog.len();
    let verdicts = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Ok(verdict(relation, &catalog[i].matrix, &catalog[j].matrix, &tol)?.equivalent))
                .collect::<Result<Vec<bool>, Error>>()
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let (classes, transitive) = classes_of(&verdicts);
    let expected_classes = partition_by_class(&catalog);
    let partition_matches = transitive && classes == expected_classes;
    let rows = catalog
        .into_iter()
        .map(|e| CatalogRow { label: e.label, class: e.class, matrix: MatrixDocument::from_mat(&e.matrix), family: e.family })
        .collect();
    let result = Enum2Result { relation, catalog: rows, verdicts, classes, expected_classes, transitive, partition_matches };
    Ok(Run { inputs: Vec::new(), outcome: Outcome::Enum2(result), exit_code: if partition_matches { 0 } else { 3 } })
}

fn check(name: &'static str, deviations: Vec<f64>, bound: f64) -> IdentityCheck {
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let pass = deviations.iter().all(|d| d.is_finite() && *d <= bound);
    IdentityCheck { name, cases: deviations.len(), max_deviation, bound, pass }
}

pub fn selftest(g: &GlobalOpts) -> Result<Run, CliError> {
    let tol = g.tolerance();
    let mut det_rel = Vec::new();
    for m in 1..=6 {
        for omega in [0.5, 1.0, 2.25, 7.0, -0.5] {
            let d = det(&delta_matrix(&DeltaSpec::real(m, m, omega)?))?;
            // ∏ Γ(j)/Γ(ω+j) written with reciprocal Gammas
            let want: Scalar = (1..=m)
                .map(|j| recip_gamma(Scalar::new(omega + j as f64, 0.0)) / recip_gamma(Scalar::new(j as f64, 0.0)))
                .product();
            det_rel.push((d - want).norm() / want.norm());
        }
    }
    let mut det_zero = Vec::new();
    for m in 1..=6 {
        for omega in [-1.0, -2.0, -3.0] {
            det_zero.push(det(&delta_matrix(&DeltaSpec::real(m, m, omega)?))?.norm());
        }
    }
    let mut partition = Vec::new();
    for m in 1..=7 {
        for t in [-10.0, -1.0, -0.5, 0.5, 1.0, 10.0] {
            let e = matexp(&nilpotent_block(m), t)?;
            for j in 1..=m {
                let p = exp_block_partition(m, j, t)?;
                partition.push(p.max_abs_diff(&e) / (1.0 + e.max_abs()));
            }
        }
    }
    // ω^{1−m} D_m(ω) tends to the last diagonal unit; the deviation is |ω|^{-1}
    let mut limit = Vec::new();
    let mut inverse_dev = Vec::new();
    for m in 1..=6 {
        let mut corner = Mat::zeros(m, m, Field::Real);
        corner[(m - 1, m - 1)] = Scalar::new(1.0, 0.0);
        for omega in [1e3, 1e6] {
            let w = Scalar::new(omega, 0.0);
            let scaled = diag_powers(m, w).scale(w.powi(1 - m as i32));
            limit.push(scaled.max_abs_diff(&corner) * omega);
        }
        for omega in [Scalar::new(2.0, 0.0), Scalar::new(-0.5, 0.0), Scalar::new(0.3, 1.7)] {
            let inv = inverse(&diag_powers(m, omega), &tol)?;
            inverse_dev.push(inv.max_abs_diff(&diag_powers(m, omega.inv())));
        }
    }
    let checks = vec![
        check("delta_determinant", det_rel, 1e-8),
        check("delta_singular", det_zero, 1e-12),
        check("exp_partition", partition, 1e-9),
        check("diag_power_limit_scaled", limit, 1.0 + 1e-12),
        check("diag_power_inverse", inverse_dev, 1e-12),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(Run { inputs: Vec::new(), outcome: Outcome::Selftest(SelftestResult { checks, pass }), exit_code: if pass { 0 } else { 3 } })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_from_verdicts() {
        let t = true;
        let f = false;
        let v = vec![vec![t, f, t], vec![f, t, f], vec![t, f, t]];
        assert_eq!(classes_of(&v), (vec![vec![0, 2], vec![1]], true));
        let w = vec![vec![t, t, f], vec![t, t, t], vec![f, t, t]];
        assert!(!classes_of(&w).1);
    }
}
