//! Report documents and their text rendering. Text and JSON are produced
//! from the same structs, so both carry the same numbers.

use std::fmt::Write as _;

use linflow::canonical::{ClassDescriptor, FamilySlot};
use linflow::cores::CoreProfile;
use linflow::equiv::{Reason, Relation, RationalCorrespondence, Scope};
use linflow::ratclass::RationalPartition;
use linflow::spectral::{EigCluster, JordanStructure};
use linflow::witness::ResidualReport;
use linflow::{Field, Mat, Scalar, Tolerance};
use serde::Serialize;

use crate::matrix_io::{digest, MatrixDocument};

/// Bumped whenever a field is renamed or removed.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: CommandEcho,
    pub tolerances: Tolerances,
    pub inputs: Vec<InputInfo>,
    pub result: Outcome,
}

#[derive(Debug, Serialize)]
pub struct CommandEcho {
    pub name: &'static str,
    pub args: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub rank_rel: f64,
    pub eig_cluster_rel: f64,
    pub residual_abs: f64,
    pub qmax: u64,
}

impl Tolerances {
    pub fn new(tol: &Tolerance, qmax: u64) -> Tolerances {
        Tolerances { rank_rel: tol.rank_rel, eig_cluster_rel: tol.eig_cluster_rel, residual_abs: tol.residual_abs, qmax }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    pub name: String,
    /// SHA-256 of the canonical text form.
    pub digest: String,
    pub rows: usize,
    pub cols: usize,
    pub field: Field,
}

impl InputInfo {
    pub fn new(name: &str, m: &Mat) -> InputInfo {
        InputInfo { name: name.into(), digest: digest(m), rows: m.rows(), cols: m.cols(), field: m.field() }
    }
}

#[derive(Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Classify(Box<ClassifyResult>),
    Compare(Box<CompareResult>),
    Batch(BatchResult),
    Enum2(Enum2Result),
    Selftest(SelftestResult),
}

#[derive(Debug, Serialize)]
pub struct Split {
    pub dim_s: usize,
    pub dim_c: usize,
    pub dim_u: usize,
}

/// Bounded-subspace summary, in real dimensions of the realification.
#[derive(Debug, Serialize)]
pub struct BoundedSummary {
    pub real_dim: usize,
    pub bounded_dim: usize,
    pub fixed_dim: usize,
    pub all_bounded: bool,
}

#[derive(Debug, Serialize)]
pub struct ClassifyResult {
    pub field: Field,
    pub dim: usize,
    pub split: Split,
    pub eigenvalues: Vec<EigCluster>,
    pub jordan: JordanStructure,
    pub topological: ClassDescriptor,
    pub smooth: ClassDescriptor,
    pub bounded: BoundedSummary,
    /// Core profile of the realification.
    pub cores: CoreProfile,
    /// Rational classes of the bounded part; absent when it has no
    /// nonzero frequency.
    pub rational: Option<RationalPartition>,
}

#[derive(Debug, Serialize)]
pub struct CertificateReport {
    pub scope: Scope,
    pub alpha: f64,
    pub h: MatrixDocument,
    pub residual: ResidualReport,
    pub written_to: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct CompareResult {
    pub relation: Relation,
    pub field: Field,
    pub realified: bool,
    pub equivalent: bool,
    pub alpha: Option<f64>,
    pub reason: Reason,
    pub rational: Option<RationalCorrespondence>,
    pub certificate: Option<CertificateReport>,
}

#[derive(Debug, Serialize)]
pub struct BatchItem {
    pub line: usize,
    pub inputs: Vec<InputInfo>,
    pub exit_code: u8,
    pub verdict: Option<CompareResult>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct BatchResult {
    pub relation: Relation,
    pub comparisons: Vec<BatchItem>,
}

#[derive(Debug, Serialize)]
pub struct CatalogRow {
    pub label: String,
    pub class: usize,
    pub matrix: MatrixDocument,
    pub family: Option<FamilySlot>,
}

#[derive(Debug, Serialize)]
pub struct Enum2Result {
    pub relation: Relation,
    pub catalog: Vec<CatalogRow>,
    /// `verdicts[i][j]`: entries `i` and `j` are equivalent.
    pub verdicts: Vec<Vec<bool>>,
    /// Classes read off the verdict matrix, by first member.
    pub classes: Vec<Vec<usize>>,
    pub expected_classes: Vec<Vec<usize>>,
    pub transitive: bool,
    pub partition_matches: bool,
}

#[derive(Debug, Serialize)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct SelftestResult {
    pub checks: Vec<IdentityCheck>,
    pub pass: bool,
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e16)`.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_f64(x: Option<f64>) -> String {
    x.map_or_else(|| "none".into(), num)
}

fn z(v: Scalar) -> String {
    let im = if v.im == 0.0 { 0.0 } else { v.im };
    let re = if v.re == 0.0 { 0.0 } else { v.re };
    if im.is_sign_negative() {
        format!("{}-{}i", num(re), num(-im))
    } else {
        format!("{}+{}i", num(re), num(im))
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", ")
}

fn structure(out: &mut String, indent: &str, s: &JordanStructure) {
    if s.blocks.is_empty() {
        let _ = writeln!(out, "{indent}(empty, {})", s.field);
    }
    for b in &s.blocks {
        let sizes: Vec<String> = b.sizes.iter().map(|k| k.to_string()).collect();
        let _ = writeln!(out, "{indent}{}  blocks [{}]", z(b.eigenvalue), sizes.join(", "));
    }
}

fn descriptor(out: &mut String, d: &ClassDescriptor) {
    let _ = writeln!(out, "{} descriptor ({}): dim_s = {}, dim_u = {}", d.relation, d.field, d.dim_s, d.dim_u);
    let _ = writeln!(out, "  central ({}):", d.central.field);
    structure(out, "    ", &d.central);
    if let Some(full) = &d.full {
        let _ = writeln!(out, "  full ({}):", full.field);
        structure(out, "    ", full);
    }
}

fn matrix(out: &mut String, indent: &str, doc: &MatrixDocument) {
    for row in &doc.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                serde_json::Value::Array(p) => {
                    let re = p[0].as_f64().unwrap_or(f64::NAN);
                    let im = p[1].as_f64().unwrap_or(f64::NAN);
                    z(Scalar::new(re, im))
                }
                other => other.as_f64().map_or_else(|| other.to_string(), |x| num(if x == 0.0 { 0.0 } else { x })),
            })
            .collect();
        let _ = writeln!(out, "{indent}{}", cells.join(" "));
    }
}

fn reason(r: &Reason) -> String {
    match r {
        Reason::DimensionMismatch { dim_a, dim_b } => format!("dimensions differ ({dim_a} vs {dim_b})"),
        Reason::StableUnstableMismatch { dim_s, dim_u } => format!(
            "stable/unstable dimensions differ (dim_s {} vs {}, dim_u {} vs {})",
            dim_s[0], dim_s[1], dim_u[0], dim_u[1]
        ),
        Reason::NilpotentMatch => "both nilpotent with equal Jordan blocks".into(),
        Reason::NilpotentMismatch => "both nilpotent with different Jordan blocks".into(),
        Reason::NilpotencyDiffers => "exactly one generator is nilpotent".into(),
        Reason::ScaledStructureMatch { alpha } => format!("Jordan structures agree after scaling by {}", num(*alpha)),
        Reason::NoAdmissibleScale { candidates } => {
            format!("no positive scale matches the Jordan structures ({candidates} candidates tried)")
        }
        Reason::CentralScaledSimilar { dim_s, dim_c, dim_u, central } => format!(
            "dim_s = {dim_s}, dim_u = {dim_u} agree; central parts (dim {dim_c}) similar up to scale: {}",
            reason(central)
        ),
        Reason::CentralNotScaledSimilar { dim_s, dim_c, dim_u, central } => format!(
            "dim_s = {dim_s}, dim_u = {dim_u} agree; central parts (dim {dim_c}) not similar up to scale: {}",
            reason(central)
        ),
    }
}

fn residual(out: &mut String, indent: &str, r: &ResidualReport) {
    let _ = writeln!(
        out,
        "{indent}residual {} at t = {} (bound {}, {}) over t in [{}]",
        num(r.max_residual),
        num(r.worst_t),
        num(r.bound),
        if r.pass { "pass" } else { "FAIL" },
        list(&r.grid)
    );
}

fn compare(out: &mut String, c: &CompareResult) {
    let _ = writeln!(
        out,
        "{} equivalence over {}{}: {}",
        c.relation,
        c.field,
        if c.realified { " (realified)" } else { "" },
        if c.equivalent { "EQUIVALENT" } else { "NOT EQUIVALENT" }
    );
    let _ = writeln!(out, "alpha: {}", opt_f64(c.alpha));
    let _ = writeln!(out, "reason: {}", reason(&c.reason));
    if let Some(r) = &c.rational {
        let _ = writeln!(out, "rational classes: {} vs {}", r.classes_a, r.classes_b);
        let _ = writeln!(out, "  periods a: [{}]", list(&r.periods_a));
        let _ = writeln!(out, "  periods b: [{}]", list(&r.periods_b));
        let _ = writeln!(out, "  period ratios: [{}]  consistent: {}", list(&r.period_ratios), yes_no(r.consistent));
    }
    if let Some(cert) = &c.certificate {
        let scope = match cert.scope {
            Scope::Full => "full space",
            Scope::Central => "central parts",
        };
        let _ = writeln!(out, "certificate ({scope}, alpha = {}):", num(cert.alpha));
        matrix(out, "  ", &cert.h);
        residual(out, "  ", &cert.residual);
        if let Some(p) = &cert.written_to {
            let _ = writeln!(out, "  written to {p}");
        }
    }
}

fn classify(out: &mut String, c: &ClassifyResult) {
    let _ = writeln!(out, "dimension {} over {}", c.dim, c.field);
    let _ = writeln!(out, "S/C/U: dim_s = {}, dim_c = {}, dim_u = {}", c.split.dim_s, c.split.dim_c, c.split.dim_u);
    let _ = writeln!(out, "eigenvalues:");
    for e in &c.eigenvalues {
        let weyr: Vec<String> = e.weyr.iter().map(|w| w.to_string()).collect();
        let _ = writeln!(out, "  {}  multiplicity {}  weyr [{}]", z(e.value), e.alg_mult, weyr.join(", "));
    }
    let _ = writeln!(out, "jordan structure ({}):", c.jordan.field);
    structure(out, "  ", &c.jordan);
    descriptor(out, &c.topological);
    descriptor(out, &c.smooth);
    let b = &c.bounded;
    if b.all_bounded && b.fixed_dim == b.real_dim {
        let _ = writeln!(out, "bounded: all bounded, Fix = X (dim {})", b.fixed_dim);
    } else if b.all_bounded {
        let _ = writeln!(out, "bounded: all bounded, dim Fix = {} of {}", b.fixed_dim, b.real_dim);
    } else {
        let _ = writeln!(out, "bounded: dim Bnd = {}, dim Fix = {} of {}", b.bounded_dim, b.fixed_dim, b.real_dim);
    }
    let _ = writeln!(out, "cores (real dimension {}):", c.cores.ambient_dim);
    for f in &c.cores.frequencies {
        let cs: Vec<String> = f.c.iter().map(|x| x.to_string()).collect();
        let ds: Vec<String> = f.d.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "  s = {}: c_n = [{}]  d_n = [{}]", num(f.s), cs.join(", "), ds.join(", "));
    }
    match &c.rational {
        None => {
            let _ = writeln!(out, "rational classes: none (no nonzero bounded frequency)");
        }
        Some(p) => {
            let _ = writeln!(out, "rational classes (dim Fix = {}):", p.fixed_dim);
            for cls in &p.classes {
                let members: Vec<String> = cls
                    .members
                    .iter()
                    .zip(&cls.ratios)
                    .zip(&cls.member_dims)
                    .zip(&cls.margins)
                    .map(|(((&s, (p, q)), d), &m)| {
                        format!("{} = {p}/{q} x {} (dim {d}, margin {})", num(s), num(cls.generator), num(m))
                    })
                    .collect();
                let _ = writeln!(out, "  period {}: {}", num(cls.period), members.join("; "));
            }
            if let Some(r) = p.closest_rejection {
                let _ = writeln!(out, "  closest rejected ratio margin: {}", num(r));
            }
        }
    }
}

fn enum2(out: &mut String, e: &Enum2Result) {
    let _ = writeln!(out, "2x2 {} catalog ({} entries):", e.relation, e.catalog.len());
    for (i, row) in e.catalog.iter().enumerate() {
        let fam = row
            .family
            .as_ref()
            .map_or(String::new(), |f| format!("  [{}, {}, sampled at a = {}]", f.pattern, f.constraint, num(f.sample)));
        let _ = writeln!(out, "  {i:>2}  class {:>2}  {}{fam}", row.class, row.label);
        matrix(out, "        ", &row.matrix);
    }
    let _ = writeln!(out, "verdict matrix:");
    for (i, row) in e.verdicts.iter().enumerate() {
        let cells: String = row.iter().map(|&b| if b { '1' } else { '.' }).collect();
        let _ = writeln!(out, "  {i:>2}  {cells}");
    }
    let fmt = |cs: &[Vec<usize>]| {
        cs.iter()
            .map(|c| format!("{{{}}}", c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ")))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "classes ({}): {}", e.classes.len(), fmt(&e.classes));
    let _ = writeln!(out, "expected ({}): {}", e.expected_classes.len(), fmt(&e.expected_classes));
    let _ = writeln!(out, "transitive: {}  partition matches: {}", yes_no(e.transitive), yes_no(e.partition_matches));
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", report.tool, report.version, report.command.name);
    let t = &report.tolerances;
    let _ = writeln!(
        out,
        "tolerances: rank {}, cluster {}, residual {}, qmax {}",
        num(t.rank_rel),
        num(t.eig_cluster_rel),
        num(t.residual_abs),
        t.qmax
    );
    for i in &report.inputs {
        let _ = writeln!(out, "input {}: {}x{} {} sha256 {}", i.name, i.rows, i.cols, i.field, i.digest);
    }
    let _ = writeln!(out);
    match &report.result {
        Outcome::Classify(c) => classify(&mut out, c),
        Outcome::Compare(c) => compare(&mut out, c),
        Outcome::Batch(b) => {
            for item in &b.comparisons {
                let names: Vec<&str> = item.inputs.iter().map(|i| i.name.as_str()).collect();
                let _ = writeln!(out, "line {}: {} (exit {})", item.line, names.join(" | "), item.exit_code);
                for i in &item.inputs {
                    let _ = writeln!(out, "  input {}: {}x{} {} sha256 {}", i.name, i.rows, i.cols, i.field, i.digest);
                }
                if let Some(v) = &item.verdict {
                    let mut body = String::new();
                    compare(&mut body, v);
                    for l in body.lines() {
                        let _ = writeln!(out, "  {l}");
                    }
                }
                if let Some(e) = &item.error {
                    let _ = writeln!(out, "  error: {e}");
                }
            }
        }
        Outcome::Enum2(e) => enum2(&mut out, e),
        Outcome::Selftest(s) => {
            for c in &s.checks {
                let _ = writeln!(
                    out,
                    "{:<24} {:>4} cases  max deviation {}  bound {}  {}",
                    c.name,
                    c.cases,
                    num(c.max_deviation),
                    num(c.bound),
                    if c.pass { "pass" } else { "FAIL" }
                );
            }
            let _ = writeln!(out, "selftest: {}", if s.pass { "pass" } else { "FAIL" });
        }
    }
    out
}
