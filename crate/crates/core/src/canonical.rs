//! Canonical class descriptors, representatives, and the 2×2 catalogs.

use serde::{Deserialize, Serialize};

use crate::equiv::{realify, Relation};
use crate::error::{Error, Result};
use crate::linalg::{restrict, Field, Mat, Tolerance};
use crate::spectral::{
    cmp_eigenvalues, jordan_form, jordan_structure, jordan_structure_scaled, scu_split, BlockPos, JordanBlocks,
    JordanStructure,
};

/// Complete invariant of a generator under one relation.
///
/// Topological descriptors of complex generators describe the realification:
/// `dim_s`, `dim_u` and `central` are real dimensions and real structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDescriptor {
    pub relation: Relation,
    pub field: Field,
    pub dim_s: usize,
    pub dim_u: usize,
    /// Central Jordan structure scaled to spectral radius 1 (unless nilpotent).
    pub central: JordanStructure,
    /// Smooth only: the full structure scaled to spectral radius 1.
    pub full: Option<JordanStructure>,
}

impl ClassDescriptor {
    pub fn dim_c(&self) -> usize {
        self.central.dim()
    }

    pub fn dim(&self) -> usize {
        self.dim_s + self.dim_c() + self.dim_u
    }

    /// Equality with normalized eigenvalues compared to within `eps`.
    pub fn matches(&self, other: &ClassDescriptor, eps: f64) -> bool {
        let same_structure = |x: &JordanStructure, y: &JordanStructure| {
            x.field == y.field
                && x.blocks.len() == y.blocks.len()
                && x.blocks.iter().zip(&y.blocks).all(|(bx, by)| {
                    bx.sizes == by.sizes && (bx.eigenvalue - by.eigenvalue).norm() <= eps
                })
        };
        self.relation == other.relation
            && self.field == other.field
            && self.dim_s == other.dim_s
            && self.dim_u == other.dim_u
            && same_structure(&self.central, &other.central)
            && match (&self.full, &other.full) {
                (None, None) => true,
                (Some(x), Some(y)) => same_structure(x, y),
                _ => false,
            }
    }
}

/// Scale to spectral radius 1 and order by `(−Re, −Im)`.
fn normalize(s: &JordanStructure, tol: &Tolerance) -> JordanStructure {
    let radius = s.blocks.iter().map(|b| b.eigenvalue.norm()).fold(0.0, f64::max);
    let mut blocks: Vec<JordanBlocks> = s
        .blocks
        .iter()
        .map(|b| {
            let mut sizes = b.sizes.clone();
            sizes.sort_unstable_by(|x, y| y.cmp(x));
            let eigenvalue = if radius > 0.0 { b.eigenvalue / radius } else { b.eigenvalue };
            JordanBlocks { eigenvalue, sizes }
        })
        .collect();
    blocks.sort_by(|x, y| cmp_eigenvalues(x.eigenvalue, y.eigenvalue, tol.eig_cluster_rel));
    JordanStructure { field: s.field, blocks }
}

fn part(s: &JordanStructure, keep: impl Fn(f64) -> bool) -> JordanStructure {
    JordanStructure { field: s.field, blocks: s.blocks.iter().filter(|b| keep(b.eigenvalue.re)).cloned().collect() }
}

pub fn descriptor(a: &Mat, relation: Relation, tol: &Tolerance) -> Result<ClassDescriptor> {
    a.ensure_square()?;
    match relation {
        Relation::Topological => {
            let ra = realify(a);
            let split = scu_split(&ra, tol)?;
            let c = restrict(&ra, &split.basis_c);
            let central = normalize(&jordan_structure_scaled(&c, tol, ra.norm_fro())?, tol);
            Ok(ClassDescriptor {
                relation,
                field: a.field(),
                dim_s: split.dim_s,
                dim_u: split.dim_u,
                central,
                full: None,
            })
        }
        Relation::Smooth => {
            let full = normalize(&jordan_structure(a, tol)?, tol);
            let dim_s = part(&full, |x| x < 0.0).dim();
            let dim_u = part(&full, |x| x > 0.0).dim();
            let central = part(&full, |x| x == 0.0);
            Ok(ClassDescriptor { relation, field: a.field(), dim_s, dim_u, central, full: Some(full) })
        }
    }
}

fn positions(s: &JordanStructure) -> Vec<BlockPos> {
    let mut out = Vec::new();
    let mut offset = 0;
    for b in &s.blocks {
        let pair = s.is_pair(b);
        for &size in &b.sizes {
            let p = BlockPos { eigenvalue: b.eigenvalue, size, offset, pair };
            offset += p.width();
            out.push(p);
        }
    }
    out
}

fn structure_matrix(s: &JordanStructure) -> Mat {
    jordan_form(&positions(s), s.field)
}

/// Block-diagonal `−I_s ⊕ I_u ⊕ J_c` (topological) or the normalized Jordan
/// form (smooth); complex topological descriptors give back a complex matrix
/// whose realification has the descriptor.
pub fn representative(d: &ClassDescriptor) -> Mat {
    if let Some(full) = &d.full {
        return structure_matrix(full);
    }
    match d.field {
        Field::Real => {
            let s = Mat::identity(d.dim_s).scale_real(-1.0);
            let u = Mat::identity(d.dim_u);
            Mat::block_diag(&[&s, &u, &structure_matrix(&d.central)])
        }
        Field::Complex => {
            let s = Mat::identity(d.dim_s / 2).scale_real(-1.0);
            let u = Mat::identity(d.dim_u / 2);
            let mut blocks = Vec::new();
            for b in &d.central.blocks {
                if d.central.is_pair(b) {
                    blocks.push(JordanBlocks { eigenvalue: b.eigenvalue, sizes: b.sizes.clone() });
                } else {
                    // the realification doubles every real block
                    blocks.push(JordanBlocks { eigenvalue: b.eigenvalue, sizes: b.sizes.iter().step_by(2).copied().collect() });
                }
            }
            let c = structure_matrix(&JordanStructure { field: Field::Complex, blocks });
            Mat::block_diag(&[&s.with_field(Field::Complex), &u.with_field(Field::Complex), &c]).with_field(Field::Complex)
        }
    }
}

/// One-parameter families of smooth classes in dimension 2, `a > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `[[−1, 0], [0, a]]`
    Saddle,
    /// `[[1, 0], [0, a]]`
    SourceNode,
    /// `−[[1, 0], [0, a]]`
    SinkNode,
    /// `[[1, −a], [a, 1]]`
    SourceFocus,
    /// `−[[1, −a], [a, 1]]`
    SinkFocus,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Saddle, Family::SourceNode, Family::SinkNode, Family::SourceFocus, Family::SinkFocus];

    pub fn matrix(self, a: f64) -> Result<Mat> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("family parameter must be positive and finite, got {a}")));
        }
        Ok(match self {
            Family::Saddle => Mat::diag_real(&[-1.0, a]),
            Family::SourceNode => Mat::diag_real(&[1.0, a]),
            Family::SinkNode => Mat::diag_real(&[-1.0, -a]),
            Family::SourceFocus => Mat::from_real_rows(&[&[1.0, -a], &[a, 1.0]]),
            Family::SinkFocus => Mat::from_real_rows(&[&[-1.0, a], &[-a, -1.0]]),
        })
    }

    pub fn pattern(self) -> &'static str {
        match self {
            Family::Saddle => "[[-1, 0], [0, a]]",
            Family::SourceNode => "[[1, 0], [0, a]]",
            Family::SinkNode => "-[[1, 0], [0, a]]",
            Family::SourceFocus => "[[1, -a], [a, 1]]",
            Family::SinkFocus => "-[[1, -a], [a, 1]]",
        }
    }

    /// Parameter constraint; node parameters `a` and `1/a` give one class
    /// (`diag(1, a) = a·diag(1/a, 1)`).
    pub fn constraint(self) -> &'static str {
        match self {
            Family::SourceNode | Family::SinkNode => "a > 0; a and 1/a give the same class",
            _ => "a > 0",
        }
    }

    /// Do parameters `a`, `b` give the same smooth class?
    pub fn same_class(self, a: f64, b: f64, rel: f64) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= rel * x.abs().max(y.abs());
        match self {
            Family::SourceNode | Family::SinkNode => close(a, b) || close(a * b, 1.0),
            _ => close(a, b),
        }
    }
}

/// Symbolic parameter slot of a catalog entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySlot {
    pub family: Family,
    pub pattern: String,
    pub parameter: String,
    pub constraint: String,
    /// Value used for `matrix`.
    pub sample: f64,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub label: String,
    pub matrix: Mat,
    /// Class index, `0..` in catalog order.
    pub class: usize,
    pub family: Option<FamilySlot>,
}

fn slot(family: Family, sample: f64) -> FamilySlot {
    FamilySlot {
        family,
        pattern: family.pattern().into(),
        parameter: "a".into(),
        constraint: family.constraint().into(),
        sample,
    }
}

/// The seven smooth singleton classes in dimension 2.
fn singletons() -> Vec<(&'static str, Mat)> {
    vec![
        ("rotation", Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])),
        ("zero", Mat::zeros(2, 2, Field::Real)),
        ("nilpotent", Mat::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
        ("unstable line", Mat::diag_real(&[0.0, 1.0])),
        ("stable line", Mat::diag_real(&[0.0, -1.0])),
        ("unstable jordan", Mat::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])),
        ("stable jordan", Mat::from_real_rows(&[&[-1.0, -1.0], &[0.0, -1.0]])),
    ]
}

/// Family parameter used for the generators listed in the topological
/// catalog.
const TOPOLOGICAL_SAMPLE: f64 = 2.0;

/// 2×2 catalog. Topological: the eight class representatives followed by
/// the five family generators at `a = 2`, each labelled with its class.
/// Smooth: the seven singleton classes, then one symbolic entry per family
/// (sampled at `a = 1`).
pub fn catalog_2x2(relation: Relation) -> Vec<CatalogEntry> {
    let entry = |label: &str, matrix: Mat, class: usize, family: Option<FamilySlot>| CatalogEntry {
        label: label.into(),
        matrix,
        class,
        family,
    };
    let fam = |f: Family, a: f64| f.matrix(a).expect("positive parameter");
    match relation {
        Relation::Topological => {
            let reps: Vec<(&str, Mat)> = vec![
                ("rotation", Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])),
                ("zero", Mat::zeros(2, 2, Field::Real)),
                ("nilpotent", Mat::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
                ("unstable line", Mat::diag_real(&[0.0, 1.0])),
                ("stable line", Mat::diag_real(&[0.0, -1.0])),
                ("saddle", Mat::diag_real(&[1.0, -1.0])),
                ("source", Mat::identity(2)),
                ("sink", Mat::identity(2).scale_real(-1.0)),
            ];
            let mut out: Vec<CatalogEntry> =
                reps.into_iter().enumerate().map(|(k, (l, m))| entry(l, m, k, None)).collect();
            let a = TOPOLOGICAL_SAMPLE;
            for (f, class) in [
                (Family::Saddle, 5),
                (Family::SourceNode, 6),
                (Family::SinkNode, 7),
                (Family::SourceFocus, 6),
                (Family::SinkFocus, 7),
            ] {
                out.push(entry(f.pattern(), fam(f, a), class, Some(slot(f, a))));
            }
            out
        }
        Relation::Smooth => {
            let mut out: Vec<CatalogEntry> =
                singletons().into_iter().enumerate().map(|(k, (l, m))| entry(l, m, k, None)).collect();
            for (k, f) in Family::ALL.into_iter().enumerate() {
                out.push(entry(f.pattern(), fam(f, 1.0), 7 + k, Some(slot(f, 1.0))));
            }
            out
        }
    }
}

/// Group indices by class label.
pub fn partition_by_class(entries: &[CatalogEntry]) -> Vec<Vec<usize>> {
    let classes = entries.iter().map(|e| e.class).max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); classes];
    for (i, e) in entries.iter().enumerate() {
        out[e.class].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::verdict;
    use crate::linalg::{re, Scalar};
    use crate::linalg::inverse;
    use crate::sample;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn descriptor_examples() {
        let d = descriptor(&Mat::diag_real(&[3.0, -3.0]), Relation::Topological, &tol()).unwrap();
        assert_eq!((d.dim_s, d.dim_u), (1, 1));
        assert!(d.central.blocks.is_empty());

        let rot5 = Mat::from_real_rows(&[&[0.0, -5.0], &[5.0, 0.0]]);
        let d = descriptor(&rot5, Relation::Smooth, &tol()).unwrap();
        let full = d.full.unwrap();
        assert_eq!(full.blocks.len(), 1);
        assert!((full.blocks[0].eigenvalue - Scalar::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(full.blocks[0].sizes, vec![1]);

        for n in 1..=4 {
            let d = descriptor(&Mat::zeros(n, n, Field::Real), Relation::Topological, &tol()).unwrap();
            assert_eq!((d.dim_s, d.dim_u), (0, 0));
            assert_eq!(d.central.blocks, vec![JordanBlocks { eigenvalue: re(0.0), sizes: vec![1; n] }]);
        }
    }

    #[test]
    fn representative_examples() {
        let d = descriptor(&Mat::diag_real(&[3.0, -3.0]), Relation::Topological, &tol()).unwrap();
        assert!(representative(&d).approx_eq(&Mat::diag_real(&[-1.0, 1.0]), 0.0));
        let rot7 = Mat::from_real_rows(&[&[0.0, -7.0], &[7.0, 0.0]]);
        let d = descriptor(&rot7, Relation::Topological, &tol()).unwrap();
        assert!(representative(&d).approx_eq(&Mat::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]), 1e-12));
        let d = descriptor(&Mat::zeros(2, 2, Field::Real), Relation::Topological, &tol()).unwrap();
        assert!(representative(&d).approx_eq(&Mat::zeros(2, 2, Field::Real), 0.0));
    }

    #[test]
    fn topological_catalog_has_eight_classes() {
        let cat = catalog_2x2(Relation::Topological);
        assert_eq!(cat.len(), 13);
        assert_eq!(partition_by_class(&cat).len(), 8);
        for x in &cat {
            for y in &cat {
                let v = verdict(Relation::Topological, &x.matrix, &y.matrix, &tol()).unwrap();
                assert_eq!(v.equivalent, x.class == y.class, "{} vs {}", x.label, y.label);
            }
        }
    }

    #[test]
    fn smooth_catalog_classes_are_distinct() {
        let cat = catalog_2x2(Relation::Smooth);
        assert_eq!(cat.len(), 12);
        for x in &cat {
            for y in &cat {
                let v = verdict(Relation::Smooth, &x.matrix, &y.matrix, &tol()).unwrap();
                assert_eq!(v.equivalent, x.class == y.class, "{} vs {}", x.label, y.label);
            }
        }
        assert!(cat.iter().filter(|e| e.family.is_some()).all(|e| e.family.as_ref().unwrap().parameter == "a"));
    }

    #[test]
    fn source_node_family_and_identity() {
        let i = Mat::identity(2);
        let d2 = Family::SourceNode.matrix(2.0).unwrap();
        assert!(verdict(Relation::Topological, &i, &d2, &tol()).unwrap().equivalent);
        assert!(!verdict(Relation::Smooth, &i, &d2, &tol()).unwrap().equivalent);
        // a and 1/a coincide
        let d_half = Family::SourceNode.matrix(0.5).unwrap();
        let v = verdict(Relation::Smooth, &d2, &d_half, &tol()).unwrap();
        assert!(v.equivalent);
        assert!(Family::SourceNode.same_class(2.0, 0.5, 1e-12));
        assert!(!Family::SourceFocus.same_class(2.0, 0.5, 1e-12));
    }

    #[test]
    fn catalog_descriptors_distinct_counts() {
        let cat = catalog_2x2(Relation::Topological);
        let mut top: Vec<ClassDescriptor> = Vec::new();
        let mut smooth: Vec<ClassDescriptor> = Vec::new();
        for e in &cat {
            for (rel, list) in [(Relation::Topological, &mut top), (Relation::Smooth, &mut smooth)] {
                let d = descriptor(&e.matrix, rel, &tol()).unwrap();
                if !list.iter().any(|x| x.matches(&d, 1e-9)) {
                    list.push(d);
                }
            }
        }
        assert_eq!(top.len(), 8);
        assert_eq!(smooth.len(), 13);
    }

    #[test]
    fn complex_descriptors() {
        let i = Mat::from_complex_rows(&[&[Scalar::new(0.0, 1.0)]]);
        let mi = Mat::from_complex_rows(&[&[Scalar::new(0.0, -1.0)]]);
        let (di, dmi) = (
            descriptor(&i, Relation::Topological, &tol()).unwrap(),
            descriptor(&mi, Relation::Topological, &tol()).unwrap(),
        );
        assert!(di.matches(&dmi, 1e-9));
        let r = representative(&di);
        assert_eq!((r.rows(), r.field()), (1, Field::Complex));
        assert!(descriptor(&r, Relation::Topological, &tol()).unwrap().matches(&di, 1e-9));
        let (si, smi) = (
            descriptor(&i, Relation::Smooth, &tol()).unwrap(),
            descriptor(&mi, Relation::Smooth, &tol()).unwrap(),
        );
        assert!(!si.matches(&smi, 1e-9));
        let z = Mat::zeros(2, 2, Field::Complex);
        let dz = descriptor(&z, Relation::Topological, &tol()).unwrap();
        assert!(descriptor(&representative(&dz), Relation::Topological, &tol()).unwrap().matches(&dz, 1e-9));
    }

    fn random_generator(rng: &mut ChaCha8Rng, n: usize) -> Mat {
        let planted = loop {
            let p = sample::random_structure(rng, n);
            if p.iter().map(|b| b.real_dim()).sum::<usize>() == n {
                break p;
            }
        };
        let a = sample::planted_matrix(&planted);
        let s = sample::conditioned(rng, n, 10.0);
        s.matmul(&a).matmul(&inverse(&s, &tol()).unwrap()).scale_real(rng.random_range(0.5..2.0))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn descriptors_agree_with_verdicts(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.random_range(1..=5);
            let a = random_generator(&mut rng, n);
            let b = if rng.random_bool(0.3) {
                let s = sample::conditioned(&mut rng, n, 10.0);
                s.matmul(&a).matmul(&inverse(&s, &tol()).unwrap()).scale_real(rng.random_range(0.2..5.0))
            } else {
                random_generator(&mut rng, n)
            };
            for rel in [Relation::Topological, Relation::Smooth] {
                let (da, db) = (descriptor(&a, rel, &tol()).unwrap(), descriptor(&b, rel, &tol()).unwrap());
                let v = verdict(rel, &a, &b, &tol()).unwrap();
                prop_assert_eq!(da.matches(&db, 1e-6), v.equivalent, "{:?} {:?}", da, db);
                let rep = representative(&da);
                prop_assert!(descriptor(&rep, rel, &tol()).unwrap().matches(&da, 1e-9));
            }
        }
    }
}
