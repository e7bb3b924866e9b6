//! Grouping of computed eigenvalues into clusters with a consistent
//! generalized eigenspace.
//!
//! Computed eigenvalues of a defective block of size m spread over a radius
//! of order eps^(1/m)·‖A‖, far beyond any fixed clustering radius. Clusters
//! are therefore read off a single-linkage dendrogram top-down: a node is
//! accepted when the kernel chain of `A − μI` at its mean μ has dimension
//! exactly equal to the number of eigenvalues in the node.

use std::cmp::Ordering;

use super::schur::eigenvalues;
use crate::error::{Error, Result};
use crate::linalg::{kernel_forced, kernel_scaled, re, restrict, Field, Mat, Scalar, Tolerance};

#[derive(Clone, Debug)]
pub(crate) struct Cluster {
    pub value: Scalar,
    pub weyr: Vec<usize>,
    /// Orthonormal bases of ker N, ker N², …, ker N^L with N = A − value·I.
    pub chain: Vec<Mat>,
    /// Real input with non-real eigenvalue: the cluster stands for itself and
    /// its conjugate.
    pub pair: bool,
}

impl Cluster {
    pub fn alg_mult(&self) -> usize {
        self.weyr.iter().sum()
    }

    /// Orthonormal basis of the generalized eigenspace.
    pub fn eigenspace(&self) -> &Mat {
        self.chain.last().expect("clusters are never empty")
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Analysis {
    pub field: Field,
    pub dim: usize,
    /// ‖A‖_F, the scale of every relative threshold.
    pub norm: f64,
    /// `eig_cluster_rel·‖A‖_F`.
    pub threshold: f64,
    pub clusters: Vec<Cluster>,
}

/// Kernel chain of `A − μI` up to total dimension `k`; `None` unless the
/// chain reaches exactly `k` with non-increasing Weyr increments.
fn kernel_chain(a: &Mat, mu: Scalar, k: usize, rel: f64, scale: f64) -> Option<(Vec<usize>, Vec<Mat>)> {
    let n_mat = a.shift(mu);
    let mut weyr: Vec<usize> = Vec::new();
    let mut chain: Vec<Mat> = Vec::new();
    let mut total = 0;
    while total < k {
        let m = match chain.last() {
            None => n_mat.clone(),
            Some(q) => &n_mat - &q.matmul(&q.adjoint().matmul(&n_mat)),
        };
        let ker = kernel_scaled(&m, rel, scale);
        let d = ker.cols();
        if d <= total || d > k {
            break;
        }
        let w = d - total;
        if weyr.last().is_some_and(|&prev| w > prev) {
            return None;
        }
        weyr.push(w);
        chain.push(ker);
        total = d;
    }
    (total == k).then_some((weyr, chain))
}

struct Node {
    members: Vec<usize>,
    children: Option<(usize, usize)>,
}

/// Single-linkage dendrogram by Kruskal merging; the last node is the root.
fn dendrogram(eigs: &[Scalar]) -> Vec<Node> {
    let n = eigs.len();
    let mut nodes: Vec<Node> = (0..n).map(|i| Node { members: vec![i], children: None }).collect();
    let mut edges = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push(((eigs[i] - eigs[j]).norm(), i, j));
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut node_of: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (_, i, j) in edges {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri == rj {
            continue;
        }
        let (ni, nj) = (node_of[ri], node_of[rj]);
        let mut members = nodes[ni].members.clone();
        members.extend_from_slice(&nodes[nj].members);
        nodes.push(Node { members, children: Some((ni, nj)) });
        parent[rj] = ri;
        node_of[ri] = nodes.len() - 1;
    }
    nodes
}

fn mean(eigs: &[Scalar], members: &[usize]) -> Scalar {
    members.iter().map(|&i| eigs[i]).sum::<Scalar>() / members.len() as f64
}

fn snap(x: f64, thr: f64) -> f64 {
    if x.abs() <= thr {
        0.0
    } else {
        x
    }
}

/// Order by real part descending, then imaginary part descending, with ties
/// decided within `thr`.
pub(crate) fn cmp_eigenvalues(x: Scalar, y: Scalar, thr: f64) -> Ordering {
    if (x.re - y.re).abs() > thr {
        y.re.total_cmp(&x.re)
    } else if (x.im - y.im).abs() > thr {
        y.im.total_cmp(&x.im)
    } else {
        Ordering::Equal
    }
}

pub(crate) fn analyze(a: &Mat, tol: &Tolerance) -> Result<Analysis> {
    analyze_scaled(a, tol, 0.0)
}

/// As `analyze`, with relative thresholds taken against at least `scale`;
/// used for restrictions of a larger matrix, whose own norm may be round-off.
pub(crate) fn analyze_scaled(a: &Mat, tol: &Tolerance, scale: f64) -> Result<Analysis> {
    tol.validate()?;
    let n = a.ensure_square()?;
    a.ensure_finite()?;
    let norm = a.norm_fro().max(scale);
    let threshold = tol.eig_cluster_rel * norm;
    let field = a.field();
    if n == 0 {
        return Ok(Analysis { field, dim: 0, norm, threshold, clusters: Vec::new() });
    }
    let eigs = eigenvalues(a)?;
    let nodes = dendrogram(&eigs);
    let rel = tol.rank_rel;

    let mut accepted: Vec<(Scalar, Vec<usize>, Vec<Mat>)> = Vec::new();
    let mut stack = vec![nodes.len() - 1];
    while let Some(id) = stack.pop() {
        let node = &nodes[id];
        let k = node.members.len();
        let mu = mean(&eigs, &node.members);
        match kernel_chain(a, mu, k, rel, norm) {
            Some((weyr, chain)) => accepted.push((mu, weyr, chain)),
            None => match node.children {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => {
                    // an isolated eigenvalue whose eigenvector sits just above the
                    // rank threshold: take the least excited direction
                    let v = kernel_forced(&a.shift(mu), 1);
                    accepted.push((mu, vec![1], vec![v]));
                }
            },
        }
    }

    let mut clusters = Vec::new();
    if field == Field::Real {
        let mut count = 0;
        for (mu, weyr, chain) in accepted {
            let k: usize = weyr.iter().sum();
            if mu.im.abs() <= threshold {
                let (weyr, chain) = kernel_chain(a, re(mu.re), k, rel, norm).ok_or_else(|| {
                    Error::Inconsistent(format!(
                        "eigenvalue cluster near {:.6e} has no real generalized eigenspace of dimension {k}",
                        mu.re
                    ))
                })?;
                let chain = chain.into_iter().map(|m| m.with_field(Field::Real)).collect();
                clusters.push(Cluster { value: re(mu.re), weyr, chain, pair: false });
                count += k;
            } else if mu.im > 0.0 {
                clusters.push(Cluster { value: mu, weyr, chain, pair: true });
                count += 2 * k;
            }
        }
        if count != n {
            return Err(Error::Inconsistent(format!(
                "eigenvalue clusters of a real matrix are not closed under conjugation ({count} of {n} dimensions paired)"
            )));
        }
    } else {
        for (mu, weyr, chain) in accepted {
            clusters.push(Cluster { value: mu, weyr, chain, pair: false });
        }
    }

    for c in &mut clusters {
        let k = c.alg_mult() as f64;
        let mut v = restrict(a, c.eigenspace()).trace() / k;
        if field == Field::Real && !c.pair {
            v.im = 0.0;
        }
        c.value = Scalar::new(snap(v.re, threshold), snap(v.im, threshold));
    }
    clusters.sort_by(|x, y| cmp_eigenvalues(x.value, y.value, threshold));
    Ok(Analysis { field, dim: n, norm, threshold, clusters })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{self, PlantedBlock};
    use crate::special::nilpotent_block;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nilpotent_blocks_merge_into_one_cluster() {
        for m in 1..=6 {
            let an = analyze(&nilpotent_block(m), &Tolerance::default()).unwrap();
            assert_eq!(an.clusters.len(), 1);
            assert_eq!(an.clusters[0].weyr, vec![1; m]);
            assert_eq!(an.clusters[0].value, re(0.0));
        }
    }

    #[test]
    fn close_but_distinct_eigenvalues_stay_apart() {
        let an = analyze(&Mat::diag_real(&[1.0, 1.0 + 1e-6]), &Tolerance::default()).unwrap();
        assert_eq!(an.clusters.len(), 2);
    }

    #[test]
    fn conjugation_closure_for_real_input() {
        let a = sample::planted_matrix(&[
            PlantedBlock::Pair { re: 0.0, im: 2.0, size: 2 },
            PlantedBlock::Real { eigenvalue: -1.0, size: 2 },
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample::conditioned(&mut rng, 6, 10.0);
        let a = s.matmul(&a).matmul(&crate::linalg::inverse(&s, &Tolerance::default()).unwrap());
        let an = analyze(&a, &Tolerance::default()).unwrap();
        assert_eq!(an.clusters.len(), 2);
        assert!(an.clusters[0].pair);
        assert_eq!(an.clusters[0].weyr, vec![1, 1]);
        assert!((an.clusters[0].value - Scalar::new(0.0, 2.0)).norm() < 1e-9);
        assert_eq!(an.clusters[1].weyr, vec![1, 1]);
    }

    #[test]
    fn ordering_is_by_real_then_imaginary_part() {
        let a = Mat::diag(&[Scalar::new(0.0, -1.0), re(2.0), Scalar::new(0.0, 1.0), re(-3.0)], Field::Complex);
        let an = analyze(&a, &Tolerance::default()).unwrap();
        let want = [re(2.0), Scalar::new(0.0, 1.0), Scalar::new(0.0, -1.0), re(-3.0)];
        assert_eq!(an.clusters.len(), 4);
        for (c, w) in an.clusters.iter().zip(want) {
            assert!((c.value - w).norm() < 1e-12);
        }
    }
}
