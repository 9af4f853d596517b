//! Agglomerative clustering with parametrized linkage rules.
//!
//! Two interpolating families are supported:
//!
//! * `scl(ρ)`, `ρ ∈ [0, 1]`: `(1−ρ)·d_min(A,B) + ρ·d_max(A,B)`. `ρ = 0` is
//!   single linkage and `ρ = 1` complete linkage.
//! * `exp(ρ)`, `ρ ∈ ℝ`: the power mean `((1/|A||B|) Σ d(u,v)^ρ)^{1/ρ}`,
//!   with the geometric mean at `ρ = 0`. It tends to complete linkage as
//!   `ρ → ∞` and to single linkage as `ρ → −∞`.
//!
//! Ties between candidate merges are broken by the smallest member of the
//! first cluster, then of the second.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::instances::ClusteringInstance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Linkage {
    Scl(f64),
    Exp(f64),
}

impl Linkage {
    fn validate(self) -> Result<()> {
        match self {
            Linkage::Scl(rho) if !(0.0..=1.0).contains(&rho) => {
                domain(format!("scl parameter {rho} outside [0, 1]"))
            }
            Linkage::Exp(rho) if !rho.is_finite() => domain(format!("exp parameter {rho} is not finite")),
            _ => Ok(()),
        }
    }
}

/// One agglomeration step. Cluster ids `0..n` are the leaves; merge `t`
/// creates cluster `n + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge {
    /// The cluster with the smaller minimum member.
    pub left: usize,
    pub right: usize,
    pub merged: usize,
    /// Linkage distance of the pair when it was merged.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterTree {
    n: usize,
    merges: Vec<Merge>,
}

impl ClusterTree {
    pub(crate) fn from_merges(n: usize, merges: Vec<Merge>) -> Self {
        ClusterTree { n, merges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// The merge sequence without distances.
    pub fn topology(&self) -> Vec<(usize, usize)> {
        self.merges.iter().map(|m| (m.left, m.right)).collect()
    }

    pub fn same_topology(&self, other: &ClusterTree) -> bool {
        self.n == other.n && self.merges.iter().zip(&other.merges).all(|(a, b)| (a.left, a.right) == (b.left, b.right))
    }

    pub fn root(&self) -> usize {
        if self.merges.is_empty() {
            0
        } else {
            self.n + self.merges.len() - 1
        }
    }

    /// Children of an internal node, `None` for leaves.
    pub fn children(&self, node: usize) -> Option<(usize, usize)> {
        (node >= self.n).then(|| {
            let m = &self.merges[node - self.n];
            (m.left, m.right)
        })
    }

    /// Sorted members of every node, indexed by cluster id.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..self.n).map(|i| vec![i]).collect();
        for m in &self.merges {
            let mut joined = out[m.left].clone();
            joined.extend_from_slice(&out[m.right]);
            joined.sort_unstable();
            out.push(joined);
        }
        out
    }
}

/// A live candidate merge seen at one step of a run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Candidate<S> {
    pub a: usize,
    pub b: usize,
    /// `(min member of a, min member of b)`, with the first smaller.
    pub key: (usize, usize),
    pub stat: S,
    /// Value compared between candidates; smaller merges first.
    pub score: f64,
}

fn better<S>(x: &Candidate<S>, y: &Candidate<S>) -> bool {
    match x.score.partial_cmp(&y.score).expect("linkage scores are never NaN") {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => x.key < y.key,
    }
}

/// Pairwise statistic that determines a linkage distance.
pub(crate) trait PairStat: Copy {
    fn combine(self, other: Self) -> Self;
}

/// Generic agglomeration over a pair statistic.
///
/// `score(stat, |A|, |B|)` gives the compared value, `distance` the value
/// recorded in the tree. `observe` sees the winner and all candidates of
/// every step.
pub(crate) fn agglomerate<S: PairStat>(
    x: &ClusteringInstance,
    leaf: impl Fn(f64) -> S,
    score: impl Fn(&S, usize, usize) -> f64,
    distance: impl Fn(f64) -> f64,
    mut observe: impl FnMut(&Candidate<S>, &[Candidate<S>]),
) -> ClusterTree {
    let n = x.n();
    let ids = 2 * n;
    let mut stat: Vec<Option<S>> = vec![None; ids * ids];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                stat[i * ids + j] = Some(leaf(x.d(i, j)));
            }
        }
    }
    let mut size = vec![1usize; ids];
    let mut min_member: Vec<usize> = (0..ids).collect();
    let mut live: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut candidates = Vec::new();
    for t in 0..n.saturating_sub(1) {
        candidates.clear();
        for (p, &a) in live.iter().enumerate() {
            for &b in &live[p + 1..] {
                let (a, b) = if min_member[a] < min_member[b] { (a, b) } else { (b, a) };
                let s = stat[a * ids + b].expect("live pairs have statistics");
                candidates.push(Candidate {
                    a,
                    b,
                    key: (min_member[a], min_member[b]),
                    score: score(&s, size[a], size[b]),
                    stat: s,
                });
            }
        }
        let mut best = candidates[0];
        for c in &candidates[1..] {
            if better(c, &best) {
                best = *c;
            }
        }
        observe(&best, &candidates);
        let merged = n + t;
        merges.push(Merge { left: best.a, right: best.b, merged, distance: distance(best.score) });
        size[merged] = size[best.a] + size[best.b];
        min_member[merged] = min_member[best.a];
        live.retain(|&c| c != best.a && c != best.b);
        for &c in &live {
            let s = stat[best.a * ids + c].unwrap().combine(stat[best.b * ids + c].unwrap());
            stat[merged * ids + c] = Some(s);
            stat[c * ids + merged] = Some(s);
        }
        live.push(merged);
    }
    ClusterTree::from_merges(n, merges)
}

/// Closest and farthest cross pair distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct MinMax {
    pub dmin: f64,
    pub dmax: f64,
}

impl PairStat for MinMax {
    fn combine(self, o: Self) -> Self {
        MinMax { dmin: self.dmin.min(o.dmin), dmax: self.dmax.max(o.dmax) }
    }
}

#[inline]
pub(crate) fn scl_distance(s: &MinMax, rho: f64) -> f64 {
    (1.0 - rho) * s.dmin + rho * s.dmax
}

/// Log of `Σ d^ρ` (or `Σ ln d` when `ρ = 0`) over cross pairs, plus the
/// number of zero-distance cross pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerSum {
    acc: f64,
    zeros: usize,
    geometric: bool,
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let m = x.max(y);
    m + ((x - m).exp() + (y - m).exp()).ln()
}

impl PairStat for PowerSum {
    fn combine(self, o: Self) -> Self {
        let acc = if self.geometric { self.acc + o.acc } else { log_add_exp(self.acc, o.acc) };
        PowerSum { acc, zeros: self.zeros + o.zeros, geometric: self.geometric }
    }
}

/// Power-mean linkage distance of two point groups, straight from the formula.
pub fn exp_linkage_distance(dists: &[f64], rho: f64) -> f64 {
    let m = dists.len() as f64;
    if rho == 0.0 {
        (dists.iter().map(|d| d.ln()).sum::<f64>() / m).exp()
    } else {
        (dists.iter().map(|d| d.powf(rho)).sum::<f64>() / m).powf(1.0 / rho)
    }
}

pub fn linkage_tree(x: &ClusteringInstance, rule: Linkage) -> Result<ClusterTree> {
    rule.validate()?;
    if x.n() < 2 {
        return domain("linkage needs at least two points");
    }
    Ok(match rule {
        Linkage::Scl(rho) => agglomerate(
            x,
            |d| MinMax { dmin: d, dmax: d },
            |s, _, _| scl_distance(s, rho),
            |d| d,
            |_, _| {},
        ),
        Linkage::Exp(rho) => {
            let geometric = rho == 0.0;
            agglomerate(
                x,
                |d| {
                    if d == 0.0 {
                        // Zero pairs merge first; their power sum is irrelevant.
                        PowerSum { acc: if geometric { 0.0 } else { f64::NEG_INFINITY }, zeros: 1, geometric }
                    } else if geometric {
                        PowerSum { acc: d.ln(), zeros: 0, geometric }
                    } else {
                        PowerSum { acc: rho * d.ln(), zeros: 0, geometric }
                    }
                },
                |s, na, nb| {
                    if s.zeros > 0 {
                        f64::NEG_INFINITY
                    } else {
                        let pairs = (na * nb) as f64;
                        if geometric {
                            s.acc / pairs
                        } else {
                            (s.acc - pairs.ln()) / rho
                        }
                    }
                },
                f64::exp,
                |_, _| {},
            )
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_clustering_smooth, RandomTape};

    fn three_points() -> ClusteringInstance {
        ClusteringInstance::from_rows(
            &[vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 3.0], vec![5.0, 3.0, 0.0]],
            1,
            5.0,
        )
        .unwrap()
    }

    #[test]
    fn single_linkage_hand_run() {
        let t = linkage_tree(&three_points(), Linkage::Scl(0.0)).unwrap();
        assert_eq!(t.topology(), vec![(0, 1), (3, 2)]);
        assert_eq!(t.merges()[0].distance, 1.0);
        assert_eq!(t.merges()[1].distance, 3.0);
        let c = linkage_tree(&three_points(), Linkage::Scl(1.0)).unwrap();
        assert_eq!(c.merges()[1].distance, 5.0);
    }

    #[test]
    fn scl_formula() {
        assert_eq!(scl_distance(&MinMax { dmin: 1.0, dmax: 3.0 }, 0.5), 2.0);
    }

    #[test]
    fn exp_formula() {
        assert_eq!(exp_linkage_distance(&[1.0, 3.0], 1.0), 2.0);
        assert!((exp_linkage_distance(&[1.0, 3.0], 2.0) - 5f64.sqrt()).abs() < 1e-15);
        assert!((exp_linkage_distance(&[1.0, 4.0], 0.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exp_tree_distances_match_formula() {
        let x = gen_clustering_smooth(7, 2.0, 2.0, 2, &RandomTape::new(1, 1)).unwrap();
        for rho in [-3.0, 0.0, 1.0, 2.5] {
            let t = linkage_tree(&x, Linkage::Exp(rho)).unwrap();
            let members = t.members();
            for m in t.merges() {
                let mut ds = Vec::new();
                for &u in &members[m.left] {
                    for &v in &members[m.right] {
                        ds.push(x.d(u, v));
                    }
                }
                let direct = exp_linkage_distance(&ds, rho);
                assert!((direct - m.distance).abs() <= 1e-12 * direct.max(1.0), "{rho}: {direct} vs {}", m.distance);
            }
        }
    }

    #[test]
    fn zero_distances_premerge_under_exp() {
        let x = ClusteringInstance::from_rows(
            &[vec![0.0, 2.0, 0.0], vec![2.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]],
            1,
            2.0,
        )
        .unwrap();
        for rho in [-1.0, 0.0, 2.0] {
            let t = linkage_tree(&x, Linkage::Exp(rho)).unwrap();
            assert_eq!(t.merges()[0].left, 0);
            assert_eq!(t.merges()[0].right, 2);
            assert_eq!(t.merges()[0].distance, 0.0);
            assert!(t.merges()[1].distance.is_finite());
        }
    }

    #[test]
    fn ties_use_smallest_members() {
        let x = ClusteringInstance::from_rows(
            &[
                vec![0.0, 1.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0, 1.0],
                vec![1.0, 1.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0, 0.0],
            ],
            1,
            1.0,
        )
        .unwrap();
        let t = linkage_tree(&x, Linkage::Scl(0.3)).unwrap();
        assert_eq!(t.topology(), vec![(0, 1), (4, 2), (5, 3)]);
    }

    #[test]
    fn parameter_validation() {
        let x = three_points();
        assert!(linkage_tree(&x, Linkage::Scl(1.1)).is_err());
        assert!(linkage_tree(&x, Linkage::Exp(f64::INFINITY)).is_err());
        let one = ClusteringInstance::from_rows(&[vec![0.0]], 1, 1.0).unwrap();
        assert!(linkage_tree(&one, Linkage::Scl(0.0)).is_err());
    }

    #[test]
    fn members_cover_everything() {
        let x = gen_clustering_smooth(9, 1.0, 4.0, 3, &RandomTape::new(2, 0)).unwrap();
        let t = linkage_tree(&x, Linkage::Scl(0.4)).unwrap();
        assert_eq!(t.merges().len(), 8);
        assert_eq!(t.members()[t.root()], (0..9).collect::<Vec<_>>());
    }
}
