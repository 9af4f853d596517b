//! Turning a cluster tree into a `k`-clustering, and scoring clusterings.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use super::linkage::ClusterTree;
use crate::error::{domain, Result};
use crate::instances::{validate_partition, ClusteringInstance};

/// Disjoint blocks covering `0..n`, each sorted, ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition(Vec<Vec<usize>>);

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        validate_partition(&blocks, n)?;
        Ok(Self::canonical(blocks))
    }

    fn canonical(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort();
        Partition(blocks)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Block index of every point.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; n];
        for (c, block) in self.0.iter().enumerate() {
            for &p in block {
                out[p] = c;
            }
        }
        out
    }
}

/// Medoid-based clustering cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostObjective {
    /// Sum of squared distances to the medoid.
    KMeans,
    /// Sum of distances to the medoid.
    KMedian,
}

impl CostObjective {
    #[inline]
    fn term(self, d: f64) -> f64 {
        match self {
            CostObjective::KMeans => d * d,
            CostObjective::KMedian => d,
        }
    }

    /// Cost of one cluster with its best medoid, and that medoid.
    pub fn cluster_cost(self, x: &ClusteringInstance, block: &[usize]) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        for &c in block {
            let cost = block.iter().fold(0.0, |acc, &v| acc + self.term(x.d(v, c)));
            if cost < best.0 {
                best = (cost, c);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", content = "objective", rename_all = "snake_case")]
pub enum Extraction {
    /// Undo the last `k − 1` merges.
    Unmerge,
    /// Cheapest pruning of the tree into `k` clusters.
    DpCost(CostObjective),
}

/// How a clustering is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterObjective {
    #[serde(rename = "kmeans")]
    KMeans,
    #[serde(rename = "kmedian")]
    KMedian,
    GroundTruth,
}

pub fn extract_k_clustering(
    tree: &ClusterTree,
    x: &ClusteringInstance,
    k: usize,
    method: Extraction,
) -> Result<Partition> {
    let n = tree.n();
    if k == 0 || k > n {
        return domain(format!("cannot extract {k} clusters from {n} points"));
    }
    if x.n() != n {
        return domain(format!("tree over {n} points, instance with {}", x.n()));
    }
    match method {
        Extraction::Unmerge => Ok(unmerge(tree, k)),
        Extraction::DpCost(objective) => Ok(best_pruning(tree, x, k, objective).1),
    }
}

fn unmerge(tree: &ClusterTree, k: usize) -> Partition {
    let n = tree.n();
    let members = tree.members();
    let mut live: Vec<bool> = (0..members.len()).map(|i| i < n).collect();
    for m in &tree.merges()[..n - k] {
        live[m.left] = false;
        live[m.right] = false;
        live[m.merged] = true;
    }
    let blocks = (0..members.len()).filter(|&i| live[i]).map(|i| members[i].clone()).collect();
    Partition::canonical(blocks)
}

/// Bottom-up DP over `(node, cluster count)`.
fn best_pruning(tree: &ClusterTree, x: &ClusteringInstance, k: usize, objective: CostObjective) -> (f64, Partition) {
    let n = tree.n();
    let members = tree.members();
    let nodes = members.len();
    // cost[node][j]: best cost of cutting the subtree into j clusters (j ≤ k).
    let mut cost = vec![vec![f64::INFINITY; k + 1]; nodes];
    // split[node][j]: clusters given to the left child, 0 = keep node whole.
    let mut split = vec![vec![0usize; k + 1]; nodes];
    for node in 0..nodes {
        cost[node][1] = objective.cluster_cost(x, &members[node]).0;
        if let Some((l, r)) = tree.children(node) {
            let cap = members[node].len().min(k);
            for j in 2..=cap {
                for jl in 1..j {
                    let c = cost[l][jl] + cost[r][j - jl];
                    if c < cost[node][j] {
                        cost[node][j] = c;
                        split[node][j] = jl;
                    }
                }
            }
        }
    }
    let mut blocks = Vec::with_capacity(k);
    let mut stack = vec![(tree.root(), k)];
    while let Some((node, j)) = stack.pop() {
        if j == 1 {
            blocks.push(members[node].clone());
        } else {
            let (l, r) = tree.children(node).expect("splitting needs children");
            let jl = split[node][j];
            stack.push((l, jl));
            stack.push((r, j - jl));
        }
    }
    debug_assert!(n >= k);
    (cost[tree.root()][k], Partition::canonical(blocks))
}

/// Raw score of a clustering: medoid cost for `KMeans`/`KMedian`, and the
/// misclassification loss in `[0, 1]` for `GroundTruth`. Lower is better.
pub fn clustering_utility(p: &Partition, x: &ClusteringInstance, mode: ClusterObjective) -> Result<f64> {
    let n = x.n();
    validate_partition(p.blocks(), n)?;
    match mode {
        ClusterObjective::KMeans | ClusterObjective::KMedian => {
            let objective = if mode == ClusterObjective::KMeans { CostObjective::KMeans } else { CostObjective::KMedian };
            Ok(p.blocks().iter().fold(0.0, |acc, b| acc + objective.cluster_cost(x, b).0))
        }
        ClusterObjective::GroundTruth => {
            let Some(truth) = x.ground_truth() else {
                return domain("instance has no ground-truth clustering");
            };
            if p.len() != truth.len() {
                return domain(format!("{} clusters against {} ground-truth blocks", p.len(), truth.len()));
            }
            let truth_label = Partition::canonical(truth.to_vec()).labels(n);
            let k = truth.len();
            let mut agree = vec![vec![0i64; k]; k];
            for (i, block) in p.blocks().iter().enumerate() {
                for &v in block {
                    agree[i][truth_label[v]] += 1;
                }
            }
            let (matched, _) = kuhn_munkres(&Matrix::from_rows(agree).expect("square agreement matrix"));
            Ok((n as i64 - matched) as f64 / n as f64)
        }
    }
}

/// Learner-facing utility (higher is better): `−cost` for cost objectives,
/// `1 − loss` against the ground truth.
pub fn learner_utility(p: &Partition, x: &ClusteringInstance, mode: ClusterObjective) -> Result<f64> {
    let raw = clustering_utility(p, x, mode)?;
    Ok(match mode {
        ClusterObjective::GroundTruth => 1.0 - raw,
        _ => 0.0 - raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{linkage_tree, Linkage};
    use crate::instances::{gen_clustering_smooth, RandomTape};

    fn line(points: &[f64]) -> ClusteringInstance {
        let rows: Vec<Vec<f64>> = points.iter().map(|a| points.iter().map(|b| (a - b).abs()).collect()).collect();
        let m = rows.iter().flatten().copied().fold(0.0, f64::max);
        ClusteringInstance::from_rows(&rows, 1, m).unwrap()
    }

    #[test]
    fn unmerge_extremes() {
        let x = gen_clustering_smooth(6, 1.0, 3.0, 2, &RandomTape::new(1, 1)).unwrap();
        let t = linkage_tree(&x, Linkage::Scl(0.2)).unwrap();
        let one = extract_k_clustering(&t, &x, 1, Extraction::Unmerge).unwrap();
        assert_eq!(one.blocks(), &[(0..6).collect::<Vec<_>>()]);
        let all = extract_k_clustering(&t, &x, 6, Extraction::Unmerge).unwrap();
        assert_eq!(all.blocks(), &(0..6).map(|i| vec![i]).collect::<Vec<_>>()[..]);
        assert!(extract_k_clustering(&t, &x, 7, Extraction::Unmerge).is_err());
        assert!(extract_k_clustering(&t, &x, 0, Extraction::Unmerge).is_err());
    }

    #[test]
    fn unmerge_on_a_line() {
        let x = line(&[0.0, 1.0, 10.0, 11.0, 30.0]);
        let t = linkage_tree(&x, Linkage::Scl(0.0)).unwrap();
        let p = extract_k_clustering(&t, &x, 3, Extraction::Unmerge).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3], vec![4]]);
    }

    /// All prunings of the subtree at `node`.
    fn prunings(tree: &ClusterTree, members: &[Vec<usize>], node: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![vec![members[node].clone()]];
        if let Some((l, r)) = tree.children(node) {
            for a in prunings(tree, members, l) {
                for b in prunings(tree, members, r) {
                    out.push(a.iter().chain(&b).cloned().collect());
                }
            }
        }
        out
    }

    #[test]
    fn dp_matches_exhaustive_pruning() {
        for seed in 0..30 {
            let n = 3 + (seed as usize % 6);
            let x = gen_clustering_smooth(n, 1.0, 2.0, 2, &RandomTape::new(seed, 4)).unwrap();
            let t = linkage_tree(&x, Linkage::Scl(0.5)).unwrap();
            let members = t.members();
            let all = prunings(&t, &members, t.root());
            for k in 1..=n {
                for objective in [CostObjective::KMedian, CostObjective::KMeans] {
                    let best = all
                        .iter()
                        .filter(|p| p.len() == k)
                        .map(|p| p.iter().fold(0.0, |acc, b| acc + objective.cluster_cost(&x, b).0))
                        .fold(f64::INFINITY, f64::min);
                    let p = extract_k_clustering(&t, &x, k, Extraction::DpCost(objective)).unwrap();
                    assert_eq!(p.len(), k);
                    let mode = if objective == CostObjective::KMeans { ClusterObjective::KMeans } else { ClusterObjective::KMedian };
                    let got = clustering_utility(&p, &x, mode).unwrap();
                    assert!((got - best).abs() <= 1e-12 * best.max(1.0), "seed {seed} k {k}: {got} vs {best}");
                }
            }
        }
    }

    #[test]
    fn ground_truth_loss() {
        let x = line(&[0.0, 1.0, 2.0, 3.0]).with_ground_truth(vec![vec![0, 2], vec![1, 3]]).unwrap();
        let same = Partition::new(4, vec![vec![2, 0], vec![3, 1]]).unwrap();
        assert_eq!(clustering_utility(&same, &x, ClusterObjective::GroundTruth).unwrap(), 0.0);
        assert_eq!(learner_utility(&same, &x, ClusterObjective::GroundTruth).unwrap(), 1.0);
        let p = Partition::new(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(clustering_utility(&p, &x, ClusterObjective::GroundTruth).unwrap(), 0.5);
        let three = Partition::new(4, vec![vec![0], vec![1], vec![2, 3]]).unwrap();
        assert!(clustering_utility(&three, &x, ClusterObjective::GroundTruth).is_err());
        let plain = line(&[0.0, 1.0]);
        let p2 = Partition::new(2, vec![vec![0, 1]]).unwrap();
        assert!(clustering_utility(&p2, &plain, ClusterObjective::GroundTruth).is_err());
    }

    /// Brute-force loss over all bijections.
    fn loss_by_permutations(p: &Partition, truth: &[Vec<usize>], n: usize) -> f64 {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        let k = truth.len();
        perms(k)
            .iter()
            .map(|sigma| {
                let wrong: usize = (0..k)
                    .map(|i| p.blocks()[i].iter().filter(|v| !truth[sigma[i]].contains(v)).count())
                    .sum();
                wrong as f64 / n as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matching_equals_permutation_search() {
        let x = gen_clustering_smooth(9, 1.0, 2.0, 3, &RandomTape::new(5, 5)).unwrap();
        let truth = vec![vec![0, 4, 8], vec![1, 2, 3], vec![5, 6, 7]];
        let x = x.with_ground_truth(truth.clone()).unwrap();
        let canon = Partition::new(9, truth).unwrap();
        for rho in [0.0, 0.3, 0.7, 1.0] {
            let t = linkage_tree(&x, Linkage::Scl(rho)).unwrap();
            let p = extract_k_clustering(&t, &x, 3, Extraction::Unmerge).unwrap();
            let loss = clustering_utility(&p, &x, ClusterObjective::GroundTruth).unwrap();
            assert!((loss - loss_by_permutations(&p, canon.blocks(), 9)).abs() < 1e-15);
        }
    }

    #[test]
    fn singletons_cost_nothing() {
        let x = gen_clustering_smooth(5, 1.0, 2.0, 5, &RandomTape::new(0, 0)).unwrap();
        let p = Partition::new(5, (0..5).map(|i| vec![i]).collect()).unwrap();
        assert_eq!(clustering_utility(&p, &x, ClusterObjective::KMeans).unwrap(), 0.0);
        assert_eq!(learner_utility(&p, &x, ClusterObjective::KMedian).unwrap(), 0.0);
    }
}
