use crate::error::{domain, Result};

use super::RandomTape;

/// Items with values and sizes, plus a knapsack capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackInstance {
    values: Vec<f64>,
    sizes: Vec<f64>,
    capacity: f64,
}

impl KnapsackInstance {
    pub fn new(values: Vec<f64>, sizes: Vec<f64>, capacity: f64) -> Result<Self> {
        if values.is_empty() {
            return domain("knapsack instance needs at least one item");
        }
        if values.len() != sizes.len() {
            return domain(format!(
                "{} values but {} sizes",
                values.len(),
                sizes.len()
            ));
        }
        if !(capacity.is_finite() && capacity >= 1.0) {
            return domain(format!("capacity {capacity} must be a finite real >= 1"));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return domain(format!("value {i} = {v} is not a positive real"));
        }
        if let Some((i, s)) = sizes
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.is_finite() && **s >= 1.0 && **s <= capacity))
        {
            return domain(format!("size {i} = {s} is outside [1, {capacity}]"));
        }
        Ok(KnapsackInstance { values, sizes, capacity })
    }

    /// Builds an instance from `(value, size)` pairs.
    pub fn from_items(items: &[(f64, f64)], capacity: f64) -> Result<Self> {
        let (values, sizes) = items.iter().copied().unzip();
        Self::new(values, sizes, capacity)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }
}

/// Undirected graph without self loops, with vertex weights (for
/// independent set) and edge weights (for max-cut, default 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    weights: Vec<f64>,
    edges: Vec<(usize, usize)>,
    edge_weights: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

impl GraphInstance {
    /// Unit edge weights. Edges are normalized to `(min, max)`, sorted and
    /// deduplicated.
    pub fn new(n: usize, weights: Vec<f64>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            normalized.push((a.min(b), a.max(b), 1.0));
        }
        normalized.sort_by_key(|x| (x.0, x.1));
        normalized.dedup_by(|x, y| (x.0, x.1) == (y.0, y.1));
        Self::new_weighted(n, weights, normalized)
    }

    /// Edges given as `(a, b, weight)`; listing an edge twice is an error.
    pub fn new_weighted(n: usize, weights: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        if weights.len() != n {
            return domain(format!("{} weights for {n} vertices", weights.len()));
        }
        if let Some((v, w)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
            return domain(format!("weight of vertex {v} = {w} is not a non-negative real"));
        }
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return domain(format!("self loop at vertex {a}"));
            }
            if a >= n || b >= n {
                return domain(format!("edge ({a}, {b}) has an endpoint outside [0, {n})"));
            }
            if !(w.is_finite() && w >= 0.0) {
                return domain(format!("edge ({a}, {b}) has weight {w}"));
            }
            normalized.push((a.min(b), a.max(b), w));
        }
        normalized.sort_by_key(|x| (x.0, x.1));
        if let Some(pair) = normalized.windows(2).find(|p| (p[0].0, p[0].1) == (p[1].0, p[1].1)) {
            return domain(format!("edge ({}, {}) listed twice", pair[0].0, pair[0].1));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, _) in &normalized {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(GraphInstance {
            weights,
            edges: normalized.iter().map(|&(a, b, _)| (a, b)).collect(),
            edge_weights: normalized.iter().map(|e| e.2).collect(),
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    /// Vertex weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Weight of each edge, parallel to [`edges`](Self::edges).
    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weights
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edge_weights.iter().sum()
    }

    /// Total weight of the edges whose endpoints get different signs in `z`.
    pub fn cut_value(&self, z: &[i8]) -> f64 {
        self.edges
            .iter()
            .zip(&self.edge_weights)
            .filter(|(&(a, b), _)| z[a] != z[b])
            .map(|(_, w)| w)
            .sum()
    }
}

/// Points given only through a symmetric dissimilarity matrix.
///
/// The triangle inequality is not required.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringInstance {
    n: usize,
    dist: Vec<f64>,
    k: usize,
    ground_truth: Option<Vec<Vec<usize>>>,
    max_dist: f64,
}

impl ClusteringInstance {
    /// `dist` is row-major `n × n`.
    pub fn new(
        n: usize,
        dist: Vec<f64>,
        k: usize,
        ground_truth: Option<Vec<Vec<usize>>>,
        max_dist: f64,
    ) -> Result<Self> {
        if n == 0 {
            return domain("clustering instance needs at least one point");
        }
        if dist.len() != n * n {
            return domain(format!("distance matrix has {} entries, expected {}", dist.len(), n * n));
        }
        if !(max_dist.is_finite() && max_dist >= 0.0) {
            return domain(format!("distance cap {max_dist} must be a finite non-negative real"));
        }
        if k == 0 || k > n {
            return domain(format!("k = {k} must lie in 1..={n}"));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return domain(format!("d({i},{i}) = {} is not zero", dist[i * n + i]));
            }
            for j in (i + 1)..n {
                let d = dist[i * n + j];
                if d != dist[j * n + i] {
                    return domain(format!("distance matrix not symmetric at ({i},{j})"));
                }
                if !(d.is_finite() && (0.0..=max_dist).contains(&d)) {
                    return domain(format!("d({i},{j}) = {d} is outside [0, {max_dist}]"));
                }
            }
        }
        if let Some(blocks) = &ground_truth {
            validate_partition(blocks, n)?;
            if blocks.len() != k {
                return domain(format!("ground truth has {} blocks, expected k = {k}", blocks.len()));
            }
        }
        let ground_truth = ground_truth.map(|blocks| {
            let mut blocks: Vec<Vec<usize>> = blocks
                .into_iter()
                .map(|mut b| {
                    b.sort_unstable();
                    b
                })
                .collect();
            blocks.sort();
            blocks
        });
        Ok(ClusteringInstance { n, dist, k, ground_truth, max_dist })
    }

    pub fn from_rows(rows: &[Vec<f64>], k: usize, max_dist: f64) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return domain(format!("row of length {} in a {n}-point matrix", r.len()));
        }
        Self::new(n, rows.concat(), k, None, max_dist)
    }

    pub fn with_ground_truth(mut self, blocks: Vec<Vec<usize>>) -> Result<Self> {
        validate_partition(&blocks, self.n)?;
        self.k = blocks.len();
        let rebuilt = Self::new(self.n, self.dist, self.k, Some(blocks), self.max_dist)?;
        Ok(rebuilt)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn max_dist(&self) -> f64 {
        self.max_dist
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn dist(&self) -> &[f64] {
        &self.dist
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn ground_truth(&self) -> Option<&[Vec<usize>]> {
        self.ground_truth.as_deref()
    }
}

pub(crate) fn validate_partition(blocks: &[Vec<usize>], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for block in blocks {
        if block.is_empty() {
            return domain("partition contains an empty block");
        }
        for &p in block {
            if p >= n {
                return domain(format!("point {p} outside [0, {n})"));
            }
            if std::mem::replace(&mut seen[p], true) {
                return domain(format!("point {p} appears in two blocks"));
            }
        }
    }
    if let Some(p) = seen.iter().position(|s| !s) {
        return domain(format!("point {p} is not covered by the partition"));
    }
    Ok(())
}

/// Integer quadratic program `max zᵀAz` over `z ∈ {±1}ⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct IqpInstance {
    n: usize,
    a: Vec<f64>,
}

impl IqpInstance {
    /// Stores `(A + Aᵀ)/2` of the row-major matrix `a`.
    pub fn new(n: usize, a: Vec<f64>) -> Result<Self> {
        if a.len() != n * n {
            return domain(format!("matrix has {} entries, expected {}", a.len(), n * n));
        }
        if let Some(x) = a.iter().find(|x| !x.is_finite()) {
            return domain(format!("matrix entry {x} is not finite"));
        }
        let mut sym = a.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let m = (a[i * n + j] + a[j * n + i]) / 2.0;
                sym[i * n + j] = m;
                sym[j * n + i] = m;
            }
        }
        Ok(IqpInstance { n, a: sym })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return domain(format!("row of length {} in a {n}×{n} matrix", r.len()));
        }
        Self::new(n, rows.concat())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.n.max(1)).map(<[f64]>::to_vec).collect()
    }

    /// `zᵀAz` summed over all ordered pairs.
    pub fn quadratic_form(&self, z: &[i8]) -> f64 {
        let n = self.n;
        let mut total = 0.0;
        for i in 0..n {
            let zi = f64::from(z[i]);
            for j in 0..n {
                total += self.a[i * n + j] * zi * f64::from(z[j]);
            }
        }
        total
    }
}

/// Any of the four supported problem inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Knapsack(KnapsackInstance),
    Graph(GraphInstance),
    Clustering(ClusteringInstance),
    Iqp(IqpInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Knapsack(_) => "knapsack",
            Instance::Graph(_) => "graph",
            Instance::Clustering(_) => "clustering",
            Instance::Iqp(_) => "iqp",
        }
    }
}

macro_rules! impl_from_instance {
    ($($variant:ident($ty:ty)),*) => {
        $(impl From<$ty> for Instance {
            fn from(x: $ty) -> Self {
                Instance::$variant(x)
            }
        })*
    };
}

impl_from_instance!(
    Knapsack(KnapsackInstance),
    Graph(GraphInstance),
    Clustering(ClusteringInstance),
    Iqp(IqpInstance)
);

/// An instance together with the tape that holds its algorithm randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct TapedInstance {
    pub instance: Instance,
    pub tape: RandomTape,
}

impl TapedInstance {
    pub fn new(instance: impl Into<Instance>, tape: RandomTape) -> Self {
        TapedInstance { instance: instance.into(), tape }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knapsack_rejects_bad_items() {
        assert!(KnapsackInstance::new(vec![], vec![], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![1.0, 1.0], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![0.0], vec![1.0], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![0.5], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![3.0], 2.0).is_err());
        assert!(KnapsackInstance::new(vec![1.0], vec![1.0], 0.5).is_err());
        assert!(KnapsackInstance::new(vec![5.0], vec![2.0], 2.0).is_ok());
    }

    #[test]
    fn graph_normalizes_edges() {
        let g = GraphInstance::new(3, vec![1.0; 3], vec![(1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert!(GraphInstance::new(2, vec![1.0; 2], vec![(1, 1)]).is_err());
        assert!(GraphInstance::new(2, vec![1.0; 2], vec![(0, 2)]).is_err());
        assert!(GraphInstance::new(2, vec![1.0, -1.0], vec![]).is_err());
        assert!(GraphInstance::new_weighted(2, vec![1.0; 2], vec![(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        let w = GraphInstance::new_weighted(3, vec![1.0; 3], vec![(2, 0, 3.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(w.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(w.edge_weights(), &[2.0, 3.0]);
        assert_eq!(w.cut_value(&[1, 1, -1]), 3.0);
    }

    #[test]
    fn clustering_checks_matrix_and_partition() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = ClusteringInstance::from_rows(&rows, 1, 1.0).unwrap();
        assert_eq!(x.d(0, 1), 1.0);
        assert!(ClusteringInstance::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]], 1, 2.0).is_err());
        assert!(ClusteringInstance::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]], 1, 2.0).is_err());
        assert!(ClusteringInstance::from_rows(&rows, 3, 1.0).is_err());
        assert!(x.clone().with_ground_truth(vec![vec![0], vec![0, 1]]).is_err());
        assert!(x.clone().with_ground_truth(vec![vec![0]]).is_err());
        let gt = x.with_ground_truth(vec![vec![1], vec![0]]).unwrap();
        assert_eq!(gt.k(), 2);
        assert_eq!(gt.ground_truth().unwrap(), &[vec![0], vec![1]]);
    }

    #[test]
    fn iqp_symmetrizes() {
        let q = IqpInstance::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        assert_eq!(q.a(0, 1), 1.0);
        assert_eq!(q.a(1, 0), 1.0);
        assert_eq!(q.quadratic_form(&[1, -1]), 1.0 + 3.0 - 2.0);
    }
}
