//! Random instance generators.
//!
//! Each generated coordinate reads its own tape substream, so instances are
//! pure functions of `(parameters, tape)`.

use rand::Rng;

use super::{ClusteringInstance, GraphInstance, KnapsackInstance, RandomTape};
use crate::error::{domain, Result};

// Substream layout. Offsets keep the streams of different coordinates apart.
const VALUE_STREAM: u64 = 0;
const SIZE_STREAM: u64 = 1 << 32;
const EDGE_STREAM: u64 = 0;
const EDGE_WEIGHT_STREAM: u64 = 1 << 40;
const VERTEX_WEIGHT_STREAM: u64 = 2 << 40;

/// Draws a value with density at most `1/width` inside `(lo, hi]`.
///
/// A window of the given width is centered at a uniform point of `[lo, hi]`,
/// shifted back inside the support, and the value is uniform in that window.
pub fn smooth_draw(rng: &mut impl Rng, lo: f64, hi: f64, width: f64) -> f64 {
    debug_assert!(width <= hi - lo);
    let center: f64 = lo + (hi - lo) * rng.random::<f64>();
    let start = (center - width / 2.0).clamp(lo, hi - width);
    // 1 - U lies in (0, 1], so the draw never hits the open end `lo`.
    let u: f64 = rng.random();
    (start + width * (1.0 - u)).min(hi)
}

/// Knapsack with `b`-smooth values in `(0, 1]` and uniform sizes in `[1, C]`.
pub fn gen_knapsack_smooth(n: usize, capacity: f64, b: f64, tape: &RandomTape) -> Result<KnapsackInstance> {
    if n == 0 {
        return domain("knapsack generator needs n >= 1");
    }
    if !(capacity.is_finite() && capacity >= 1.0) {
        return domain(format!("capacity {capacity} must be >= 1"));
    }
    if !(b.is_finite() && b >= 1.0) {
        return domain(format!("smoothness b = {b} must be >= 1 (window 1/b must fit in (0, 1])"));
    }
    let width = 1.0 / b;
    let values = (0..n as u64)
        .map(|i| smooth_draw(&mut tape.rng(VALUE_STREAM + i), 0.0, 1.0, width))
        .collect();
    let sizes = (0..n as u64)
        .map(|i| {
            let u: f64 = tape.rng(SIZE_STREAM + i).random();
            (1.0 + (capacity - 1.0) * u).min(capacity)
        })
        .collect();
    KnapsackInstance::new(values, sizes, capacity)
}

/// Clustering instance whose upper-triangle distances are independent and
/// `b`-smooth inside `[0, M]`.
pub fn gen_clustering_smooth(
    n: usize,
    max_dist: f64,
    b: f64,
    k: usize,
    tape: &RandomTape,
) -> Result<ClusteringInstance> {
    if n < 2 {
        return domain("clustering generator needs n >= 2");
    }
    if !(b.is_finite() && b > 0.0) {
        return domain(format!("smoothness b = {b} must be positive"));
    }
    if !(max_dist.is_finite() && max_dist >= 1.0 / b) {
        return domain(format!("distance cap {max_dist} is below the window width 1/b = {}", 1.0 / b));
    }
    if k == 0 || k > n {
        return domain(format!("k = {k} must lie in 1..={n}"));
    }
    let width = 1.0 / b;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let stream = (i * n + j) as u64;
            let d = smooth_draw(&mut tape.rng(stream), 0.0, max_dist, width);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    ClusteringInstance::new(n, dist, k, None, max_dist)
}

/// Erdős–Rényi graph with i.i.d. edge and vertex weights uniform on `(0, w_max]`.
pub fn gen_maxcut(n: usize, edge_prob: f64, w_max: f64, tape: &RandomTape) -> Result<GraphInstance> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return domain(format!("edge probability {edge_prob} outside [0, 1]"));
    }
    if !(w_max.is_finite() && w_max > 0.0) {
        return domain(format!("w_max = {w_max} must be positive"));
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let pair = (i * n + j) as u64;
            if tape.rng(EDGE_STREAM + pair).random::<f64>() < edge_prob {
                let u: f64 = tape.rng(EDGE_WEIGHT_STREAM + pair).random();
                edges.push((i, j, w_max * (1.0 - u)));
            }
        }
    }
    let weights = (0..n as u64)
        .map(|v| w_max * (1.0 - tape.rng(VERTEX_WEIGHT_STREAM + v).random::<f64>()))
        .collect();
    GraphInstance::new_weighted(n, weights, edges)
}
