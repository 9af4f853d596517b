//! `α`-seeding followed by medoid Lloyd iterations.
//!
//! The seeding randomness comes from the instance tape: step `t` reads one
//! uniform `U_t` from substream `t` and picks the point where the
//! normalized cumulative weight `Σ d_min^α` (in index order) first exceeds
//! it. With the tape fixed the run is a deterministic function of `α`, and
//! its cost is piecewise constant in `α`.

use rand::Rng;

use super::pruning::{CostObjective, Partition};
use crate::error::{domain, Result};
use crate::instances::{ClusteringInstance, RandomTape};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LloydsOutcome {
    /// Centers picked by the seeding, in order.
    pub seeds: Vec<usize>,
    /// Medoids after the Lloyd phase.
    pub centers: Vec<usize>,
    pub partition: Partition,
    /// k-means cost (squared distances to the medoids).
    pub cost: f64,
    pub iterations: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha < 0.0 {
        return domain(format!("alpha = {alpha} must be non-negative (or +inf)"));
    }
    Ok(())
}

/// Index at which the running sum of `weights` first exceeds `u · total`.
fn inverse_cdf(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = Some(i);
            if target < acc {
                return Some(i);
            }
        }
    }
    last
}

/// Seeds `k` centers. `first` overrides the uniformly drawn first center.
pub fn seed_centers(
    x: &ClusteringInstance,
    k: usize,
    alpha: f64,
    tape: &RandomTape,
    first: Option<usize>,
) -> Result<Vec<usize>> {
    check_alpha(alpha)?;
    let n = x.n();
    if k == 0 || k > n {
        return domain(format!("k = {k} must lie in 1..={n}"));
    }
    let first = match first {
        Some(c) if c >= n => return domain(format!("first center {c} outside [0, {n})")),
        Some(c) => c,
        None => ((tape.rng(0).random::<f64>() * n as f64) as usize).min(n - 1),
    };
    let mut centers = vec![first];
    let mut is_center = vec![false; n];
    is_center[first] = true;
    let mut dmin: Vec<f64> = (0..n).map(|v| x.d(v, first)).collect();
    for t in 1..k {
        let next = if alpha == f64::INFINITY {
            let mut best: Option<usize> = None;
            for v in (0..n).filter(|&v| !is_center[v]) {
                if best.is_none_or(|b| dmin[v] > dmin[b]) {
                    best = Some(v);
                }
            }
            best.expect("fewer centers than points")
        } else {
            let u: f64 = tape.rng(t as u64).random();
            let top = (0..n).filter(|&v| !is_center[v]).map(|v| dmin[v]).fold(0.0, f64::max);
            let weights: Vec<f64> = (0..n)
                .map(|v| {
                    if is_center[v] {
                        0.0
                    } else if alpha == 0.0 {
                        1.0
                    } else if dmin[v] == 0.0 {
                        0.0
                    } else {
                        // d^α / top^α in log space.
                        (alpha * (dmin[v].ln() - top.ln())).exp()
                    }
                })
                .collect();
            match inverse_cdf(&weights, u) {
                Some(v) => v,
                None => {
                    // Every remaining point sits on a center: uniform among them.
                    let rest: Vec<f64> = (0..n).map(|v| if is_center[v] { 0.0 } else { 1.0 }).collect();
                    inverse_cdf(&rest, u).expect("fewer centers than points")
                }
            }
        };
        centers.push(next);
        is_center[next] = true;
        for v in 0..n {
            dmin[v] = dmin[v].min(x.d(v, next));
        }
    }
    Ok(centers)
}

/// Nearest center per point; ties go to the smaller center index.
fn assign(x: &ClusteringInstance, centers: &[usize]) -> Vec<usize> {
    (0..x.n())
        .map(|v| {
            let mut best = 0;
            for (c, &p) in centers.iter().enumerate().skip(1) {
                let (d, db) = (x.d(v, p), x.d(v, centers[best]));
                if d < db || (d == db && p < centers[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

pub fn lloyds_alpha(x: &ClusteringInstance, alpha: f64, tape: &RandomTape, max_iters: usize) -> Result<LloydsOutcome> {
    lloyds_from_seeds(x, seed_centers(x, x.k(), alpha, tape, None)?, max_iters)
}

/// Medoid Lloyd iterations from the given centers.
pub fn lloyds_from_seeds(x: &ClusteringInstance, seeds: Vec<usize>, max_iters: usize) -> Result<LloydsOutcome> {
    let mut centers = seeds.clone();
    let mut iterations = 0;
    let mut owner = assign(x, &centers);
    while iterations < max_iters {
        iterations += 1;
        let mut next = centers.clone();
        for (c, center) in next.iter_mut().enumerate() {
            let block: Vec<usize> = (0..x.n()).filter(|&v| owner[v] == c).collect();
            if !block.is_empty() {
                let (_, medoid) = CostObjective::KMeans.cluster_cost(x, &block);
                *center = medoid;
            }
        }
        if next == centers {
            break;
        }
        centers = next;
        owner = assign(x, &centers);
    }
    let cost = (0..x.n()).fold(0.0, |acc, v| {
        let d = x.d(v, centers[owner[v]]);
        acc + d * d
    });
    let mut blocks = vec![Vec::new(); centers.len()];
    for v in 0..x.n() {
        blocks[owner[v]].push(v);
    }
    blocks.retain(|b| !b.is_empty());
    Ok(LloydsOutcome { seeds, centers, partition: Partition::new(x.n(), blocks)?, cost, iterations })
}
