use super::knapsack::check_rho;
use crate::error::Result;
use crate::instances::GraphInstance;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IndependentSet {
    /// Vertices in selection order.
    pub vertices: Vec<usize>,
    pub utility: f64,
}

#[inline]
pub(crate) fn mwis_score(weight: f64, degree: usize, rho: f64) -> f64 {
    weight.ln() - rho * (1.0 + degree as f64).ln()
}

/// Adaptive greedy: picks the vertex maximizing `w(v) / (1 + deg(v))^ρ` on
/// the residual graph, then deletes it and its neighbors.
pub fn mwis_greedy(g: &GraphInstance, rho: f64) -> Result<IndependentSet> {
    check_rho(rho)?;
    let n = g.n();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut vertices = Vec::new();
    let mut utility = 0.0;
    let mut left = n;
    while left > 0 {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let s = mwis_score(g.weights()[v], degree[v], rho);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((v, s));
            }
        }
        let (v, _) = best.expect("some vertex is alive");
        vertices.push(v);
        utility += g.weights()[v];
        let mut removed = vec![v];
        removed.extend(g.neighbors(v).iter().copied().filter(|&u| alive[u]));
        for &r in &removed {
            alive[r] = false;
        }
        left -= removed.len();
        for &r in &removed {
            for &u in g.neighbors(r) {
                if alive[u] {
                    degree[u] -= 1;
                }
            }
        }
    }
    Ok(IndependentSet { vertices, utility })
}
