use crate::error::{domain, Result};
use crate::instances::KnapsackInstance;

/// Items picked by a greedy run, in selection order, and their total value.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GreedyOutcome {
    pub chosen: Vec<usize>,
    pub utility: f64,
}

/// Log of the knapsack score `v / s^ρ`.
///
/// Ranking by the log is the same ranking, and it does not overflow for
/// large `ρ`.
#[inline]
pub(crate) fn knapsack_score(value: f64, size: f64, rho: f64) -> f64 {
    value.ln() - rho * size.ln()
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho.is_finite() && rho >= 0.0) {
        return domain(format!("parameter {rho} must be a finite non-negative real"));
    }
    Ok(())
}

/// Items sorted by decreasing `v_i / s_i^ρ`, smaller index first on ties.
pub fn knapsack_order(x: &KnapsackInstance, rho: f64) -> Vec<usize> {
    let scores: Vec<f64> = x
        .values()
        .iter()
        .zip(x.sizes())
        .map(|(&v, &s)| knapsack_score(v, s, rho))
        .collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order
}

/// Scans items by score and adds each one that still fits.
pub fn knapsack_greedy(x: &KnapsackInstance, rho: f64) -> Result<GreedyOutcome> {
    check_rho(rho)?;
    let mut remaining = x.capacity();
    let mut chosen = Vec::new();
    let mut utility = 0.0;
    for i in knapsack_order(x, rho) {
        let s = x.sizes()[i];
        if s <= remaining {
            remaining -= s;
            utility += x.values()[i];
            chosen.push(i);
        }
    }
    Ok(GreedyOutcome { chosen, utility })
}

/// Non-negative parameters at which two items swap their relative order.
///
/// Pairs with equal sizes or equal values never swap for `ρ > 0`.
pub fn knapsack_critical_values(x: &KnapsackInstance) -> Vec<f64> {
    let (v, s) = (x.values(), x.sizes());
    let mut out = Vec::new();
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if s[i] == s[j] || v[i] == v[j] {
                continue;
            }
            let c = (v[i] / v[j]).ln() / (s[i] / s[j]).ln();
            if c.is_finite() && c >= 0.0 {
                out.push(c);
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}
