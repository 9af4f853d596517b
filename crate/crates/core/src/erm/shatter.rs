use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::DualFunction;
use crate::error::{domain, Error, Result};

/// Witness thresholds, one per instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterTargets {
    pub targets: Vec<f64>,
}

/// Largest shattered subset found and its witnesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterWitness {
    pub subset: Vec<usize>,
    pub targets: Vec<f64>,
}

const MAX_VERIFY: usize = 20;
const MAX_CAP: usize = 12;

/// Values of every dual on every piece of the common refinement, one row
/// per piece. Duplicate rows are dropped.
fn value_rows(duals: &[DualFunction]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = duals.first() else {
        return Ok(vec![Vec::new()]);
    };
    if let Some(d) = duals.iter().find(|d| !d.f.same_domain(&first.f)) {
        return domain(format!("dual {} has a different domain", d.instance_id));
    }
    let mut breaks: Vec<f64> = duals.iter().flat_map(|d| d.f.breakpoints().iter().copied()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let (lo, hi) = first.f.domain();
    let mut rows = Vec::with_capacity(breaks.len() + 1);
    let mut seen = HashSet::new();
    let mut left = lo;
    for &b in breaks.iter().chain(std::iter::once(&hi)) {
        let mid = left + (b - left) / 2.0;
        let row: Vec<f64> = duals.iter().map(|d| d.f.eval(mid)).collect::<Result<_>>()?;
        if seen.insert(row.iter().map(|v| v.to_bits()).collect::<Vec<u64>>()) {
            rows.push(row);
        }
        left = b;
    }
    Ok(rows)
}

fn pattern_count(rows: &[Vec<f64>], targets: &[f64]) -> usize {
    rows.iter()
        .map(|r| r.iter().zip(targets).enumerate().fold(0u32, |acc, (i, (u, z))| acc | (((u > z) as u32) << i)))
        .collect::<HashSet<u32>>()
        .len()
}

/// Whether the parameter realizes every above/below pattern of the duals
/// against `t`. Bit `i` of a pattern is `u_i(ρ) > z_i`.
pub fn shatter_verify(duals: &[DualFunction], t: &ShatterTargets) -> Result<bool> {
    if duals.len() > MAX_VERIFY {
        return Err(Error::Resource(format!("shatter check limited to {MAX_VERIFY} duals, got {}", duals.len())));
    }
    if duals.len() != t.targets.len() {
        return domain(format!("{} duals but {} targets", duals.len(), t.targets.len()));
    }
    let rows = value_rows(duals)?;
    Ok(pattern_count(&rows, &t.targets) == 1usize << duals.len())
}

/// Midpoints between consecutive distinct values of column `j`.
fn candidate_targets(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    let mut vals: Vec<f64> = rows.iter().map(|r| r[j]).collect();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    vals.windows(2).map(|w| w[0] + (w[1] - w[0]) / 2.0).collect()
}

/// Searches targets column by column; every prefix must already realize all
/// of its patterns.
fn find_targets(rows: &[Vec<f64>], cols: &[usize]) -> Option<Vec<f64>> {
    fn go(rows: &[Vec<f64>], cols: &[usize], codes: &[u32], chosen: &mut Vec<f64>) -> bool {
        let j = chosen.len();
        if j == cols.len() {
            return true;
        }
        for z in candidate_targets(rows, cols[j]) {
            let next: Vec<u32> = codes
                .iter()
                .zip(rows)
                .map(|(&c, r)| c | (((r[cols[j]] > z) as u32) << j))
                .collect();
            if next.iter().collect::<HashSet<_>>().len() == 1usize << (j + 1) {
                chosen.push(z);
                if go(rows, cols, &next, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    go(rows, cols, &vec![0; rows.len()], &mut chosen).then_some(chosen)
}

/// Largest shatterable subset of at most `cap` duals, grown level by level
/// from shattered subsets (every subset of a shattered set is shattered).
pub fn largest_shattered(duals: &[DualFunction], cap: usize) -> Result<ShatterWitness> {
    if cap > MAX_CAP {
        return Err(Error::Resource(format!("pseudo-dimension search limited to {MAX_CAP}, asked for {cap}")));
    }
    let rows = value_rows(duals)?;
    let mut best = ShatterWitness { subset: Vec::new(), targets: Vec::new() };
    let mut level: HashMap<Vec<usize>, Vec<f64>> = HashMap::from([(Vec::new(), Vec::new())]);
    for size in 1..=cap.min(duals.len()) {
        if 1usize << size > rows.len() {
            break;
        }
        let mut parents: Vec<&Vec<usize>> = level.keys().collect();
        parents.sort();
        let mut next = HashMap::new();
        for parent in parents {
            let start = parent.last().map_or(0, |&l| l + 1);
            for add in start..duals.len() {
                let mut cand = parent.clone();
                cand.push(add);
                let all_subsets_shattered = (0..cand.len()).all(|drop| {
                    let mut sub = cand.clone();
                    sub.remove(drop);
                    level.contains_key(&sub)
                });
                if !all_subsets_shattered {
                    continue;
                }
                if let Some(targets) = find_targets(&rows, &cand) {
                    next.insert(cand, targets);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let mut found: Vec<(&Vec<usize>, &Vec<f64>)> = next.iter().collect();
        found.sort_by(|a, b| a.0.cmp(b.0));
        best = ShatterWitness { subset: found[0].0.clone(), targets: found[0].1.clone() };
        level = next;
    }
    Ok(best)
}

pub fn empirical_pdim(duals: &[DualFunction], cap: usize) -> Result<usize> {
    largest_shattered(duals, cap).map(|w| w.subset.len())
}
