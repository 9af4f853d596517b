use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::piecewise::PiecewiseConstant;

/// Worst ball of radius `w` and how many rounds split it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub w: f64,
    /// Largest number of distinct rounds with a discontinuity in one ball.
    pub k: usize,
    pub ball_center: f64,
    /// Discontinuity count of every round.
    pub per_round: Vec<usize>,
}

fn check_common(fs: &[&PiecewiseConstant]) -> Result<(f64, f64)> {
    let Some(first) = fs.first() else {
        return domain("no functions given");
    };
    if fs.iter().any(|f| !f.same_domain(first)) {
        return domain("functions live on different domains");
    }
    Ok(first.domain())
}

/// Rounds with at least one discontinuity in the closed ball `[c − w, c + w]`.
pub fn split_count(fs: &[&PiecewiseConstant], center: f64, w: f64) -> usize {
    fs.iter()
        .filter(|f| {
            let d = f.discontinuities();
            let i = d.partition_point(|&x| x < center - w);
            i < d.len() && d[i] <= center + w
        })
        .count()
}

/// Exact `(w, k)` profile: the maximum over closed balls `[c − w, c + w]`
/// inside the domain of the number of rounds split by the ball. When the
/// domain is narrower than `2w` the whole domain is the only ball.
pub fn dispersion_profile(fs: &[&PiecewiseConstant], w: f64) -> Result<DispersionReport> {
    if !(w > 0.0 && w.is_finite()) {
        return domain(format!("radius {w} must be positive"));
    }
    let (lo, hi) = check_common(fs)?;
    let per_round: Vec<usize> = fs.iter().map(|f| f.discontinuities().len()).collect();
    let mut points: Vec<(f64, usize)> = fs
        .iter()
        .enumerate()
        .flat_map(|(r, f)| f.discontinuities().into_iter().map(move |x| (x, r)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    if 2.0 * w >= hi - lo {
        let rounds = per_round.iter().filter(|&&c| c > 0).count();
        return Ok(DispersionReport { w, k: rounds, ball_center: lo + (hi - lo) / 2.0, per_round });
    }
    let last_start = hi - 2.0 * w;
    let mut best = (0usize, lo + w);
    let mut counts: HashMap<usize, usize> = HashMap::new();
    let (mut left, mut right) = (0usize, 0usize);
    for i in 0..points.len() {
        let a = points[i].0.min(last_start);
        // Edges come from the center so the reported ball is the one counted.
        let mut c = a + w;
        while c - w > a {
            c = c.next_down();
        }
        let (left_edge, right_edge) = (c - w, c + w);
        while right < points.len() && points[right].0 <= right_edge {
            *counts.entry(points[right].1).or_insert(0) += 1;
            right += 1;
        }
        while left < right && points[left].0 < left_edge {
            let e = counts.get_mut(&points[left].1).expect("counted round");
            *e -= 1;
            if *e == 0 {
                counts.remove(&points[left].1);
            }
            left += 1;
        }
        if counts.len() > best.0 {
            best = (counts.len(), c);
        }
    }
    Ok(DispersionReport { w, k: best.0, ball_center: best.1, per_round })
}
