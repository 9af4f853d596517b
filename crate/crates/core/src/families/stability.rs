//! Certified parameter intervals for `scl` linkage.
//!
//! Every comparison made during a run is between two merge distances that
//! are affine in `ρ`. The sign of each difference therefore holds on a
//! half-line, and the intersection of these half-lines is an interval on
//! which the whole merge sequence is unchanged.

use super::linkage::{agglomerate, scl_distance, ClusterTree, MinMax};
use crate::error::{domain, Result};
use crate::instances::ClusteringInstance;

/// Winner-versus-rival comparison `f(ρ) = offset + slope·ρ`, where `f` is the
/// winner's distance minus the rival's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub step: usize,
    pub winner: (usize, usize),
    pub rival: (usize, usize),
    pub offset: f64,
    pub slope: f64,
}

impl Comparison {
    /// Parameter where the two distances cross.
    pub fn crossing(&self) -> f64 {
        -self.offset / self.slope
    }
}

/// Parameters `ρ' ∈ [lo, hi)` that reproduce the merge sequence; an `hi` of
/// 1 also admits `ρ' = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityInterval {
    pub lo: f64,
    pub hi: f64,
    pub certificate: Vec<Comparison>,
}

impl StabilityInterval {
    pub fn contains(&self, rho: f64) -> bool {
        rho >= self.lo && (rho < self.hi || (self.hi == 1.0 && rho == 1.0))
    }
}

/// Runs `scl(ρ)` linkage and certifies the interval around `ρ`.
pub fn scl_tree_with_interval(x: &ClusteringInstance, rho: f64) -> Result<(ClusterTree, StabilityInterval)> {
    if !(0.0..=1.0).contains(&rho) {
        return domain(format!("scl parameter {rho} outside [0, 1]"));
    }
    if x.n() < 2 {
        return domain("linkage needs at least two points");
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut certificate = Vec::new();
    let mut step = 0;
    let tree = agglomerate(
        x,
        |d| MinMax { dmin: d, dmax: d },
        |s, _, _| scl_distance(s, rho),
        |d| d,
        |winner, all| {
            let w = winner.stat;
            for rival in all.iter().filter(|c| (c.a, c.b) != (winner.a, winner.b)) {
                let r = rival.stat;
                let offset = w.dmin - r.dmin;
                let slope = (w.dmax - w.dmin) - (r.dmax - r.dmin);
                if slope == 0.0 {
                    // Constant sign, and a constant tie is decided by the keys.
                    continue;
                }
                let c = Comparison { step, winner: winner.key, rival: rival.key, offset, slope };
                let crossing = c.crossing();
                let wins_ties = winner.key < rival.key;
                if slope > 0.0 {
                    // Winner stays ahead left of the crossing.
                    hi = hi.min(if wins_ties { crossing.next_up() } else { crossing });
                } else {
                    lo = lo.max(if wins_ties { crossing } else { crossing.next_up() });
                }
                certificate.push(c);
            }
            step += 1;
        },
    );
    // Rounding in the crossings must not push `ρ` out of its own interval.
    lo = lo.min(rho);
    if hi <= rho && rho < 1.0 {
        hi = rho.next_up();
    }
    let hi = hi.min(1.0);
    Ok((tree, StabilityInterval { lo, hi, certificate }))
}

pub fn scl_stability_interval(x: &ClusteringInstance, rho: f64) -> Result<StabilityInterval> {
    scl_tree_with_interval(x, rho).map(|(_, iv)| iv)
}

/// Left-to-right tiling of `[lo, hi]` by certified intervals.
///
/// Returns `(start, tree)` for every interval; consecutive starts are the
/// interval boundaries.
pub fn scl_sweep(x: &ClusteringInstance, lo: f64, hi: f64, max_pieces: usize) -> Result<Vec<(f64, ClusterTree)>> {
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return domain(format!("sweep range [{lo}, {hi}] must lie inside [0, 1]"));
    }
    let mut out = Vec::new();
    let mut cur = lo;
    loop {
        let (tree, iv) = scl_tree_with_interval(x, cur)?;
        out.push((cur, tree));
        if iv.hi >= hi {
            break;
        }
        if out.len() >= max_pieces {
            return Err(crate::error::Error::Resource(format!("scl sweep exceeded {max_pieces} intervals")));
        }
        cur = iv.hi;
    }
    Ok(out)
}
