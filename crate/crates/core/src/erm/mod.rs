//! Batch learning over a sample of instances.

mod dual;
mod shatter;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use dual::{build_dual, build_dual_with, build_duals, DualFunction, DualOptions, Family, Outcome};
pub use shatter::{empirical_pdim, largest_shattered, shatter_verify, ShatterTargets, ShatterWitness};

use crate::error::{domain, Result};
use crate::instances::TapedInstance;
use crate::piecewise::{merge_sum, sum_balanced, PiecewiseConstant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub rho_hat: f64,
    pub avg_utility: f64,
    /// The maximizing piece `[lo, hi)`.
    pub lo: f64,
    pub hi: f64,
}

/// Above this many duals the sum is reduced pairwise instead of in list order.
const LIST_ORDER_LIMIT: usize = 256;

fn check_same_family(duals: &[DualFunction]) -> Result<()> {
    let Some(first) = duals.first() else {
        return domain("no dual functions given");
    };
    if let Some(d) = duals.iter().find(|d| d.family != first.family) {
        return domain(format!("mixed families {} and {}", first.family, d.family));
    }
    Ok(())
}

/// Pointwise total of the duals.
pub fn total_dual(duals: &[DualFunction]) -> Result<PiecewiseConstant> {
    check_same_family(duals)?;
    let fs: Vec<PiecewiseConstant> = duals.iter().map(|d| d.f.clone()).collect();
    if fs.len() <= LIST_ORDER_LIMIT {
        merge_sum(&fs)
    } else {
        sum_balanced(&fs)
    }
}

/// Parameter maximizing the average dual. Ties go to the leftmost piece, and
/// the midpoint of that piece is returned.
pub fn erm_select(duals: &[DualFunction]) -> Result<ErmResult> {
    let total = total_dual(duals)?;
    let best = total.argmax();
    Ok(ErmResult {
        rho_hat: best.representative,
        avg_utility: best.value / duals.len() as f64,
        lo: best.lo,
        hi: best.hi,
    })
}

/// `⌈c·(H/ε)²·(pdim + ln(1/δ))⌉`.
pub fn sample_complexity(h: f64, eps: f64, delta: f64, pdim: f64, c: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return domain(format!("eps = {eps} and delta = {delta} must lie in (0, 1)"));
    }
    if !(h > 0.0 && h.is_finite()) || !(pdim > 0.0 && pdim.is_finite()) || !(c > 0.0 && c.is_finite()) {
        return domain(format!("H = {h}, pdim = {pdim} and c = {c} must be positive"));
    }
    let m = (c * (h / eps).powi(2) * (pdim + (1.0 / delta).ln())).ceil();
    if m > u64::MAX as f64 {
        return domain("sample size overflows");
    }
    Ok(m as u64)
}

/// Smallest `(pdim, m)` with `pdim = ⌈log₂(pieces·m)⌉` and
/// `m = sample_complexity(h, eps, delta, pdim, c)`, found by iterating from
/// `pdim = 1`. Both sides grow with `pdim`, so the iteration climbs to the
/// least fixed point.
pub fn pdim_fixed_point(pieces: f64, h: f64, eps: f64, delta: f64, c: f64) -> Result<(u64, u64)> {
    if !(pieces >= 1.0) {
        return domain(format!("piece count {pieces} must be at least 1"));
    }
    let mut pdim = 1u64;
    for _ in 0..1000 {
        let m = sample_complexity(h, eps, delta, pdim as f64, c)?;
        let next = ((pieces * m as f64).log2().ceil() as u64).max(1);
        if next == pdim {
            return Ok((pdim, m));
        }
        pdim = next;
    }
    Err(crate::Error::Internal("pseudo-dimension fixed point did not converge".into()))
}

pub fn average_utility(family: &Family, rho: f64, xs: &[TapedInstance]) -> Result<f64> {
    if xs.is_empty() {
        return domain("empty instance set");
    }
    let mut total = 0.0;
    for x in xs {
        total += family.utility(x, rho)?;
    }
    Ok(total / xs.len() as f64)
}

/// `|avg train utility − avg test utility|` at `rho`.
pub fn generalization_gap(family: &Family, rho: f64, train: &[TapedInstance], test: &[TapedInstance]) -> Result<f64> {
    Ok((average_utility(family, rho, train)? - average_utility(family, rho, test)?).abs())
}

pub fn duals_to_string(duals: &[DualFunction]) -> String {
    let mut text = serde_json::to_string_pretty(duals).expect("duals always serialize");
    text.push('\n');
    text
}

pub fn write_duals(duals: &[DualFunction], path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, duals_to_string(duals))?;
    Ok(())
}

pub fn read_duals(path: impl AsRef<Path>) -> Result<Vec<DualFunction>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| crate::Error::Parse {
        location: crate::Location::Text { line: e.line(), column: e.column() },
        message: e.to_string(),
    })
}
