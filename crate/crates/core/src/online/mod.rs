//! Continuous weighted majority over a one-dimensional parameter interval.
//!
//! Round `t` samples `ρ_t` with density proportional to `exp(λ U_t(ρ))`,
//! where `U_t` is the sum of the duals seen so far, then observes the whole
//! dual of the new instance.

mod dispersion;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dispersion::{dispersion_profile, split_count, DispersionReport};

use crate::erm::{build_dual, DualFunction, Family};
use crate::error::{domain, Error, Result};
use crate::instances::{RandomTape, TapedInstance};
use crate::piecewise::{merge_sum, PiecewiseConstant};

const MAX_PIECES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Play {
    pub rho: f64,
    pub utility: f64,
}

#[derive(Debug, Clone)]
pub struct OnlineState {
    lambda: f64,
    running_sum: PiecewiseConstant,
    log: Vec<Play>,
}

impl OnlineState {
    pub fn new(lo: f64, hi: f64, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("learning rate {lambda} must be finite and non-negative"));
        }
        Ok(OnlineState { lambda, running_sum: PiecewiseConstant::constant(lo, hi, 0.0)?, log: Vec::new() })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn running_sum(&self) -> &PiecewiseConstant {
        &self.running_sum
    }

    pub fn round(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[Play] {
        &self.log
    }

    /// Draw for the next round, from substream `round` of `tape`.
    pub fn sample(&self, tape: &RandomTape) -> Result<f64> {
        self.running_sum.exp_sample_with(self.lambda, &mut tape.rng(self.log.len() as u64))
    }

    pub fn update(&mut self, dual: &PiecewiseConstant, rho_played: f64) -> Result<()> {
        if !dual.same_domain(&self.running_sum) {
            return domain("dual domain differs from the learner's domain");
        }
        let utility = dual.eval(rho_played)?;
        let next = merge_sum(&[self.running_sum.clone(), dual.clone()])?.canonical();
        if next.piece_count() > MAX_PIECES {
            return Err(Error::Resource(format!("running sum exceeded {MAX_PIECES} pieces")));
        }
        self.running_sum = next;
        self.log.push(Play { rho: rho_played, utility });
        Ok(())
    }
}

/// `λ = (1/H)·√(d·ln(R/w)/T)`.
pub fn lambda_default(h: f64, d: f64, r: f64, w: f64, t: usize) -> Result<f64> {
    if !(h > 0.0) || !(d > 0.0) || t == 0 || !(w > 0.0) {
        return domain("H, d, w and T must be positive");
    }
    if !(w < r) {
        return domain(format!("w = {w} must be smaller than R = {r}"));
    }
    Ok((d * (r / w).ln() / t as f64).sqrt() / h)
}

/// Ball radius used for smoothed knapsack: `1/(√T·n²·b²·ln C)`.
pub fn knapsack_w(t: usize, n: usize, b: f64, c: f64) -> Result<f64> {
    if t == 0 || n == 0 || !(b > 0.0) || !(c > 1.0) {
        return domain("knapsack radius needs T, n, b > 0 and C > 1");
    }
    Ok(1.0 / ((t as f64).sqrt() * (n * n) as f64 * b * b * c.ln()))
}

/// Learning rate for smoothed knapsack on `[0, R]`: the default rate with
/// `H = C`, `d = 1` and `w = knapsack_w(T, n, b, C)`.
pub fn lambda_knapsack(r: f64, t: usize, n: usize, b: f64, c: f64) -> Result<f64> {
    lambda_default(c, 1.0, r, knapsack_w(t, n, b, c)?, t)
}

/// `H·(√(T·d·ln(R/w)) + k) + T·L·w`.
pub fn regret_bound(h: f64, d: f64, r: f64, w: f64, k: usize, t: usize, l: f64) -> f64 {
    h * ((t as f64 * d * (r / w).ln()).sqrt() + k as f64) + t as f64 * l * w
}

/// `C·√(T·ln(R·T·n·b·ln C))` for smoothed knapsack.
pub fn knapsack_regret_bound(r: f64, t: usize, n: usize, b: f64, c: f64) -> f64 {
    c * (t as f64 * (r * t as f64 * n as f64 * b * c.ln()).ln()).sqrt()
}

/// Hindsight-best total utility minus realized total utility.
pub fn regret(duals: &[DualFunction], plays: &[f64]) -> Result<f64> {
    if duals.len() != plays.len() {
        return domain(format!("{} duals but {} plays", duals.len(), plays.len()));
    }
    if duals.is_empty() {
        return Ok(0.0);
    }
    let fs: Vec<PiecewiseConstant> = duals.iter().map(|d| d.f.clone()).collect();
    let best = merge_sum(&fs)?.argmax().value;
    let mut realized = 0.0;
    for (d, &rho) in duals.iter().zip(plays) {
        realized += d.f.eval(rho)?;
    }
    Ok(best - realized)
}

/// The two sides of `ln(W_{T+1}/W_1) ≥ ln(|B|/vol) + λ(OPT − H·k)`, where
/// `B` is the radius-`w` ball around the maximizer clipped to the domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightRatioCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub opt: f64,
    pub k: usize,
    pub rho_star: f64,
    pub holds: bool,
}

pub fn weight_ratio_check(duals: &[&PiecewiseConstant], lambda: f64, h: f64, w: f64) -> Result<WeightRatioCheck> {
    if !(w > 0.0) {
        return domain(format!("radius {w} must be positive"));
    }
    let total = merge_sum(&duals.iter().map(|f| (*f).clone()).collect::<Vec<_>>())?;
    let (lo, hi) = total.domain();
    let best = total.argmax();
    let rho_star = best.representative;
    let k = split_count(duals, rho_star, w);
    let ball = (rho_star + w).min(hi) - (rho_star - w).max(lo);
    let lhs = total.exp_mass(lambda)? - (hi - lo).ln();
    let rhs = (ball / (hi - lo)).ln() + lambda * (best.value - h * k as f64);
    Ok(WeightRatioCheck { lhs, rhs, opt: best.value, k, rho_star, holds: lhs >= rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub rho: f64,
    pub utility: f64,
    pub cumulative_regret: f64,
    pub pieces: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineConfig {
    pub lo: f64,
    pub hi: f64,
    pub lambda: f64,
    /// Dispersion radius reported with the run.
    pub w: f64,
    pub tape: RandomTape,
}

#[derive(Debug, Clone)]
pub struct OnlineRun {
    pub rounds: Vec<RoundRecord>,
    pub regret: f64,
    pub dispersion: DispersionReport,
    pub duals: Vec<DualFunction>,
    pub state: OnlineState,
}

/// Plays the stream: sample, observe the round's dual, update.
pub fn run_online(family: &Family, stream: &[TapedInstance], config: &OnlineConfig) -> Result<OnlineRun> {
    if stream.is_empty() {
        return domain("empty instance stream");
    }
    let duals: Vec<DualFunction> = stream
        .par_iter()
        .enumerate()
        .map(|(i, x)| build_dual(family, x, config.lo, config.hi, i))
        .collect::<Result<_>>()?;
    let (state, rounds) = play(&duals, config)?;
    let regret = rounds.last().map_or(0.0, |r| r.cumulative_regret);
    let refs: Vec<&PiecewiseConstant> = duals.iter().map(|d| &d.f).collect();
    let dispersion = dispersion_profile(&refs, config.w)?;
    Ok(OnlineRun { rounds, regret, dispersion, duals, state })
}

/// Runs the learner on precomputed duals.
pub fn play(duals: &[DualFunction], config: &OnlineConfig) -> Result<(OnlineState, Vec<RoundRecord>)> {
    let mut state = OnlineState::new(config.lo, config.hi, config.lambda)?;
    let mut rounds = Vec::with_capacity(duals.len());
    let mut realized = 0.0;
    for (t, d) in duals.iter().enumerate() {
        let rho = state.sample(&config.tape)?;
        state.update(&d.f, rho)?;
        realized += state.log()[t].utility;
        rounds.push(RoundRecord {
            round: t + 1,
            rho,
            utility: state.log()[t].utility,
            cumulative_regret: state.running_sum().argmax().value - realized,
            pieces: state.running_sum().piece_count(),
        });
    }
    Ok((state, rounds))
}

pub const ROUNDS_CSV_HEADER: &str = "round,rho_played,realized_utility,cumulative_regret,running_piece_count";
pub const DISPERSION_CSV_HEADER: &str = "w,k,ball_center";

pub fn rounds_csv(rounds: &[RoundRecord]) -> String {
    let mut out = format!("{ROUNDS_CSV_HEADER}\n");
    for r in rounds {
        out.push_str(&format!("{},{},{},{},{}\n", r.round, r.rho, r.utility, r.cumulative_regret, r.pieces));
    }
    out
}

pub fn dispersion_csv(reports: &[DispersionReport]) -> String {
    let mut out = format!("{DISPERSION_CSV_HEADER}\n");
    for r in reports {
        out.push_str(&format!("{},{},{}\n", r.w, r.k, r.ball_center));
    }
    out
}
