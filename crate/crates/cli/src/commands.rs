use std::collections::BTreeMap;

use paramlearn::erm::{
    average_utility, build_duals, duals_to_string, erm_select, largest_shattered, pdim_fixed_point,
    sample_complexity, DualFunction, Outcome,
};
use paramlearn::instances::instances_to_string;
use paramlearn::online::{
    dispersion_profile, knapsack_w, lambda_default, lambda_knapsack, regret_bound, run_online,
    weight_ratio_check, DISPERSION_CSV_HEADER, ROUNDS_CSV_HEADER,
};
use paramlearn::{Family, OnlineConfig, PiecewiseConstant, RandomTape};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliResult;
use crate::output::{Csv, OutDir};

/// Stream of the learner's own draws in an online run.
const LEARNER_STREAM: u64 = u64::MAX;

pub const SWEEP_CSV_HEADER: &str = "instance_id,lo,hi,utility";
pub const ONLINE_SUMMARY_CSV_HEADER: &str = "seed,regret,bound,k,lambda,w";

fn duals_of(cfg: &ExperimentConfig, xs: &[paramlearn::TapedInstance]) -> CliResult<Vec<DualFunction>> {
    let (lo, hi) = cfg.domain();
    Ok(build_duals(&cfg.algorithm, xs, lo, hi)?)
}

fn max_pieces(duals: &[DualFunction]) -> usize {
    duals.iter().map(|d| d.f.piece_count()).max().unwrap_or(1)
}

pub fn generate(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let xs = cfg.sample()?;
    out.write("instances.json", &instances_to_string(&xs))?;
    let kind = xs.first().map_or("no", |x| x.instance.kind());
    println!("generated {} {kind} instances", xs.len());
    Ok(())
}

pub fn sweep(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let xs = cfg.sample()?;
    let duals = duals_of(cfg, &xs)?;
    out.write("duals.json", &duals_to_string(&duals))?;
    let mut csv = Csv::new(SWEEP_CSV_HEADER);
    for d in &duals {
        for (lo, hi, v) in d.f.pieces() {
            csv.row(&[&d.instance_id, &lo, &hi, &v]);
        }
    }
    out.write("sweep.csv", &csv.finish()?)?;
    for d in &duals {
        println!("instance {}: {} pieces", d.instance_id, d.f.piece_count());
    }
    if let Some((n, _, _)) = cfg.knapsack_source().filter(|_| cfg.algorithm == Family::Knapsack) {
        println!("critical-value bound n(n-1)/2+1 = {}", n * (n - 1) / 2 + 1);
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainReport<'a> {
    family: &'static str,
    rho_hat: f64,
    /// The maximizing piece of the average dual.
    piece: [f64; 2],
    train_avg: f64,
    test_avg: f64,
    gap: f64,
    m: usize,
    test_count: usize,
    pdim: f64,
    max_pieces: usize,
    m_required: u64,
    config: &'a ExperimentConfig,
}

pub fn train(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let (train, test) = cfg.train_test()?;
    let duals = duals_of(cfg, &train)?;
    let erm = erm_select(&duals)?;
    let train_avg = average_utility(&cfg.algorithm, erm.rho_hat, &train)?;
    let test_avg = average_utility(&cfg.algorithm, erm.rho_hat, &test)?;
    let t = &cfg.train;
    let h = t.h.expect("resolved");
    let pieces = max_pieces(&duals);
    let (pdim, m_required) = match t.pdim {
        Some(p) => (p, sample_complexity(h, t.eps, t.delta, p, t.c)?),
        None => {
            let (p, m) = pdim_fixed_point(pieces as f64, h, t.eps, t.delta, t.c)?;
            (p as f64, m)
        }
    };
    let report = TrainReport {
        family: cfg.algorithm.label(),
        rho_hat: erm.rho_hat,
        piece: [erm.lo, erm.hi],
        train_avg,
        test_avg,
        gap: (train_avg - test_avg).abs(),
        m: train.len(),
        test_count: test.len(),
        pdim,
        max_pieces: pieces,
        m_required,
        config: cfg,
    };
    out.json("train_report.json", &report)?;
    println!(
        "rho_hat = {}  train = {}  test = {}  gap = {}  m_required = {m_required}",
        report.rho_hat, report.train_avg, report.test_avg, report.gap
    );
    Ok(())
}

/// `(λ, w)` for an online run of length `t`.
pub fn online_rates(cfg: &ExperimentConfig, t: usize) -> CliResult<(f64, f64)> {
    let (lo, hi) = cfg.domain();
    let r = hi - lo;
    let o = &cfg.online;
    let h = o.h.expect("resolved");
    let knapsack = cfg.knapsack_source().filter(|_| cfg.algorithm == Family::Knapsack);
    let w = match (o.w, knapsack) {
        (Some(w), _) => w,
        (None, Some((n, c, b))) => knapsack_w(t, n, b, c)?,
        (None, None) => r / (t as f64).sqrt(),
    };
    let lambda = match (o.lambda, knapsack, o.w) {
        (Some(l), _, _) => l,
        (None, Some((n, c, b)), None) => lambda_knapsack(r, t, n, b, c)?,
        _ => lambda_default(h, 1.0, r, w, t)?,
    };
    Ok((lambda, w))
}

#[derive(Serialize)]
struct SeedSummary {
    seed: u64,
    regret: f64,
    bound: f64,
    k: usize,
    lambda: f64,
    w: f64,
    final_pieces: usize,
    weight_ratio_lhs: f64,
    weight_ratio_rhs: f64,
    weight_ratio_holds: bool,
}

#[derive(Serialize)]
struct OnlineReport<'a> {
    family: &'static str,
    t: usize,
    mean_regret: f64,
    seeds: Vec<SeedSummary>,
    config: &'a ExperimentConfig,
}

pub fn online(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let t = cfg.online.t;
    let (lo, hi) = cfg.domain();
    let (lambda, w) = online_rates(cfg, t)?;
    let h = cfg.online.h.expect("resolved");
    let runs = (0..cfg.online.seeds as u64)
        .into_par_iter()
        .map(|s| {
            let seed = cfg.seed.wrapping_add(s);
            let stream = cfg.instances(seed, 0, t)?;
            let config = OnlineConfig { lo, hi, lambda, w, tape: RandomTape::new(seed, LEARNER_STREAM) };
            let run = run_online(&cfg.algorithm, &stream, &config)?;
            let refs: Vec<&PiecewiseConstant> = run.duals.iter().map(|d| &d.f).collect();
            let check = weight_ratio_check(&refs, lambda, h, w)?;
            let summary = SeedSummary {
                seed,
                regret: run.regret,
                bound: regret_bound(h, 1.0, hi - lo, w, run.dispersion.k, t, 0.0),
                k: run.dispersion.k,
                lambda,
                w,
                final_pieces: run.state.running_sum().piece_count(),
                weight_ratio_lhs: check.lhs,
                weight_ratio_rhs: check.rhs,
                weight_ratio_holds: check.holds,
            };
            Ok((summary, run.rounds))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let mut summary_csv = Csv::new(ONLINE_SUMMARY_CSV_HEADER);
    let mut seeds = Vec::with_capacity(runs.len());
    for (s, rounds) in runs {
        let mut csv = Csv::new(ROUNDS_CSV_HEADER);
        for r in &rounds {
            csv.row(&[&r.round, &r.rho, &r.utility, &r.cumulative_regret, &r.pieces]);
        }
        out.write(&format!("online_rounds_seed{}.csv", s.seed), &csv.finish()?)?;
        summary_csv.row(&[&s.seed, &s.regret, &s.bound, &s.k, &s.lambda, &s.w]);
        println!("seed {}: regret = {}  bound = {}  k = {}", s.seed, s.regret, s.bound, s.k);
        seeds.push(s);
    }
    out.write("online_summary.csv", &summary_csv.finish()?)?;
    let mean_regret = seeds.iter().map(|s| s.regret).sum::<f64>() / seeds.len() as f64;
    let report = OnlineReport { family: cfg.algorithm.label(), t, mean_regret, seeds, config: cfg };
    out.json("online_summary.json", &report)?;
    Ok(())
}

/// `points` radii spaced logarithmically over `[w_min, w_max]`.
pub fn log_grid(w_min: f64, w_max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![w_min];
    }
    let (a, b) = (w_min.ln(), w_max.ln());
    (0..points)
        .map(|i| match i {
            0 => w_min,
            i if i == points - 1 => w_max,
            i => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        })
        .collect()
}

/// `3·(w·T·n²·b²·ln C + √(T·ln(n√T)))` for smoothed knapsack.
pub fn knapsack_dispersion_line(w: f64, t: usize, n: usize, b: f64, c: f64) -> f64 {
    let t = t as f64;
    let n = n as f64;
    3.0 * (w * t * n * n * b * b * c.ln() + (t * (n * t.sqrt()).ln()).sqrt())
}

#[derive(Serialize)]
struct DispersionPoint {
    w: f64,
    k: usize,
    ball_center: f64,
    /// Theoretical line, for smoothed knapsack only.
    bound: Option<f64>,
}

#[derive(Serialize)]
struct DispersionOutput<'a> {
    family: &'static str,
    t: usize,
    points: Vec<DispersionPoint>,
    per_round_discontinuities: Vec<usize>,
    config: &'a ExperimentConfig,
}

pub fn dispersion(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let d = &cfg.dispersion;
    let stream = cfg.instances(cfg.seed, 0, d.t)?;
    let duals = duals_of(cfg, &stream)?;
    let refs: Vec<&PiecewiseConstant> = duals.iter().map(|d| &d.f).collect();
    let grid = log_grid(d.w_min.expect("resolved"), d.w_max.expect("resolved"), d.points);
    let reports = grid.iter().map(|&w| dispersion_profile(&refs, w)).collect::<paramlearn::Result<Vec<_>>>()?;

    let knapsack = cfg.knapsack_source().filter(|_| cfg.algorithm == Family::Knapsack);
    let mut csv = Csv::new(DISPERSION_CSV_HEADER);
    let mut points = Vec::with_capacity(reports.len());
    for r in &reports {
        csv.row(&[&r.w, &r.k, &r.ball_center]);
        let bound = knapsack.map(|(n, c, b)| knapsack_dispersion_line(r.w, d.t, n, b, c));
        println!("w = {}  k = {}", r.w, r.k);
        points.push(DispersionPoint { w: r.w, k: r.k, ball_center: r.ball_center, bound });
    }
    out.write("dispersion.csv", &csv.finish()?)?;
    let per_round_discontinuities = reports.first().map(|r| r.per_round.clone()).unwrap_or_default();
    let report =
        DispersionOutput { family: cfg.algorithm.label(), t: d.t, points, per_round_discontinuities, config: cfg };
    out.json("dispersion_report.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct PdimReport<'a> {
    family: &'static str,
    m: usize,
    largest_shattered: usize,
    subset: Vec<usize>,
    targets: Vec<f64>,
    /// Piece count -> number of duals with that count.
    piece_histogram: BTreeMap<usize, usize>,
    max_pieces: usize,
    log2_bound: u64,
    config: &'a ExperimentConfig,
}

pub fn pdim(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let m = cfg.pdim.m;
    let xs = cfg.instances(cfg.seed, 0, m)?;
    let duals = duals_of(cfg, &xs)?;
    let witness = largest_shattered(&duals, cfg.pdim.cap)?;
    let mut piece_histogram = BTreeMap::new();
    for d in &duals {
        *piece_histogram.entry(d.f.piece_count()).or_insert(0) += 1;
    }
    let pieces = max_pieces(&duals);
    let log2_bound = ((pieces * m) as f64).log2().ceil() as u64;
    println!("largest shattered set: {}  (log2 bound {log2_bound})", witness.subset.len());
    let report = PdimReport {
        family: cfg.algorithm.label(),
        m,
        largest_shattered: witness.subset.len(),
        subset: witness.subset,
        targets: witness.targets,
        piece_histogram,
        max_pieces: pieces,
        log2_bound,
        config: cfg,
    };
    out.json("pdim_report.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct InstanceReport {
    instance_id: usize,
    utility: f64,
    outcome: Outcome,
}

#[derive(Serialize)]
struct RunReport<'a> {
    family: &'static str,
    rho: f64,
    instances: Vec<InstanceReport>,
    config: &'a ExperimentConfig,
}

pub fn report(cfg: &ExperimentConfig, out: &OutDir) -> CliResult<()> {
    let mut xs = cfg.sample()?;
    if let Some(k) = cfg.report.instances {
        xs.truncate(k);
    }
    let rho = match cfg.report.rho {
        Some(rho) => rho,
        None => erm_select(&duals_of(cfg, &xs)?)?.rho_hat,
    };
    let instances = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let outcome = cfg.algorithm.run(x, rho)?;
            Ok(InstanceReport { instance_id: i, utility: outcome.utility(), outcome })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let avg = instances.iter().map(|r| r.utility).sum::<f64>() / instances.len().max(1) as f64;
    println!("rho = {rho}  average utility = {avg} over {} instances", instances.len());
    out.json("report.json", &RunReport { family: cfg.algorithm.label(), rho, instances, config: cfg })?;
    Ok(())
}
