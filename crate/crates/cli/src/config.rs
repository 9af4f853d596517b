//! Experiment configuration: one JSON file drives every subcommand.

use std::path::{Path, PathBuf};

use paramlearn::erm::Family;
use paramlearn::instances::{gen_clustering_smooth, gen_knapsack_smooth, gen_maxcut, read_instances};
use paramlearn::{RandomTape, TapedInstance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Stream ids at or above this offset hold the held-out test instances.
const TEST_STREAM_OFFSET: u64 = 1 << 40;
/// Tag separating an instance's algorithm randomness from its generator draws.
const ALGORITHM_TAG: u64 = 0xA1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: Family,
    pub source: Source,
    /// Instances per sample; defaults to 100 for generators and the whole
    /// file otherwise.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub train: TrainSettings,
    #[serde(default)]
    pub online: OnlineSettings,
    #[serde(default)]
    pub dispersion: DispersionSettings,
    #[serde(default)]
    pub pdim: PdimSettings,
    #[serde(default)]
    pub report: ReportSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    KnapsackSmooth { n: usize, capacity: f64, b: f64 },
    ClusteringSmooth { n: usize, max_dist: f64, b: f64, k: usize },
    Maxcut { n: usize, edge_prob: f64, w_max: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    /// Training sample size; defaults to `count`.
    pub m: Option<usize>,
    pub test_count: usize,
    /// Evaluate on the training sample itself.
    pub test_same: bool,
    pub eps: f64,
    pub delta: f64,
    /// Utility range; defaults to the knapsack capacity or 1.
    pub h: Option<f64>,
    /// Pseudo-dimension; defaults to the piece-count fixed point.
    pub pdim: Option<f64>,
    pub c: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings { m: None, test_count: 200, test_same: false, eps: 0.1, delta: 0.05, h: None, pdim: None, c: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OnlineSettings {
    pub t: usize,
    pub seeds: usize,
    pub lambda: Option<f64>,
    pub w: Option<f64>,
    pub h: Option<f64>,
}

impl Default for OnlineSettings {
    fn default() -> Self {
        OnlineSettings { t: 200, seeds: 1, lambda: None, w: None, h: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSettings {
    pub t: usize,
    pub points: usize,
    /// Grid ends; default `[1/T, 1/√T]`.
    pub w_min: Option<f64>,
    pub w_max: Option<f64>,
}

impl Default for DispersionSettings {
    fn default() -> Self {
        DispersionSettings { t: 200, points: 12, w_min: None, w_max: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdimSettings {
    pub m: usize,
    pub cap: usize,
}

impl Default for PdimSettings {
    fn default() -> Self {
        PdimSettings { m: 8, cap: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSettings {
    /// Parameter to run at; defaults to the ERM choice on the sample.
    pub rho: Option<f64>,
    /// How many instances to report; defaults to all of them.
    pub instances: Option<usize>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
    }

    /// Fills every default that does not need instance data and checks the
    /// settings that can be checked without running anything.
    pub fn resolve(mut self, seed: Option<u64>) -> CliResult<Self> {
        if let Some(s) = seed {
            self.seed = s;
        }
        let [lo, hi] = *self.domain.get_or_insert_with(|| {
            let (lo, hi) = self.algorithm.default_domain();
            [lo, hi]
        });
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(bad(format!("domain [{lo}, {hi}] must be a finite interval with lo < hi")));
        }
        if !matches!(self.source, Source::File { .. }) {
            self.count.get_or_insert(100);
        }
        if self.count == Some(0) {
            return Err(bad("count must be positive"));
        }
        let h_default = match self.source {
            Source::KnapsackSmooth { capacity, .. } => capacity,
            _ => 1.0,
        };
        let t = &mut self.train;
        t.h.get_or_insert(h_default);
        if !(t.eps > 0.0 && t.eps < 1.0 && t.delta > 0.0 && t.delta < 1.0) {
            return Err(bad(format!("train.eps = {} and train.delta = {} must lie in (0, 1)", t.eps, t.delta)));
        }
        if !(t.c > 0.0) || t.h.is_some_and(|h| !(h > 0.0)) || t.pdim.is_some_and(|p| !(p > 0.0)) {
            return Err(bad("train.c, train.h and train.pdim must be positive"));
        }
        if t.m == Some(0) || (!t.test_same && t.test_count == 0) {
            return Err(bad("train.m and train.test_count must be positive"));
        }
        let o = &mut self.online;
        o.h.get_or_insert(h_default);
        if o.t == 0 || o.seeds == 0 {
            return Err(bad("online.t and online.seeds must be positive"));
        }
        if o.lambda.is_some_and(|l| !(l >= 0.0 && l.is_finite())) || o.w.is_some_and(|w| !(w > 0.0)) {
            return Err(bad("online.lambda must be non-negative and online.w positive"));
        }
        let d = &mut self.dispersion;
        if d.t == 0 || d.points == 0 {
            return Err(bad("dispersion.t and dispersion.points must be positive"));
        }
        let w_min = *d.w_min.get_or_insert(1.0 / d.t as f64);
        let w_max = *d.w_max.get_or_insert(1.0 / (d.t as f64).sqrt());
        if !(w_min > 0.0 && w_min <= w_max && w_max.is_finite()) {
            return Err(bad(format!("dispersion grid [{w_min}, {w_max}] must be positive and increasing")));
        }
        if self.pdim.m == 0 {
            return Err(bad("pdim.m must be positive"));
        }
        if self.report.rho.is_some_and(|r| !(lo..=hi).contains(&r)) {
            return Err(bad("report.rho lies outside the domain"));
        }
        match self.source {
            Source::KnapsackSmooth { n, .. } | Source::ClusteringSmooth { n, .. } | Source::Maxcut { n, .. }
                if n == 0 =>
            {
                return Err(bad("generator n must be positive"))
            }
            _ => {}
        }
        Ok(self)
    }

    pub fn domain(&self) -> (f64, f64) {
        let [lo, hi] = self.domain.unwrap_or_else(|| {
            let (lo, hi) = self.algorithm.default_domain();
            [lo, hi]
        });
        (lo, hi)
    }

    /// Smoothed-knapsack parameters `(n, C, b)` when the source is that generator.
    pub fn knapsack_source(&self) -> Option<(usize, f64, f64)> {
        match self.source {
            Source::KnapsackSmooth { n, capacity, b } => Some((n, capacity, b)),
            _ => None,
        }
    }

    /// Instance `i` of the stream seeded by `seed`.
    fn generate_one(&self, seed: u64, stream: u64) -> CliResult<TapedInstance> {
        let tape = RandomTape::new(seed, stream);
        let algo = tape.derive(ALGORITHM_TAG);
        Ok(match self.source {
            Source::KnapsackSmooth { n, capacity, b } => TapedInstance::new(gen_knapsack_smooth(n, capacity, b, &tape)?, algo),
            Source::ClusteringSmooth { n, max_dist, b, k } => {
                TapedInstance::new(gen_clustering_smooth(n, max_dist, b, k, &tape)?, algo)
            }
            Source::Maxcut { n, edge_prob, w_max } => TapedInstance::new(gen_maxcut(n, edge_prob, w_max, &tape)?, algo),
            Source::File { .. } => unreachable!("file sources are read, not generated"),
        })
    }

    fn read_file(&self) -> CliResult<Option<Vec<TapedInstance>>> {
        match &self.source {
            Source::File { path } => match read_instances(path) {
                Err(paramlearn::Error::Io(e)) => Err(CliError::Io { path: path.clone(), source: e }),
                other => Ok(Some(other?)),
            },
            _ => Ok(None),
        }
    }

    /// `count` instances starting at stream `first` of `seed`. File sources
    /// hand out consecutive records starting at `first`.
    pub fn instances(&self, seed: u64, first: u64, count: usize) -> CliResult<Vec<TapedInstance>> {
        if let Some(all) = self.read_file()? {
            let start = first as usize;
            if start + count > all.len() {
                return Err(bad(format!("instance file holds {} records, {} needed", all.len(), start + count)));
            }
            return Ok(all[start..start + count].to_vec());
        }
        (0..count as u64).map(|i| self.generate_one(seed, first + i)).collect()
    }

    /// The configured sample: `count` instances, or the whole file.
    pub fn sample(&self) -> CliResult<Vec<TapedInstance>> {
        match (self.read_file()?, self.count) {
            (Some(all), None) => Ok(all),
            _ => self.instances(self.seed, 0, self.count.unwrap_or(100)),
        }
    }

    /// Training and test samples for `train`.
    pub fn train_test(&self) -> CliResult<(Vec<TapedInstance>, Vec<TapedInstance>)> {
        let m = self.train.m.or(self.count);
        let train = match m {
            Some(m) => self.instances(self.seed, 0, m)?,
            None => self.sample()?,
        };
        if self.train.test_same {
            return Ok((train.clone(), train));
        }
        let test = if matches!(self.source, Source::File { .. }) {
            self.instances(self.seed, train.len() as u64, self.train.test_count)?
        } else {
            self.instances(self.seed, TEST_STREAM_OFFSET, self.train.test_count)?
        };
        Ok((train, test))
    }

    /// Runs the family once on the first instance so that generator and
    /// family errors surface before any work is done.
    pub fn check(&self) -> CliResult<()> {
        let first = self.instances(self.seed, 0, 1)?;
        let (lo, _) = self.domain();
        self.algorithm.utility(&first[0], lo)?;
        Ok(())
    }
}
