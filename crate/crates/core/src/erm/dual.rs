use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::families::{
    default_rank, extract_k_clustering, gaussian_projections, knapsack_critical_values, knapsack_greedy,
    learner_utility, linkage_tree, lloyds_alpha, mwis_greedy, rounding_uniforms, round_projections, scl_sweep,
    sdp_embed, slinear_critical_values, ClusterObjective, ClusterTree, Embedding, Extraction, GreedyOutcome,
    IndependentSet, Linkage, LloydsOutcome, Partition, Rounding,
};
use crate::instances::{
    maxcut_to_iqp, ClusteringInstance, GraphInstance, Instance, IqpInstance, KnapsackInstance, RandomTape,
    TapedInstance,
};
use crate::piecewise::PiecewiseConstant;

/// Tape tags for algorithm randomness, kept apart from generator streams.
const LLOYDS_TAG: u64 = 0x11;
const EMBED_TAG: u64 = 0x21;
const ROUND_TAG: u64 = 0x22;

/// A parametrized family together with its fixed (non-parameter) settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    Knapsack,
    Mwis,
    Scl { extraction: Extraction, objective: ClusterObjective },
    Exp { extraction: Extraction, objective: ClusterObjective },
    Lloyds { max_iters: usize },
    Slinear { rank: Option<usize>, sweeps: usize },
}

impl Family {
    pub fn label(&self) -> &'static str {
        match self {
            Family::Knapsack => "knapsack",
            Family::Mwis => "mwis",
            Family::Scl { .. } => "scl",
            Family::Exp { .. } => "exp",
            Family::Lloyds { .. } => "lloyds",
            Family::Slinear { .. } => "slinear",
        }
    }

    /// Parameter range used when none is configured.
    pub fn default_domain(&self) -> (f64, f64) {
        match self {
            Family::Knapsack => (0.0, 5.0),
            Family::Mwis => (0.0, 10.0),
            Family::Scl { .. } => (0.0, 1.0),
            Family::Exp { .. } => (-10.0, 10.0),
            Family::Lloyds { .. } => (0.0, 10.0),
            Family::Slinear { .. } => (0.0, 5.0),
        }
    }

    /// Whether [`build_dual`] is exact for this family (as opposed to a
    /// grid approximation).
    pub fn exact_dual(&self) -> bool {
        matches!(self, Family::Knapsack | Family::Scl { .. } | Family::Slinear { .. })
    }

    /// Utility of the family's algorithm at `rho` on one instance.
    pub fn utility(&self, x: &TapedInstance, rho: f64) -> Result<f64> {
        match *self {
            Family::Knapsack => Ok(knapsack_greedy(knapsack(self, x)?, rho)?.utility),
            Family::Mwis => Ok(mwis_greedy(graph(self, x)?, rho)?.utility),
            Family::Scl { extraction, objective } => {
                let c = clustering(self, x)?;
                tree_utility(&linkage_tree(c, Linkage::Scl(rho))?, c, extraction, objective)
            }
            Family::Exp { extraction, objective } => {
                let c = clustering(self, x)?;
                tree_utility(&linkage_tree(c, Linkage::Exp(rho))?, c, extraction, objective)
            }
            Family::Lloyds { max_iters } => {
                Ok(0.0 - lloyds_alpha(clustering(self, x)?, rho, &x.tape.derive(LLOYDS_TAG), max_iters)?.cost)
            }
            Family::Slinear { rank, sweeps } => {
                let s = SlinearSetup::new(x, rank, sweeps)?;
                s.utility(rho)
            }
        }
    }
}

/// Full output of one run, for reporting.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Knapsack(GreedyOutcome),
    Mwis(IndependentSet),
    Linkage { tree: ClusterTree, partition: Partition, utility: f64 },
    Lloyds { outcome: LloydsOutcome, utility: f64 },
    Slinear { rounding: Rounding, utility: f64 },
}

impl Outcome {
    pub fn utility(&self) -> f64 {
        match self {
            Outcome::Knapsack(o) => o.utility,
            Outcome::Mwis(o) => o.utility,
            Outcome::Linkage { utility, .. } | Outcome::Lloyds { utility, .. } | Outcome::Slinear { utility, .. } => {
                *utility
            }
        }
    }
}

impl Family {
    /// Runs the algorithm at `rho` and keeps everything it produced.
    pub fn run(&self, x: &TapedInstance, rho: f64) -> Result<Outcome> {
        match *self {
            Family::Knapsack => Ok(Outcome::Knapsack(knapsack_greedy(knapsack(self, x)?, rho)?)),
            Family::Mwis => Ok(Outcome::Mwis(mwis_greedy(graph(self, x)?, rho)?)),
            Family::Scl { extraction, objective } | Family::Exp { extraction, objective } => {
                let c = clustering(self, x)?;
                let rule = if matches!(self, Family::Scl { .. }) { Linkage::Scl(rho) } else { Linkage::Exp(rho) };
                let tree = linkage_tree(c, rule)?;
                let partition = extract_k_clustering(&tree, c, c.k(), extraction)?;
                let utility = learner_utility(&partition, c, objective)?;
                Ok(Outcome::Linkage { tree, partition, utility })
            }
            Family::Lloyds { max_iters } => {
                let outcome = lloyds_alpha(clustering(self, x)?, rho, &x.tape.derive(LLOYDS_TAG), max_iters)?;
                let utility = 0.0 - outcome.cost;
                Ok(Outcome::Lloyds { outcome, utility })
            }
            Family::Slinear { rank, sweeps } => {
                let s = SlinearSetup::new(x, rank, sweeps)?;
                let rounding = round_projections(&s.q, &s.projections, rho, &s.uniforms)?;
                let utility = s.score(&rounding);
                Ok(Outcome::Slinear { rounding, utility })
            }
        }
    }
}

fn mismatch<T>(f: &Family, x: &TapedInstance) -> Result<T> {
    domain(format!("family {} cannot run on a {} instance", f.label(), x.instance.kind()))
}

fn knapsack<'a>(f: &Family, x: &'a TapedInstance) -> Result<&'a KnapsackInstance> {
    match &x.instance {
        Instance::Knapsack(k) => Ok(k),
        _ => mismatch(f, x),
    }
}

fn graph<'a>(f: &Family, x: &'a TapedInstance) -> Result<&'a GraphInstance> {
    match &x.instance {
        Instance::Graph(g) => Ok(g),
        _ => mismatch(f, x),
    }
}

fn clustering<'a>(f: &Family, x: &'a TapedInstance) -> Result<&'a ClusteringInstance> {
    match &x.instance {
        Instance::Clustering(c) => Ok(c),
        _ => mismatch(f, x),
    }
}

fn tree_utility(
    tree: &ClusterTree,
    x: &ClusteringInstance,
    extraction: Extraction,
    objective: ClusterObjective,
) -> Result<f64> {
    learner_utility(&extract_k_clustering(tree, x, x.k(), extraction)?, x, objective)
}

/// Embedding, projections and coins of an `s`-linear run; everything except
/// the parameter. Graph inputs are solved as max-cut and scored by cut weight.
struct SlinearSetup {
    q: IqpInstance,
    /// Utility is `scale·zᵀAz + offset`. For max-cut the full form counts
    /// every edge twice, so the cut is `zᵀAz/2 + W/2`.
    scale: f64,
    offset: f64,
    projections: Vec<f64>,
    uniforms: Vec<f64>,
}

impl SlinearSetup {
    fn new(x: &TapedInstance, rank: Option<usize>, sweeps: usize) -> Result<Self> {
        let (q, scale, offset) = match &x.instance {
            Instance::Iqp(q) => (q.clone(), 1.0, 0.0),
            Instance::Graph(g) => (maxcut_to_iqp(g), 0.5, g.total_edge_weight() / 2.0),
            _ => return mismatch(&Family::Slinear { rank, sweeps }, x),
        };
        let e: Embedding = sdp_embed(&q, rank.unwrap_or_else(|| default_rank(q.n())), sweeps, &x.tape.derive(EMBED_TAG))?;
        let round_tape: RandomTape = x.tape.derive(ROUND_TAG);
        let projections = gaussian_projections(&e, &round_tape);
        let uniforms = rounding_uniforms(q.n(), &round_tape);
        Ok(SlinearSetup { q, scale, offset, projections, uniforms })
    }

    fn utility(&self, rho: f64) -> Result<f64> {
        Ok(self.score(&round_projections(&self.q, &self.projections, rho, &self.uniforms)?))
    }

    fn score(&self, r: &Rounding) -> f64 {
        self.scale * r.realized + self.offset
    }
}

/// Dual function `ρ ↦ u_ρ(x)` of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualFunction {
    pub family: String,
    pub instance_id: usize,
    /// Grid resolution for approximate duals; `None` when exact.
    pub resolution: Option<f64>,
    pub f: PiecewiseConstant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualOptions {
    pub resolution: f64,
    pub initial_cells: usize,
    pub max_pieces: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        DualOptions { resolution: 1e-6, initial_cells: 256, max_pieces: 10_000_000 }
    }
}

pub fn build_dual(family: &Family, x: &TapedInstance, lo: f64, hi: f64, instance_id: usize) -> Result<DualFunction> {
    build_dual_with(family, x, lo, hi, instance_id, &DualOptions::default())
}

pub fn build_dual_with(
    family: &Family,
    x: &TapedInstance,
    lo: f64,
    hi: f64,
    instance_id: usize,
    opts: &DualOptions,
) -> Result<DualFunction> {
    let (f, resolution) = match *family {
        Family::Knapsack => {
            let k = knapsack(family, x)?;
            let f = PiecewiseConstant::from_candidates(lo, hi, knapsack_critical_values(k), |rho| {
                Ok(knapsack_greedy(k, rho)?.utility)
            })?;
            (f, None)
        }
        Family::Scl { extraction, objective } => {
            let c = clustering(family, x)?;
            let pieces = scl_sweep(c, lo, hi, opts.max_pieces)?;
            let mut breaks = Vec::with_capacity(pieces.len());
            let mut values = Vec::with_capacity(pieces.len());
            for (start, tree) in &pieces {
                if *start > lo {
                    breaks.push(*start);
                }
                values.push(tree_utility(tree, c, extraction, objective)?);
            }
            (PiecewiseConstant::new(lo, hi, breaks, values)?, None)
        }
        Family::Slinear { rank, sweeps } => {
            if lo < 0.0 {
                return domain(format!("s-linear parameters must be non-negative, got lower end {lo}"));
            }
            let s = SlinearSetup::new(x, rank, sweeps)?;
            let crit = slinear_critical_values(&s.projections, &s.uniforms);
            (PiecewiseConstant::from_candidates(lo, hi, crit, |rho| s.utility(rho))?, None)
        }
        Family::Mwis => {
            let g = graph(family, x)?;
            let f = adaptive_dual(lo, hi, opts, |rho| {
                let out = mwis_greedy(g, rho)?;
                Ok((out.vertices, out.utility))
            })?;
            (f, Some(opts.resolution))
        }
        Family::Exp { extraction, objective } => {
            let c = clustering(family, x)?;
            let f = adaptive_dual(lo, hi, opts, |rho| {
                let tree = linkage_tree(c, Linkage::Exp(rho))?;
                let u = tree_utility(&tree, c, extraction, objective)?;
                Ok((tree.topology(), u))
            })?;
            (f, Some(opts.resolution))
        }
        Family::Lloyds { max_iters } => {
            let c = clustering(family, x)?;
            let tape = x.tape.derive(LLOYDS_TAG);
            let f = adaptive_dual(lo, hi, opts, |rho| {
                let out = lloyds_alpha(c, rho, &tape, max_iters)?;
                Ok((out.seeds, 0.0 - out.cost))
            })?;
            (f, Some(opts.resolution))
        }
    };
    Ok(DualFunction { family: family.label().to_string(), instance_id, resolution, f: f.canonical() })
}

/// Duals for a list of instances, built in parallel; ids are list positions.
pub fn build_duals(family: &Family, xs: &[TapedInstance], lo: f64, hi: f64) -> Result<Vec<DualFunction>> {
    xs.par_iter().enumerate().map(|(i, x)| build_dual(family, x, lo, hi, i)).collect()
}

/// Grid approximation: evaluate the execution trace on a uniform grid and
/// bisect every cell whose end traces differ down to `resolution`. Cells with
/// equal end traces are taken to be constant.
fn adaptive_dual<T: PartialEq>(
    lo: f64,
    hi: f64,
    opts: &DualOptions,
    run: impl Fn(f64) -> Result<(T, f64)>,
) -> Result<PiecewiseConstant> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return domain(format!("invalid parameter range [{lo}, {hi}]"));
    }
    if !(opts.resolution > 0.0) || opts.initial_cells == 0 {
        return domain("grid resolution and cell count must be positive");
    }
    let cells = opts.initial_cells;
    let at = |i: usize| if i == cells { hi } else { lo + (hi - lo) * i as f64 / cells as f64 };
    let mut breaks = Vec::new();
    let (first_trace, first_value) = run(lo)?;
    let mut values = vec![first_value];
    let mut left = (lo, first_trace, first_value);
    for i in 1..=cells {
        let b = at(i);
        let (tb, ub) = run(b)?;
        let right = (b, tb, ub);
        refine(&run, &left, &right, (lo, hi), opts, &mut breaks, &mut values)?;
        left = right;
    }
    PiecewiseConstant::new(lo, hi, breaks, values)
}

fn refine<T: PartialEq>(
    run: &impl Fn(f64) -> Result<(T, f64)>,
    a: &(f64, T, f64),
    b: &(f64, T, f64),
    (lo, hi): (f64, f64),
    opts: &DualOptions,
    breaks: &mut Vec<f64>,
    values: &mut Vec<f64>,
) -> Result<()> {
    if a.1 == b.1 {
        return Ok(());
    }
    let mid = a.0 + (b.0 - a.0) / 2.0;
    if b.0 - a.0 <= opts.resolution || mid <= a.0 || mid >= b.0 {
        // Breaks must stay interior and increasing; a change right at the
        // upper end, or one that collides with the last break, overwrites
        // the value instead.
        let at = if b.0 < hi { b.0 } else { a.0 };
        if breaks.last().map_or(at <= lo, |&l| at <= l) {
            *values.last_mut().expect("values are never empty") = b.2;
        } else {
            breaks.push(at);
            values.push(b.2);
        }
        if breaks.len() >= opts.max_pieces {
            return Err(Error::Resource(format!("dual exceeded {} pieces", opts.max_pieces)));
        }
        return Ok(());
    }
    let (tm, um) = run(mid)?;
    let m = (mid, tm, um);
    refine(run, a, &m, (lo, hi), opts, breaks, values)?;
    refine(run, &m, b, (lo, hi), opts, breaks, values)
}
