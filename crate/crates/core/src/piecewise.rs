//! Piecewise-constant functions on a closed interval.
//!
//! Pieces are half-open `[b_i, b_{i+1})` except the last one, which also owns
//! the right end of the domain. A breakpoint therefore belongs to the piece
//! on its right.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::instances::RandomTape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PiecewiseWire", into = "PiecewiseWire")]
pub struct PiecewiseConstant {
    lo: f64,
    hi: f64,
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PiecewiseWire {
    domain: [f64; 2],
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<PiecewiseWire> for PiecewiseConstant {
    type Error = Error;

    fn try_from(w: PiecewiseWire) -> Result<Self> {
        PiecewiseConstant::new(w.domain[0], w.domain[1], w.breakpoints, w.values)
    }
}

impl From<PiecewiseConstant> for PiecewiseWire {
    fn from(f: PiecewiseConstant) -> Self {
        PiecewiseWire { domain: [f.lo, f.hi], breakpoints: f.breakpoints, values: f.values }
    }
}

/// The maximizing piece chosen by [`PiecewiseConstant::argmax`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Argmax {
    pub value: f64,
    /// Left end of the piece (inclusive).
    pub lo: f64,
    /// Right end of the piece (exclusive unless it is the domain end).
    pub hi: f64,
    pub representative: f64,
}

fn check_domain(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return domain(format!("invalid domain [{lo}, {hi}]"));
    }
    Ok(())
}

impl PiecewiseConstant {
    pub fn new(lo: f64, hi: f64, breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_domain(lo, hi)?;
        if values.len() != breakpoints.len() + 1 {
            return domain(format!(
                "{} values for {} breakpoints",
                values.len(),
                breakpoints.len()
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return domain(format!("piece value {v} is not finite"));
        }
        let mut prev = lo;
        for &b in &breakpoints {
            if !(b > prev && b < hi) {
                return domain(format!("breakpoint {b} is not strictly increasing inside ({lo}, {hi})"));
            }
            prev = b;
        }
        Ok(PiecewiseConstant { lo, hi, breakpoints, values })
    }

    pub fn constant(lo: f64, hi: f64, value: f64) -> Result<Self> {
        Self::new(lo, hi, Vec::new(), vec![value])
    }

    /// Builds a function from candidate breakpoints, evaluating `value_at` at
    /// the midpoint of every resulting piece.
    ///
    /// Candidates outside the open domain are dropped; duplicates are removed
    /// by exact equality.
    pub fn from_candidates(
        lo: f64,
        hi: f64,
        candidates: impl IntoIterator<Item = f64>,
        mut value_at: impl FnMut(f64) -> Result<f64>,
    ) -> Result<Self> {
        check_domain(lo, hi)?;
        let mut breaks: Vec<f64> = candidates.into_iter().filter(|&c| c > lo && c < hi).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut values = Vec::with_capacity(breaks.len() + 1);
        let mut left = lo;
        for &b in breaks.iter().chain(std::iter::once(&hi)) {
            values.push(value_at(left + (b - left) / 2.0)?);
            left = b;
        }
        Self::new(lo, hi, breaks, values)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn piece_count(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(start, end, value)` over the pieces from left to right.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let starts = std::iter::once(self.lo).chain(self.breakpoints.iter().copied());
        let ends = self.breakpoints.iter().copied().chain(std::iter::once(self.hi));
        starts.zip(ends).zip(self.values.iter().copied()).map(|((a, b), v)| (a, b, v))
    }

    #[inline]
    fn piece_index(&self, rho: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= rho)
    }

    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !(rho >= self.lo && rho <= self.hi) {
            return domain(format!("{rho} is outside [{}, {}]", self.lo, self.hi));
        }
        Ok(self.values[self.piece_index(rho)])
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi
    }

    /// Same function with equal adjacent pieces merged.
    pub fn canonical(&self) -> Self {
        let mut breakpoints = Vec::new();
        let mut values = vec![self.values[0]];
        for (b, &v) in self.breakpoints.iter().zip(&self.values[1..]) {
            if v != *values.last().unwrap() {
                breakpoints.push(*b);
                values.push(v);
            }
        }
        PiecewiseConstant { lo: self.lo, hi: self.hi, breakpoints, values }
    }

    /// Breakpoints where the value actually changes.
    pub fn discontinuities(&self) -> Vec<f64> {
        self.breakpoints
            .iter()
            .zip(self.values.windows(2))
            .filter(|(_, w)| w[0] != w[1])
            .map(|(b, _)| *b)
            .collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        PiecewiseConstant {
            lo: self.lo,
            hi: self.hi,
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Pointwise sum of two functions.
    pub fn add(&self, other: &Self) -> Result<Self> {
        merge_sum(&[self.clone(), other.clone()])
    }

    /// Maximal value; the leftmost maximal run of pieces and its midpoint.
    pub fn argmax(&self) -> Argmax {
        let f = self.canonical();
        let mut best = 0;
        for (i, &v) in f.values.iter().enumerate().skip(1) {
            if v > f.values[best] {
                best = i;
            }
        }
        let (lo, hi, value) = f.pieces().nth(best).unwrap();
        Argmax { value, lo, hi, representative: lo + (hi - lo) / 2.0 }
    }

    /// `log ∫ exp(λ f(ρ)) dρ` over the domain.
    pub fn exp_mass(&self, lambda: f64) -> Result<f64> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("learning rate {lambda} must be a finite non-negative real"));
        }
        if lambda == 0.0 {
            return Ok((self.hi - self.lo).ln());
        }
        Ok(log_sum_exp(&self.log_masses(lambda)))
    }

    fn log_masses(&self, lambda: f64) -> Vec<f64> {
        self.pieces().map(|(a, b, v)| (b - a).ln() + lambda * v).collect()
    }

    /// Draws `ρ` with density proportional to `exp(λ f(ρ))`.
    ///
    /// A piece is picked by inverse CDF over max-shifted masses, then the
    /// point is uniform inside it.
    pub fn exp_sample_with<R: Rng + ?Sized>(&self, lambda: f64, rng: &mut R) -> Result<f64> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return domain(format!("learning rate {lambda} must be a finite non-negative real"));
        }
        let probs = self.piece_probabilities(lambda);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                chosen = i;
                break;
            }
        }
        // Rounding can leave `acc` just under 1; skip trailing zero-mass pieces.
        while probs[chosen] == 0.0 && chosen > 0 {
            chosen -= 1;
        }
        let (a, b, _) = self.pieces().nth(chosen).unwrap();
        let t: f64 = rng.random();
        Ok((a + (b - a) * t).min(b))
    }

    pub fn exp_sample(&self, lambda: f64, tape: &RandomTape) -> Result<f64> {
        self.exp_sample_with(lambda, &mut tape.rng(0))
    }

    /// Probability of each piece under the `exp(λ f)` density.
    pub fn piece_probabilities(&self, lambda: f64) -> Vec<f64> {
        let logs = self.log_masses(lambda);
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Pointwise sum of functions on one domain.
///
/// Breakpoints are the sorted, deduplicated union. Each piece value is the sum
/// of the component values in list order, so `eval` of the result equals the
/// left-to-right sum of the component evaluations.
pub fn merge_sum(fs: &[PiecewiseConstant]) -> Result<PiecewiseConstant> {
    let Some(first) = fs.first() else {
        return domain("merge_sum needs at least one function");
    };
    if let Some(f) = fs.iter().find(|f| !f.same_domain(first)) {
        return domain(format!(
            "domain [{}, {}] differs from [{}, {}]",
            f.lo, f.hi, first.lo, first.hi
        ));
    }
    let mut breaks: Vec<f64> = fs.iter().flat_map(|f| f.breakpoints.iter().copied()).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let mut cursor = vec![0usize; fs.len()];
    let mut values = Vec::with_capacity(breaks.len() + 1);
    for piece in 0..=breaks.len() {
        if piece > 0 {
            let b = breaks[piece - 1];
            for (c, f) in cursor.iter_mut().zip(fs) {
                if *c < f.breakpoints.len() && f.breakpoints[*c] == b {
                    *c += 1;
                }
            }
        }
        let mut total = 0.0;
        for (c, f) in cursor.iter().zip(fs) {
            total += f.values[*c];
        }
        values.push(total);
    }
    PiecewiseConstant::new(first.lo, first.hi, breaks, values)
}

/// Sum of many functions by balanced pairwise reduction.
///
/// Cheaper than [`merge_sum`] for long lists; piece values may differ from
/// the list-order sum in the last bits.
pub fn sum_balanced(fs: &[PiecewiseConstant]) -> Result<PiecewiseConstant> {
    match fs.len() {
        0 => domain("sum_balanced needs at least one function"),
        1..=8 => merge_sum(fs),
        n => {
            let (left, right) = fs.split_at(n / 2);
            let (l, r) = rayon::join(|| sum_balanced(left), || sum_balanced(right));
            merge_sum(&[l?, r?])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pc(lo: f64, hi: f64, b: &[f64], v: &[f64]) -> PiecewiseConstant {
        PiecewiseConstant::new(lo, hi, b.to_vec(), v.to_vec()).unwrap()
    }

    pub(crate) fn random_function(rng: &mut impl Rng, lo: f64, hi: f64, max_breaks: usize) -> PiecewiseConstant {
        let count = rng.random_range(0..=max_breaks);
        let mut b: Vec<f64> = (0..count).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
        b.retain(|&x| x > lo);
        b.sort_by(f64::total_cmp);
        b.dedup();
        let v = (0..=b.len()).map(|_| rng.random_range(0..5) as f64 * 0.5).collect();
        PiecewiseConstant::new(lo, hi, b, v).unwrap()
    }

    #[test]
    fn validation() {
        assert!(PiecewiseConstant::new(1.0, 1.0, vec![], vec![0.0]).is_err());
        assert!(PiecewiseConstant::new(0.0, 1.0, vec![0.5], vec![0.0]).is_err());
        assert!(PiecewiseConstant::new(0.0, 1.0, vec![0.0], vec![0.0, 1.0]).is_err());
        assert!(PiecewiseConstant::new(0.0, 1.0, vec![0.6, 0.5], vec![0.0, 1.0, 2.0]).is_err());
        assert!(PiecewiseConstant::new(0.0, 1.0, vec![], vec![f64::NAN]).is_err());
    }

    #[test]
    fn eval_conventions() {
        let c = PiecewiseConstant::constant(0.0, 2.0, 3.0).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 3.0);
        assert_eq!(c.eval(1.7).unwrap(), 3.0);
        let f = pc(0.0, 1.0, &[0.5], &[1.0, 2.0]);
        assert_eq!(f.eval(0.4999).unwrap(), 1.0);
        assert_eq!(f.eval(0.5).unwrap(), 2.0);
        assert_eq!(f.eval(1.0).unwrap(), 2.0);
        assert!(f.eval(1.0001).is_err());
        assert!(f.eval(-0.1).is_err());
        assert!(f.eval(f64::NAN).is_err());
    }

    #[test]
    fn merge_examples() {
        let f = pc(0.0, 1.0, &[0.3], &[1.0, 2.0]);
        assert_eq!(merge_sum(std::slice::from_ref(&f)).unwrap(), f);
        let g = pc(0.0, 1.0, &[0.7], &[10.0, 20.0]);
        let s = merge_sum(&[f.clone(), g]).unwrap();
        assert_eq!(s.breakpoints(), &[0.3, 0.7]);
        assert_eq!(s.values(), &[11.0, 12.0, 22.0]);
        let other = pc(0.0, 2.0, &[], &[0.0]);
        assert!(matches!(merge_sum(&[f, other]), Err(Error::Domain(_))));
        assert!(merge_sum(&[]).is_err());
    }

    #[test]
    fn merge_matches_pointwise_sum_on_fifty_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let fs: Vec<_> = (0..50).map(|_| random_function(&mut rng, -1.0, 3.0, 6)).collect();
        let s = merge_sum(&fs).unwrap();
        let total_breaks: usize = fs.iter().map(|f| f.breakpoints().len()).sum();
        assert!(s.piece_count() <= total_breaks + 1);
        for _ in 0..1000 {
            let rho = -1.0 + 4.0 * rng.random::<f64>();
            let direct = fs.iter().fold(0.0, |acc, f| acc + f.eval(rho).unwrap());
            assert_eq!(s.eval(rho).unwrap(), direct);
        }
        // Breakpoints themselves are probes too.
        for &b in s.breakpoints() {
            let direct = fs.iter().fold(0.0, |acc, f| acc + f.eval(b).unwrap());
            assert_eq!(s.eval(b).unwrap(), direct);
        }
    }

    #[test]
    fn balanced_sum_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let fs: Vec<_> = (0..37).map(|_| random_function(&mut rng, 0.0, 1.0, 5)).collect();
        let a = merge_sum(&fs).unwrap().canonical();
        let b = sum_balanced(&fs).unwrap().canonical();
        // Values are multiples of 0.5, so every partial sum is exact.
        assert_eq!(a, b);
    }

    #[test]
    fn argmax_examples() {
        let c = PiecewiseConstant::constant(0.0, 4.0, 1.0).unwrap();
        let a = c.argmax();
        assert_eq!((a.value, a.lo, a.hi, a.representative), (1.0, 0.0, 4.0, 2.0));
        let f = pc(0.0, 3.0, &[1.0, 2.0], &[1.0, 3.0, 2.0]);
        let a = f.argmax();
        assert_eq!((a.value, a.lo, a.hi, a.representative), (3.0, 1.0, 2.0, 1.5));
        // Ties go to the leftmost run; equal neighbours are one run.
        let g = pc(0.0, 4.0, &[1.0, 2.0, 3.0], &[5.0, 5.0, 1.0, 5.0]);
        let a = g.argmax();
        assert_eq!((a.lo, a.hi, a.representative), (0.0, 2.0, 1.0));
    }

    #[test]
    fn argmax_beats_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let f = random_function(&mut rng, 0.0, 2.0, 30);
            let best = f.argmax();
            let grid_max = (0..=100_000)
                .map(|i| f.eval(2.0 * i as f64 / 100_000.0).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(best.value, grid_max);
            assert_eq!(f.eval(best.representative).unwrap(), best.value);
        }
    }

    #[test]
    fn discontinuity_examples() {
        assert!(PiecewiseConstant::constant(0.0, 1.0, 2.0).unwrap().discontinuities().is_empty());
        assert!(pc(0.0, 1.0, &[0.5], &[1.0, 1.0]).discontinuities().is_empty());
        assert_eq!(pc(0.0, 1.0, &[0.2, 0.8], &[1.0, 2.0, 1.0]).discontinuities(), vec![0.2, 0.8]);
    }

    #[test]
    fn exp_mass_examples() {
        let f = pc(-1.0, 3.0, &[0.0], &[2.0, -1.0]);
        assert_eq!(f.exp_mass(0.0).unwrap(), 4f64.ln());
        let c = PiecewiseConstant::constant(1.0, 3.0, 0.7).unwrap();
        assert!((c.exp_mass(2.5).unwrap() - (2f64.ln() + 2.5 * 0.7)).abs() < 1e-15);
        assert!(f.exp_mass(-1.0).is_err());
        // Large rates stay finite.
        let big = f.exp_mass(1e4).unwrap();
        assert!((big - (1f64.ln() + 2e4)).abs() < 1e-9);
    }

    /// Adaptive Simpson on `exp(λ f)` that only sees `eval`.
    fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec(g: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = (a + b) / 2.0;
            let lm = (a + m) / 2.0;
            let rm = (m + b) / 2.0;
            let flm = g(lm);
            let frm = g(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            // Refine to a minimum depth first so narrow pieces are not skipped.
            if depth == 0 || (depth < 48 && (left + right - whole).abs() <= 15.0 * tol) {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (g(a), g(b), g((a + b) / 2.0));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(g, a, b, fa, fm, fb, whole, tol, 60)
    }

    #[test]
    fn exp_mass_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let f = random_function(&mut rng, 0.0, 1.0, 6);
            let lambda = 1.3;
            let g = |x: f64| (lambda * f.eval(x).unwrap()).exp();
            let integral = adaptive_simpson(&g, 0.0, 1.0, 1e-13);
            let exact = f.exp_mass(lambda).unwrap().exp();
            assert!(((integral - exact) / exact).abs() < 1e-9, "{integral} vs {exact}");
        }
    }

    #[test]
    fn sampling_mass_ratio() {
        let lambda = 2.0;
        let f = pc(0.0, 2.0, &[1.0], &[0.0, 2f64.ln() / lambda]);
        let p = f.piece_probabilities(lambda);
        assert!((p[0] - 1.0 / 3.0).abs() < 1e-12 && (p[1] - 2.0 / 3.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 100_000;
        let heavy = (0..n).filter(|_| f.exp_sample_with(lambda, &mut rng).unwrap() >= 1.0).count();
        let freq = heavy as f64 / n as f64;
        let sigma = (2.0 / 9.0 / n as f64).sqrt();
        assert!((freq - 2.0 / 3.0).abs() < 4.0 * sigma, "{freq}");
    }

    #[test]
    fn dominant_piece_takes_almost_all_mass() {
        let lambda = 0.5;
        let f = pc(0.0, 1.0, &[0.9], &[0.0, 50.0 / lambda]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let light = (0..10_000).filter(|_| f.exp_sample_with(lambda, &mut rng).unwrap() < 0.9).count();
        assert!(light as f64 / 10_000.0 <= 1e-4);
    }

    #[test]
    fn sampling_is_deterministic_given_tape() {
        let f = pc(0.0, 1.0, &[0.4], &[1.0, 0.0]);
        let t = RandomTape::new(4, 4);
        assert_eq!(f.exp_sample(3.0, &t).unwrap(), f.exp_sample(3.0, &t).unwrap());
    }

    #[test]
    fn serde_shape() {
        let f = pc(0.0, 1.0, &[0.1], &[0.25, 1.0 / 3.0]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"domain":[0.0,1.0],"breakpoints":[0.1],"values":[0.25,0.3333333333333333]}"#);
        assert_eq!(serde_json::from_str::<PiecewiseConstant>(&s).unwrap(), f);
        assert!(serde_json::from_str::<PiecewiseConstant>(r#"{"domain":[0,1],"breakpoints":[2],"values":[0,1]}"#).is_err());
    }

    proptest! {
        #[test]
        fn sum_commutes_and_associates(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 0.0, 1.0, 5);
            let g = random_function(&mut rng, 0.0, 1.0, 5);
            let h = random_function(&mut rng, 0.0, 1.0, 5);
            prop_assert_eq!(f.add(&g).unwrap().canonical(), g.add(&f).unwrap().canonical());
            let left = f.add(&g).unwrap().add(&h).unwrap().canonical();
            let right = f.add(&g.add(&h).unwrap()).unwrap().canonical();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn canonical_preserves_values(seed in any::<u64>(), probe in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = random_function(&mut rng, 0.0, 1.0, 8);
            let c = f.canonical();
            prop_assert_eq!(f.eval(probe).unwrap(), c.eval(probe).unwrap());
            prop_assert_eq!(c.breakpoints(), &f.discontinuities()[..]);
        }
    }
}
