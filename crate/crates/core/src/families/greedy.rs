//! Single-parameter scored greedy template.
//!
//! A family supplies a score `σ(ρ, ξ)` over per-object attributes and an
//! assignment rule. The driver repeatedly takes the unassigned object with
//! the highest score (ties: smallest index) and lets the rule assign it,
//! possibly assigning other objects and changing their attributes.

use std::fmt::Debug;

use super::knapsack::knapsack_score;
use super::mwis::mwis_score;
use crate::error::{Error, Result};
use crate::instances::{GraphInstance, KnapsackInstance};

/// Mutable view handed to the assignment rule.
pub struct GreedyContext<'a, A, L, S> {
    pub attrs: &'a mut [A],
    pub labels: &'a mut [Option<L>],
    pub state: &'a mut S,
}

pub trait GreedyFamily {
    type Attr: Clone;
    type Label: Copy + Eq + Debug;
    type State;

    fn init(&self) -> (Vec<Self::Attr>, Self::State);

    /// Must be continuous in `rho` for fixed attributes.
    fn score(&self, rho: f64, attr: &Self::Attr) -> f64;

    /// Assigns `chosen` and updates the remaining objects.
    fn assign(&self, chosen: usize, ctx: GreedyContext<'_, Self::Attr, Self::Label, Self::State>);

    /// Utility of a finished run; `order` lists objects in selection order.
    fn utility(&self, labels: &[Self::Label], order: &[usize]) -> f64;

    /// Number of crossings of two score curves.
    fn kappa(&self) -> usize;

    /// One more than the number of times an object's attributes may change.
    fn beta(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyRun<L> {
    pub labels: Vec<L>,
    /// Objects picked by the score, in order.
    pub order: Vec<usize>,
    pub utility: f64,
}

pub fn run_scored_greedy<F: GreedyFamily>(family: &F, rho: f64) -> Result<GreedyRun<F::Label>> {
    let (mut attrs, mut state) = family.init();
    let n = attrs.len();
    let mut labels: Vec<Option<F::Label>> = vec![None; n];
    let mut order = Vec::new();
    let cap = n.saturating_mul(family.beta().max(1));
    while labels.iter().any(Option::is_none) {
        if order.len() >= cap {
            return Err(Error::Internal(format!("assignment rule did not finish within {cap} steps")));
        }
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| labels[i].is_none()) {
            let s = family.score(rho, &attrs[i]);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        let (chosen, _) = best.expect("an unassigned object exists");
        order.push(chosen);
        family.assign(
            chosen,
            GreedyContext { attrs: &mut attrs, labels: &mut labels, state: &mut state },
        );
    }
    let labels: Vec<F::Label> = labels.into_iter().map(Option::unwrap).collect();
    let utility = family.utility(&labels, &order);
    Ok(GreedyRun { labels, order, utility })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    In,
    Out,
}

/// Knapsack as a scored greedy family: attributes `(v, s)`, state is the
/// remaining capacity.
pub struct KnapsackFamily<'a>(pub &'a KnapsackInstance);

impl GreedyFamily for KnapsackFamily<'_> {
    type Attr = (f64, f64);
    type Label = Pick;
    type State = f64;

    fn init(&self) -> (Vec<(f64, f64)>, f64) {
        let x = self.0;
        (x.values().iter().copied().zip(x.sizes().iter().copied()).collect(), x.capacity())
    }

    fn score(&self, rho: f64, &(v, s): &(f64, f64)) -> f64 {
        knapsack_score(v, s, rho)
    }

    fn assign(&self, chosen: usize, ctx: GreedyContext<'_, (f64, f64), Pick, f64>) {
        let size = ctx.attrs[chosen].1;
        ctx.labels[chosen] = Some(if size <= *ctx.state {
            *ctx.state -= size;
            Pick::In
        } else {
            Pick::Out
        });
    }

    fn utility(&self, labels: &[Pick], order: &[usize]) -> f64 {
        order
            .iter()
            .filter(|&&i| labels[i] == Pick::In)
            .fold(0.0, |acc, &i| acc + self.0.values()[i])
    }

    fn kappa(&self) -> usize {
        1
    }

    fn beta(&self) -> usize {
        1
    }
}

/// Independent set as a scored greedy family: attributes are
/// `(weight, residual degree)`.
pub struct MwisFamily<'a>(pub &'a GraphInstance);

impl GreedyFamily for MwisFamily<'_> {
    type Attr = (f64, usize);
    type Label = Pick;
    type State = ();

    fn init(&self) -> (Vec<(f64, usize)>, ()) {
        let g = self.0;
        ((0..g.n()).map(|v| (g.weights()[v], g.degree(v))).collect(), ())
    }

    fn score(&self, rho: f64, &(w, d): &(f64, usize)) -> f64 {
        mwis_score(w, d, rho)
    }

    fn assign(&self, chosen: usize, ctx: GreedyContext<'_, (f64, usize), Pick, ()>) {
        let g = self.0;
        ctx.labels[chosen] = Some(Pick::In);
        let mut removed = vec![chosen];
        for &u in g.neighbors(chosen) {
            if ctx.labels[u].is_none() {
                ctx.labels[u] = Some(Pick::Out);
                removed.push(u);
            }
        }
        for r in removed {
            for &u in g.neighbors(r) {
                if ctx.labels[u].is_none() {
                    ctx.attrs[u].1 -= 1;
                }
            }
        }
    }

    fn utility(&self, labels: &[Pick], order: &[usize]) -> f64 {
        order
            .iter()
            .filter(|&&i| labels[i] == Pick::In)
            .fold(0.0, |acc, &i| acc + self.0.weights()[i])
    }

    fn kappa(&self) -> usize {
        1
    }

    fn beta(&self) -> usize {
        self.0.n().max(1)
    }
}
