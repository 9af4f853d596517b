//! Parametrized algorithm families.

mod greedy;
mod knapsack;
mod linkage;
mod lloyds;
mod mwis;
mod pruning;
mod sdp;
mod stability;

pub use greedy::{run_scored_greedy, GreedyContext, GreedyFamily, GreedyRun, KnapsackFamily, MwisFamily, Pick};
pub use knapsack::{knapsack_critical_values, knapsack_greedy, knapsack_order, GreedyOutcome};
pub use linkage::{exp_linkage_distance, linkage_tree, ClusterTree, Linkage, Merge};
pub use lloyds::{lloyds_alpha, lloyds_from_seeds, seed_centers, LloydsOutcome};
pub use mwis::{mwis_greedy, IndependentSet};
pub use pruning::{
    clustering_utility, extract_k_clustering, learner_utility, ClusterObjective, CostObjective, Extraction, Partition,
};
pub use sdp::{
    default_rank, expected_value, gaussian_projections, phi, round_projections, rounding_uniforms, sdp_embed,
    sdp_objective, slinear_critical_values, slinear_round, Embedding, Rounding,
};
pub use stability::{scl_stability_interval, scl_sweep, scl_tree_with_interval, Comparison, StabilityInterval};
