//! Problem instances, smooth random generators and instance files.

mod generate;
mod io;
mod tape;
mod types;

pub use generate::{gen_clustering_smooth, gen_knapsack_smooth, gen_maxcut, smooth_draw};
pub use io::{instances_from_str, instances_to_string, read_instances, write_instances};
pub use tape::RandomTape;
pub use types::{ClusteringInstance, GraphInstance, Instance, IqpInstance, KnapsackInstance, TapedInstance};
pub(crate) use types::validate_partition;

/// Max-cut as an IQP: `a_ij = a_ji = −w_ij/2` on edges, zero elsewhere.
///
/// With this symmetric matrix, `cut(z) = W/2 + zᵀAz/2` where `W` is the total
/// edge weight; summing only the upper triangle of `zᵀAz` gives
/// `cut(z) = W/2 + Σ_{i<j} a_ij z_i z_j`.
pub fn maxcut_to_iqp(g: &GraphInstance) -> IqpInstance {
    let n = g.n();
    let mut a = vec![0.0; n * n];
    for (&(i, j), &w) in g.edges().iter().zip(g.edge_weights()) {
        a[i * n + j] = -w / 2.0;
        a[j * n + i] = -w / 2.0;
    }
    IqpInstance::new(n, a).expect("finite edge weights give a valid matrix")
}

/// `Σ_{i<j} a_ij z_i z_j`, the quadratic form with each unordered pair once.
pub fn upper_pair_form(q: &IqpInstance, z: &[i8]) -> f64 {
    let n = q.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += q.a(i, j) * f64::from(z[i] * z[j]);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_matrix() {
        let g = GraphInstance::new_weighted(2, vec![1.0; 2], vec![(0, 1, 2.0)]).unwrap();
        let q = maxcut_to_iqp(&g);
        assert_eq!(q.a(0, 1), -1.0);
        assert_eq!(q.a(1, 0), -1.0);
        assert_eq!(q.a(0, 0), 0.0);
    }

    #[test]
    fn empty_graph_gives_zero_matrix() {
        let g = GraphInstance::new(4, vec![1.0; 4], vec![]).unwrap();
        assert!(maxcut_to_iqp(&g).matrix().iter().all(|&a| a == 0.0));
    }

    #[test]
    fn triangle_identity_over_all_signs() {
        let g = GraphInstance::new(3, vec![1.0; 3], vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let q = maxcut_to_iqp(&g);
        let z = [1, 1, -1];
        assert_eq!(upper_pair_form(&q, &z) + 1.5, 2.0);
        assert_eq!(g.cut_value(&z), 2.0);
        for mask in 0..8u32 {
            let z: Vec<i8> = (0..3).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 }).collect();
            let cut = g.cut_value(&z);
            assert_eq!(upper_pair_form(&q, &z) + 1.5, cut);
            assert_eq!(q.quadratic_form(&z) / 2.0 + 1.5, cut);
        }
    }
}
