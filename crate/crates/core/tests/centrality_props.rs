mod common;

use cgso::centrality::{degree_vector, kcore_numbers, pagerank, walk_counts, Centrality, PageRankConfig};
use cgso::graph::Graph;
use proptest::prelude::*;

use common::strategies::{connected_graph, graph, permutation};

fn cycle(n: usize) -> Graph {
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
}

proptest! {
    #[test]
    fn kcore_never_exceeds_degree(g in graph(30)) {
        let core = kcore_numbers(&g).values;
        let deg = degree_vector(&g).values;
        for (c, d) in core.iter().zip(&deg) {
            prop_assert!(c <= d);
        }
    }

    #[test]
    fn kcore_subgraph_has_min_degree_k(g in graph(25)) {
        let core = kcore_numbers(&g).values;
        let kmax = core.iter().copied().fold(0.0, f64::max);
        let nodes: Vec<usize> = (0..g.node_count()).filter(|&i| core[i] >= kmax).collect();
        let sub = g.induced_subgraph(&nodes).graph;
        for i in 0..sub.node_count() {
            prop_assert!(sub.degree(i) as f64 >= kmax);
        }
    }

    #[test]
    fn pagerank_is_a_positive_distribution(g in graph(30)) {
        let pr = pagerank(&g, PageRankConfig::default()).unwrap().values;
        prop_assert!(pr.iter().all(|&p| p > 0.0));
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pagerank_follows_relabelling((g, perm) in connected_graph(2, 25).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), permutation(n))
    })) {
        let h = g.induced_subgraph(&perm).graph;
        let a = pagerank(&g, PageRankConfig::default()).unwrap().values;
        let b = pagerank(&h, PageRankConfig::default()).unwrap().values;
        for (new, &old) in perm.iter().enumerate() {
            prop_assert!((b[new] - a[old]).abs() < 1e-9);
        }
    }

    #[test]
    fn walk_counts_satisfy_recurrence(g in graph(25), len in 1u32..5) {
        let w = walk_counts(&g, len).unwrap().values;
        let next = walk_counts(&g, len + 1).unwrap().values;
        for i in 0..g.node_count() {
            let want: f64 = g.neighbors(i).iter().map(|&j| w[j]).sum();
            prop_assert_eq!(next[i], want);
        }
    }

    #[test]
    fn regular_graphs_have_constant_centralities(n in 3usize..40) {
        let g = cycle(n);
        for kind in Centrality::all_default() {
            let v = kind.compute(&g).unwrap().values;
            for x in &v {
                prop_assert!((x - v[0]).abs() < 1e-9, "{} not constant on C{}", kind, n);
            }
        }
    }
}
