mod common;

use cgso::graph::{connected_components, parse_edge_list, Graph};
use proptest::prelude::*;

use common::strategies::{graph, permutation};

proptest! {
    #[test]
    fn edge_list_roundtrip(g in graph(30)) {
        let parsed = parse_edge_list(&g.to_edge_list()).unwrap();
        prop_assert_eq!(&parsed.graph, &g);
        prop_assert_eq!(parsed.self_loops_dropped, 0);
        g.validate().unwrap();
    }

    #[test]
    fn degree_sum_is_twice_edge_count(g in graph(30)) {
        let total: usize = (0..g.node_count()).map(|i| g.degree(i)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
        prop_assert_eq!(g.edges().count(), g.edge_count());
    }

    #[test]
    fn relabelling_preserves_structure((g, perm) in graph(25).prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), permutation(n))
    })) {
        let sub = g.induced_subgraph(&perm);
        let h: &Graph = &sub.graph;
        prop_assert_eq!(h.edge_count(), g.edge_count());
        for (new, &old) in perm.iter().enumerate() {
            prop_assert_eq!(h.degree(new), g.degree(old));
        }
        for (u, v) in g.edges() {
            prop_assert!(h.has_edge(sub.old_to_new[u].unwrap(), sub.old_to_new[v].unwrap()));
        }
        prop_assert_eq!(
            connected_components(h).component_count,
            connected_components(&g).component_count
        );
    }
}
