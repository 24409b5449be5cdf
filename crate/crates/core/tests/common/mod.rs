#![allow(dead_code)]

use cgso::graph::Graph;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random spanning tree on `n` nodes plus each remaining pair with
/// probability `p`.
pub fn random_connected(n: usize, p: f64, rng: &mut ChaCha8Rng) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        edges.push((order[k], parent));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Disjoint union; returns the graph and each node's component index.
pub fn disjoint_union(parts: &[Graph]) -> (Graph, Vec<usize>) {
    let mut edges = Vec::new();
    let mut labels = Vec::new();
    let mut offset = 0;
    for (c, g) in parts.iter().enumerate() {
        edges.extend(g.edges().map(|(u, v)| (u + offset, v + offset)));
        labels.extend(std::iter::repeat_n(c, g.node_count()));
        offset += g.node_count();
    }
    (Graph::from_edges(offset, edges).unwrap(), labels)
}

pub mod strategies {
    use cgso::graph::Graph;
    use proptest::prelude::*;

    /// Graphs on `1..=max_n` nodes from arbitrary (possibly repeated or
    /// looping) pairs.
    pub fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((0..n, 0..n), 0..3 * n).prop_map(move |e| Graph::from_edges(n, e).unwrap())
        })
    }

    /// Connected graphs: a random tree (parent of `k` drawn below `k`) plus
    /// extra pairs.
    pub fn connected_graph(min_n: usize, max_n: usize) -> impl Strategy<Value = Graph> {
        (min_n..=max_n).prop_flat_map(|n| {
            let parents = prop::collection::vec(any::<prop::sample::Index>(), n - 1);
            let extra = prop::collection::vec((0..n, 0..n), 0..2 * n);
            (parents, extra).prop_map(move |(parents, extra)| {
                let mut edges: Vec<(usize, usize)> =
                    parents.iter().enumerate().map(|(k, p)| (k + 1, p.index(k + 1))).collect();
                edges.extend(extra);
                Graph::from_edges(n, edges).unwrap()
            })
        })
    }

    /// A permutation of `0..n` as `new -> old`.
    pub fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
    }
}
