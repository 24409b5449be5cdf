//! Barabási–Albert graphs and stochastic block models whose blocks are BA
//! graphs.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::{rng_from_seed, split, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaParams {
    /// Final node count.
    pub n: usize,
    /// Nodes in the seed graph.
    pub n0: usize,
    /// Uniformly random edges in the seed graph.
    pub r0: usize,
    /// Edges added by each arriving node.
    pub r: usize,
    pub seed: u64,
}

impl BaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n0 == 0 || self.n0 >= self.n {
            return bad(format!("need 0 < n0 < n, got n0={} n={}", self.n0, self.n));
        }
        let capacity = self.n0 * (self.n0 - 1) / 2;
        if self.r0 > capacity {
            return bad(format!(
                "r0={} exceeds the {capacity} distinct pairs among n0={} seed nodes",
                self.r0, self.n0
            ));
        }
        if self.r == 0 || self.r > self.n0 {
            return bad(format!("need 1 <= r <= n0, got r={} n0={}", self.r, self.n0));
        }
        Ok(())
    }

    pub fn expected_edge_count(&self) -> usize {
        self.r0 + self.r * (self.n - self.n0)
    }
}

/// Average degree of a BA graph: `2r + 2r0/n - 2 n0 r / n`.
pub fn expected_avg_degree(n: usize, n0: usize, r0: usize, r: usize) -> f64 {
    let (n, n0, r0, r) = (n as f64, n0 as f64, r0 as f64, r as f64);
    2.0 * r + 2.0 * r0 / n - 2.0 * n0 * r / n
}

fn pair_from_index(k: usize, n: usize) -> (usize, usize) {
    // row i holds pairs (i, i+1..n); n-1-i of them
    let mut i = 0;
    let mut rest = k;
    while rest >= n - 1 - i {
        rest -= n - 1 - i;
        i += 1;
    }
    (i, i + 1 + rest)
}

/// Edges of a BA graph on nodes `offset..offset + n`.
fn ba_edges(p: &BaParams, rng: &mut Rng, offset: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(p.expected_edge_count());
    // each edge contributes both endpoints; uniform draws are degree-proportional
    let mut endpoints: Vec<usize> = Vec::with_capacity(2 * p.expected_edge_count());
    let mut degree = vec![0usize; p.n];

    let pairs = p.n0 * (p.n0 - 1) / 2;
    let mut seed_edges: Vec<(usize, usize)> = index::sample(rng, pairs, p.r0)
        .into_iter()
        .map(|k| pair_from_index(k, p.n0))
        .collect();
    seed_edges.sort_unstable();
    for (u, v) in seed_edges {
        edges.push((u, v));
        endpoints.extend([u, v]);
        degree[u] += 1;
        degree[v] += 1;
    }

    let mut targets = Vec::with_capacity(p.r);
    for u in p.n0..p.n {
        targets.clear();
        let positive = degree[..u].iter().filter(|&&d| d > 0).count();
        if positive >= p.r {
            while targets.len() < p.r {
                let t = endpoints[rng.random_range(0..endpoints.len())];
                if !targets.contains(&t) {
                    targets.push(t);
                }
            }
        } else {
            targets.extend((0..u).filter(|&i| degree[i] > 0));
            let zero: Vec<usize> = (0..u).filter(|&i| degree[i] == 0).collect();
            for k in index::sample(rng, zero.len(), p.r - positive) {
                targets.push(zero[k]);
            }
        }
        for &t in &targets {
            edges.push((t, u));
            endpoints.extend([t, u]);
            degree[t] += 1;
            degree[u] += 1;
        }
    }
    edges
        .into_iter()
        .map(|(a, b)| (a + offset, b + offset))
        .collect()
}

/// Preferential attachment without replacement: each arriving node links to
/// `r` distinct existing nodes drawn proportionally to their degree.
pub fn generate_ba(p: &BaParams) -> Result<Graph> {
    p.validate()?;
    let mut rng = rng_from_seed(p.seed);
    Graph::from_edges(p.n, ba_edges(p, &mut rng, 0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbbamParams {
    pub block_sizes: Vec<usize>,
    pub r_per_block: Vec<usize>,
    /// Symmetric `K x K` cross-block edge probabilities; the diagonal is unused.
    pub inter_p: Vec<Vec<f64>>,
    /// Seed-graph size per block; defaults to `max(r, 5)`.
    pub n0: Option<usize>,
    /// Seed-graph edges per block; defaults to `n0 - 1`.
    pub r0: Option<usize>,
    pub seed: u64,
}

impl SbbamParams {
    /// Same cross-block probability `p` for every pair of blocks.
    pub fn uniform(block_sizes: Vec<usize>, r_per_block: Vec<usize>, p: f64, seed: u64) -> Self {
        let k = block_sizes.len();
        Self {
            block_sizes,
            r_per_block,
            inter_p: vec![vec![p; k]; k],
            n0: None,
            r0: None,
            seed,
        }
    }

    /// The three 100-node blocks with `r = 5, 10, 15` and `p = 0.1`.
    pub fn benchmark(seed: u64) -> Self {
        Self::uniform(vec![100, 100, 100], vec![5, 10, 15], 0.1, seed)
    }

    pub fn node_count(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    /// BA parameters of block `b` after applying defaults.
    pub fn block_params(&self, b: usize) -> BaParams {
        let r = self.r_per_block[b];
        let n0 = self.n0.unwrap_or(r.max(5));
        BaParams {
            n: self.block_sizes[b],
            n0,
            r0: self.r0.unwrap_or(n0.saturating_sub(1)),
            r,
            seed: split(self.seed, b as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.block_sizes.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one block".into()));
        }
        if self.r_per_block.len() != k {
            return Err(Error::InvalidArgument(format!(
                "{} blocks but {} attachment counts",
                k,
                self.r_per_block.len()
            )));
        }
        if self.inter_p.len() != k || self.inter_p.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidArgument(format!(
                "cross-block probabilities must be {k}x{k}"
            )));
        }
        for i in 0..k {
            for j in 0..k {
                let p = self.inter_p[i][j];
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!(
                        "probability p[{i}][{j}] = {p} outside [0, 1]"
                    )));
                }
                if i != j && p != self.inter_p[j][i] {
                    return Err(Error::InvalidArgument(format!(
                        "cross-block probabilities are not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        for b in 0..k {
            self.block_params(b).validate().map_err(|e| {
                Error::InvalidArgument(format!("block {b}: {e}"))
            })?;
        }
        Ok(())
    }
}

/// BA blocks on consecutive node ranges plus independent Bernoulli edges
/// between blocks. Returns the graph and the block membership.
pub fn generate_sbbam(p: &SbbamParams) -> Result<(Graph, Partition)> {
    p.validate()?;
    let k = p.block_sizes.len();
    let mut starts = Vec::with_capacity(k);
    let mut edges = Vec::new();
    let mut offset = 0;
    for b in 0..k {
        starts.push(offset);
        let bp = p.block_params(b);
        let mut rng = rng_from_seed(bp.seed);
        edges.extend(ba_edges(&bp, &mut rng, offset));
        offset += bp.n;
    }
    let mut rng = rng_from_seed(split(p.seed, k as u64));
    for i in 0..k {
        for j in i + 1..k {
            let prob = p.inter_p[i][j];
            if prob == 0.0 {
                continue;
            }
            for u in starts[i]..starts[i] + p.block_sizes[i] {
                for v in starts[j]..starts[j] + p.block_sizes[j] {
                    if rng.random_bool(prob) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    let graph = Graph::from_edges(offset, edges)?;
    Ok((graph, Partition::from_block_sizes(&p.block_sizes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    #[test]
    fn pair_indexing_covers_all_pairs() {
        let n = 6;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|k| pair_from_index(k, n)).collect();
        let want: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        assert_eq!(pairs, want);
    }

    #[test]
    fn edge_count_and_average_degree() {
        let p = BaParams {
            n: 100,
            n0: 5,
            r0: 3,
            r: 5,
            seed: 11,
        };
        let g = generate_ba(&p).unwrap();
        assert_eq!(g.edge_count(), 478);
        let avg = 2.0 * g.edge_count() as f64 / 100.0;
        assert!((avg - 9.56).abs() < 1e-12);
        assert!((expected_avg_degree(100, 5, 3, 5) - 9.56).abs() < 1e-12);
        assert!((expected_avg_degree(6, 5, 10, 1) - 11.0 / 3.0).abs() < 1e-12);
        let big = expected_avg_degree(1_000_000, 5, 0, 5);
        assert!((big - 10.0).abs() < 1e-3 * 10.0);
    }

    #[test]
    fn smallest_case_and_determinism() {
        let p = BaParams {
            n: 4,
            n0: 3,
            r0: 0,
            r: 1,
            seed: 5,
        };
        assert_eq!(generate_ba(&p).unwrap().edge_count(), 1);
        let p = BaParams {
            n: 300,
            n0: 6,
            r0: 4,
            r: 3,
            seed: 99,
        };
        assert_eq!(generate_ba(&p).unwrap(), generate_ba(&p).unwrap());
        let other = BaParams { seed: 100, ..p };
        assert_ne!(generate_ba(&p).unwrap(), generate_ba(&other).unwrap());
    }

    #[test]
    fn validation() {
        let ok = BaParams {
            n: 10,
            n0: 4,
            r0: 6,
            r: 4,
            seed: 0,
        };
        assert!(ok.validate().is_ok());
        assert!(BaParams { r0: 7, ..ok }.validate().is_err());
        assert!(BaParams { r: 5, ..ok }.validate().is_err());
        assert!(BaParams { r: 0, ..ok }.validate().is_err());
        assert!(BaParams { n0: 10, ..ok }.validate().is_err());
    }

    #[test]
    fn sbbam_degenerate_cases() {
        let (g, truth) = generate_sbbam(&SbbamParams::uniform(vec![50], vec![3], 0.5, 1)).unwrap();
        assert_eq!(truth.k(), 1);
        let bp = SbbamParams::uniform(vec![50], vec![3], 0.5, 1).block_params(0);
        assert_eq!(g, generate_ba(&bp).unwrap());

        let (g, truth) = generate_sbbam(&SbbamParams::uniform(vec![30, 40], vec![2, 3], 0.0, 2)).unwrap();
        assert_eq!(connected_components(&g).component_count, 2);
        assert_eq!(truth.sizes(), vec![30, 40]);
        assert!(g.edges().all(|(u, v)| truth.labels()[u] == truth.labels()[v]));
    }

    #[test]
    fn sbbam_cross_edges_follow_binomial() {
        let p = SbbamParams::benchmark(3);
        let (g, truth) = generate_sbbam(&p).unwrap();
        let l = truth.labels();
        let mut cross = [[0usize; 3]; 3];
        for (u, v) in g.edges() {
            if l[u] != l[v] {
                cross[l[u].min(l[v])][l[u].max(l[v])] += 1;
            }
        }
        let sd = (10_000.0f64 * 0.1 * 0.9).sqrt();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert!((cross[i][j] as f64 - 1000.0).abs() < 4.0 * sd, "{:?}", cross);
        }
        let within: usize = (0..3).map(|b| p.block_params(b).expected_edge_count()).sum();
        assert_eq!(g.edge_count(), within + cross[0][1] + cross[0][2] + cross[1][2]);
    }
}
