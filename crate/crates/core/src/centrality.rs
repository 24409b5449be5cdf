//! Node centralities and the diagonal matrices built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

pub const DEFAULT_WALK_LENGTH: u32 = 2;

/// Which centrality to compute, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Centrality {
    Degree,
    KCore,
    PageRank(PageRankConfig),
    WalkCount { length: u32 },
}

impl Centrality {
    pub fn pagerank() -> Self {
        Centrality::PageRank(PageRankConfig::default())
    }

    pub fn walks() -> Self {
        Centrality::WalkCount {
            length: DEFAULT_WALK_LENGTH,
        }
    }

    /// The four centralities with default parameters.
    pub fn all_default() -> [Centrality; 4] {
        [
            Centrality::Degree,
            Centrality::KCore,
            Centrality::pagerank(),
            Centrality::walks(),
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Centrality::Degree => "degree",
            Centrality::KCore => "kcore",
            Centrality::PageRank(_) => "pagerank",
            Centrality::WalkCount { .. } => "walks",
        }
    }

    pub fn compute(&self, g: &Graph) -> Result<CentralityVector> {
        match *self {
            Centrality::Degree => Ok(degree_vector(g)),
            Centrality::KCore => Ok(kcore_numbers(g)),
            Centrality::PageRank(cfg) => pagerank(g, cfg),
            Centrality::WalkCount { length } => walk_counts(g, length),
        }
    }
}

impl fmt::Display for Centrality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Centrality::WalkCount { length } => write!(f, "walks(l={length})"),
            Centrality::PageRank(c) => write!(f, "pagerank(d={})", c.damping),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Centrality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "degree" => Ok(Centrality::Degree),
            "kcore" | "k-core" | "core" => Ok(Centrality::KCore),
            "pagerank" | "pr" => Ok(Centrality::pagerank()),
            "walks" | "walk" | "walkcount" => Ok(Centrality::walks()),
            other => Err(Error::InvalidArgument(format!(
                "unknown centrality '{other}' (expected degree, kcore, pagerank or walks)"
            ))),
        }
    }
}

/// Per-node centrality values tagged with the centrality that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityVector {
    pub kind: Centrality,
    pub values: Vec<f64>,
}

pub fn degree_vector(g: &Graph) -> CentralityVector {
    CentralityVector {
        kind: Centrality::Degree,
        values: crate::graph::degrees(g),
    }
}

/// Core numbers by bucket peeling in `O(n + m)`.
pub fn kcore_numbers(g: &Graph) -> CentralityVector {
    let n = g.node_count();
    let mut deg: Vec<usize> = (0..n).map(|i| g.degree(i)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);

    // bin[d] = start of the degree-d block in `order`
    let mut bin = vec![0usize; max_deg + 2];
    for &d in &deg {
        bin[d + 1] += 1;
    }
    for d in 1..bin.len() {
        bin[d] += bin[d - 1];
    }
    let mut pos = vec![0usize; n];
    let mut order = vec![0usize; n];
    let mut next = bin.clone();
    for v in 0..n {
        pos[v] = next[deg[v]];
        order[pos[v]] = v;
        next[deg[v]] += 1;
    }

    for i in 0..n {
        let v = order[i];
        for &u in g.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }

    CentralityVector {
        kind: Centrality::KCore,
        values: deg.into_iter().map(|d| d as f64).collect(),
    }
}

/// PageRank of the uniform random walk on the undirected graph by power
/// iteration. Mass sitting on isolated nodes is spread uniformly.
pub fn pagerank(g: &Graph, cfg: PageRankConfig) -> Result<CentralityVector> {
    if !(cfg.damping > 0.0 && cfg.damping < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "damping must lie in (0, 1), got {}",
            cfg.damping
        )));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(CentralityVector {
            kind: Centrality::PageRank(cfg),
            values: Vec::new(),
        });
    }
    let nf = n as f64;
    let inv_deg: Vec<f64> = (0..n)
        .map(|i| match g.degree(i) {
            0 => 0.0,
            d => 1.0 / d as f64,
        })
        .collect();
    let mut x = vec![1.0 / nf; n];
    let mut share = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_iter {
        let mut dangling = 0.0;
        for i in 0..n {
            share[i] = x[i] * inv_deg[i];
            if g.degree(i) == 0 {
                dangling += x[i];
            }
        }
        let base = (1.0 - cfg.damping) / nf + cfg.damping * dangling / nf;
        g.adjacency_apply(&share, &mut next);
        residual = 0.0;
        for i in 0..n {
            let v = base + cfg.damping * next[i];
            residual += (v - x[i]).abs();
            x[i] = v;
        }
        // Renormalize against drift so the output is a probability vector.
        let total: f64 = x.iter().sum();
        x.iter_mut().for_each(|v| *v /= total);
        if residual < cfg.tol {
            return Ok(CentralityVector {
                kind: Centrality::PageRank(cfg),
                values: x,
            });
        }
    }
    Err(Error::PageRankNotConverged {
        iterations: cfg.max_iter,
        residual,
    })
}

/// `(A^length 1)[i]` with exact integer accumulation.
pub fn walk_counts(g: &Graph, length: u32) -> Result<CentralityVector> {
    if length == 0 {
        return Err(Error::InvalidArgument("walk length must be at least 1".into()));
    }
    let n = g.node_count();
    let mut counts = vec![1u64; n];
    let mut next = vec![0u64; n];
    for step in 1..=length {
        for i in 0..n {
            let mut acc = 0u64;
            for &j in g.neighbors(i) {
                acc = acc
                    .checked_add(counts[j])
                    .ok_or(Error::WalkCountOverflow { length: step, node: i })?;
            }
            next[i] = acc;
        }
        std::mem::swap(&mut counts, &mut next);
    }
    Ok(CentralityVector {
        kind: Centrality::WalkCount { length },
        values: counts.into_iter().map(|c| c as f64).collect(),
    })
}

/// Strictly positive diagonal of a centrality matrix `V`, with cached logs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalCentrality {
    kind: Option<Centrality>,
    entries: Vec<f64>,
    #[serde(skip)]
    ln_entries: Vec<f64>,
}

impl DiagonalCentrality {
    /// Wrap raw diagonal entries; all must be finite and strictly positive.
    pub fn from_entries(entries: Vec<f64>) -> Result<Self> {
        Self::checked(None, entries)
    }

    fn checked(kind: Option<Centrality>, entries: Vec<f64>) -> Result<Self> {
        if let Some((node, &value)) = entries
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveCentrality { node, value });
        }
        let ln_entries = entries.iter().map(|v| v.ln()).collect();
        Ok(Self {
            kind,
            entries,
            ln_entries,
        })
    }

    pub fn kind(&self) -> Option<Centrality> {
        self.kind
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn ln_entries(&self) -> &[f64] {
        &self.ln_entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry-wise `v_i^e`.
    pub fn powf(&self, e: f64) -> Vec<f64> {
        if e == 0.0 {
            return vec![1.0; self.entries.len()];
        }
        if e == 1.0 {
            return self.entries.clone();
        }
        if e == -1.0 {
            return self.entries.iter().map(|v| 1.0 / v).collect();
        }
        self.ln_entries.iter().map(|l| (e * l).exp()).collect()
    }

    pub fn min(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.entries.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().sum()
    }
}

/// Diagonal matrix `V` for a centrality vector: identity transform for
/// degree, core and walk counts; `1 / (1 - PR(i))` for PageRank.
pub fn build_diagonal(c: &CentralityVector) -> Result<DiagonalCentrality> {
    let entries = match c.kind {
        Centrality::PageRank(_) => c
            .values
            .iter()
            .enumerate()
            .map(|(node, &p)| {
                if !(0.0..1.0).contains(&p) {
                    Err(Error::NonPositiveCentrality {
                        node,
                        value: 1.0 - p,
                    })
                } else {
                    Ok(1.0 / (1.0 - p))
                }
            })
            .collect::<Result<Vec<_>>>()?,
        _ => c.values.clone(),
    };
    DiagonalCentrality::checked(Some(c.kind), entries)
}

/// Compute a centrality and its diagonal in one go.
pub fn diagonal_for(g: &Graph, kind: Centrality) -> Result<DiagonalCentrality> {
    build_diagonal(&kind.compute(g)?)
}
