//! Parametrized centrality graph shift operators
//!
//! `Φ(A, V) = m1 V^e1 + m2 V^e2 (A + a I) V^e3 + m3 I`
//!
//! applied matrix-free: two diagonal scalings and one sparse product per
//! vector. Dense materialization exists only for spectral analysis.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::centrality::DiagonalCentrality;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;

pub const DEFAULT_DENSE_LIMIT: usize = 5000;
pub const DENSE_LIMIT_ENV: &str = "CGSO_DENSE_LIMIT";

/// Node cap for dense materialization and dense eigensolves.
/// `CGSO_DENSE_LIMIT` overrides the default.
pub fn dense_limit() -> usize {
    std::env::var(DENSE_LIMIT_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_LIMIT)
}

/// The seven scalars of the operator family.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CgsoParams {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub a: f64,
}

impl CgsoParams {
    pub const ZERO: CgsoParams = CgsoParams::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);

    pub const fn new(m1: f64, m2: f64, m3: f64, e1: f64, e2: f64, e3: f64, a: f64) -> Self {
        Self {
            m1,
            m2,
            m3,
            e1,
            e2,
            e3,
            a,
        }
    }

    /// Only the middle term: `V^e2 A V^e3`.
    pub const fn middle(e2: f64, e3: f64) -> Self {
        Self::new(0.0, 1.0, 0.0, 0.0, e2, e3, 0.0)
    }

    /// `(m1, m2, m3, e1, e2, e3, a)`
    pub fn to_array(&self) -> [f64; 7] {
        [self.m1, self.m2, self.m3, self.e1, self.e2, self.e3, self.a]
    }

    pub fn from_array(p: [f64; 7]) -> Self {
        Self::new(p[0], p[1], p[2], p[3], p[4], p[5], p[6])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Parameters of `Φᵀ`: the outer exponents swap sides.
    pub fn transposed(&self) -> Self {
        Self {
            e2: self.e3,
            e3: self.e2,
            ..*self
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: CgsoParams = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("operator parameters: {e}")))?;
        if !p.is_finite() {
            return Err(Error::NonFinite("operator parameters".into()));
        }
        Ok(p)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }
}

impl fmt::Display for CgsoParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(m1={}, m2={}, m3={}, e1={}, e2={}, e3={}, a={})",
            self.m1, self.m2, self.m3, self.e1, self.e2, self.e3, self.a
        )
    }
}

/// Named initializations of the seven-tuple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Adjacency,
    Laplacian,
    SignlessLaplacian,
    RwLaplacian,
    SymLaplacian,
    NormalizedAdjacency,
    MeanAggregation,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::Adjacency,
        Preset::Laplacian,
        Preset::SignlessLaplacian,
        Preset::RwLaplacian,
        Preset::SymLaplacian,
        Preset::NormalizedAdjacency,
        Preset::MeanAggregation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Adjacency => "adjacency",
            Preset::Laplacian => "laplacian",
            Preset::SignlessLaplacian => "signless_laplacian",
            Preset::RwLaplacian => "rw_laplacian",
            Preset::SymLaplacian => "sym_laplacian",
            Preset::NormalizedAdjacency => "normalized_adjacency",
            Preset::MeanAggregation => "mean_aggregation",
        }
    }

    /// With `V = D`: `A`, `D - A`, `D + A`, `I - D^-1 A`,
    /// `I - D^-1/2 A D^-1/2`, `D^-1/2 (A + I) D^-1/2` and `D^-1 A`.
    pub fn params(self) -> CgsoParams {
        match self {
            Preset::Adjacency => CgsoParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
            Preset::Laplacian => CgsoParams::new(1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            Preset::SignlessLaplacian => CgsoParams::new(1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0),
            Preset::RwLaplacian => CgsoParams::new(0.0, -1.0, 1.0, 0.0, -1.0, 0.0, 0.0),
            Preset::SymLaplacian => CgsoParams::new(0.0, -1.0, 1.0, 0.0, -0.5, -0.5, 0.0),
            Preset::NormalizedAdjacency => CgsoParams::new(0.0, 1.0, 0.0, 0.0, -0.5, -0.5, 1.0),
            Preset::MeanAggregation => CgsoParams::new(0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0),
        }
    }

    fn valid_names() -> String {
        Self::ALL.map(Preset::name).join(", ")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::UnknownPreset {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// Parameters of a named preset.
pub fn preset(name: &str) -> Result<CgsoParams> {
    Ok(name.parse::<Preset>()?.params())
}

/// One `Φ(A, V)` term with its diagonal powers precomputed.
#[derive(Debug, Clone)]
pub struct CgsoTerm {
    centrality: DiagonalCentrality,
    params: CgsoParams,
    v_e1: Vec<f64>,
    v_e2: Vec<f64>,
    v_e3: Vec<f64>,
}

impl CgsoTerm {
    fn new(centrality: DiagonalCentrality, params: CgsoParams) -> Result<Self> {
        if !params.is_finite() {
            return Err(Error::NonFinite(format!("operator parameters {params}")));
        }
        let v_e1 = centrality.powf(params.e1);
        let v_e2 = centrality.powf(params.e2);
        let v_e3 = centrality.powf(params.e3);
        if v_e1.iter().chain(&v_e2).chain(&v_e3).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "centrality powers for exponents {params}"
            )));
        }
        Ok(Self {
            centrality,
            params,
            v_e1,
            v_e2,
            v_e3,
        })
    }

    pub fn centrality(&self) -> &DiagonalCentrality {
        &self.centrality
    }

    pub fn params(&self) -> &CgsoParams {
        &self.params
    }

    pub fn v_e1(&self) -> &[f64] {
        &self.v_e1
    }

    pub fn v_e2(&self) -> &[f64] {
        &self.v_e2
    }

    pub fn v_e3(&self) -> &[f64] {
        &self.v_e3
    }

    fn apply_add(&self, g: &Graph, x: &[f64], y: &mut [f64], scratch: &mut [f64]) {
        let p = &self.params;
        for ((s, &xi), &w) in scratch.iter_mut().zip(x).zip(&self.v_e3) {
            *s = w * xi;
        }
        for i in 0..x.len() {
            let ax: f64 = g.neighbors(i).iter().map(|&j| scratch[j]).sum();
            y[i] += p.m1 * self.v_e1[i] * x[i]
                + p.m2 * self.v_e2[i] * (ax + p.a * scratch[i])
                + p.m3 * x[i];
        }
    }

    fn apply_matrix_add(&self, g: &Graph, h: &DenseMatrix, out: &mut DenseMatrix) {
        let p = &self.params;
        let d = h.cols();
        let mut acc = vec![0.0; d];
        for i in 0..h.rows() {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for &j in g.neighbors(i) {
                let w = self.v_e3[j];
                for (a, &hj) in acc.iter_mut().zip(h.row(j)) {
                    *a += w * hj;
                }
            }
            let self_w = p.a * self.v_e3[i];
            let diag = p.m1 * self.v_e1[i] + p.m3;
            let outer = p.m2 * self.v_e2[i];
            for ((o, &a), &hi) in out.row_mut(i).iter_mut().zip(&acc).zip(h.row(i)) {
                *o += diag * hi + outer * (a + self_w * hi);
            }
        }
    }
}

/// A single operator or a sum of two operators with independent parameters.
#[derive(Debug, Clone)]
pub struct CgsoOperator<'g> {
    graph: &'g Graph,
    terms: Vec<CgsoTerm>,
}

impl<'g> CgsoOperator<'g> {
    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn terms(&self) -> &[CgsoTerm] {
        &self.terms
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// `y = Φ x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.node_count();
        assert_eq!(x.len(), n, "input length must match node count");
        let mut y = vec![0.0; n];
        let mut scratch = vec![0.0; n];
        for term in &self.terms {
            term.apply_add(self.graph, x, &mut y, &mut scratch);
        }
        y
    }

    /// `Φ H` for an `n x d` feature matrix.
    pub fn apply_matrix(&self, h: &DenseMatrix) -> Result<DenseMatrix> {
        if h.rows() != self.node_count() {
            return Err(Error::Shape(format!(
                "operator on {} nodes applied to {} rows",
                self.node_count(),
                h.rows()
            )));
        }
        let mut out = DenseMatrix::zeros(h.rows(), h.cols());
        for term in &self.terms {
            term.apply_matrix_add(self.graph, h, &mut out);
        }
        Ok(out)
    }

    /// `Φᵀ`, which is again in the family with `e2` and `e3` swapped.
    pub fn transpose(&self) -> CgsoOperator<'g> {
        CgsoOperator {
            graph: self.graph,
            terms: self
                .terms
                .iter()
                .map(|t| CgsoTerm {
                    centrality: t.centrality.clone(),
                    params: t.params.transposed(),
                    v_e1: t.v_e1.clone(),
                    v_e2: t.v_e3.clone(),
                    v_e3: t.v_e2.clone(),
                })
                .collect(),
        }
    }

    /// Dense `n x n` matrix; refuses graphs above [`dense_limit`].
    pub fn materialize_dense(&self) -> Result<DenseMatrix> {
        let n = self.node_count();
        let limit = dense_limit();
        if n > limit {
            return Err(Error::DenseLimitExceeded { n, limit });
        }
        let mut m = DenseMatrix::zeros(n, n);
        for t in &self.terms {
            let p = &t.params;
            for i in 0..n {
                m[(i, i)] += p.m1 * t.v_e1[i] + p.m2 * p.a * t.v_e2[i] * t.v_e3[i] + p.m3;
                for &j in self.graph.neighbors(i) {
                    m[(i, j)] += p.m2 * t.v_e2[i] * t.v_e3[j];
                }
            }
        }
        Ok(m)
    }
}

fn check_lengths(g: &Graph, v: &DiagonalCentrality) -> Result<()> {
    if v.len() != g.node_count() {
        return Err(Error::Shape(format!(
            "centrality has {} entries for a graph on {} nodes",
            v.len(),
            g.node_count()
        )));
    }
    Ok(())
}

/// `Φ(A, V)` for the given seven-tuple.
pub fn build_parametrized<'g>(
    g: &'g Graph,
    v: &DiagonalCentrality,
    params: CgsoParams,
) -> Result<CgsoOperator<'g>> {
    check_lengths(g, v)?;
    Ok(CgsoOperator {
        graph: g,
        terms: vec![CgsoTerm::new(v.clone(), params)?],
    })
}

/// Markov averaging operator `V^-1 A`.
pub fn markov_operator<'g>(g: &'g Graph, v: &DiagonalCentrality) -> Result<CgsoOperator<'g>> {
    build_parametrized(g, v, Preset::MeanAggregation.params())
}

/// Sum of two operators on the same graph; each term keeps its parameters.
pub fn combine<'g>(op1: &CgsoOperator<'g>, op2: &CgsoOperator<'g>) -> Result<CgsoOperator<'g>> {
    if !(std::ptr::eq(op1.graph, op2.graph) || op1.graph == op2.graph) {
        return Err(Error::GraphMismatch);
    }
    let mut terms = op1.terms.clone();
    terms.extend(op2.terms.iter().cloned());
    Ok(CgsoOperator {
        graph: op1.graph,
        terms,
    })
}
