use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::centrality::DiagonalCentrality;
use crate::cgso::{build_parametrized, combine, CgsoOperator, CgsoParams};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{dot, DenseMatrix};
use crate::rng::{rng_from_seed, split};

/// Order of the seven operator scalars in gradient arrays.
pub const PARAM_NAMES: [&str; 7] = ["m1", "m2", "m3", "e1", "e2", "e3", "a"];

/// One `Φ(A, V)` term: a fixed centrality and learnable scalars.
#[derive(Debug, Clone)]
pub struct OperatorTerm {
    pub centrality: DiagonalCentrality,
    pub params: CgsoParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Architecture {
    /// `H <- ReLU(Φ dropout(H) W)` per layer, no activation on the last.
    Cgcn,
    /// `Φ^hops X W`.
    Csgc { hops: usize },
}

#[derive(Debug, Clone)]
pub struct Model {
    pub architecture: Architecture,
    pub weights: Vec<DenseMatrix>,
    pub terms: Vec<OperatorTerm>,
    pub dropout: f64,
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: DenseMatrix,
    /// Layer inputs before dropout (CGCN) or the propagated features `Φ^k X`
    /// for `k = 0..hops` (CSGC).
    pub hidden: Vec<DenseMatrix>,
    dropped: Vec<DenseMatrix>,
    masks: Vec<Option<Vec<f64>>>,
    messages: Vec<DenseMatrix>,
    pre_activations: Vec<DenseMatrix>,
}

/// Gradients in model layout; `operator[t][k]` is the derivative with
/// respect to scalar `PARAM_NAMES[k]` of term `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<DenseMatrix>,
    pub operator: Vec<[f64; 7]>,
}

fn glorot(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = rng_from_seed(seed);
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.random_range(-limit..limit)).collect();
    DenseMatrix::from_vec(rows, cols, data).expect("shape matches")
}

fn relu(m: &DenseMatrix) -> DenseMatrix {
    m.map(|x| x.max(0.0))
}

fn check_terms(terms: &[OperatorTerm]) -> Result<()> {
    if terms.is_empty() {
        return Err(Error::InvalidArgument("model needs at least one operator term".into()));
    }
    Ok(())
}

impl Model {
    /// CGCN with layer widths `dims` (`dims[0]` = input features, last =
    /// classes) and Glorot-uniform weights; layer `l` draws from `split(seed, l)`.
    pub fn cgcn(dims: &[usize], terms: Vec<OperatorTerm>, dropout: f64, seed: u64) -> Result<Self> {
        check_terms(&terms)?;
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidArgument(format!("invalid layer widths {dims:?}")));
        }
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::InvalidArgument(format!("dropout {dropout} outside [0, 1)")));
        }
        let weights = dims
            .windows(2)
            .enumerate()
            .map(|(l, w)| glorot(w[0], w[1], split(seed, l as u64)))
            .collect();
        Ok(Self {
            architecture: Architecture::Cgcn,
            weights,
            terms,
            dropout,
        })
    }

    /// CSGC with `hops` operator applications and one linear map.
    pub fn csgc(in_dim: usize, classes: usize, hops: usize, terms: Vec<OperatorTerm>, seed: u64) -> Result<Self> {
        check_terms(&terms)?;
        if hops == 0 || in_dim == 0 || classes == 0 {
            return Err(Error::InvalidArgument("CSGC needs hops, features and classes >= 1".into()));
        }
        Ok(Self {
            architecture: Architecture::Csgc { hops },
            weights: vec![glorot(in_dim, classes, split(seed, 0))],
            terms,
            dropout: 0.0,
        })
    }

    pub fn operator<'g>(&self, g: &'g Graph) -> Result<CgsoOperator<'g>> {
        let mut op = build_parametrized(g, &self.terms[0].centrality, self.terms[0].params)?;
        for t in &self.terms[1..] {
            op = combine(&op, &build_parametrized(g, &t.centrality, t.params)?)?;
        }
        Ok(op)
    }

    fn check_input(&self, g: &Graph, x: &DenseMatrix) -> Result<()> {
        if x.rows() != g.node_count() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} nodes",
                x.rows(),
                g.node_count()
            )));
        }
        if x.cols() != self.weights[0].rows() {
            return Err(Error::Shape(format!(
                "{} input features, model expects {}",
                x.cols(),
                self.weights[0].rows()
            )));
        }
        Ok(())
    }

    /// Forward pass; dropout is active only when `train` is set, with the
    /// mask of layer `l` drawn from `split(seed, l)`.
    pub fn forward(&self, g: &Graph, x: &DenseMatrix, train: bool, seed: u64) -> Result<ForwardPass> {
        self.check_input(g, x)?;
        let op = self.operator(g)?;
        match self.architecture {
            Architecture::Cgcn => self.forward_cgcn(&op, x, train, seed),
            Architecture::Csgc { hops } => {
                let mut hidden = vec![x.clone()];
                for k in 0..hops {
                    let next = op.apply_matrix(&hidden[k])?;
                    if !next.is_finite() {
                        return Err(Error::NonFinite(format!("propagation step {}", k + 1)));
                    }
                    hidden.push(next);
                }
                let logits = hidden[hops].matmul(&self.weights[0])?;
                Ok(ForwardPass {
                    logits,
                    hidden,
                    dropped: Vec::new(),
                    masks: Vec::new(),
                    messages: Vec::new(),
                    pre_activations: Vec::new(),
                })
            }
        }
    }

    fn forward_cgcn(&self, op: &CgsoOperator, x: &DenseMatrix, train: bool, seed: u64) -> Result<ForwardPass> {
        let layers = self.weights.len();
        let mut hidden = Vec::with_capacity(layers);
        let mut dropped = Vec::with_capacity(layers);
        let mut masks = Vec::with_capacity(layers);
        let mut messages = Vec::with_capacity(layers);
        let mut pre_activations = Vec::with_capacity(layers);
        let mut h = x.clone();
        for (l, w) in self.weights.iter().enumerate() {
            let (hd, mask) = if train && self.dropout > 0.0 {
                let mut rng = rng_from_seed(split(seed, l as u64));
                let keep = 1.0 - self.dropout;
                let mask: Vec<f64> = (0..h.rows() * h.cols())
                    .map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect();
                let mut hd = h.clone();
                for (v, m) in hd.as_mut_slice().iter_mut().zip(&mask) {
                    *v *= m;
                }
                (hd, Some(mask))
            } else {
                (h.clone(), None)
            };
            let m = op.apply_matrix(&hd)?;
            let z = m.matmul(w)?;
            if !z.is_finite() {
                return Err(Error::NonFinite(format!("activations of layer {l}")));
            }
            let next = if l + 1 < layers { relu(&z) } else { z.clone() };
            hidden.push(h);
            dropped.push(hd);
            masks.push(mask);
            messages.push(m);
            pre_activations.push(z);
            h = next;
        }
        Ok(ForwardPass {
            logits: h,
            hidden,
            dropped,
            masks,
            messages,
            pre_activations,
        })
    }

    /// Logits without dropout.
    pub fn predict(&self, g: &Graph, x: &DenseMatrix) -> Result<DenseMatrix> {
        Ok(self.forward(g, x, false, 0)?.logits)
    }

    /// Masked mean softmax cross-entropy.
    pub fn loss(&self, g: &Graph, x: &DenseMatrix, labels: &[usize], mask: &[bool], train: bool, seed: u64) -> Result<f64> {
        let fwd = self.forward(g, x, train, seed)?;
        Ok(cross_entropy(&fwd.logits, labels, mask)?.0)
    }

    /// Loss and reverse-mode gradients for every weight and operator scalar.
    pub fn loss_and_grads(
        &self,
        g: &Graph,
        x: &DenseMatrix,
        labels: &[usize],
        mask: &[bool],
        train: bool,
        seed: u64,
    ) -> Result<(f64, Gradients)> {
        let fwd = self.forward(g, x, train, seed)?;
        let (loss, g_logits) = cross_entropy(&fwd.logits, labels, mask)?;
        let op = self.operator(g)?;
        let op_t = op.transpose();
        let mut operator = vec![[0.0; 7]; self.terms.len()];
        let weights = match self.architecture {
            Architecture::Cgcn => {
                let layers = self.weights.len();
                let mut grads = vec![DenseMatrix::zeros(0, 0); layers];
                let mut g_z = g_logits;
                for l in (0..layers).rev() {
                    grads[l] = fwd.messages[l].t_matmul(&g_z)?;
                    let g_m = g_z.matmul_t(&self.weights[l])?;
                    accumulate_operator_grads(&op, &fwd.dropped[l], &g_m, &mut operator);
                    if l == 0 {
                        break;
                    }
                    let mut g_h = op_t.apply_matrix(&g_m)?;
                    if let Some(mask) = &fwd.masks[l] {
                        for (v, m) in g_h.as_mut_slice().iter_mut().zip(mask) {
                            *v *= m;
                        }
                    }
                    // through the ReLU of the previous layer
                    for (v, &z) in g_h.as_mut_slice().iter_mut().zip(fwd.pre_activations[l - 1].as_slice()) {
                        if z <= 0.0 {
                            *v = 0.0;
                        }
                    }
                    g_z = g_h;
                }
                grads
            }
            Architecture::Csgc { hops } => {
                let grad_w = fwd.hidden[hops].t_matmul(&g_logits)?;
                let mut g_p = g_logits.matmul_t(&self.weights[0])?;
                for k in (0..hops).rev() {
                    accumulate_operator_grads(&op, &fwd.hidden[k], &g_p, &mut operator);
                    if k > 0 {
                        g_p = op_t.apply_matrix(&g_p)?;
                    }
                }
                vec![grad_w]
            }
        };
        Ok((loss, Gradients { weights, operator }))
    }
}

/// Loss and `d loss / d logits` of the masked mean softmax cross-entropy.
fn cross_entropy(logits: &DenseMatrix, labels: &[usize], mask: &[bool]) -> Result<(f64, DenseMatrix)> {
    let (n, c) = logits.shape();
    if labels.len() != n || mask.len() != n {
        return Err(Error::Shape(format!(
            "{} labels and {} mask entries for {n} nodes",
            labels.len(),
            mask.len()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::InvalidArgument("loss mask selects no nodes".into()));
    }
    let mut grad = DenseMatrix::zeros(n, c);
    let mut loss = 0.0;
    for i in (0..n).filter(|&i| mask[i]) {
        let y = labels[i];
        if y >= c {
            return Err(Error::InvalidArgument(format!("label {y} of node {i} >= {c} classes")));
        }
        let row = logits.row(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|z| (z - max).exp()).sum();
        let lse = max + sum.ln();
        loss += lse - row[y];
        for (j, gij) in grad.row_mut(i).iter_mut().enumerate() {
            let p = (row[j] - lse).exp();
            *gij = (p - if j == y { 1.0 } else { 0.0 }) / count as f64;
        }
    }
    Ok((loss / count as f64, grad))
}

/// Add the derivatives of `<G, Φ X>` with respect to each term's scalars.
fn accumulate_operator_grads(op: &CgsoOperator, x: &DenseMatrix, g_m: &DenseMatrix, out: &mut [[f64; 7]]) {
    let graph = op.graph();
    let n = x.rows();
    let d = x.cols();
    let mut buf = vec![0.0; d];
    for (t, term) in op.terms().iter().enumerate() {
        let p = term.params();
        let (s1, s2, s3) = (term.v_e1(), term.v_e2(), term.v_e3());
        let ln_v = term.centrality().ln_entries();
        let mut acc = [0.0; 7];
        for i in 0..n {
            let gi = g_m.row(i);
            let xi = x.row(i);
            let gx = dot(gi, xi);

            // Y_i = ((A + aI) S3 X)_i
            buf.iter_mut().for_each(|b| *b = 0.0);
            for &j in graph.neighbors(i) {
                for (b, &xj) in buf.iter_mut().zip(x.row(j)) {
                    *b += s3[j] * xj;
                }
            }
            for (b, &xv) in buf.iter_mut().zip(xi) {
                *b += p.a * s3[i] * xv;
            }
            let gy = dot(gi, &buf);

            // U_i = ((A + aI) S2 G)_i
            buf.iter_mut().for_each(|b| *b = 0.0);
            for &j in graph.neighbors(i) {
                for (b, &gj) in buf.iter_mut().zip(g_m.row(j)) {
                    *b += s2[j] * gj;
                }
            }
            for (b, &gv) in buf.iter_mut().zip(gi) {
                *b += p.a * s2[i] * gv;
            }
            let ux = dot(&buf, xi);

            acc[0] += s1[i] * gx;
            acc[1] += s2[i] * gy;
            acc[2] += gx;
            acc[3] += p.m1 * s1[i] * ln_v[i] * gx;
            acc[4] += p.m2 * s2[i] * ln_v[i] * gy;
            acc[5] += p.m2 * s3[i] * ln_v[i] * ux;
            acc[6] += p.m2 * s2[i] * s3[i] * gx;
        }
        for (o, a) in out[t].iter_mut().zip(acc) {
            *o += a;
        }
    }
}

/// `(1/n) Σ_{(i,j) ∈ E} || h_i / sqrt(1 + d_i) - h_j / sqrt(1 + d_j) ||²`
/// over unordered edges.
pub fn dirichlet_energy(g: &Graph, h: &DenseMatrix) -> Result<f64> {
    let n = g.node_count();
    if h.rows() != n {
        return Err(Error::Shape(format!("{} rows for {n} nodes", h.rows())));
    }
    if n == 0 {
        return Ok(0.0);
    }
    let scale: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + g.degree(i) as f64).sqrt()).collect();
    let total: f64 = g
        .edges()
        .map(|(i, j)| {
            h.row(i)
                .iter()
                .zip(h.row(j))
                .map(|(a, b)| (a * scale[i] - b * scale[j]).powi(2))
                .sum::<f64>()
        })
        .sum();
    Ok(total / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{diagonal_for, Centrality};
    use crate::cgso::Preset;

    fn k3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn term(g: &Graph, kind: Centrality, params: CgsoParams) -> OperatorTerm {
        OperatorTerm {
            centrality: diagonal_for(g, kind).unwrap(),
            params,
        }
    }

    #[test]
    fn identity_weights_give_the_operator() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)]).unwrap();
        let mut model = Model::cgcn(&[4, 4], vec![term(&g, Centrality::Degree, Preset::Adjacency.params())], 0.0, 1).unwrap();
        model.weights[0] = DenseMatrix::identity(4);
        let logits = model.predict(&g, &DenseMatrix::identity(4)).unwrap();
        assert_eq!(logits.as_slice(), g.dense_adjacency().as_slice());
    }

    #[test]
    fn zero_operator_zero_logits() {
        let g = k3();
        let model = Model::cgcn(&[3, 5, 2], vec![term(&g, Centrality::Degree, CgsoParams::ZERO)], 0.5, 3).unwrap();
        let x = DenseMatrix::from_vec(3, 3, vec![1.0, -2.0, 0.5, 0.3, 0.0, 1.0, 2.0, 1.0, -1.0]).unwrap();
        let logits = model.forward(&g, &x, true, 9).unwrap().logits;
        assert!(logits.as_slice().iter().all(|&v| v == 0.0));
        let labels = [0, 1, 1];
        let loss = model.loss(&g, &x, &labels, &[true; 3], false, 0).unwrap();
        assert!((loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn dense_oracle_two_layers() {
        let g = k3();
        let p = CgsoParams::new(0.4, 0.9, -0.3, 0.5, -0.7, 0.2, 0.6);
        let model = Model::cgcn(&[2, 4, 3], vec![term(&g, Centrality::pagerank(), p)], 0.0, 17).unwrap();
        let x = DenseMatrix::from_vec(3, 2, vec![0.3, -1.0, 2.0, 0.5, -0.4, 1.1]).unwrap();
        let logits = model.predict(&g, &x).unwrap();

        // Φ entry by entry from the definition
        let v = model.terms[0].centrality.entries().to_vec();
        let mut phi = DenseMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                let a = if i == j { p.a } else { 1.0 };
                phi[(i, j)] = p.m2 * v[i].powf(p.e2) * a * v[j].powf(p.e3);
            }
            phi[(i, i)] += p.m1 * v[i].powf(p.e1) + p.m3;
        }
        let h1 = phi.matmul(&x).unwrap().matmul(&model.weights[0]).unwrap().map(|z| z.max(0.0));
        let want = phi.matmul(&h1).unwrap().matmul(&model.weights[1]).unwrap();
        for (a, b) in logits.as_slice().iter().zip(want.as_slice()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn csgc_is_repeated_application() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = term(&g, Centrality::Degree, Preset::Adjacency.params());
        let x = DenseMatrix::from_vec(4, 2, vec![1.0, 0.0, 0.0, 1.0, 2.0, -1.0, 0.5, 0.5]).unwrap();
        let mut one = Model::csgc(2, 2, 1, vec![t.clone()], 0).unwrap();
        one.weights[0] = DenseMatrix::identity(2);
        let a = DenseMatrix::from_vec(4, 4, g.dense_adjacency()).unwrap();
        assert_eq!(one.predict(&g, &x).unwrap(), a.matmul(&x).unwrap());
        let mut two = Model::csgc(2, 2, 2, vec![t], 0).unwrap();
        two.weights[0] = DenseMatrix::identity(2);
        assert_eq!(two.predict(&g, &x).unwrap(), a.matmul(&a.matmul(&x).unwrap()).unwrap());
    }

    #[test]
    fn m3_gradient_matches_explicit_identity_path() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let x = DenseMatrix::from_vec(5, 2, (0..10).map(|k| (k as f64 * 0.7).cos()).collect()).unwrap();
        let labels = [0, 1, 0, 1, 1];
        let mask = [true, true, false, true, true];
        let p = CgsoParams::new(0.2, 0.8, 0.5, 0.3, -0.5, -0.2, 0.1);
        let model = Model::csgc(2, 2, 1, vec![term(&g, Centrality::KCore, p)], 5).unwrap();
        let (_, grads) = model.loss_and_grads(&g, &x, &labels, &mask, false, 0).unwrap();
        // logits = (Φ0 + m3 I) X W, so dL/dm3 = <dL/dlogits, X W>
        let logits = model.predict(&g, &x).unwrap();
        let (_, g_logits) = cross_entropy(&logits, &labels, &mask).unwrap();
        let xw = x.matmul(&model.weights[0]).unwrap();
        assert!((grads.operator[0][2] - g_logits.frobenius_dot(&xw)).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_examples() {
        // 3-regular graph, constant rows
        let cube = Graph::from_edges(
            8,
            [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)],
        )
        .unwrap();
        let h = DenseMatrix::from_vec(8, 2, [1.5, -2.0].repeat(8)).unwrap();
        assert_eq!(dirichlet_energy(&cube, &h).unwrap(), 0.0);

        let two = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let ind = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(dirichlet_energy(&two, &ind).unwrap(), 0.0);

        let k2 = Graph::from_edges(2, [(0, 1)]).unwrap();
        let h = DenseMatrix::identity(2);
        // ||(1,0)/√2 - (0,1)/√2||² = 1, divided by n = 2
        assert!((dirichlet_energy(&k2, &h).unwrap() - 0.5).abs() < 1e-15);
    }
}
