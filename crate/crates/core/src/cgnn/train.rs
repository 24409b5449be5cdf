use serde::{Deserialize, Serialize};

use crate::centrality::{diagonal_for, Centrality};
use crate::cgso::{CgsoParams, Preset};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::rng::{split, split_path};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::data::TrainData;
use super::model::{dirichlet_energy, Architecture, Model, OperatorTerm};

/// Indices of `e1, e2, e3` in the seven-tuple.
const EXPONENTS: [usize; 3] = [3, 4, 5];
/// Indices of `m1, m2, m3, a`.
const SCALARS: [usize; 4] = [0, 1, 2, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Rate for weights, `m1`, `m2`, `m3` and `a`.
    pub lr_weights: f64,
    /// Rate for `e1`, `e2`, `e3`.
    pub lr_exponents: f64,
    pub adam: AdamConfig,
    pub seed: u64,
    pub preset: Preset,
    /// Explicit initial seven-tuple; overrides `preset` when set.
    pub init_params: Option<CgsoParams>,
    pub architecture: Architecture,
    /// Hidden widths of a CGCN; ignored by CSGC.
    pub hidden: Vec<usize>,
    pub dropout: f64,
    /// One centrality, or two for the combined operator. The second term
    /// starts from the preset exponents with all `m` zeroed.
    pub centralities: Vec<Centrality>,
    /// Train the operator scalars; otherwise only the weights.
    pub learn_operator: bool,
    /// Record the Dirichlet energy of each layer output of the selected model.
    pub dirichlet_probe: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr_weights: 0.01,
            lr_exponents: 0.005,
            adam: AdamConfig::default(),
            seed: 0,
            preset: Preset::NormalizedAdjacency,
            init_params: None,
            architecture: Architecture::Cgcn,
            hidden: vec![64],
            dropout: 0.5,
            centralities: vec![Centrality::KCore],
            learn_operator: true,
            dirichlet_probe: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr_weights > 0.0 && self.lr_exponents > 0.0) {
            return Err(Error::InvalidArgument("learning rates must be positive".into()));
        }
        if self.centralities.is_empty() || self.centralities.len() > 2 {
            return Err(Error::InvalidArgument(format!(
                "expected one or two centralities, got {}",
                self.centralities.len()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.init_params.is_some_and(|p| !p.is_finite()) {
            return Err(Error::NonFinite("initial operator parameters".into()));
        }
        if let Architecture::Csgc { hops: 0 } = self.architecture {
            return Err(Error::InvalidArgument("CSGC needs at least one hop".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("train config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Learned seven-tuple of one operator term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnedOperator {
    pub centrality: Option<Centrality>,
    #[serde(flatten)]
    pub params: CgsoParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Training loss (with dropout) per epoch.
    pub train_loss: Vec<f64>,
    pub val_accuracy: Vec<f64>,
    /// Epoch (1-based) of the selected model; 0 means the initialization.
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub test_accuracy: f64,
    /// Loss of the selected model on the training nodes without dropout.
    pub final_train_loss: f64,
    pub operators: Vec<LearnedOperator>,
    pub dirichlet_energy: Option<Vec<f64>>,
    pub diverged: bool,
}

/// Fraction of masked nodes whose arg-max logit equals the label; ties go to
/// the lowest class. An empty mask gives 0.
pub fn accuracy(logits: &DenseMatrix, labels: &[usize], mask: &[bool]) -> f64 {
    let mut total = 0usize;
    let mut correct = 0usize;
    for i in (0..logits.rows()).filter(|&i| mask[i]) {
        total += 1;
        let row = logits.row(i);
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = j;
            }
        }
        if best == labels[i] {
            correct += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

fn build_model(g: &Graph, data: &TrainData, cfg: &TrainConfig) -> Result<Model> {
    let init = cfg.init_params.unwrap_or_else(|| cfg.preset.params());
    let mut terms = Vec::with_capacity(cfg.centralities.len());
    for (t, &kind) in cfg.centralities.iter().enumerate() {
        let params = if t == 0 {
            init
        } else {
            CgsoParams {
                m1: 0.0,
                m2: 0.0,
                m3: 0.0,
                ..init
            }
        };
        terms.push(OperatorTerm {
            centrality: diagonal_for(g, kind)?,
            params,
        });
    }
    let classes = data.num_classes();
    let d0 = data.features.cols();
    let seed = split(cfg.seed, 0);
    match cfg.architecture {
        Architecture::Cgcn => {
            let mut dims = vec![d0];
            dims.extend(&cfg.hidden);
            dims.push(classes);
            Model::cgcn(&dims, terms, cfg.dropout, seed)
        }
        Architecture::Csgc { hops } => Model::csgc(d0, classes, hops, terms, seed),
    }
}

struct Optimizer {
    weights: Vec<AdamState>,
    scalars: AdamState,
    exponents: AdamState,
}

impl Optimizer {
    fn new(model: &Model) -> Self {
        let t = model.terms.len();
        Self {
            weights: model.weights.iter().map(|w| AdamState::new(w.as_slice().len())).collect(),
            scalars: AdamState::new(SCALARS.len() * t),
            exponents: AdamState::new(EXPONENTS.len() * t),
        }
    }

    fn step(&mut self, model: &mut Model, grads: &super::model::Gradients, cfg: &TrainConfig) {
        for ((w, gw), st) in model.weights.iter_mut().zip(&grads.weights).zip(&mut self.weights) {
            adam_step(w.as_mut_slice(), gw.as_slice(), st, cfg.lr_weights, &cfg.adam);
        }
        if !cfg.learn_operator {
            return;
        }
        for (idx, state, lr) in [
            (&SCALARS[..], &mut self.scalars, cfg.lr_weights),
            (&EXPONENTS[..], &mut self.exponents, cfg.lr_exponents),
        ] {
            let mut p = Vec::with_capacity(idx.len() * model.terms.len());
            let mut g = Vec::with_capacity(p.capacity());
            for (term, tg) in model.terms.iter().zip(&grads.operator) {
                let arr = term.params.to_array();
                p.extend(idx.iter().map(|&k| arr[k]));
                g.extend(idx.iter().map(|&k| tg[k]));
            }
            adam_step(&mut p, &g, state, lr, &cfg.adam);
            for (t, term) in model.terms.iter_mut().enumerate() {
                let mut arr = term.params.to_array();
                for (s, &k) in idx.iter().enumerate() {
                    arr[k] = p[t * idx.len() + s];
                }
                term.params = CgsoParams::from_array(arr);
            }
        }
    }
}

fn layer_energies(g: &Graph, model: &Model, x: &DenseMatrix) -> Result<Vec<f64>> {
    let fwd = model.forward(g, x, false, 0)?;
    let outputs: Vec<&DenseMatrix> = match model.architecture {
        Architecture::Cgcn => fwd.hidden[1..].iter().chain(std::iter::once(&fwd.logits)).collect(),
        Architecture::Csgc { .. } => fwd.hidden[1..].iter().collect(),
    };
    outputs.into_iter().map(|h| dirichlet_energy(g, h)).collect()
}

/// Full-batch training with per-epoch validation. The reported model is the
/// epoch with the best validation accuracy (earliest on ties), with the
/// initialization as epoch 0. Initialization uses `split(seed, 0)`, the
/// dropout masks of epoch `e` use `split_path(seed, [1, e])`. A non-finite
/// loss stops training and flags the report as diverged.
pub fn train(g: &Graph, data: &TrainData, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.features.rows() != g.node_count() {
        return Err(Error::Shape(format!(
            "{} feature rows for {} nodes",
            data.features.rows(),
            g.node_count()
        )));
    }
    let x = &data.features;
    let labels = &data.labels;
    let split_masks = &data.split;

    let mut model = build_model(g, data, cfg)?;
    let mut opt = Optimizer::new(&model);

    let logits = model.predict(g, x)?;
    let mut best_val = accuracy(&logits, labels, &split_masks.val);
    let mut best_epoch = 0;
    let mut best_model = model.clone();

    let mut train_loss = Vec::with_capacity(cfg.epochs);
    let mut val_accuracy = Vec::with_capacity(cfg.epochs);
    let mut diverged = false;
    for epoch in 0..cfg.epochs {
        let seed = split_path(cfg.seed, &[1, epoch as u64]);
        let (loss, grads) = match model.loss_and_grads(g, x, labels, &split_masks.train, true, seed) {
            Ok(r) => r,
            Err(Error::NonFinite(_)) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        if !loss.is_finite() {
            diverged = true;
            break;
        }
        train_loss.push(loss);
        opt.step(&mut model, &grads, cfg);
        let logits = match model.predict(g, x) {
            Ok(l) => l,
            Err(Error::NonFinite(_)) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let acc = accuracy(&logits, labels, &split_masks.val);
        val_accuracy.push(acc);
        if acc > best_val {
            best_val = acc;
            best_epoch = epoch + 1;
            best_model = model.clone();
        }
    }

    let logits = best_model.predict(g, x)?;
    let final_train_loss = best_model.loss(g, x, labels, &split_masks.train, false, 0)?;
    let dirichlet_energy = if cfg.dirichlet_probe {
        Some(layer_energies(g, &best_model, x)?)
    } else {
        None
    };
    Ok(TrainReport {
        train_loss,
        val_accuracy,
        best_epoch,
        best_val_accuracy: best_val,
        test_accuracy: accuracy(&logits, labels, &split_masks.test),
        final_train_loss,
        operators: best_model
            .terms
            .iter()
            .map(|t| LearnedOperator {
                centrality: t.centrality.kind(),
                params: t.params,
            })
            .collect(),
        dirichlet_energy,
        diverged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgnn::{block_features, random_split};
    use crate::generators::{generate_sbbam, SbbamParams};
    use crate::graph::largest_component;

    fn task(seed: u64) -> (Graph, TrainData) {
        let (g, truth) = generate_sbbam(&SbbamParams::uniform(vec![20, 20, 20], vec![2, 3, 4], 0.02, seed)).unwrap();
        let sub = largest_component(&g).unwrap();
        let (g, truth) = (sub.graph, truth.restrict(&sub.new_to_old));
        let x = block_features(&truth, 0.5, split(seed, 1)).unwrap();
        let s = random_split(g.node_count(), 0.5, 0.25, split(seed, 2)).unwrap();
        let data = TrainData::new(x, truth.labels().to_vec(), s).unwrap();
        (g, data)
    }

    #[test]
    fn zero_epochs_echo_initialization() {
        let (g, data) = task(1);
        let cfg = TrainConfig {
            epochs: 0,
            preset: Preset::SymLaplacian,
            ..TrainConfig::default()
        };
        let r = train(&g, &data, &cfg).unwrap();
        assert_eq!(r.best_epoch, 0);
        assert!(r.train_loss.is_empty());
        assert_eq!(r.operators.len(), 1);
        assert_eq!(r.operators[0].params, Preset::SymLaplacian.params());
        assert_eq!(r.operators[0].centrality, Some(Centrality::KCore));
    }

    #[test]
    fn training_is_deterministic_and_learns() {
        let (g, data) = task(2);
        let cfg = TrainConfig {
            epochs: 40,
            hidden: vec![16],
            dirichlet_probe: true,
            ..TrainConfig::default()
        };
        let a = train(&g, &data, &cfg).unwrap();
        let b = train(&g, &data, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(!a.diverged);
        assert_eq!(a.train_loss.len(), 40);
        assert!(a.train_loss[39] < a.train_loss[0]);
        assert_eq!(a.dirichlet_energy.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn frozen_operator_keeps_preset() {
        let (g, data) = task(3);
        let cfg = TrainConfig {
            epochs: 5,
            hidden: vec![8],
            learn_operator: false,
            preset: Preset::MeanAggregation,
            ..TrainConfig::default()
        };
        let r = train(&g, &data, &cfg).unwrap();
        assert_eq!(r.operators[0].params, Preset::MeanAggregation.params());
    }

    #[test]
    fn combined_mode_starts_with_silent_second_term() {
        let (g, data) = task(4);
        let cfg = TrainConfig {
            epochs: 0,
            centralities: vec![Centrality::KCore, Centrality::pagerank()],
            ..TrainConfig::default()
        };
        let r = train(&g, &data, &cfg).unwrap();
        let single = train(&g, &data, &TrainConfig { centralities: vec![Centrality::KCore], ..cfg }).unwrap();
        assert_eq!(r.operators.len(), 2);
        assert_eq!(r.final_train_loss, single.final_train_loss);
    }

    #[test]
    fn accuracy_ties_and_masks() {
        let l = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 2.0], vec![3.0, 0.0]]).unwrap();
        assert_eq!(accuracy(&l, &[0, 1, 1], &[true, true, true]), 2.0 / 3.0);
        assert_eq!(accuracy(&l, &[0, 1, 1], &[false, false, false]), 0.0);
    }
}
