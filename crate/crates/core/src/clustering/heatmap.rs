use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::DiagonalCentrality;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::rng::split_path;

use super::kmeans::kmeans;
use super::metrics::{ami, ari};
use super::spectral::{spectral_embedding, SpectralClusterConfig};

/// `steps` evenly spaced values from `lo` to `hi`; a single step yields `lo`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| {
                if i == steps - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    pub e2_range: (f64, f64),
    pub e3_range: (f64, f64),
    pub steps: usize,
    pub repeats: usize,
    pub seed: u64,
    pub clustering: SpectralClusterConfig,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            e2_range: (-1.5, 1.5),
            e3_range: (-1.5, 1.5),
            steps: 7,
            repeats: 10,
            seed: 0,
            clustering: SpectralClusterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Ami,
    Ari,
}

/// Mean/std of AMI and ARI per `(e2, e3)` cell; `[i][j]` is
/// `(e2_values[i], e3_values[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapGrid {
    pub e2_values: Vec<f64>,
    pub e3_values: Vec<f64>,
    pub ami_mean: Vec<Vec<f64>>,
    pub ami_std: Vec<Vec<f64>>,
    pub ari_mean: Vec<Vec<f64>>,
    pub ari_std: Vec<Vec<f64>>,
    pub repeats: usize,
    pub seed: u64,
    pub clusters: usize,
    pub config: HeatmapConfig,
}

impl HeatmapGrid {
    /// Mean scores as CSV: header row of `e3` values, one row per `e2` value.
    pub fn to_csv(&self, metric: Metric) -> String {
        let grid = match metric {
            Metric::Ami => &self.ami_mean,
            Metric::Ari => &self.ari_mean,
        };
        let mut out = String::from("e2\\e3");
        for e3 in &self.e3_values {
            let _ = write!(out, ",{e3}");
        }
        out.push('\n');
        for (e2, row) in self.e2_values.iter().zip(grid) {
            let _ = write!(out, "{e2}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Spectral clustering over an `(e2, e3)` grid. The number of clusters is
/// `truth.k()`. Repeat `r` of cell `c` seeds k-means with
/// `split_path(seed, [c, r])`; cells are evaluated in parallel.
pub fn heatmap(g: &Graph, v: &DiagonalCentrality, truth: &Partition, cfg: &HeatmapConfig) -> Result<HeatmapGrid> {
    if cfg.steps == 0 || cfg.repeats == 0 {
        return Err(Error::InvalidArgument("grid needs at least one step and one repeat".into()));
    }
    if truth.len() != g.node_count() {
        return Err(Error::Shape(format!(
            "{} ground-truth labels for {} nodes",
            truth.len(),
            g.node_count()
        )));
    }
    let e2_values = linspace(cfg.e2_range.0, cfg.e2_range.1, cfg.steps);
    let e3_values = linspace(cfg.e3_range.0, cfg.e3_range.1, cfg.steps);
    let c = truth.k();
    let steps = cfg.steps;

    let cells: Vec<Result<(f64, f64, f64, f64)>> = (0..steps * steps)
        .into_par_iter()
        .map(|cell| {
            let (e2, e3) = (e2_values[cell / steps], e3_values[cell % steps]);
            let embedding = spectral_embedding(g, v, e2, e3, c, cfg.clustering.selection)?;
            let mut amis = Vec::with_capacity(cfg.repeats);
            let mut aris = Vec::with_capacity(cfg.repeats);
            for r in 0..cfg.repeats {
                let seed = split_path(cfg.seed, &[cell as u64, r as u64]);
                let p = kmeans(&embedding, c, seed, cfg.clustering.kmeans)?.partition;
                amis.push(ami(&p, truth)?);
                aris.push(ari(&p, truth)?);
            }
            let (am, asd) = mean_std(&amis);
            let (rm, rsd) = mean_std(&aris);
            Ok((am, asd, rm, rsd))
        })
        .collect();

    let mut ami_mean = vec![vec![0.0; steps]; steps];
    let mut ami_std = ami_mean.clone();
    let mut ari_mean = ami_mean.clone();
    let mut ari_std = ami_mean.clone();
    for (cell, res) in cells.into_iter().enumerate() {
        let (am, asd, rm, rsd) = res?;
        let (i, j) = (cell / steps, cell % steps);
        ami_mean[i][j] = am;
        ami_std[i][j] = asd;
        ari_mean[i][j] = rm;
        ari_std[i][j] = rsd;
    }
    Ok(HeatmapGrid {
        e2_values,
        e3_values,
        ami_mean,
        ami_std,
        ari_mean,
        ari_std,
        repeats: cfg.repeats,
        seed: cfg.seed,
        clusters: c,
        config: *cfg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{diagonal_for, Centrality};
    use crate::clustering::spectral_cluster;
    use crate::generators::{generate_sbbam, SbbamParams};

    #[test]
    fn grid_values() {
        assert_eq!(linspace(-1.5, 1.5, 7), vec![-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5]);
        assert_eq!(linspace(0.3, 2.0, 1), vec![0.3]);
    }

    #[test]
    fn single_cell_equals_direct_clustering() {
        let (g, truth) = generate_sbbam(&SbbamParams::uniform(vec![30, 30], vec![2, 4], 0.05, 8)).unwrap();
        let v = diagonal_for(&g, Centrality::KCore).unwrap();
        let cfg = HeatmapConfig {
            e2_range: (-1.0, 1.0),
            e3_range: (0.0, 1.0),
            steps: 1,
            repeats: 3,
            seed: 21,
            ..HeatmapConfig::default()
        };
        let grid = heatmap(&g, &v, &truth, &cfg).unwrap();
        let scores: Vec<f64> = (0..3)
            .map(|r| {
                let p = spectral_cluster(&g, &v, -1.0, 0.0, 2, split_path(21, &[0, r]), cfg.clustering).unwrap();
                ami(&p, &truth).unwrap()
            })
            .collect();
        let (m, s) = mean_std(&scores);
        assert_eq!(grid.ami_mean[0][0], m);
        assert_eq!(grid.ami_std[0][0], s);

        let csv = grid.to_csv(Metric::Ari);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("e2\\e3,0\n-1,"));
    }
}
