use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centrality::{diagonal_for, Centrality};
use crate::error::Result;
use crate::generators::{generate_sbbam, SbbamParams};
use crate::rng::{split, split_path};

use super::heatmap::{linspace, mean_std};
use super::kmeans::kmeans;
use super::metrics::{ami, ari};
use super::spectral::{spectral_embedding, SpectralClusterConfig};

/// Repeated spectral clustering of freshly sampled block-model graphs, for
/// several centralities over a shared exponent grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    /// Graph template; its seed is replaced per run.
    pub graph: SbbamParams,
    pub runs: usize,
    pub seed: u64,
    pub centralities: Vec<Centrality>,
    pub e2_values: Vec<f64>,
    pub e3_values: Vec<f64>,
    pub clustering: SpectralClusterConfig,
}

impl BenchmarkConfig {
    /// Three BA blocks of 100 nodes (`r = 5, 10, 15`, `p = 0.1`), degree and
    /// k-core operators, exponents on a 7 x 7 grid over `[-1.5, 1.5]`.
    pub fn standard(runs: usize, seed: u64) -> Self {
        Self {
            graph: SbbamParams::benchmark(0),
            runs,
            seed,
            centralities: vec![Centrality::Degree, Centrality::KCore],
            e2_values: linspace(-1.5, 1.5, 7),
            e3_values: linspace(-1.5, 1.5, 7),
            clustering: SpectralClusterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    pub e2: f64,
    pub e3: f64,
    pub ami_mean: f64,
    pub ami_std: f64,
    pub ari_mean: f64,
    pub ari_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralitySweep {
    pub centrality: Centrality,
    pub cells: Vec<CellStats>,
    /// Cell with the highest mean AMI.
    pub best: CellStats,
    /// The `(e2, e3) = (-1, 0)` cell, if on the grid.
    pub markov: Option<CellStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: BenchmarkConfig,
    pub sweeps: Vec<CentralitySweep>,
}

impl BenchmarkReport {
    pub fn sweep(&self, c: Centrality) -> Option<&CentralitySweep> {
        self.sweeps.iter().find(|s| s.centrality == c)
    }
}

/// Run `g`: graph seed `split(seed, g)`; k-means for centrality `c` and cell
/// `k` seeded with `split_path(seed, [g, c, k])`.
pub fn sbbam_benchmark(cfg: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let cells: Vec<(f64, f64)> = cfg
        .e2_values
        .iter()
        .flat_map(|&e2| cfg.e3_values.iter().map(move |&e3| (e2, e3)))
        .collect();

    // scores[run][centrality][cell] = (ami, ari)
    let scores: Vec<Vec<Vec<(f64, f64)>>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| -> Result<Vec<Vec<(f64, f64)>>> {
            let params = SbbamParams {
                seed: split(cfg.seed, run as u64),
                ..cfg.graph.clone()
            };
            let (g, truth) = generate_sbbam(&params)?;
            let c = truth.k();
            cfg.centralities
                .iter()
                .enumerate()
                .map(|(ci, &kind)| {
                    let v = diagonal_for(&g, kind)?;
                    cells
                        .iter()
                        .enumerate()
                        .map(|(k, &(e2, e3))| {
                            let emb = spectral_embedding(&g, &v, e2, e3, c, cfg.clustering.selection)?;
                            let seed = split_path(cfg.seed, &[run as u64, ci as u64, k as u64]);
                            let p = kmeans(&emb, c, seed, cfg.clustering.kmeans)?.partition;
                            Ok((ami(&p, &truth)?, ari(&p, &truth)?))
                        })
                        .collect()
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let sweeps = cfg
        .centralities
        .iter()
        .enumerate()
        .map(|(ci, &centrality)| {
            let stats: Vec<CellStats> = cells
                .iter()
                .enumerate()
                .map(|(k, &(e2, e3))| {
                    let amis: Vec<f64> = scores.iter().map(|r| r[ci][k].0).collect();
                    let aris: Vec<f64> = scores.iter().map(|r| r[ci][k].1).collect();
                    let (ami_mean, ami_std) = mean_std(&amis);
                    let (ari_mean, ari_std) = mean_std(&aris);
                    CellStats {
                        e2,
                        e3,
                        ami_mean,
                        ami_std,
                        ari_mean,
                        ari_std,
                    }
                })
                .collect();
            let best = *stats
                .iter()
                .max_by(|a, b| a.ami_mean.total_cmp(&b.ami_mean))
                .expect("non-empty grid");
            let markov = stats.iter().find(|s| s.e2 == -1.0 && s.e3 == 0.0).copied();
            CentralitySweep {
                centrality,
                cells: stats,
                best,
                markov,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        config: cfg.clone(),
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_benchmark_is_deterministic() {
        let cfg = BenchmarkConfig {
            graph: SbbamParams::uniform(vec![25, 25], vec![2, 5], 0.05, 0),
            runs: 2,
            seed: 4,
            centralities: vec![Centrality::Degree, Centrality::KCore],
            e2_values: vec![-1.0, 0.0],
            e3_values: vec![0.0],
            clustering: SpectralClusterConfig::default(),
        };
        let a = sbbam_benchmark(&cfg).unwrap();
        let b = sbbam_benchmark(&cfg).unwrap();
        assert_eq!(a, b);
        let deg = a.sweep(Centrality::Degree).unwrap();
        assert_eq!(deg.cells.len(), 2);
        assert!(deg.markov.is_some());
        assert!(deg.cells.iter().all(|c| (-1.0..=1.0).contains(&c.ami_mean)));
    }
}
