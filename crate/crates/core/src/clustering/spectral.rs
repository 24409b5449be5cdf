use serde::{Deserialize, Serialize};

use crate::centrality::DiagonalCentrality;
use crate::eigen::Selection;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::DenseMatrix;
use crate::partition::Partition;
use crate::spectral::cgso_top_eigs;

use super::kmeans::{kmeans, KMeansConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralClusterConfig {
    /// Which eigenvalues count as the largest.
    pub selection: Selection,
    pub kmeans: KMeansConfig,
}

/// Rows of the `C` leading eigenvectors of `V^e2 A V^e3` (an `n x C` matrix).
pub fn spectral_embedding(
    g: &Graph,
    v: &DiagonalCentrality,
    e2: f64,
    e3: f64,
    c: usize,
    selection: Selection,
) -> Result<DenseMatrix> {
    if c == 0 {
        return Err(Error::InvalidArgument("need at least one cluster".into()));
    }
    Ok(cgso_top_eigs(g, v, e2, e3, c, selection)?.vectors)
}

/// Cluster nodes by k-means (`k = C`) on the raw rows of the `C` leading
/// eigenvectors of `V^e2 A V^e3`.
pub fn spectral_cluster(
    g: &Graph,
    v: &DiagonalCentrality,
    e2: f64,
    e3: f64,
    c: usize,
    seed: u64,
    cfg: SpectralClusterConfig,
) -> Result<Partition> {
    let embedding = spectral_embedding(g, v, e2, e3, c, cfg.selection)?;
    Ok(kmeans(&embedding, c, seed, cfg.kmeans)?.partition)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::centrality::{diagonal_for, Centrality};
    use crate::clustering::ami;

    #[test]
    fn disjoint_triangles_are_recovered() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let p = spectral_cluster(&g, &d, -1.0, 0.0, 2, 3, SpectralClusterConfig::default()).unwrap();
        let truth = Partition::from_raw(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(ami(&p, &truth).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let d = diagonal_for(&g, Centrality::Degree).unwrap();
        let p = spectral_cluster(&g, &d, 0.0, 0.0, 1, 0, SpectralClusterConfig::default()).unwrap();
        assert_eq!(p.labels(), &[0, 0, 0, 0]);
    }
}
