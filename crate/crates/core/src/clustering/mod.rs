//! Spectral clustering with centrality operators, partition comparison
//! scores and the exponent-grid experiments built on them.

mod benchmark;
mod heatmap;
mod kmeans;
mod metrics;
mod spectral;

pub use benchmark::{sbbam_benchmark, BenchmarkConfig, BenchmarkReport, CellStats, CentralitySweep};
pub use heatmap::{heatmap, linspace, HeatmapConfig, HeatmapGrid, Metric};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult};
pub use metrics::{ami, ari, contingency, mutual_information};
pub use spectral::{spectral_cluster, spectral_embedding, SpectralClusterConfig};
