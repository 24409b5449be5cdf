pub mod centrality;
pub mod cgnn;
pub mod cgso;
pub mod clustering;
pub mod eigen;
pub mod error;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod partition;
pub mod rng;
pub mod spectral;
