//! A small dense GCN stack whose message-passing operator is a learnable
//! centrality operator, plus the simple-graph-convolution variant.

mod adam;
mod data;
mod model;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use data::{block_features, random_split, Split, TrainData};
pub use model::{
    dirichlet_energy, Architecture, ForwardPass, Gradients, Model, OperatorTerm, PARAM_NAMES,
};
pub use train::{accuracy, train, LearnedOperator, TrainConfig, TrainReport};
