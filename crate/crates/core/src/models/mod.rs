//! Neural architectures: the vanilla MLP baseline and the multitask networks
//! that train a sparse autoencoder jointly with an MLP or CNN classifier.
//!
//! The multitask objective is `alpha * BCE + (1 - alpha) * MSE + lambda * |latent|_1`.
//! The encoder (24 -> latent, sigmoid) receives gradient from all three terms;
//! the decoder (latent -> 24, sigmoid) only from reconstruction and the head
//! only from classification.

mod config;
mod mlp;
mod network;
mod train;

pub use config::{
    square_grid, ClassifierConfig, ClassifierKind, CnnGeometry, MultitaskConfig, SaeConfig,
};
pub use mlp::{train_mlp, MlpConfig, TrainedMlp};
pub use network::{
    grid_to_latent, latent_to_grid, CnnHead, DenseStack, Head, LossBreakdown, LossWeights,
    MultitaskNet, MultitaskOutput,
};
pub use train::{
    build_model, extract_augmented_features, forward_multitask, label_of, predict, train,
    EpochStats, TrainedModel, DECISION_THRESHOLD,
};
