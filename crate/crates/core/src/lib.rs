//! Heart-disease risk prediction on tabular clinical records.
//!
//! The crate bundles everything needed to run the experiments end to end:
//!
//! - [`data`]: CSV ingestion, validation and the 24-column feature encoding.
//! - [`tensor`]: a small dense numeric core with hand-written backward passes
//!   (dense, 2-D convolution, max-pooling, BCE/MSE/L1 losses, Adam).
//! - [`models`]: the vanilla MLP and the multitask sparse-autoencoder networks
//!   (SAE+MLP and SAE+CNN) trained jointly on classification and reconstruction.
//! - [`baselines`]: decision tree, random forest, kNN, AdaBoost, gradient
//!   boosting and Gaussian naive Bayes.
//! - [`eval`]: k-fold cross-validation, grid search and the group statistics.
//! - [`experiment`]: the orchestration behind the `heartnet` command-line tool.
//!
//! All numerics are `f64`, and every source of randomness is derived from an
//! explicit seed.

pub mod baselines;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod method;
pub mod models;
pub mod rng;
pub mod tensor;

pub use error::{Error, ErrorKind, Result};
