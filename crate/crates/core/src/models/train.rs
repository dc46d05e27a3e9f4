use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::MultitaskConfig;
use super::network::{LossBreakdown, LossWeights, MultitaskNet, MultitaskOutput};
use crate::data::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{AdamState, Checkpoint, Tensor};

/// Probability at or above which a row is labelled positive.
pub const DECISION_THRESHOLD: f64 = 0.5;

const PREDICT_CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub total: f64,
    pub bce: f64,
    pub mse: f64,
    pub l1: f64,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: MultitaskConfig,
    pub network: MultitaskNet,
    pub history: Vec<EpochStats>,
    pub scaler: MinMaxScaler,
}

pub fn build_model(config: &MultitaskConfig) -> Result<MultitaskNet> {
    MultitaskNet::build(config)
}

pub(crate) fn batch_tensor(data: &Dataset, idx: &[usize]) -> Result<(Tensor, Vec<f64>)> {
    let cols = data.n_cols();
    let mut x = Vec::with_capacity(idx.len() * cols);
    let mut y = Vec::with_capacity(idx.len());
    for &i in idx {
        x.extend_from_slice(data.row(i));
        y.push(f64::from(data.labels()[i]));
    }
    Ok((Tensor::matrix(idx.len(), cols, x)?, y))
}

pub fn label_of(p: f64) -> u8 {
    u8::from(p >= DECISION_THRESHOLD)
}

/// Minimises `alpha * BCE + (1 - alpha) * MSE + L1(latent)` with Adam over
/// seeded shuffled mini-batches.
///
/// `train` must already be scaled; `scaler` is stored with the model so that
/// callers can prepare new rows the same way.
pub fn train(mut model: MultitaskNet, train: &Dataset, scaler: MinMaxScaler) -> Result<TrainedModel> {
    let config = model.config.clone();
    config.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if train.n_cols() != config.sae.input_dim {
        return Err(Error::Shape(format!(
            "training matrix has {} columns, model expects {}",
            train.n_cols(),
            config.sae.input_dim
        )));
    }
    let weights = LossWeights::from_config(&config);
    let mut adam = AdamState::new(config.adam, model.params());
    let mut shuffle_rng = rng::rng(rng::derive(config.seed, 1));
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let n = train.n_rows() as f64;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sums = LossBreakdown::default();
        let mut correct = 0usize;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let (x, y) = batch_tensor(train, idx)?;
            let (losses, grads, probs) = model
                .gradients(&x, &y, weights)
                .map_err(|e| numeric_context(e, epoch, b))?;
            if ![losses.total, losses.bce, losses.mse, losses.l1]
                .iter()
                .all(|v| v.is_finite())
            {
                return Err(Error::NonFinite(format!(
                    "loss diverged at epoch {epoch}, batch {b}: {losses:?}"
                )));
            }
            for g in &grads {
                g.check_finite("gradient")
                    .map_err(|e| numeric_context(e, epoch, b))?;
            }
            let m = idx.len() as f64;
            sums.total += losses.total * m;
            sums.bce += losses.bce * m;
            sums.mse += losses.mse * m;
            sums.l1 += losses.l1 * m;
            correct += probs
                .iter()
                .zip(&y)
                .filter(|(&p, &t)| f64::from(label_of(p)) == t)
                .count();
            let grad_refs: Vec<&Tensor> = grads.iter().collect();
            adam.step(&mut model.params_mut(), &grad_refs)?;
        }
        history.push(EpochStats {
            total: sums.total / n,
            bce: sums.bce / n,
            mse: sums.mse / n,
            l1: sums.l1 / n,
            train_accuracy: correct as f64 / n,
        });
        log::debug!("epoch {epoch}: {:?}", history.last());
    }
    Ok(TrainedModel {
        config,
        network: model,
        history,
        scaler,
    })
}

fn numeric_context(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::NonFinite(msg) => Error::NonFinite(format!("epoch {epoch}, batch {batch}: {msg}")),
        other => other,
    }
}

impl TrainedModel {
    fn check_cols(&self, rows: &Dataset) -> Result<()> {
        if rows.n_cols() != self.config.sae.input_dim {
            return Err(Error::Shape(format!(
                "rows have {} columns, model expects {}",
                rows.n_cols(),
                self.config.sae.input_dim
            )));
        }
        Ok(())
    }

    /// Applies the stored scaler to rows in raw units.
    pub fn scale(&self, raw: &Dataset) -> Result<Dataset> {
        self.scaler.transform(raw)
    }

    pub fn forward(&self, rows: &Dataset) -> Result<MultitaskOutput> {
        forward_multitask(&self.network, rows)
    }

    /// Labels (`p >= 0.5`) and probabilities for already-scaled rows.
    pub fn predict(&self, rows: &Dataset) -> Result<(Vec<u8>, Vec<f64>)> {
        self.check_cols(rows)?;
        let mut probs = Vec::with_capacity(rows.n_rows());
        let all: Vec<usize> = (0..rows.n_rows()).collect();
        for idx in all.chunks(PREDICT_CHUNK) {
            let (x, _) = batch_tensor(rows, idx)?;
            probs.extend(self.network.forward(&x)?.probability);
        }
        Ok((probs.iter().map(|&p| label_of(p)).collect(), probs))
    }

    /// Encoder output only; the decoder and head are not evaluated.
    pub fn extract_augmented_features(&self, rows: &Dataset) -> Result<Tensor> {
        self.check_cols(rows)?;
        let latent = self.latent_dim();
        let mut out = Vec::with_capacity(rows.n_rows() * latent);
        let all: Vec<usize> = (0..rows.n_rows()).collect();
        for idx in all.chunks(PREDICT_CHUNK) {
            let (x, _) = batch_tensor(rows, idx)?;
            out.extend(self.network.encode(&x)?.into_data());
        }
        Tensor::matrix(rows.n_rows(), latent, out)
    }

    pub fn latent_dim(&self) -> usize {
        self.config.sae.latent_dim
    }

    /// `header.json` (config, scaler, history) and `weights.ckpt`, as
    /// (file name, contents) pairs.
    pub fn to_files(&self) -> Result<Vec<(String, Vec<u8>)>> {
        let header = ModelHeader {
            format: MODEL_FORMAT.to_string(),
            config: self.config.clone(),
            scaler: self.scaler.clone(),
            history: self.history.clone(),
        };
        let json = serde_json::to_string_pretty(&header)
            .map_err(|e| Error::Format(e.to_string()))?;
        Ok(vec![
            ("header.json".to_string(), json.into_bytes()),
            ("weights.ckpt".to_string(), self.network.to_checkpoint()?.render().into_bytes()),
        ])
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in self.to_files()? {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join("header.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let header: ModelHeader =
            serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if header.format != MODEL_FORMAT {
            return Err(Error::Format(format!("unsupported model format `{}`", header.format)));
        }
        let ckpt = Checkpoint::load(dir.join("weights.ckpt"))?;
        let network = MultitaskNet::from_checkpoint(&header.config, &ckpt)?;
        Ok(TrainedModel {
            config: header.config,
            network,
            history: header.history,
            scaler: header.scaler,
        })
    }
}

const MODEL_FORMAT: &str = "heartnet-multitask/1";

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    format: String,
    config: MultitaskConfig,
    scaler: MinMaxScaler,
    history: Vec<EpochStats>,
}

/// Reconstruction, probabilities and latent codes for a batch of rows.
pub fn forward_multitask(model: &MultitaskNet, rows: &Dataset) -> Result<MultitaskOutput> {
    if rows.n_cols() != model.input_dim() {
        return Err(Error::Shape(format!(
            "rows have {} columns, model expects {}",
            rows.n_cols(),
            model.input_dim()
        )));
    }
    let x = Tensor::matrix(rows.n_rows(), rows.n_cols(), rows.values().to_vec())?;
    model.forward(&x)
}

pub fn predict(model: &TrainedModel, rows: &Dataset) -> Result<(Vec<u8>, Vec<f64>)> {
    model.predict(rows)
}

pub fn extract_augmented_features(model: &TrainedModel, rows: &Dataset) -> Result<Tensor> {
    model.extract_augmented_features(rows)
}
