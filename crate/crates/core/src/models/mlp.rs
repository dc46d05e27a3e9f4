//! Standalone MLP classifier on the raw engineered features.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::DenseStack;
use super::train::{batch_tensor, label_of};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{bce_loss, Activation, AdamConfig, AdamState, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: vec![64, 32],
            hidden_activation: Activation::Relu,
            epochs: 150,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        self.adam.validate()?;
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be >= 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(Error::Config("hidden layer sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedMlp {
    pub config: MlpConfig,
    pub network: DenseStack,
    /// Mean training BCE per epoch.
    pub history: Vec<f64>,
}

pub fn train_mlp(config: &MlpConfig, train: &Dataset) -> Result<TrainedMlp> {
    config.validate()?;
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut init_rng = rng::rng(rng::derive(config.seed, 0));
    let mut net = DenseStack::classifier(
        train.n_cols(),
        &config.hidden,
        config.hidden_activation,
        &mut init_rng,
    );
    let mut adam = AdamState::new(
        config.adam,
        net.layers.iter().flat_map(|l| [&l.weights, &l.bias]),
    );
    let mut shuffle_rng = rng::rng(rng::derive(config.seed, 1));
    let mut order: Vec<usize> = (0..train.n_rows()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut sum = 0.0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let (x, y) = batch_tensor(train, idx)?;
            let (p, caches) = net.forward(&x)?;
            let (loss, dp) = bce_loss(p.data(), &y)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!(
                    "mlp loss diverged at epoch {epoch}, batch {b}"
                )));
            }
            sum += loss * idx.len() as f64;
            let up = Tensor::new(vec![idx.len(), 1], dp)?;
            let (grads, _) = net.backward(&caches, &up)?;
            let refs: Vec<&Tensor> = grads.iter().collect();
            let mut params: Vec<&mut Tensor> = net
                .layers
                .iter_mut()
                .flat_map(|l| [&mut l.weights, &mut l.bias])
                .collect();
            adam.step(&mut params, &refs)?;
        }
        history.push(sum / train.n_rows() as f64);
    }
    Ok(TrainedMlp {
        config: config.clone(),
        network: net,
        history,
    })
}

impl TrainedMlp {
    pub fn predict_proba(&self, rows: &Dataset) -> Result<Vec<f64>> {
        let expected = self.network.layers[0].inputs();
        if rows.n_cols() != expected {
            return Err(Error::Shape(format!(
                "rows have {} columns, model expects {expected}",
                rows.n_cols()
            )));
        }
        let x = Tensor::matrix(rows.n_rows(), rows.n_cols(), rows.values().to_vec())?;
        Ok(self.network.forward(&x)?.0.into_data())
    }

    pub fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(self.predict_proba(rows)?.into_iter().map(label_of).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn learns_a_linearly_separable_rule() {
        let mut r = rng::rng(11);
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                use rand::Rng;
                vec![r.gen::<f64>(), r.gen::<f64>()]
            })
            .collect();
        let labels: Vec<u8> = rows.iter().map(|x| u8::from(x[0] + x[1] > 1.0)).collect();
        let data = Dataset::from_rows(&rows, &labels).unwrap();
        let cfg = MlpConfig {
            hidden: vec![8],
            epochs: 200,
            adam: AdamConfig {
                lr: 0.01,
                ..AdamConfig::default()
            },
            ..MlpConfig::default()
        };
        let m = train_mlp(&cfg, &data).unwrap();
        let pred = m.predict(&data).unwrap();
        let acc = pred.iter().zip(&labels).filter(|(a, b)| a == b).count() as f64 / 200.0;
        assert!(acc > 0.95, "accuracy {acc}");
        assert!(m.history.last().unwrap() < &m.history[0]);
    }
}
