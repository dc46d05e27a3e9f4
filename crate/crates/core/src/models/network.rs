use serde::{Deserialize, Serialize};

use super::config::{ClassifierKind, CnnGeometry, MultitaskConfig};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{
    bce_loss, conv2d_backward, conv2d_forward, dense_backward, dense_forward, l1_penalty,
    maxpool2d, maxpool2d_backward, mse_loss, Activation, Checkpoint, Conv2DCache, Conv2DLayer,
    DenseCache, DenseLayer, PoolCache, Tensor,
};

/// A chain of dense layers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseStack {
    pub layers: Vec<DenseLayer>,
}

impl DenseStack {
    /// `input -> hidden... -> 1` with `hidden_act` on hidden layers and a
    /// sigmoid output.
    pub fn classifier(
        input: usize,
        hidden: &[usize],
        hidden_act: Activation,
        rng: &mut rng::Rng,
    ) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut prev = input;
        for &h in hidden {
            layers.push(DenseLayer::init(prev, h, hidden_act, rng));
            prev = h;
        }
        layers.push(DenseLayer::init(prev, 1, Activation::Sigmoid, rng));
        DenseStack { layers }
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, Vec<DenseCache>)> {
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x.clone();
        for layer in &self.layers {
            let (y, cache) = dense_forward(layer, &h)?;
            caches.push(cache);
            h = y;
        }
        Ok((h, caches))
    }

    /// Returns per-layer `[weight, bias]` gradients (flattened in layer order)
    /// and the gradient with respect to the stack input.
    pub fn backward(&self, caches: &[DenseCache], upstream: &Tensor) -> Result<(Vec<Tensor>, Tensor)> {
        let mut grads = vec![Tensor::zeros(&[0]); 2 * self.layers.len()];
        let mut g = upstream.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let d = dense_backward(layer, &caches[i], &g)?;
            grads[2 * i] = d.weights;
            grads[2 * i + 1] = d.bias;
            g = d.input;
        }
        Ok((grads, g))
    }

    pub fn zero_grads(&self) -> Vec<Tensor> {
        self.layers
            .iter()
            .flat_map(|l| [Tensor::zeros(l.weights.shape()), Tensor::zeros(l.bias.shape())])
            .collect()
    }

    fn params(&self) -> impl Iterator<Item = &Tensor> {
        self.layers.iter().flat_map(|l| [&l.weights, &l.bias])
    }

    fn params_mut(&mut self) -> impl Iterator<Item = &mut Tensor> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weights, &mut l.bias])
    }

    fn names(&self, prefix: &str) -> Vec<String> {
        (0..self.layers.len())
            .flat_map(|i| [format!("{prefix}.dense{i}.weight"), format!("{prefix}.dense{i}.bias")])
            .collect()
    }
}

/// Convolutional head: latent reshaped row-major into the grid, one conv
/// layer with ReLU, max-pooling, then a dense stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnHead {
    pub geometry: CnnGeometry,
    pub conv: Conv2DLayer,
    pub dense: DenseStack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Head {
    Mlp(DenseStack),
    Cnn(CnnHead),
}

enum HeadCache {
    Mlp(Vec<DenseCache>),
    Cnn {
        conv: Conv2DCache,
        conv_pre: Tensor,
        conv_out: Tensor,
        pool: PoolCache,
        dense: Vec<DenseCache>,
    },
}

/// Reshapes a `[batch, latent]` tensor into `[batch, 1, rows, cols]`.
pub fn latent_to_grid(latent: &Tensor, grid: (usize, usize)) -> Result<Tensor> {
    let batch = latent.shape()[0];
    latent.clone().reshape(&[batch, 1, grid.0, grid.1])
}

pub fn grid_to_latent(grid: &Tensor) -> Result<Tensor> {
    let batch = grid.shape()[0];
    let n = grid.len() / batch.max(1);
    grid.clone().reshape(&[batch, n])
}

impl Head {
    fn forward(&self, latent: &Tensor) -> Result<(Tensor, HeadCache)> {
        match self {
            Head::Mlp(stack) => {
                let (p, caches) = stack.forward(latent)?;
                Ok((p, HeadCache::Mlp(caches)))
            }
            Head::Cnn(h) => {
                let batch = latent.shape()[0];
                let x = latent_to_grid(latent, h.geometry.grid)?;
                let (conv_pre, conv) = conv2d_forward(&h.conv, &x)?;
                let conv_out = Activation::Relu.forward(&conv_pre);
                let (pooled, pool) = maxpool2d(&conv_out, h.geometry.pool)?;
                let flat = pooled.reshape(&[batch, h.geometry.flat_features()])?;
                let (p, dense) = h.dense.forward(&flat)?;
                Ok((
                    p,
                    HeadCache::Cnn {
                        conv,
                        conv_pre,
                        conv_out,
                        pool,
                        dense,
                    },
                ))
            }
        }
    }

    fn backward(&self, cache: &HeadCache, upstream: &Tensor) -> Result<(Vec<Tensor>, Tensor)> {
        match (self, cache) {
            (Head::Mlp(stack), HeadCache::Mlp(caches)) => stack.backward(caches, upstream),
            (
                Head::Cnn(h),
                HeadCache::Cnn {
                    conv,
                    conv_pre,
                    conv_out,
                    pool,
                    dense,
                },
            ) => {
                let (mut grads, g_flat) = h.dense.backward(dense, upstream)?;
                let g_pooled = g_flat.reshape(&[
                    conv_out.shape()[0],
                    h.geometry.filters,
                    h.geometry.pooled.0,
                    h.geometry.pooled.1,
                ])?;
                let g_relu = maxpool2d_backward(pool, &g_pooled)?;
                let g_conv = Activation::Relu.backward(conv_pre, conv_out, &g_relu)?;
                let cg = conv2d_backward(&h.conv, conv, &g_conv)?;
                let mut out = vec![cg.kernels, cg.bias];
                out.append(&mut grads);
                Ok((out, grid_to_latent(&cg.input)?))
            }
            _ => Err(Error::Shape("head cache does not match head kind".into())),
        }
    }

    fn zero_grads(&self) -> Vec<Tensor> {
        match self {
            Head::Mlp(stack) => stack.zero_grads(),
            Head::Cnn(h) => {
                let mut v = vec![
                    Tensor::zeros(h.conv.kernels.shape()),
                    Tensor::zeros(h.conv.bias.shape()),
                ];
                v.extend(h.dense.zero_grads());
                v
            }
        }
    }

    fn params(&self) -> Vec<&Tensor> {
        match self {
            Head::Mlp(stack) => stack.params().collect(),
            Head::Cnn(h) => [&h.conv.kernels, &h.conv.bias]
                .into_iter()
                .chain(h.dense.params())
                .collect(),
        }
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        match self {
            Head::Mlp(stack) => stack.params_mut().collect(),
            Head::Cnn(h) => [&mut h.conv.kernels, &mut h.conv.bias]
                .into_iter()
                .chain(h.dense.params_mut())
                .collect(),
        }
    }

    fn names(&self) -> Vec<String> {
        match self {
            Head::Mlp(stack) => stack.names("head"),
            Head::Cnn(h) => {
                let mut v = vec!["head.conv.kernels".to_string(), "head.conv.bias".to_string()];
                v.extend(h.dense.names("head"));
                v
            }
        }
    }
}

/// Per-term weights of the joint objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub bce: f64,
    pub mse: f64,
    pub l1_lambda: f64,
}

impl LossWeights {
    pub fn from_config(config: &MultitaskConfig) -> Self {
        LossWeights {
            bce: config.loss_mix_alpha,
            mse: 1.0 - config.loss_mix_alpha,
            l1_lambda: config.sae.l1_lambda,
        }
    }
}

/// Loss values of one batch. `l1` already includes lambda.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub bce: f64,
    pub mse: f64,
    pub l1: f64,
}

/// Outputs of one forward pass.
#[derive(Debug, Clone)]
pub struct MultitaskOutput {
    pub reconstruction: Tensor,
    pub probability: Vec<f64>,
    pub latent: Tensor,
}

/// Sparse autoencoder with a classification head on its latent space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultitaskNet {
    pub config: MultitaskConfig,
    pub encoder: DenseLayer,
    pub decoder: DenseLayer,
    pub head: Head,
}

impl MultitaskNet {
    /// Seeded initialisation; identical configs give bit-identical weights.
    pub fn build(config: &MultitaskConfig) -> Result<Self> {
        config.validate()?;
        let mut r = rng::rng(rng::derive(config.seed, 0));
        let sae = &config.sae;
        let encoder = DenseLayer::init(sae.input_dim, sae.latent_dim, sae.encoder_activation, &mut r);
        let decoder = DenseLayer::init(sae.latent_dim, sae.input_dim, sae.decoder_activation, &mut r);
        let head = match config.classifier.kind {
            ClassifierKind::Mlp => Head::Mlp(DenseStack::classifier(
                sae.latent_dim,
                &config.classifier.mlp_hidden,
                Activation::Relu,
                &mut r,
            )),
            ClassifierKind::Cnn => {
                let geometry = config.classifier.cnn_geometry(sae.latent_dim)?;
                let conv = Conv2DLayer::init(geometry.filters, 1, geometry.kernel, &mut r);
                let dense = DenseStack::classifier(
                    geometry.flat_features(),
                    &config.classifier.head_hidden,
                    Activation::Relu,
                    &mut r,
                );
                Head::Cnn(CnnHead {
                    geometry,
                    conv,
                    dense,
                })
            }
        };
        Ok(MultitaskNet {
            config: config.clone(),
            encoder,
            decoder,
            head,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.config.sae.input_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.config.sae.latent_dim
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.ndim() != 2 || x.shape()[1] != self.input_dim() {
            return Err(Error::Shape(format!(
                "model expects [batch, {}] input, got {:?}",
                self.input_dim(),
                x.shape()
            )));
        }
        Ok(())
    }

    pub fn encode(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        Ok(dense_forward(&self.encoder, x)?.0)
    }

    pub fn forward(&self, x: &Tensor) -> Result<MultitaskOutput> {
        self.check_input(x)?;
        let (latent, _) = dense_forward(&self.encoder, x)?;
        let (reconstruction, _) = dense_forward(&self.decoder, &latent)?;
        let (p, _) = self.head.forward(&latent)?;
        Ok(MultitaskOutput {
            reconstruction,
            probability: p.into_data(),
            latent,
        })
    }

    /// Losses and gradients for one batch, ordered like [`Self::param_names`].
    pub fn gradients(
        &self,
        x: &Tensor,
        labels: &[f64],
        weights: LossWeights,
    ) -> Result<(LossBreakdown, Vec<Tensor>, Vec<f64>)> {
        self.check_input(x)?;
        let batch = x.shape()[0];
        if labels.len() != batch {
            return Err(Error::Shape(format!(
                "{batch} rows but {} labels",
                labels.len()
            )));
        }
        let (latent, enc_cache) = dense_forward(&self.encoder, x)?;
        let (recon, dec_cache) = dense_forward(&self.decoder, &latent)?;
        let (p, head_cache) = self.head.forward(&latent)?;

        let (bce, dp) = bce_loss(p.data(), labels)?;
        let (mse, drecon) = mse_loss(&recon, x)?;
        let (l1, mut dlatent) = l1_penalty(&latent, weights.l1_lambda)?;

        let (head_grads, dec_w, dec_b) = {
            let head_grads = if weights.bce != 0.0 {
                let up = Tensor::new(vec![batch, 1], dp.iter().map(|g| g * weights.bce).collect())?;
                let (grads, gl) = self.head.backward(&head_cache, &up)?;
                dlatent.add_assign(&gl)?;
                grads
            } else {
                self.head.zero_grads()
            };
            if weights.mse != 0.0 {
                let dg = dense_backward(&self.decoder, &dec_cache, &drecon.scaled(weights.mse))?;
                dlatent.add_assign(&dg.input)?;
                (head_grads, dg.weights, dg.bias)
            } else {
                (
                    head_grads,
                    Tensor::zeros(self.decoder.weights.shape()),
                    Tensor::zeros(self.decoder.bias.shape()),
                )
            }
        };
        let eg = dense_backward(&self.encoder, &enc_cache, &dlatent)?;

        let mut grads = vec![eg.weights, eg.bias, dec_w, dec_b];
        grads.extend(head_grads);
        let losses = LossBreakdown {
            total: weights.bce * bce + weights.mse * mse + l1,
            bce,
            mse,
            l1,
        };
        Ok((losses, grads, p.into_data()))
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut v: Vec<String> = ["encoder.weight", "encoder.bias", "decoder.weight", "decoder.bias"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        v.extend(self.head.names());
        v
    }

    pub fn params(&self) -> Vec<&Tensor> {
        let mut v = vec![
            &self.encoder.weights,
            &self.encoder.bias,
            &self.decoder.weights,
            &self.decoder.bias,
        ];
        v.extend(self.head.params());
        v
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut v = vec![
            &mut self.encoder.weights,
            &mut self.encoder.bias,
            &mut self.decoder.weights,
            &mut self.decoder.bias,
        ];
        v.extend(self.head.params_mut());
        v
    }

    pub fn to_checkpoint(&self) -> Result<Checkpoint> {
        let mut c = Checkpoint::new();
        for (name, t) in self.param_names().into_iter().zip(self.params()) {
            c.push(name, t.clone())?;
        }
        Ok(c)
    }

    /// Rebuilds the architecture from `config` and loads weights by name.
    pub fn from_checkpoint(config: &MultitaskConfig, ckpt: &Checkpoint) -> Result<Self> {
        let mut net = MultitaskNet::build(config)?;
        let names = net.param_names();
        for (name, p) in names.iter().zip(net.params_mut()) {
            let t = ckpt.take(name)?;
            if t.shape() != p.shape() {
                return Err(Error::Format(format!(
                    "tensor `{name}` has shape {:?}, model expects {:?}",
                    t.shape(),
                    p.shape()
                )));
            }
            *p = t;
        }
        Ok(net)
    }
}
