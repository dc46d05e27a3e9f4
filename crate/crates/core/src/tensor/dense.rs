use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{axpy, dot, Activation, Tensor};
use crate::error::{Error, Result};

/// Fully connected layer `y = act(W x + b)` with `W` of shape `[out, in]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    pub input: Tensor,
    pub pre: Tensor,
    pub output: Tensor,
}

#[derive(Debug, Clone)]
pub struct DenseGrads {
    pub weights: Tensor,
    pub bias: Tensor,
    pub input: Tensor,
}

impl DenseLayer {
    pub fn new(weights: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if weights.ndim() != 2 || bias.ndim() != 1 || bias.len() != weights.shape()[0] {
            return Err(Error::Shape(format!(
                "dense weights {:?} incompatible with bias {:?}",
                weights.shape(),
                bias.shape()
            )));
        }
        Ok(DenseLayer {
            weights,
            bias,
            activation,
        })
    }

    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`, zero bias.
    pub fn init(inputs: usize, outputs: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        let data = (0..inputs * outputs)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        DenseLayer {
            weights: Tensor {
                shape: vec![outputs, inputs],
                data,
            },
            bias: Tensor::zeros(&[outputs]),
            activation,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, DenseCache)> {
        dense_forward(self, x)
    }
}

pub fn dense_forward(layer: &DenseLayer, x: &Tensor) -> Result<(Tensor, DenseCache)> {
    let (n_in, n_out) = (layer.inputs(), layer.outputs());
    let ok = match x.ndim() {
        1 => x.len() == n_in,
        2 => x.shape()[1] == n_in,
        _ => false,
    };
    if !ok {
        return Err(Error::Shape(format!(
            "dense layer expects [{n_in}] or [batch, {n_in}], got {:?}",
            x.shape()
        )));
    }
    let batch = x.batch();
    let w = layer.weights.data();
    let b = layer.bias.data();
    let mut pre = Vec::with_capacity(batch * n_out);
    for row in x.data().chunks_exact(n_in.max(1)).take(batch) {
        for o in 0..n_out {
            let wr = &w[o * n_in..(o + 1) * n_in];
            pre.push(b[o] + dot(wr, row));
        }
    }
    let shape = if x.ndim() == 1 {
        vec![n_out]
    } else {
        vec![batch, n_out]
    };
    let pre = Tensor { shape, data: pre };
    let out = layer.activation.forward(&pre);
    pre.check_finite("dense pre-activation")?;
    let cache = DenseCache {
        input: x.clone(),
        pre,
        output: out.clone(),
    };
    Ok((out, cache))
}

pub fn dense_backward(
    layer: &DenseLayer,
    cache: &DenseCache,
    upstream: &Tensor,
) -> Result<DenseGrads> {
    if upstream.shape() != cache.pre.shape() {
        return Err(Error::Shape(format!(
            "dense upstream {:?} does not match cached output {:?}",
            upstream.shape(),
            cache.pre.shape()
        )));
    }
    let (n_in, n_out) = (layer.inputs(), layer.outputs());
    if cache.input.len() != cache.input.batch() * n_in {
        return Err(Error::Shape("dense cache does not match layer".into()));
    }
    let delta = layer
        .activation
        .backward(&cache.pre, &cache.output, upstream)?;
    let batch = cache.input.batch();
    let w = layer.weights.data();
    let mut gw = vec![0.0; n_out * n_in];
    let mut gb = vec![0.0; n_out];
    let mut gx = vec![0.0; batch * n_in];
    for s in 0..batch {
        let x = &cache.input.data()[s * n_in..(s + 1) * n_in];
        let d = &delta.data()[s * n_out..(s + 1) * n_out];
        let gxs = &mut gx[s * n_in..(s + 1) * n_in];
        for o in 0..n_out {
            let g = d[o];
            if g == 0.0 {
                continue;
            }
            gb[o] += g;
            let gwr = &mut gw[o * n_in..(o + 1) * n_in];
            let wr = &w[o * n_in..(o + 1) * n_in];
            axpy(gwr, g, x);
            axpy(gxs, g, wr);
        }
    }
    Ok(DenseGrads {
        weights: Tensor {
            shape: vec![n_out, n_in],
            data: gw,
        },
        bias: Tensor {
            shape: vec![n_out],
            data: gb,
        },
        input: Tensor {
            shape: cache.input.shape().to_vec(),
            data: gx,
        },
    })
}
