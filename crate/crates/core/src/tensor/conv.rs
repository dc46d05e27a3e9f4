use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{axpy, dot, Tensor};
use crate::error::{Error, Result};

/// Valid (unpadded) 2-D cross-correlation. No kernel flip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conv2DLayer {
    /// `[filters, in_channels, kh, kw]`
    pub kernels: Tensor,
    /// `[filters]`
    pub bias: Tensor,
    pub stride: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct Conv2DCache {
    pub input: Tensor,
}

#[derive(Debug, Clone)]
pub struct Conv2DGrads {
    pub kernels: Tensor,
    pub bias: Tensor,
    pub input: Tensor,
}

impl Conv2DLayer {
    pub fn new(kernels: Tensor, bias: Tensor, stride: (usize, usize)) -> Result<Self> {
        if kernels.ndim() != 4 || bias.ndim() != 1 || bias.len() != kernels.shape()[0] {
            return Err(Error::Shape(format!(
                "conv kernels {:?} incompatible with bias {:?}",
                kernels.shape(),
                bias.shape()
            )));
        }
        if stride.0 == 0 || stride.1 == 0 {
            return Err(Error::Config("conv stride must be positive".into()));
        }
        Ok(Conv2DLayer {
            kernels,
            bias,
            stride,
        })
    }

    /// Uniform in `±sqrt(6 / (fan_in + fan_out))` with receptive-field fans.
    pub fn init(
        filters: usize,
        channels: usize,
        kernel: (usize, usize),
        rng: &mut impl Rng,
    ) -> Self {
        let field = kernel.0 * kernel.1;
        let limit = (6.0 / ((channels + filters) * field) as f64).sqrt();
        let data = (0..filters * channels * field)
            .map(|_| rng.gen_range(-limit..limit))
            .collect();
        Conv2DLayer {
            kernels: Tensor {
                shape: vec![filters, channels, kernel.0, kernel.1],
                data,
            },
            bias: Tensor::zeros(&[filters]),
            stride: (1, 1),
        }
    }

    pub fn filters(&self) -> usize {
        self.kernels.shape()[0]
    }

    pub fn output_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        let s = self.kernels.shape();
        let (kh, kw) = (s[2], s[3]);
        if kh > h || kw > w || kh == 0 || kw == 0 {
            return Err(Error::Shape(format!(
                "kernel {kh}x{kw} does not fit input {h}x{w}"
            )));
        }
        Ok(((h - kh) / self.stride.0 + 1, (w - kw) / self.stride.1 + 1))
    }
}

fn check_input(layer: &Conv2DLayer, x: &Tensor) -> Result<(usize, usize, usize, usize)> {
    if x.ndim() != 4 {
        return Err(Error::Shape(format!(
            "conv input must be [batch, channels, h, w], got {:?}",
            x.shape()
        )));
    }
    let (b, c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    if c != layer.kernels.shape()[1] {
        return Err(Error::Shape(format!(
            "conv expects {} channels, input has {c}",
            layer.kernels.shape()[1]
        )));
    }
    Ok((b, c, h, w))
}

pub fn conv2d_forward(layer: &Conv2DLayer, x: &Tensor) -> Result<(Tensor, Conv2DCache)> {
    let (batch, chans, h, w) = check_input(layer, x)?;
    let (oh, ow) = layer.output_hw(h, w)?;
    let ks = layer.kernels.shape();
    let (nf, kh, kw) = (ks[0], ks[2], ks[3]);
    let (sh, sw) = layer.stride;
    let k = layer.kernels.data();
    let xd = x.data();
    let mut y = vec![0.0; batch * nf * oh * ow];
    for b in 0..batch {
        for f in 0..nf {
            let out = &mut y[((b * nf + f) * oh) * ow..((b * nf + f + 1) * oh) * ow];
            out.iter_mut().for_each(|v| *v = layer.bias.data()[f]);
            for c in 0..chans {
                let plane = &xd[((b * chans + c) * h) * w..((b * chans + c + 1) * h) * w];
                let kern = &k[((f * chans + c) * kh) * kw..((f * chans + c + 1) * kh) * kw];
                for i in 0..oh {
                    let orow = &mut out[i * ow..(i + 1) * ow];
                    for p in 0..kh {
                        let xrow = &plane[(i * sh + p) * w..(i * sh + p + 1) * w];
                        for q in 0..kw {
                            let kv = kern[p * kw + q];
                            if sw == 1 {
                                axpy(orow, kv, &xrow[q..q + ow]);
                            } else {
                                for (j, o) in orow.iter_mut().enumerate() {
                                    *o += kv * xrow[j * sw + q];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let y = Tensor {
        shape: vec![batch, nf, oh, ow],
        data: y,
    };
    y.check_finite("conv output")?;
    Ok((y, Conv2DCache { input: x.clone() }))
}

pub fn conv2d_backward(
    layer: &Conv2DLayer,
    cache: &Conv2DCache,
    upstream: &Tensor,
) -> Result<Conv2DGrads> {
    let x = &cache.input;
    let (batch, chans, h, w) = check_input(layer, x)?;
    let (oh, ow) = layer.output_hw(h, w)?;
    let ks = layer.kernels.shape();
    let (nf, kh, kw) = (ks[0], ks[2], ks[3]);
    if upstream.shape() != [batch, nf, oh, ow] {
        return Err(Error::Shape(format!(
            "conv upstream {:?} does not match output [{batch}, {nf}, {oh}, {ow}]",
            upstream.shape()
        )));
    }
    let (sh, sw) = layer.stride;
    let k = layer.kernels.data();
    let xd = x.data();
    let g = upstream.data();
    let mut gk = vec![0.0; k.len()];
    let mut gb = vec![0.0; nf];
    let mut gx = vec![0.0; xd.len()];
    for b in 0..batch {
        for f in 0..nf {
            let go = &g[((b * nf + f) * oh) * ow..((b * nf + f + 1) * oh) * ow];
            gb[f] += go.iter().sum::<f64>();
            for c in 0..chans {
                let base_x = ((b * chans + c) * h) * w;
                let base_k = ((f * chans + c) * kh) * kw;
                for i in 0..oh {
                    let grow = &go[i * ow..(i + 1) * ow];
                    for p in 0..kh {
                        let xo = base_x + (i * sh + p) * w;
                        for q in 0..kw {
                            let ko = base_k + p * kw + q;
                            if sw == 1 {
                                gk[ko] += dot(grow, &xd[xo + q..xo + q + ow]);
                                axpy(&mut gx[xo + q..xo + q + ow], k[ko], grow);
                            } else {
                                for (j, &gij) in grow.iter().enumerate() {
                                    gk[ko] += gij * xd[xo + j * sw + q];
                                    gx[xo + j * sw + q] += gij * k[ko];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Conv2DGrads {
        kernels: Tensor {
            shape: ks.to_vec(),
            data: gk,
        },
        bias: Tensor {
            shape: vec![nf],
            data: gb,
        },
        input: Tensor {
            shape: x.shape().to_vec(),
            data: gx,
        },
    })
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    pub input_shape: Vec<usize>,
    /// Flat input index of the selected maximum, one per output cell.
    pub argmax: Vec<usize>,
}

/// Non-overlapping max-pooling. Spatial dims must be divisible by the window;
/// ties go to the first maximum in row-major window order.
pub fn maxpool2d(x: &Tensor, window: (usize, usize)) -> Result<(Tensor, PoolCache)> {
    if x.ndim() != 4 {
        return Err(Error::Shape(format!(
            "maxpool input must be [batch, channels, h, w], got {:?}",
            x.shape()
        )));
    }
    let (ph, pw) = window;
    let (b, c, h, w) = (x.shape()[0], x.shape()[1], x.shape()[2], x.shape()[3]);
    if ph == 0 || pw == 0 || h % ph != 0 || w % pw != 0 {
        return Err(Error::Shape(format!(
            "pool window {ph}x{pw} does not divide {h}x{w}"
        )));
    }
    let (oh, ow) = (h / ph, w / pw);
    let xd = x.data();
    let mut y = Vec::with_capacity(b * c * oh * ow);
    let mut argmax = Vec::with_capacity(b * c * oh * ow);
    for plane in 0..b * c {
        let base = plane * h * w;
        for i in 0..oh {
            for j in 0..ow {
                let mut best = base + (i * ph) * w + j * pw;
                for p in 0..ph {
                    for q in 0..pw {
                        let idx = base + (i * ph + p) * w + j * pw + q;
                        if xd[idx] > xd[best] {
                            best = idx;
                        }
                    }
                }
                y.push(xd[best]);
                argmax.push(best);
            }
        }
    }
    Ok((
        Tensor {
            shape: vec![b, c, oh, ow],
            data: y,
        },
        PoolCache {
            input_shape: x.shape().to_vec(),
            argmax,
        },
    ))
}

pub fn maxpool2d_backward(cache: &PoolCache, upstream: &Tensor) -> Result<Tensor> {
    if upstream.len() != cache.argmax.len() {
        return Err(Error::Shape(format!(
            "maxpool upstream has {} values, cache expects {}",
            upstream.len(),
            cache.argmax.len()
        )));
    }
    let mut gx = vec![0.0; cache.input_shape.iter().product()];
    for (&idx, &g) in cache.argmax.iter().zip(upstream.data()) {
        gx[idx] += g;
    }
    Ok(Tensor {
        shape: cache.input_shape.clone(),
        data: gx,
    })
}
