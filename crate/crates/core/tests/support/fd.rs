//! Finite-difference checks shared by the gradient tests and the acceptance
//! suite. Each function runs `trials` random instances and returns the first
//! mismatch.
//!
//! Every check perturbs one scalar at a time by ±1e-6 and compares against the
//! analytic gradient with a relative tolerance of 1e-5. Scalar objectives for
//! layers are `sum(upstream * output)` with a random upstream tensor.

use heartnet::models::{ClassifierKind, LossWeights, MultitaskConfig, MultitaskNet};
use heartnet::rng;
use heartnet::tensor::{
    bce_loss, conv2d_backward, conv2d_forward, dense_backward, dense_forward, l1_penalty,
    maxpool2d, maxpool2d_backward, mse_loss, Activation, Conv2DLayer, DenseLayer, Tensor,
};
use rand::Rng;

pub const STEP: f64 = 1e-6;
pub const TOL: f64 = 1e-5;
/// Denominator floor so that gradients near zero are compared absolutely.
const FLOOR: f64 = 1e-3;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(FLOOR)
}

fn random_tensor(r: &mut impl Rng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| r.gen_range(-scale..scale)).collect()).unwrap()
}

fn dot(a: &Tensor, b: &Tensor) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Central difference of `f` with respect to every element of `*target`.
fn numeric_grad(target: &mut Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
    (0..target.len())
        .map(|i| {
            let orig = target.data()[i];
            target.data_mut()[i] = orig + STEP;
            let up = f(target);
            target.data_mut()[i] = orig - STEP;
            let down = f(target);
            target.data_mut()[i] = orig;
            (up - down) / (2.0 * STEP)
        })
        .collect()
}

fn check(what: &str, analytic: &[f64], numeric: &[f64]) -> Result<(), String> {
    if analytic.len() != numeric.len() {
        return Err(format!("{what}: {} analytic vs {} numeric entries", analytic.len(), numeric.len()));
    }
    for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let e = rel_err(a, n);
        if !(e < TOL) {
            return Err(format!("{what}[{i}]: analytic {a} numeric {n} rel err {e:e}"));
        }
    }
    Ok(())
}

pub fn dense(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(101);
    let acts = [Activation::Linear, Activation::Sigmoid, Activation::Relu];
    for trial in 0..trials {
        let act = acts[trial % 3];
        let (b, n_in, n_out) = (r.gen_range(1..5), r.gen_range(1..6), r.gen_range(1..6));
        let layer = DenseLayer::new(
            random_tensor(&mut r, &[n_out, n_in], 1.0),
            random_tensor(&mut r, &[n_out], 0.5),
            act,
        )
        .unwrap();
        let mut x = random_tensor(&mut r, &[b, n_in], 2.0);
        let up = random_tensor(&mut r, &[b, n_out], 1.0);
        let (_, cache) = dense_forward(&layer, &x).unwrap();
        let g = dense_backward(&layer, &cache, &up).unwrap();

        let l2 = layer.clone();
        let num_x = numeric_grad(&mut x, |x| dot(&dense_forward(&l2, x).unwrap().0, &up));
        check("dense dx", g.input.data(), &num_x)?;

        let mut w = layer.weights.clone();
        let num_w = numeric_grad(&mut w, |w| {
            let mut l = layer.clone();
            l.weights = w.clone();
            dot(&dense_forward(&l, &x).unwrap().0, &up)
        });
        check("dense dW", g.weights.data(), &num_w)?;

        let mut bias = layer.bias.clone();
        let num_b = numeric_grad(&mut bias, |bv| {
            let mut l = layer.clone();
            l.bias = bv.clone();
            dot(&dense_forward(&l, &x).unwrap().0, &up)
        });
        check("dense db", g.bias.data(), &num_b)?;
    }
    Ok(())
}

pub fn conv2d(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(202);
    for _ in 0..trials {
        let (b, c, f) = (r.gen_range(1..3), r.gen_range(1..3), r.gen_range(1..4));
        let (kh, kw) = (r.gen_range(1..4), r.gen_range(1..4));
        let (sh, sw) = (r.gen_range(1..3), r.gen_range(1..3));
        let (h, w) = (kh + r.gen_range(0..4), kw + r.gen_range(0..4));
        let layer = Conv2DLayer::new(
            random_tensor(&mut r, &[f, c, kh, kw], 1.0),
            random_tensor(&mut r, &[f], 0.5),
            (sh, sw),
        )
        .unwrap();
        let mut x = random_tensor(&mut r, &[b, c, h, w], 2.0);
        let (y, cache) = conv2d_forward(&layer, &x).unwrap();
        let up = random_tensor(&mut r, y.shape(), 1.0);
        let g = conv2d_backward(&layer, &cache, &up).unwrap();

        let num_x = numeric_grad(&mut x, |x| dot(&conv2d_forward(&layer, x).unwrap().0, &up));
        check("conv dx", g.input.data(), &num_x)?;

        let mut k = layer.kernels.clone();
        let num_k = numeric_grad(&mut k, |k| {
            let mut l = layer.clone();
            l.kernels = k.clone();
            dot(&conv2d_forward(&l, &x).unwrap().0, &up)
        });
        check("conv dK", g.kernels.data(), &num_k)?;

        let mut bias = layer.bias.clone();
        let num_b = numeric_grad(&mut bias, |bv| {
            let mut l = layer.clone();
            l.bias = bv.clone();
            dot(&conv2d_forward(&l, &x).unwrap().0, &up)
        });
        check("conv db", g.bias.data(), &num_b)?;
    }
    Ok(())
}

pub fn maxpool(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(303);
    for _ in 0..trials {
        let (ph, pw) = (r.gen_range(1..4), r.gen_range(1..4));
        let (b, c) = (r.gen_range(1..3), r.gen_range(1..3));
        let (h, w) = (ph * r.gen_range(1..4), pw * r.gen_range(1..4));
        let mut x = random_tensor(&mut r, &[b, c, h, w], 5.0);
        let (y, cache) = maxpool2d(&x, (ph, pw)).unwrap();
        let up = random_tensor(&mut r, y.shape(), 1.0);
        let gx = maxpool2d_backward(&cache, &up).unwrap();
        let num = numeric_grad(&mut x, |x| dot(&maxpool2d(x, (ph, pw)).unwrap().0, &up));
        check("pool dx", gx.data(), &num)?;
    }
    Ok(())
}

pub fn bce(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(404);
    for _ in 0..trials {
        let n = r.gen_range(1..8);
        let mut p = Tensor::vector((0..n).map(|_| r.gen_range(0.02..0.98)).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|_| f64::from(r.gen_range(0..2u8))).collect();
        let (_, g) = bce_loss(p.data(), &y).unwrap();
        let num = numeric_grad(&mut p, |p| bce_loss(p.data(), &y).unwrap().0);
        check("bce dp", &g, &num)?;
    }
    Ok(())
}

pub fn mse(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(505);
    for _ in 0..trials {
        let (b, d) = (r.gen_range(1..5), r.gen_range(1..7));
        let mut xhat = random_tensor(&mut r, &[b, d], 3.0);
        let x = random_tensor(&mut r, &[b, d], 3.0);
        let (_, g) = mse_loss(&xhat, &x).unwrap();
        let num = numeric_grad(&mut xhat, |xh| mse_loss(xh, &x).unwrap().0);
        check("mse dxhat", g.data(), &num)?;
    }
    Ok(())
}

pub fn l1(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(606);
    for _ in 0..trials {
        let (b, d) = (r.gen_range(1..5), r.gen_range(1..7));
        // Keep activations away from the kink at zero.
        let data = (0..b * d)
            .map(|_| {
                let m = r.gen_range(0.05..2.0);
                if r.gen_bool(0.5) { m } else { -m }
            })
            .collect();
        let mut a = Tensor::matrix(b, d, data).unwrap();
        let lambda = r.gen_range(0.0..2.0);
        let (_, g) = l1_penalty(&a, lambda).unwrap();
        let num = numeric_grad(&mut a, |a| l1_penalty(a, lambda).unwrap().0);
        check("l1 da", g.data(), &num)?;
    }
    Ok(())
}

fn tiny_config(kind: ClassifierKind, seed: u64, r: &mut impl Rng) -> MultitaskConfig {
    let latent = match kind {
        ClassifierKind::Mlp => r.gen_range(5..9),
        ClassifierKind::Cnn => 9,
    };
    let mut c = MultitaskConfig::new(kind, latent);
    c.sae.input_dim = 4;
    c.sae.l1_lambda = r.gen_range(0.0..0.1);
    c.loss_mix_alpha = r.gen_range(0.1..0.9);
    c.classifier.mlp_hidden = vec![3];
    c.classifier.cnn_grid = Some((3, 3));
    c.classifier.cnn_kernel = Some((2, 2));
    c.classifier.cnn_filters = 2;
    c.classifier.pool = (2, 2);
    c.classifier.head_hidden = vec![3];
    c.seed = seed;
    c
}

pub fn multitask(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(707);
    for trial in 0..trials as u64 {
        let kind = if trial % 2 == 0 { ClassifierKind::Mlp } else { ClassifierKind::Cnn };
        let config = tiny_config(kind, trial, &mut r);
        let mut net = MultitaskNet::build(&config).unwrap();
        // Non-zero biases so that ReLU units are not all sitting at the same point.
        for p in net.params_mut() {
            for v in p.data_mut() {
                *v += r.gen_range(-0.1..0.1);
            }
        }
        let batch = r.gen_range(1..4);
        let x = Tensor::matrix(batch, 4, (0..batch * 4).map(|_| r.gen_range(0.0..1.0)).collect())
            .unwrap();
        let y: Vec<f64> = (0..batch).map(|_| f64::from(r.gen_range(0..2u8))).collect();
        let weights = LossWeights::from_config(&config);
        let (_, grads, _) = net.gradients(&x, &y, weights).unwrap();
        let names = net.param_names();
        let n_params = grads.len();
        
        for k in 0..n_params {
            let len = net.params()[k].len();
            let mut num = Vec::with_capacity(len);
            for i in 0..len {
                let orig = net.params()[k].data()[i];
                let eval = |v: f64, net: &mut MultitaskNet| {
                    net.params_mut()[k].data_mut()[i] = v;
                    net.gradients(&x, &y, weights).unwrap().0.total
                };
                let up = eval(orig + STEP, &mut net);
                let down = eval(orig - STEP, &mut net);
                net.params_mut()[k].data_mut()[i] = orig;
                num.push((up - down) / (2.0 * STEP));
            }
            check(&format!("{kind:?} {}", names[k]), grads[k].data(), &num)?;
        }
    }
    Ok(())
}
