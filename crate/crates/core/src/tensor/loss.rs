use super::Tensor;
use crate::error::{Error, Result};

/// Probabilities are clipped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before logs.
pub const PROB_CLAMP: f64 = 1e-7;

/// Mean binary cross-entropy `-(y ln p + (1-y) ln(1-p))` over the batch.
///
/// The returned gradient is with respect to `p`, evaluated at the clipped
/// probability.
pub fn bce_loss(p: &[f64], y: &[f64]) -> Result<(f64, Vec<f64>)> {
    if p.len() != y.len() {
        return Err(Error::Shape(format!(
            "bce: {} probabilities vs {} labels",
            p.len(),
            y.len()
        )));
    }
    if p.is_empty() {
        return Err(Error::Shape("bce: empty batch".into()));
    }
    let n = p.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(p.len());
    for (&pi, &yi) in p.iter().zip(y) {
        if !pi.is_finite() {
            return Err(Error::NonFinite(format!("bce: probability {pi}")));
        }
        let pc = pi.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        loss -= yi * pc.ln() + (1.0 - yi) * (1.0 - pc).ln();
        grad.push((-yi / pc + (1.0 - yi) / (1.0 - pc)) / n);
    }
    Ok((loss / n, grad))
}

/// Sum of squared differences per sample, averaged over the batch
/// (leading dimension; a 1-D tensor is one sample).
pub fn mse_loss(xhat: &Tensor, x: &Tensor) -> Result<(f64, Tensor)> {
    if xhat.shape() != x.shape() {
        return Err(Error::Shape(format!(
            "mse: {:?} vs {:?}",
            xhat.shape(),
            x.shape()
        )));
    }
    let batch = x.batch() as f64;
    let mut loss = 0.0;
    let grad = xhat
        .data()
        .iter()
        .zip(x.data())
        .map(|(&a, &b)| {
            let d = a - b;
            loss += d * d;
            2.0 * d / batch
        })
        .collect();
    Ok((
        loss / batch,
        Tensor {
            shape: x.shape().to_vec(),
            data: grad,
        },
    ))
}

/// `lambda * sum |a|`, averaged over the batch like [`mse_loss`].
/// The subgradient uses `sign(0) = 0`.
pub fn l1_penalty(activations: &Tensor, lambda: f64) -> Result<(f64, Tensor)> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "l1 lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let batch = activations.batch() as f64;
    let scale = lambda / batch;
    let loss = scale * activations.data().iter().map(|a| a.abs()).sum::<f64>();
    let grad = activations.map(|a| {
        if a > 0.0 {
            scale
        } else if a < 0.0 {
            -scale
        } else {
            0.0
        }
    });
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bce_values() {
        let (l, _) = bce_loss(&[0.5], &[1.0]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-12);
        let (l, _) = bce_loss(&[0.9], &[1.0]).unwrap();
        // -ln(0.9)
        assert!((l - 0.105_360_515_657_826_3).abs() < 1e-12);
        let (l, _) = bce_loss(&[1.0], &[1.0]).unwrap();
        assert!(l >= 0.0 && l < 1e-6);
    }

    #[test]
    fn bce_length_mismatch() {
        assert!(bce_loss(&[0.5, 0.5], &[1.0]).is_err());
    }

    #[test]
    fn mse_examples() {
        let x = Tensor::vector(vec![3.0, 4.0]).unwrap();
        let (l, g) = mse_loss(&Tensor::vector(vec![0.0, 0.0]).unwrap(), &x).unwrap();
        assert_eq!(l, 25.0);
        assert_eq!(g.data(), &[-6.0, -8.0]);
        let (l, g) = mse_loss(&x, &x).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mse_is_batch_mean_of_sums() {
        let x = Tensor::matrix(2, 2, vec![0.0; 4]).unwrap();
        let xhat = Tensor::matrix(2, 2, vec![1.0, 1.0, 2.0, 0.0]).unwrap();
        let (l, _) = mse_loss(&xhat, &x).unwrap();
        assert_eq!(l, (2.0 + 4.0) / 2.0);
    }

    #[test]
    fn l1_examples() {
        let a = Tensor::vector(vec![1.0, -2.0, 0.0]).unwrap();
        let (l, g) = l1_penalty(&a, 0.5).unwrap();
        assert_eq!(l, 1.5);
        assert_eq!(g.data(), &[0.5, -0.5, 0.0]);
        let (l, g) = l1_penalty(&a, 0.0).unwrap();
        assert_eq!(l, 0.0);
        assert!(g.data().iter().all(|&v| v == 0.0));
        assert!(l1_penalty(&a, -1.0).is_err());
    }
}
