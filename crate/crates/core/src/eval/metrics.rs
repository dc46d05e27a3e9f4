use crate::error::{Error, Result};

fn check(pred: &[u8], labels: &[u8]) -> Result<()> {
    if pred.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} predictions for {} labels",
            pred.len(),
            labels.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::InvalidArgument("accuracy of an empty set".into()));
    }
    Ok(())
}

/// Fraction of exact matches.
pub fn accuracy(pred: &[u8], labels: &[u8]) -> Result<f64> {
    check(pred, labels)?;
    let hits = pred.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Precision of the positive class; 0 when nothing is predicted positive.
pub fn precision(pred: &[u8], labels: &[u8]) -> Result<f64> {
    check(pred, labels)?;
    let tp = pred.iter().zip(labels).filter(|&(&p, &y)| p == 1 && y == 1).count();
    let pp = pred.iter().filter(|&&p| p == 1).count();
    Ok(if pp == 0 { 0.0 } else { tp as f64 / pp as f64 })
}

/// Recall of the positive class; 0 when there are no positives.
pub fn recall(pred: &[u8], labels: &[u8]) -> Result<f64> {
    check(pred, labels)?;
    let tp = pred.iter().zip(labels).filter(|&(&p, &y)| p == 1 && y == 1).count();
    let pos = labels.iter().filter(|&&y| y == 1).count();
    Ok(if pos == 0 { 0.0 } else { tp as f64 / pos as f64 })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); 0 for a single value.
pub fn sample_sd(xs: &[f64]) -> f64 {
    // identical values must give exactly 0, not summation residue
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
