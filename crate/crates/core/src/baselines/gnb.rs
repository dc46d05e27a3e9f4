use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with per-class priors and per-feature
/// (mean, variance). All scoring is in log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbModel {
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

pub fn fit_gnb(train: &Dataset) -> Result<GnbModel> {
    let d = train.n_cols();
    let mut count = [0usize; 2];
    let mut sum = [vec![0.0; d], vec![0.0; d]];
    for (row, &y) in train.rows().zip(train.labels()) {
        let c = usize::from(y);
        count[c] += 1;
        for (s, v) in sum[c].iter_mut().zip(row) {
            *s += v;
        }
    }
    if let Some(c) = (0..2).find(|&c| count[c] == 0) {
        return Err(Error::InvalidArgument(format!(
            "class {c} is absent from the training data"
        )));
    }
    let means = [0, 1].map(|c| sum[c].iter().map(|s| s / count[c] as f64).collect::<Vec<_>>());
    let mut sq = [vec![0.0; d], vec![0.0; d]];
    for (row, &y) in train.rows().zip(train.labels()) {
        let c = usize::from(y);
        for j in 0..d {
            let diff = row[j] - means[c][j];
            sq[c][j] += diff * diff;
        }
    }
    let variances =
        [0, 1].map(|c| sq[c].iter().map(|s| (s / count[c] as f64).max(VARIANCE_FLOOR)).collect());
    let n = train.n_rows() as f64;
    Ok(GnbModel {
        priors: [count[0] as f64 / n, count[1] as f64 / n],
        means,
        variances,
    })
}

impl GnbModel {
    /// `ln P(c) + sum_j ln N(x_j; mu_cj, var_cj)` for both classes.
    pub fn log_joint(&self, query: &[f64]) -> Result<[f64; 2]> {
        if query.len() != self.means[0].len() {
            return Err(Error::Shape(format!(
                "query has {} features, model {}",
                query.len(),
                self.means[0].len()
            )));
        }
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        Ok([0, 1].map(|c| {
            let mut lp = self.priors[c].ln();
            for ((x, mu), var) in query.iter().zip(&self.means[c]).zip(&self.variances[c]) {
                lp -= 0.5 * (ln_2pi + var.ln()) + (x - mu) * (x - mu) / (2.0 * var);
            }
            lp
        }))
    }

    /// Normalised log posteriors via log-sum-exp.
    pub fn log_posteriors(&self, query: &[f64]) -> Result<[f64; 2]> {
        let lj = self.log_joint(query)?;
        let m = lj[0].max(lj[1]);
        let lse = m + ((lj[0] - m).exp() + (lj[1] - m).exp()).ln();
        Ok([lj[0] - lse, lj[1] - lse])
    }

    pub fn posteriors(&self, query: &[f64]) -> Result<[f64; 2]> {
        Ok(self.log_posteriors(query)?.map(f64::exp))
    }

    /// Class with the highest posterior; ties go to class 0.
    pub fn predict(&self, query: &[f64]) -> Result<u8> {
        let lj = self.log_joint(query)?;
        Ok(u8::from(lj[1] > lj[0]))
    }
}

pub fn gnb_predict(model: &GnbModel, query: &[f64]) -> Result<u8> {
    model.predict(query)
}
