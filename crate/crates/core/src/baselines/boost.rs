//! AdaBoost over depth-limited Gini trees and gradient boosting of
//! regression trees under logistic loss.

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::tree::{fit_regression_tree, fit_weighted_tree, RegressionNode, TreeNode, TreeParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::sigmoid;

/// `½ ln(1e10)`: the alpha granted to a round with zero weighted error.
pub fn alpha_cap() -> f64 {
    0.5 * 1e10f64.ln()
}

/// `½ ln((1 - e) / e)`, capped for `e = 0`.
pub fn adaboost_alpha(error: f64) -> f64 {
    if error <= 0.0 {
        return alpha_cap();
    }
    (0.5 * ((1.0 - error) / error).ln()).min(alpha_cap())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoostKind {
    Adaboost,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum WeakLearner {
    Classifier { tree: TreeNode, alpha: f64 },
    Regressor { tree: RegressionNode, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostEnsemble {
    pub kind: BoostKind,
    pub learners: Vec<WeakLearner>,
    /// Initial score: log-odds of the base rate for gradient boosting, 0 for AdaBoost.
    pub init: f64,
    /// Label returned by an AdaBoost ensemble with no learners.
    pub fallback: u8,
}

impl BoostEnsemble {
    /// Additive score. For AdaBoost this is `sum alpha_t h_t(x)` with
    /// `h in {-1, +1}`; for gradient boosting it is the log-odds.
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.init
            + self
                .learners
                .iter()
                .map(|l| match l {
                    WeakLearner::Classifier { tree, alpha } => {
                        alpha * if tree.predict(row) == 1 { 1.0 } else { -1.0 }
                    }
                    WeakLearner::Regressor { tree, alpha } => alpha * tree.predict(row),
                })
                .sum::<f64>()
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        match self.kind {
            BoostKind::Gradient => sigmoid(self.decision(row)),
            // two-class SAMME score mapped onto (0, 1)
            BoostKind::Adaboost => {
                if self.learners.is_empty() {
                    return f64::from(self.fallback);
                }
                sigmoid(2.0 * self.decision(row))
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        match self.kind {
            BoostKind::Gradient => u8::from(self.decision(row) >= 0.0),
            BoostKind::Adaboost => {
                if self.learners.is_empty() {
                    self.fallback
                } else {
                    u8::from(self.decision(row) >= 0.0)
                }
            }
        }
    }
}

/// Per-round record of AdaBoost, exposed for property tests.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaboostRound {
    pub error: f64,
    pub alpha: f64,
    /// Sample weights after the update and renormalisation.
    pub weights: Vec<f64>,
    pub resampled: bool,
}

fn weighted_error(tree: &TreeNode, train: &Dataset, w: &[f64]) -> f64 {
    train
        .rows()
        .zip(train.labels())
        .zip(w)
        .filter(|((r, &y), _)| tree.predict(r) != y)
        .map(|(_, &wi)| wi)
        .sum()
}

pub fn fit_adaboost(train: &Dataset, n_rounds: usize, base_depth: usize, seed: u64) -> Result<BoostEnsemble> {
    fit_adaboost_traced(train, n_rounds, base_depth, seed).map(|(e, _)| e)
}

/// AdaBoost. A round with `e = 0` receives the capped alpha and ends
/// boosting; a round with `e >= 0.5` is retried once on a weighted
/// bootstrap resample and, if still no better than chance, ends boosting.
pub fn fit_adaboost_traced(
    train: &Dataset,
    n_rounds: usize,
    base_depth: usize,
    seed: u64,
) -> Result<(BoostEnsemble, Vec<AdaboostRound>)> {
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n_rounds == 0 {
        return Err(Error::Config("n_rounds must be >= 1".into()));
    }
    let params = TreeParams {
        max_depth: Some(base_depth),
        min_leaf: 1,
        max_features: None,
    };
    let mut w = vec![1.0 / n as f64; n];
    let mut r = rng::rng(rng::derive_str(seed, "adaboost"));
    let mut learners = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..n_rounds {
        let mut tree = fit_weighted_tree(train, &w, &params)?;
        let mut err = weighted_error(&tree, train, &w);
        let mut resampled = false;
        if err >= 0.5 {
            let dist = WeightedIndex::new(&w)
                .map_err(|e| Error::NonFinite(format!("adaboost weights: {e}")))?;
            let mut counts = vec![0.0; n];
            for _ in 0..n {
                counts[dist.sample(&mut r)] += 1.0;
            }
            tree = fit_weighted_tree(train, &counts, &params)?;
            err = weighted_error(&tree, train, &w);
            resampled = true;
            if err >= 0.5 {
                break;
            }
        }
        let alpha = adaboost_alpha(err);
        let preds: Vec<u8> = train.rows().map(|row| tree.predict(row)).collect();
        learners.push(WeakLearner::Classifier { tree, alpha });
        if err <= 0.0 {
            trace.push(AdaboostRound {
                error: err,
                alpha,
                weights: w.clone(),
                resampled,
            });
            break;
        }
        for ((wi, &p), &y) in w.iter_mut().zip(&preds).zip(train.labels()) {
            *wi *= if p == y { (-alpha).exp() } else { alpha.exp() };
        }
        let z: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= z);
        trace.push(AdaboostRound {
            error: err,
            alpha,
            weights: w.clone(),
            resampled,
        });
    }
    let pos = train.positives();
    Ok((
        BoostEnsemble {
            kind: BoostKind::Adaboost,
            learners,
            init: 0.0,
            fallback: u8::from(2 * pos >= n),
        },
        trace,
    ))
}

/// Mean logistic loss of scores `f` against labels.
pub fn logistic_loss(f: &[f64], labels: &[u8]) -> f64 {
    f.iter()
        .zip(labels)
        .map(|(&fi, &y)| {
            // ln(1 + e^f) - y f, computed stably
            let softplus = if fi > 0.0 { fi + (-fi).exp().ln_1p() } else { fi.exp().ln_1p() };
            softplus - f64::from(y) * fi
        })
        .sum::<f64>()
        / f.len() as f64
}

pub fn fit_gradient_boost(
    train: &Dataset,
    n_rounds: usize,
    learning_rate: f64,
    base_depth: usize,
) -> Result<BoostEnsemble> {
    fit_gradient_boost_traced(train, n_rounds, learning_rate, base_depth).map(|(e, _)| e)
}

/// Gradient boosting with logistic loss. `F0` is the log-odds of the base
/// rate; each round fits a regression tree to the residual `y - p` and adds
/// it with weight `learning_rate`. Also returns the training loss before the
/// first round and after each round.
pub fn fit_gradient_boost_traced(
    train: &Dataset,
    n_rounds: usize,
    learning_rate: f64,
    base_depth: usize,
) -> Result<(BoostEnsemble, Vec<f64>)> {
    let n = train.n_rows();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if n_rounds == 0 {
        return Err(Error::Config("n_rounds must be >= 1".into()));
    }
    if !(learning_rate.is_finite() && learning_rate >= 0.0) {
        return Err(Error::Config(format!("learning_rate must be >= 0, got {learning_rate}")));
    }
    let pos = train.positives();
    if pos == 0 || pos == n {
        return Err(Error::InvalidArgument(
            "gradient boosting needs both classes in the training data".into(),
        ));
    }
    let init = (pos as f64 / (n - pos) as f64).ln();
    let mut f = vec![init; n];
    let mut losses = vec![logistic_loss(&f, train.labels())];
    let mut learners = Vec::with_capacity(n_rounds);
    for _ in 0..n_rounds {
        let residual: Vec<f64> = f
            .iter()
            .zip(train.labels())
            .map(|(&fi, &y)| f64::from(y) - sigmoid(fi))
            .collect();
        let tree = fit_regression_tree(train, &residual, base_depth, 1)?;
        for (fi, row) in f.iter_mut().zip(train.rows()) {
            *fi += learning_rate * tree.predict(row);
        }
        losses.push(logistic_loss(&f, train.labels()));
        learners.push(WeakLearner::Regressor {
            tree,
            alpha: learning_rate,
        });
    }
    Ok((
        BoostEnsemble {
            kind: BoostKind::Gradient,
            learners,
            init,
            fallback: u8::from(init >= 0.0),
        },
        losses,
    ))
}
