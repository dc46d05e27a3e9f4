use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow_classifier, TreeNode, TreeParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub m_features: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<TreeNode>,
    pub m_features: usize,
    pub bootstrap_seed: u64,
}

/// Each tree sees a bootstrap sample (when enabled) and `m_features`
/// randomly chosen candidate features per split. Tree `t` uses its own
/// stream derived from `(seed, t)`, so trees are fitted in parallel.
pub fn fit_random_forest(train: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.n_trees == 0 {
        return Err(Error::Config("n_trees must be >= 1".into()));
    }
    if params.m_features == 0 || params.m_features > train.n_cols() {
        return Err(Error::Config(format!(
            "m_features must lie in [1, {}], got {}",
            train.n_cols(),
            params.m_features
        )));
    }
    let n = train.n_rows();
    let tree_params = TreeParams {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf,
        max_features: Some(params.m_features),
    };
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::rng(rng::derive(seed, t as u64));
            let mut weights = vec![0.0; n];
            if params.bootstrap {
                for _ in 0..n {
                    weights[r.gen_range(0..n)] += 1.0;
                }
            } else {
                weights.iter_mut().for_each(|w| *w = 1.0);
            }
            // bootstrap counts act as integer sample weights; rows drawn zero
            // times are excluded entirely
            let rows: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
            grow_classifier(train, &rows, &weights, &tree_params, 0, &mut Some(&mut r))
        })
        .collect();
    Ok(ForestModel {
        trees,
        m_features: params.m_features,
        bootstrap_seed: seed,
    })
}

/// Majority vote over tree labels; an even split goes to class 1.
pub fn majority_vote(votes: &[u8]) -> u8 {
    let ones = votes.iter().filter(|&&v| v == 1).count();
    u8::from(2 * ones >= votes.len())
}

impl ForestModel {
    pub fn votes(&self, row: &[f64]) -> Vec<u8> {
        self.trees.iter().map(|t| t.predict(row)).collect()
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        majority_vote(&self.votes(row))
    }

    /// Fraction of trees voting for class 1.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let v = self.votes(row);
        v.iter().filter(|&&x| x == 1).count() as f64 / v.len() as f64
    }
}
