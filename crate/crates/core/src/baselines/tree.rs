//! CART-style trees: Gini classification trees (optionally sample-weighted,
//! optionally with per-split feature subsampling) and squared-error
//! regression trees for gradient boosting.
//!
//! Candidate thresholds are midpoints between consecutive distinct values.
//! Rows with `value < threshold` go left.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        /// Probabilities of classes 0 and 1.
        class_distribution: [f64; 2],
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn leaf_for(&self, row: &[f64]) -> [f64; 2] {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { class_distribution } => return *class_distribution,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] < *threshold { left } else { right };
                }
            }
        }
    }

    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        self.leaf_for(row)[1]
    }

    pub fn predict(&self, row: &[f64]) -> u8 {
        u8::from(self.predict_proba(row) >= 0.5)
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until purity or `min_leaf`.
    pub max_depth: Option<usize>,
    /// Minimum number of rows in each child of a split.
    pub min_leaf: usize,
    /// Features considered per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_leaf: 1,
            max_features: None,
        }
    }
}

/// Gini impurity `1 - sum p_c^2` of a weighted two-class node.
pub fn gini(w0: f64, w1: f64) -> f64 {
    let total = w0 + w1;
    if total <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (w0 / total, w1 / total);
    1.0 - p0 * p0 - p1 * p1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted mean child impurity `(W_l G_l + W_r G_r) / W`.
    pub impurity: f64,
}

/// Best Gini split over `features` for the given rows. Ties keep the first
/// candidate in (feature order, ascending threshold) order.
pub fn best_split(
    data: &Dataset,
    rows: &[usize],
    weights: &[f64],
    features: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    let min_leaf = min_leaf.max(1);
    if rows.len() < 2 * min_leaf {
        return None;
    }
    let labels = data.labels();
    let mut total = [0.0; 2];
    for &r in rows {
        total[usize::from(labels[r])] += weights[r];
    }
    let w_all = total[0] + total[1];
    let mut best: Option<Split> = None;
    let mut sorted = rows.to_vec();
    for &f in features {
        sorted.sort_by(|&a, &b| data.get(a, f).total_cmp(&data.get(b, f)));
        let mut left = [0.0; 2];
        for i in 0..sorted.len() - 1 {
            let r = sorted[i];
            left[usize::from(labels[r])] += weights[r];
            let (v, next) = (data.get(r, f), data.get(sorted[i + 1], f));
            if v == next {
                continue;
            }
            let n_left = i + 1;
            if n_left < min_leaf || sorted.len() - n_left < min_leaf {
                continue;
            }
            let right = [total[0] - left[0], total[1] - left[1]];
            let wl = left[0] + left[1];
            let wr = right[0] + right[1];
            let impurity = (wl * gini(left[0], left[1]) + wr * gini(right[0], right[1])) / w_all;
            if best.map_or(true, |b| impurity < b.impurity) {
                best = Some(Split {
                    feature: f,
                    threshold: 0.5 * (v + next),
                    impurity,
                });
            }
        }
    }
    best
}

fn distribution(data: &Dataset, rows: &[usize], weights: &[f64]) -> [f64; 2] {
    let mut w = [0.0; 2];
    for &r in rows {
        w[usize::from(data.labels()[r])] += weights[r];
    }
    let total = w[0] + w[1];
    if total > 0.0 {
        [w[0] / total, w[1] / total]
    } else {
        [0.5, 0.5]
    }
}

pub(crate) fn grow_classifier(
    data: &Dataset,
    rows: &[usize],
    weights: &[f64],
    params: &TreeParams,
    depth: usize,
    rng: &mut Option<&mut Rng>,
) -> TreeNode {
    let dist = distribution(data, rows, weights);
    let pure = dist[0] == 0.0 || dist[1] == 0.0;
    if pure || params.max_depth.is_some_and(|d| depth >= d) {
        return TreeNode::Leaf {
            class_distribution: dist,
        };
    }
    let all: Vec<usize> = (0..data.n_cols()).collect();
    let features = match (params.max_features, rng.as_deref_mut()) {
        (Some(m), Some(r)) if m < data.n_cols() => {
            let mut f: Vec<usize> = all.choose_multiple(r, m).copied().collect();
            f.sort_unstable();
            f
        }
        _ => all,
    };
    let Some(split) = best_split(data, rows, weights, &features, params.min_leaf) else {
        return TreeNode::Leaf {
            class_distribution: dist,
        };
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows
        .iter()
        .partition(|&&i| data.get(i, split.feature) < split.threshold);
    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_classifier(data, &l, weights, params, depth + 1, rng)),
        right: Box::new(grow_classifier(data, &r, weights, params, depth + 1, rng)),
    }
}

/// Greedy Gini tree. Splits whenever the node is impure and a split honouring
/// `min_leaf` exists, even if it does not lower impurity.
pub fn fit_decision_tree(train: &Dataset, max_depth: Option<usize>, min_leaf: usize) -> Result<TreeNode> {
    fit_weighted_tree(
        train,
        &vec![1.0; train.n_rows()],
        &TreeParams {
            max_depth,
            min_leaf,
            max_features: None,
        },
    )
}

pub fn fit_weighted_tree(train: &Dataset, weights: &[f64], params: &TreeParams) -> Result<TreeNode> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if weights.len() != train.n_rows() {
        return Err(Error::Shape("one weight per row required".into()));
    }
    let rows: Vec<usize> = (0..train.n_rows()).collect();
    Ok(grow_classifier(train, &rows, weights, params, 0, &mut None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum RegressionNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RegressionNode>,
        right: Box<RegressionNode>,
    },
}

impl RegressionNode {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                RegressionNode::Leaf { value } => return *value,
                RegressionNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if row[*feature] < *threshold { left } else { right },
            }
        }
    }
}

/// Squared-error regression tree; leaves hold the mean target.
pub fn fit_regression_tree(
    data: &Dataset,
    targets: &[f64],
    max_depth: usize,
    min_leaf: usize,
) -> Result<RegressionNode> {
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if targets.len() != data.n_rows() {
        return Err(Error::Shape("one target per row required".into()));
    }
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    Ok(grow_regressor(data, targets, &rows, max_depth, min_leaf.max(1), 0))
}

fn grow_regressor(
    data: &Dataset,
    y: &[f64],
    rows: &[usize],
    max_depth: usize,
    min_leaf: usize,
    depth: usize,
) -> RegressionNode {
    let n = rows.len() as f64;
    let sum: f64 = rows.iter().map(|&r| y[r]).sum();
    let leaf = RegressionNode::Leaf { value: sum / n };
    if depth >= max_depth || rows.len() < 2 * min_leaf {
        return leaf;
    }
    // maximise S_l^2/n_l + S_r^2/n_r, equivalent to minimising child SSE
    let base = sum * sum / n;
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted = rows.to_vec();
    for f in 0..data.n_cols() {
        sorted.sort_by(|&a, &b| data.get(a, f).total_cmp(&data.get(b, f)));
        let mut s_left = 0.0;
        for i in 0..sorted.len() - 1 {
            s_left += y[sorted[i]];
            let (v, next) = (data.get(sorted[i], f), data.get(sorted[i + 1], f));
            let n_left = i + 1;
            if v == next || n_left < min_leaf || sorted.len() - n_left < min_leaf {
                continue;
            }
            let nl = n_left as f64;
            let nr = n - nl;
            let s_right = sum - s_left;
            let score = s_left * s_left / nl + s_right * s_right / nr;
            if best.map_or(true, |(b, _, _)| score > b) {
                best = Some((score, f, 0.5 * (v + next)));
            }
        }
    }
    match best {
        Some((score, feature, threshold)) if score > base + 1e-12 * base.abs().max(1.0) => {
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| data.get(i, feature) < threshold);
            RegressionNode::Split {
                feature,
                threshold,
                left: Box::new(grow_regressor(data, y, &l, max_depth, min_leaf, depth + 1)),
                right: Box::new(grow_regressor(data, y, &r, max_depth, min_leaf, depth + 1)),
            }
        }
        _ => leaf,
    }
}
