//! Classical comparison methods: decision tree, random forest, kNN,
//! AdaBoost, gradient boosting and Gaussian naive Bayes.
//!
//! Fitted models are immutable. [`BaselineDocument`] is the versioned
//! serialized form: trees as nested nodes, GNB as parameter tables.

mod boost;
mod forest;
mod gnb;
mod knn;
mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use boost::{
    adaboost_alpha, alpha_cap, fit_adaboost, fit_adaboost_traced, fit_gradient_boost,
    fit_gradient_boost_traced, logistic_loss, AdaboostRound, BoostEnsemble, BoostKind, WeakLearner,
};
pub use forest::{fit_random_forest, majority_vote, ForestModel, ForestParams};
pub use gnb::{fit_gnb, gnb_predict, GnbModel, VARIANCE_FLOOR};
pub use knn::{euclidean, knn_classify, nearest, KnnModel};
pub use tree::{
    best_split, fit_decision_tree, fit_regression_tree, fit_weighted_tree, gini, RegressionNode,
    Split, TreeNode, TreeParams,
};

use crate::error::{Error, Result};

pub const DOCUMENT_FORMAT: &str = "heartnet-baseline/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BaselineModel {
    DecisionTree(TreeNode),
    RandomForest(ForestModel),
    Knn(KnnModel),
    Boost(BoostEnsemble),
    Gnb(GnbModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineDocument {
    pub format: String,
    pub model: BaselineModel,
}

impl BaselineDocument {
    pub fn new(model: BaselineModel) -> Self {
        BaselineDocument {
            format: DOCUMENT_FORMAT.to_string(),
            model,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BaselineDocument =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if doc.format != DOCUMENT_FORMAT {
            return Err(Error::Format(format!(
                "unsupported baseline document format {:?}, expected {DOCUMENT_FORMAT:?}",
                doc.format
            )));
        }
        Ok(doc)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;

    #[test]
    fn document_round_trip() {
        let d = Dataset::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]], &[0, 1, 1])
            .unwrap();
        for model in [
            BaselineModel::DecisionTree(fit_decision_tree(&d, None, 1).unwrap()),
            BaselineModel::Gnb(fit_gnb(&d).unwrap()),
            BaselineModel::Boost(fit_gradient_boost(&d, 3, 0.5, 1).unwrap()),
        ] {
            let doc = BaselineDocument::new(model);
            let back = BaselineDocument::from_json(&doc.to_json().unwrap()).unwrap();
            assert_eq!(doc, back);
        }
    }

    #[test]
    fn wrong_format_rejected() {
        let text = r#"{"format":"heartnet-baseline/0","model":{"model":"gnb","priors":[0.5,0.5],"means":[[0.0],[1.0]],"variances":[[1.0],[1.0]]}}"#;
        assert!(matches!(BaselineDocument::from_json(text), Err(Error::Format(_))));
    }
}
