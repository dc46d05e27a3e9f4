//! Registry of every method the harness can cross-validate, with
//! hyperparameters passed as a loosely typed map so grids can come straight
//! from config files.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::baselines::{
    fit_adaboost, fit_decision_tree, fit_gnb, fit_gradient_boost, fit_random_forest,
    BoostEnsemble, ForestModel, ForestParams, GnbModel, KnnModel, TreeNode,
};
use crate::data::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::models::{
    build_model, train, train_mlp, ClassifierKind, MlpConfig, MultitaskConfig, TrainedMlp,
    TrainedModel,
};
use crate::tensor::Activation;

pub type Hyperparams = BTreeMap<String, Value>;

/// Comparison groups for the significance test: classical methods plus the
/// vanilla MLP versus the sparse-autoencoder models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "I")]
    Classical,
    #[serde(rename = "II")]
    Sae,
}

impl Group {
    pub fn label(self) -> &'static str {
        match self {
            Group::Classical => "I",
            Group::Sae => "II",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(Group::Classical),
            "II" => Ok(Group::Sae),
            other => Err(Error::InvalidArgument(format!("unknown group `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    DecisionTree,
    RandomForest,
    Knn,
    Adaboost,
    GradientBoost,
    Gnb,
    Mlp,
    SaeMlp,
    SaeCnn,
    /// Predicts the training-fold majority class; a sanity reference only.
    Majority,
}

impl MethodKind {
    pub const BASELINES: [MethodKind; 7] = [
        MethodKind::DecisionTree,
        MethodKind::RandomForest,
        MethodKind::Knn,
        MethodKind::Adaboost,
        MethodKind::GradientBoost,
        MethodKind::Gnb,
        MethodKind::Mlp,
    ];

    pub const ALL: [MethodKind; 10] = [
        MethodKind::DecisionTree,
        MethodKind::RandomForest,
        MethodKind::Knn,
        MethodKind::Adaboost,
        MethodKind::GradientBoost,
        MethodKind::Gnb,
        MethodKind::Mlp,
        MethodKind::SaeMlp,
        MethodKind::SaeCnn,
        MethodKind::Majority,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodKind::DecisionTree => "decision_tree",
            MethodKind::RandomForest => "random_forest",
            MethodKind::Knn => "knn",
            MethodKind::Adaboost => "adaboost",
            MethodKind::GradientBoost => "gradient_boost",
            MethodKind::Gnb => "gnb",
            MethodKind::Mlp => "mlp",
            MethodKind::SaeMlp => "sae_mlp",
            MethodKind::SaeCnn => "sae_cnn",
            MethodKind::Majority => "majority",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown method `{s}`; expected one of {}",
                    Self::ALL.map(|m| m.name()).join(", ")
                ))
            })
    }

    pub fn group(self) -> Option<Group> {
        match self {
            MethodKind::SaeMlp | MethodKind::SaeCnn => Some(Group::Sae),
            MethodKind::Majority => None,
            _ => Some(Group::Classical),
        }
    }

    /// Hyperparameter names the method accepts.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            MethodKind::DecisionTree => &["max_depth", "min_leaf"],
            MethodKind::RandomForest => &["n_trees", "m_features", "max_depth", "min_leaf"],
            MethodKind::Knn => &["k"],
            MethodKind::Adaboost => &["n_rounds", "base_depth"],
            MethodKind::GradientBoost => &["n_rounds", "learning_rate", "base_depth"],
            MethodKind::Gnb | MethodKind::Majority => &[],
            MethodKind::Mlp => &["hidden", "epochs", "batch_size", "learning_rate"],
            MethodKind::SaeMlp | MethodKind::SaeCnn => &[
                "latent",
                "alpha",
                "l1_lambda",
                "epochs",
                "batch_size",
                "learning_rate",
            ],
        }
    }

    pub fn classifier_kind(self) -> Option<ClassifierKind> {
        match self {
            MethodKind::SaeMlp => Some(ClassifierKind::Mlp),
            MethodKind::SaeCnn => Some(ClassifierKind::Cnn),
            _ => None,
        }
    }

    pub fn for_classifier(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Mlp => MethodKind::SaeMlp,
            ClassifierKind::Cnn => MethodKind::SaeCnn,
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fitted model that labels already-scaled rows.
pub trait Classifier: Send + Sync {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>>;
}

struct Tree(TreeNode);
struct Forest(ForestModel);
struct Boost(BoostEnsemble);
struct Gnb(GnbModel);
struct Constant(u8);

impl Classifier for Tree {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(rows.rows().map(|r| self.0.predict(r)).collect())
    }
}

impl Classifier for Forest {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(rows.rows().map(|r| self.0.predict(r)).collect())
    }
}

impl Classifier for Boost {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(rows.rows().map(|r| self.0.predict(r)).collect())
    }
}

impl Classifier for Gnb {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        rows.rows().map(|r| self.0.predict(r)).collect()
    }
}

impl Classifier for KnnModel {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        rows.rows().map(|r| KnnModel::predict(self, r)).collect()
    }
}

impl Classifier for TrainedMlp {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        TrainedMlp::predict(self, rows)
    }
}

impl Classifier for TrainedModel {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(TrainedModel::predict(self, rows)?.0)
    }
}

impl Classifier for Constant {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(vec![self.0; rows.n_rows()])
    }
}

/// Typed view over a hyperparameter map; unknown keys are rejected up front.
struct Params<'a> {
    method: MethodKind,
    map: &'a Hyperparams,
}

impl<'a> Params<'a> {
    fn new(method: MethodKind, map: &'a Hyperparams) -> Result<Self> {
        if let Some(k) = map.keys().find(|k| !method.keys().contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "{method}: unknown hyperparameter `{k}` (accepted: {})",
                method.keys().join(", ")
            )));
        }
        Ok(Params { method, map })
    }

    fn bad(&self, key: &str, want: &str) -> Error {
        Error::Config(format!(
            "{}: hyperparameter `{key}` must be {want}, got {}",
            self.method, self.map[key]
        ))
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| self.bad(key, "a non-negative integer")),
        }
    }

    /// `null`, `"none"` or a missing key mean "unbounded".
    fn opt_usize(&self, key: &str, default: Option<usize>) -> Result<Option<usize>> {
        match self.map.get(key) {
            None => Ok(default),
            Some(Value::Null) => Ok(None),
            Some(Value::String(s)) if s == "none" => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|x| Some(x as usize))
                .ok_or_else(|| self.bad(key, "an integer or \"none\"")),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| self.bad(key, "a number")),
        }
    }

    fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>> {
        match self.map.get(key) {
            None => Ok(default.to_vec()),
            Some(Value::Array(a)) => a
                .iter()
                .map(|v| v.as_u64().map(|x| x as usize))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| self.bad(key, "a list of integers")),
            Some(_) => Err(self.bad(key, "a list of integers")),
        }
    }
}

/// A method plus its hyperparameters: one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub kind: MethodKind,
    pub hyperparams: Hyperparams,
}

impl MethodSpec {
    pub fn new(kind: MethodKind, hyperparams: Hyperparams) -> Result<Self> {
        let spec = MethodSpec { kind, hyperparams };
        spec.validate()?;
        Ok(spec)
    }

    pub fn defaults(kind: MethodKind) -> Self {
        MethodSpec {
            kind,
            hyperparams: Hyperparams::new(),
        }
    }

    /// Parses every hyperparameter without fitting anything.
    pub fn validate(&self) -> Result<()> {
        let p = Params::new(self.kind, &self.hyperparams)?;
        match self.kind {
            MethodKind::DecisionTree => {
                p.opt_usize("max_depth", None)?;
                p.usize("min_leaf", 1)?;
            }
            MethodKind::RandomForest => {
                self.forest_params(&p)?;
            }
            MethodKind::Knn => {
                if p.usize("k", 5)? == 0 {
                    return Err(Error::Config("knn: k must be >= 1".into()));
                }
            }
            MethodKind::Adaboost => {
                p.usize("n_rounds", 50)?;
                p.usize("base_depth", 1)?;
            }
            MethodKind::GradientBoost => {
                p.usize("n_rounds", 100)?;
                p.f64("learning_rate", 0.1)?;
                p.usize("base_depth", 3)?;
            }
            MethodKind::Gnb | MethodKind::Majority => {}
            MethodKind::Mlp => self.mlp_config(&p, 0)?.validate()?,
            MethodKind::SaeMlp | MethodKind::SaeCnn => self.multitask_config(&p, 0)?.validate()?,
        }
        Ok(())
    }

    fn forest_params(&self, p: &Params) -> Result<ForestParams> {
        Ok(ForestParams {
            n_trees: p.usize("n_trees", 100)?,
            m_features: p.usize("m_features", 5)?,
            max_depth: p.opt_usize("max_depth", None)?,
            min_leaf: p.usize("min_leaf", 1)?,
            bootstrap: true,
        })
    }

    fn mlp_config(&self, p: &Params, seed: u64) -> Result<MlpConfig> {
        let mut c = MlpConfig {
            seed,
            ..MlpConfig::default()
        };
        c.hidden = p.usize_list("hidden", &c.hidden)?;
        c.hidden_activation = Activation::Relu;
        c.epochs = p.usize("epochs", c.epochs)?;
        c.batch_size = p.usize("batch_size", c.batch_size)?;
        c.adam.lr = p.f64("learning_rate", c.adam.lr)?;
        Ok(c)
    }

    fn multitask_config(&self, p: &Params, seed: u64) -> Result<MultitaskConfig> {
        let kind = self.kind.classifier_kind().expect("multitask method");
        let mut c = MultitaskConfig::new(kind, p.usize("latent", default_latent(kind))?);
        c.seed = seed;
        c.loss_mix_alpha = p.f64("alpha", c.loss_mix_alpha)?;
        c.sae.l1_lambda = p.f64("l1_lambda", c.sae.l1_lambda)?;
        c.epochs = p.usize("epochs", c.epochs)?;
        c.batch_size = p.usize("batch_size", c.batch_size)?;
        c.adam.lr = p.f64("learning_rate", c.adam.lr)?;
        Ok(c)
    }

    /// Full multitask configuration for this grid point (SAE methods only).
    pub fn to_multitask_config(&self, seed: u64) -> Result<MultitaskConfig> {
        if self.kind.classifier_kind().is_none() {
            return Err(Error::InvalidArgument(format!("{} is not a multitask method", self.kind)));
        }
        self.multitask_config(&Params::new(self.kind, &self.hyperparams)?, seed)
    }

    /// Fits on already-scaled training rows. `seed` drives every random
    /// choice the method makes.
    pub fn fit(&self, train_rows: &Dataset, scaler: &MinMaxScaler, seed: u64) -> Result<Box<dyn Classifier>> {
        let p = Params::new(self.kind, &self.hyperparams)?;
        Ok(match self.kind {
            MethodKind::DecisionTree => Box::new(Tree(fit_decision_tree(
                train_rows,
                p.opt_usize("max_depth", None)?,
                p.usize("min_leaf", 1)?,
            )?)),
            MethodKind::RandomForest => {
                Box::new(Forest(fit_random_forest(train_rows, &self.forest_params(&p)?, seed)?))
            }
            MethodKind::Knn => Box::new(KnnModel::fit(train_rows, p.usize("k", 5)?)?),
            MethodKind::Adaboost => Box::new(Boost(fit_adaboost(
                train_rows,
                p.usize("n_rounds", 50)?,
                p.usize("base_depth", 1)?,
                seed,
            )?)),
            MethodKind::GradientBoost => Box::new(Boost(fit_gradient_boost(
                train_rows,
                p.usize("n_rounds", 100)?,
                p.f64("learning_rate", 0.1)?,
                p.usize("base_depth", 3)?,
            )?)),
            MethodKind::Gnb => Box::new(Gnb(fit_gnb(train_rows)?)),
            MethodKind::Mlp => Box::new(train_mlp(&self.mlp_config(&p, seed)?, train_rows)?),
            MethodKind::SaeMlp | MethodKind::SaeCnn => {
                let config = self.multitask_config(&p, seed)?;
                Box::new(train(build_model(&config)?, train_rows, scaler.clone())?)
            }
            MethodKind::Majority => {
                if train_rows.n_rows() == 0 {
                    return Err(Error::EmptyDataset);
                }
                Box::new(Constant(u8::from(2 * train_rows.positives() >= train_rows.n_rows())))
            }
        })
    }
}

pub fn default_latent(kind: ClassifierKind) -> usize {
    match kind {
        ClassifierKind::Mlp => 100,
        ClassifierKind::Cnn => 200,
    }
}
