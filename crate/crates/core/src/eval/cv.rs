use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, mean, precision, recall, sample_sd};
use crate::data::{Dataset, MinMaxScaler};
use crate::error::{Error, Result};
use crate::method::{Classifier, Group, Hyperparams, MethodSpec};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Fold index of every row.
    pub assignments: Vec<usize>,
    pub seed: u64,
    pub stratified: bool,
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!(
            "fold count must lie in [2, {n}], got {k}"
        )));
    }
    Ok(())
}

/// Seeded shuffle, then a contiguous partition: the first `n % k` folds get
/// one extra row.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(n, k)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::rng(rng::derive_str(seed, "kfold")));
    let mut assignments = vec![0; n];
    let (base, extra) = (n / k, n % k);
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &row in &order[pos..pos + size] {
            assignments[row] = f;
        }
        pos += size;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        stratified: false,
    })
}

/// Stratified variant: each class is shuffled and dealt round-robin over the
/// folds, continuing where the previous class stopped, so fold sizes still
/// differ by at most one.
pub fn stratified_kfold_split(labels: &[u8], k: usize, seed: u64) -> Result<FoldPlan> {
    check_k(labels.len(), k)?;
    let mut r = rng::rng(rng::derive_str(seed, "stratified-kfold"));
    let mut assignments = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rows.shuffle(&mut r);
        for row in rows {
            assignments[row] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
        stratified: true,
    })
}

impl FoldPlan {
    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.assignments {
            s[f] += 1;
        }
        s
    }

    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.assignments[i] != fold).collect()
    }
}

/// One fold's train/test split with the scaler fitted on training rows only.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub fold: usize,
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub scaler: MinMaxScaler,
    pub train: Dataset,
    pub test: Dataset,
}

pub fn prepare_fold(
    data: &Dataset,
    plan: &FoldPlan,
    fold: usize,
    scale_columns: &[usize],
) -> Result<PreparedFold> {
    if plan.n_rows() != data.n_rows() {
        return Err(Error::Shape(format!(
            "fold plan covers {} rows, dataset has {}",
            plan.n_rows(),
            data.n_rows()
        )));
    }
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let raw_train = data.select(&train_idx);
    let scaler = MinMaxScaler::fit(&raw_train, scale_columns)?;
    let train = scaler.transform(&raw_train)?;
    let test = scaler.transform(&data.select(&test_idx))?;
    Ok(PreparedFold {
        fold,
        train_idx,
        test_idx,
        scaler,
        train,
        test,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldScore {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CVResult {
    pub method: String,
    pub group: Option<Group>,
    pub hyperparams: Hyperparams,
    pub folds: Vec<FoldScore>,
    pub mean: f64,
    pub sd: f64,
}

impl CVResult {
    pub fn from_folds(
        method: impl Into<String>,
        group: Option<Group>,
        hyperparams: Hyperparams,
        folds: Vec<FoldScore>,
    ) -> Self {
        let acc: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        CVResult {
            method: method.into(),
            group,
            hyperparams,
            mean: mean(&acc),
            sd: sample_sd(&acc),
            folds,
        }
    }

    pub fn fold_accuracies(&self) -> Vec<f64> {
        self.folds.iter().map(|f| f.accuracy).collect()
    }

    pub fn mean_precision(&self) -> f64 {
        mean(&self.folds.iter().map(|f| f.precision).collect::<Vec<_>>())
    }

    pub fn mean_recall(&self) -> f64 {
        mean(&self.folds.iter().map(|f| f.recall).collect::<Vec<_>>())
    }
}

/// Seed handed to the method for fold `fold`.
pub fn fold_seed(seed: u64, method: &str, fold: usize) -> u64 {
    rng::derive(rng::derive_str(seed, method), fold as u64)
}

/// Cross-validates an arbitrary fitting function. Folds run in parallel; a
/// failure in any fold aborts with that fold's index attached.
pub fn run_cv_with<F>(
    method: &str,
    group: Option<Group>,
    hyperparams: &Hyperparams,
    data: &Dataset,
    plan: &FoldPlan,
    scale_columns: &[usize],
    seed: u64,
    fit: F,
) -> Result<CVResult>
where
    F: Fn(&PreparedFold, u64) -> Result<Box<dyn Classifier>> + Sync,
{
    let folds: Vec<FoldScore> = (0..plan.k)
        .into_par_iter()
        .map(|f| {
            let run = || -> Result<FoldScore> {
                let prepared = prepare_fold(data, plan, f, scale_columns)?;
                let model = fit(&prepared, fold_seed(seed, method, f))?;
                let pred = model.predict(&prepared.test)?;
                let y = prepared.test.labels();
                Ok(FoldScore {
                    accuracy: accuracy(&pred, y)?,
                    precision: precision(&pred, y)?,
                    recall: recall(&pred, y)?,
                })
            };
            run().map_err(|e| Error::Fold {
                fold: f,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    Ok(CVResult::from_folds(method, group, hyperparams.clone(), folds))
}

pub fn run_cv(
    spec: &MethodSpec,
    data: &Dataset,
    plan: &FoldPlan,
    scale_columns: &[usize],
    seed: u64,
) -> Result<CVResult> {
    spec.validate()?;
    run_cv_with(
        spec.kind.name(),
        spec.kind.group(),
        &spec.hyperparams,
        data,
        plan,
        scale_columns,
        seed,
        |fold, s| spec.fit(&fold.train, &fold.scaler, s),
    )
}
