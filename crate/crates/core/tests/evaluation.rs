//! Cross-validation harness, grid search and group statistics.

#[path = "support/fixture.rs"]
mod fixture;

use std::sync::Mutex;

use heartnet::baselines::KnnModel;
use heartnet::data::{Dataset, SCALED_COLUMNS};
use heartnet::eval::{
    grid_search, group_compare, kfold_split, run_cv, run_cv_with, select_best,
    stratified_kfold_split, t_test_independent, CVResult, FoldScore, GridSpec,
};
use heartnet::method::{Classifier, Group, MethodKind, MethodSpec};
use heartnet::Result;
use proptest::prelude::*;
use serde_json::json;

struct Constant(u8);

impl Classifier for Constant {
    fn predict(&self, rows: &Dataset) -> Result<Vec<u8>> {
        Ok(vec![self.0; rows.n_rows()])
    }
}

#[test]
fn scaler_never_sees_test_rows() {
    let data = fixture::features();
    let plan = kfold_split(data.n_rows(), 10, 3).unwrap();
    let seen_test = Mutex::new(vec![0usize; data.n_rows()]);
    run_cv_with("probe", None, &Default::default(), &data, &plan, &SCALED_COLUMNS, 3, |fold, _| {
        let mut is_test = vec![false; data.n_rows()];
        for &i in &fold.test_idx {
            is_test[i] = true;
        }
        assert!(fold.train_idx.iter().all(|&i| !is_test[i]), "train/test overlap");
        assert_eq!(fold.train_idx.len() + fold.test_idx.len(), data.n_rows());
        // Scaler parameters must be reproducible from training rows alone.
        assert_eq!(fold.scaler.fitted_rows, fold.train_idx.len());
        for (k, &c) in SCALED_COLUMNS.iter().enumerate() {
            let col = fold.train_idx.iter().map(|&i| data.get(i, c));
            let lo = col.clone().fold(f64::INFINITY, f64::min);
            let hi = col.fold(f64::NEG_INFINITY, f64::max);
            assert_eq!((fold.scaler.min[k], fold.scaler.max[k]), (lo, hi));
        }
        assert!(fold.train.rows().all(|r| SCALED_COLUMNS.iter().all(|&c| (0.0..=1.0).contains(&r[c]))));
        let mut seen = seen_test.lock().unwrap();
        for &i in &fold.test_idx {
            seen[i] += 1;
        }
        Ok(Box::new(Constant(1)))
    })
    .unwrap();
    assert!(seen_test.into_inner().unwrap().iter().all(|&n| n == 1), "each row tested once");
}

#[test]
fn majority_dummy_scores_the_positive_rate() {
    let data = fixture::features();
    let plan = kfold_split(data.n_rows(), 10, 42).unwrap();
    let spec = MethodSpec::defaults(MethodKind::Majority);
    let r = run_cv(&spec, &data, &plan, &SCALED_COLUMNS, 42).unwrap();
    let rate = data.positives() as f64 / data.n_rows() as f64;
    assert_eq!(data.positives(), 508);
    // Fold sizes differ by one row, so the fold mean is only near the pooled rate.
    assert!((r.mean - rate).abs() < 2e-3, "{} vs {rate}", r.mean);
    let pooled: f64 = plan
        .fold_sizes()
        .iter()
        .zip(&r.folds)
        .map(|(&n, f)| f.accuracy * n as f64)
        .sum();
    assert!((pooled - 508.0).abs() < 1e-9);
    assert!(r.folds.iter().all(|f| f.recall == 1.0));
}

#[test]
fn grid_search_evaluates_every_point_in_order() {
    let data = fixture::features();
    let plan = kfold_split(data.n_rows(), 5, 1).unwrap();
    let grid = GridSpec::new()
        .with("max_depth", vec![json!(1), json!(3), json!("none")])
        .with("min_leaf", vec![json!(1), json!(20)]);
    let (best, all) =
        grid_search(MethodKind::DecisionTree, &grid, &data, &plan, &SCALED_COLUMNS, 1).unwrap();
    let points = grid.points().unwrap();
    assert_eq!(all.len(), 6);
    for (r, p) in all.iter().zip(&points) {
        assert_eq!(&r.hyperparams, p);
        assert_eq!(r.folds.len(), 5);
    }
    assert_eq!(all[1].hyperparams["min_leaf"], json!(20));
    assert_eq!(best, all[select_best(&all).unwrap()]);
    assert!(all.iter().all(|r| best.mean >= r.mean));
}

#[test]
fn single_point_grid_equals_plain_cv() {
    let data = fixture::features();
    let plan = kfold_split(data.n_rows(), 4, 9).unwrap();
    let grid = GridSpec::new().with("k", vec![json!(7)]);
    let (best, all) = grid_search(MethodKind::Knn, &grid, &data, &plan, &SCALED_COLUMNS, 9).unwrap();
    let spec = MethodSpec::new(MethodKind::Knn, [("k".to_string(), json!(7))].into()).unwrap();
    assert_eq!(all.len(), 1);
    assert_eq!(best, run_cv(&spec, &data, &plan, &SCALED_COLUMNS, 9).unwrap());
}

#[test]
fn cv_is_reproducible_and_parallelism_does_not_matter() {
    let data = fixture::features();
    let plan = stratified_kfold_split(data.labels(), 10, 5).unwrap();
    let spec = MethodSpec::defaults(MethodKind::RandomForest);
    let a = run_cv(&spec, &data, &plan, &SCALED_COLUMNS, 5).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = pool.install(|| run_cv(&spec, &data, &plan, &SCALED_COLUMNS, 5).unwrap());
    assert_eq!(a, b);
}

#[test]
fn knn_with_k_equal_n_predicts_the_majority() {
    let data = fixture::features();
    let idx: Vec<usize> = (0..51).collect();
    let train = data.select(&idx);
    let majority = u8::from(2 * train.positives() > train.n_rows());
    let m = KnnModel::fit(&train, train.n_rows()).unwrap();
    assert!((0..train.n_rows()).all(|i| m.predict(data.row(i)).unwrap() == majority));
}

fn result(method: &str, group: Group, acc: f64) -> CVResult {
    let f = FoldScore { accuracy: acc, precision: 0.5, recall: 0.5 };
    CVResult::from_folds(method, Some(group), [("x".to_string(), json!(acc))].into(), vec![f, f])
}

#[test]
fn identical_groups_give_t_zero_and_p_one() {
    let vals = [0.81, 0.84, 0.86, 0.9];
    let mut rs: Vec<CVResult> = vals.iter().map(|&v| result("knn", Group::Classical, v)).collect();
    rs.extend(vals.iter().map(|&v| result("sae_cnn", Group::Sae, v)));
    let c = group_compare(&rs).unwrap();
    assert_eq!(c.t_test.statistic, 0.0);
    assert!((c.t_test.p_value - 1.0).abs() < 1e-12);
    assert_eq!(c.ks_two_sample.statistic, 0.0);
    assert_eq!(c.t_test.df, Some(6.0));
}

#[test]
fn one_sided_input_is_an_empty_group_error() {
    let rs = vec![result("knn", Group::Classical, 0.8), result("gnb", Group::Classical, 0.82)];
    let err = group_compare(&rs).unwrap_err();
    assert!(err.to_string().contains("II"), "{err}");
}

#[test]
fn pooled_t_example() {
    let r = t_test_independent(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0], true).unwrap();
    assert!((r.statistic + 1.224745).abs() < 1e-6);
    assert_eq!(r.df, Some(4.0));
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..1.0, 2..12)
        .prop_filter("needs spread", |v| v.iter().any(|&x| (x - v[0]).abs() > 1e-3))
}

proptest! {
    #[test]
    fn t_is_antisymmetric(a in sample(), b in sample(), pooled in any::<bool>()) {
        let ab = t_test_independent(&a, &b, pooled).unwrap();
        let ba = t_test_independent(&b, &a, pooled).unwrap();
        prop_assert!((ab.statistic + ba.statistic).abs() < 1e-9);
        prop_assert!((ab.p_value - ba.p_value).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ab.p_value));
    }

    #[test]
    fn t_is_location_invariant(a in sample(), b in sample(), c in -0.4f64..0.4) {
        let shift = |v: &[f64]| v.iter().map(|x| x + c).collect::<Vec<_>>();
        let t0 = t_test_independent(&a, &b, true).unwrap();
        let t1 = t_test_independent(&shift(&a), &shift(&b), true).unwrap();
        prop_assert!((t0.statistic - t1.statistic).abs() < 1e-6 * t0.statistic.abs().max(1.0));
    }

    #[test]
    fn group_t_is_location_invariant(a in sample(), b in sample(), c in -0.4f64..0.0) {
        let build = |shift: f64| {
            let mut rs: Vec<CVResult> = a.iter().map(|&v| result("gnb", Group::Classical, v + shift)).collect();
            rs.extend(b.iter().map(|&v| result("sae_mlp", Group::Sae, v + shift)));
            group_compare(&rs).unwrap()
        };
        let (g0, g1) = (build(0.0), build(c));
        prop_assert!((g0.t_test.statistic - g1.t_test.statistic).abs() < 1e-6 * g0.t_test.statistic.abs().max(1.0));
        prop_assert_eq!(g0.ks_two_sample.statistic, g1.ks_two_sample.statistic);
    }
}
