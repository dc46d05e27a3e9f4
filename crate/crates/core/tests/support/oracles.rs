//! Brute-force reference implementations for the tree, kNN, naive Bayes,
//! max-pooling and KS computations, each checked on random instances of at
//! most 30 rows. Shared by the oracle tests and the acceptance suite.

use heartnet::baselines::{best_split, fit_decision_tree, fit_gnb, knn_classify, nearest};
use heartnet::data::Dataset;
use heartnet::eval::ks_statistic;
use heartnet::rng;
use heartnet::tensor::{maxpool2d, Tensor};
use rand::Rng;

pub const REAL_TOL: f64 = 1e-9;

/// Integer-valued features so that ties between rows are common.
fn random_dataset(r: &mut impl Rng, rows: usize, cols: usize, levels: i32) -> Dataset {
    let values = (0..rows * cols).map(|_| f64::from(r.gen_range(0..levels))).collect();
    let labels = (0..rows).map(|_| r.gen_range(0..2u8)).collect();
    Dataset::new(rows, cols, values, labels).unwrap()
}

fn gini_counts(c0: usize, c1: usize) -> f64 {
    let n = (c0 + c1) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 as f64 / n, c1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

/// Every (feature, midpoint) candidate scored independently from scratch;
/// the first strictly better candidate in (feature, ascending threshold)
/// order wins.
fn oracle_split(data: &Dataset, min_leaf: usize) -> Option<(usize, f64, f64)> {
    let n = data.n_rows();
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..data.n_cols() {
        let mut vals: Vec<f64> = (0..n).map(|i| data.get(i, f)).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        for w in vals.windows(2) {
            let t = 0.5 * (w[0] + w[1]);
            let mut l = [0usize; 2];
            let mut rr = [0usize; 2];
            for i in 0..n {
                let c = usize::from(data.labels()[i]);
                if data.get(i, f) < t {
                    l[c] += 1;
                } else {
                    rr[c] += 1;
                }
            }
            let (nl, nr) = (l[0] + l[1], rr[0] + rr[1]);
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let imp = (nl as f64 * gini_counts(l[0], l[1]) + nr as f64 * gini_counts(rr[0], rr[1]))
                / n as f64;
            if best.map_or(true, |b| imp < b.2) {
                best = Some((f, t, imp));
            }
        }
    }
    best
}

pub fn tree_split(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(11);
    for t in 0..trials {
        let rows = r.gen_range(2..=30);
        let cols = r.gen_range(1..=4);
        let levels = r.gen_range(2..8);
        let data = random_dataset(&mut r, rows, cols, levels);
        let min_leaf = r.gen_range(1..=3);
        let weights = vec![1.0; rows];
        let all_rows: Vec<usize> = (0..rows).collect();
        let features: Vec<usize> = (0..cols).collect();
        let got = best_split(&data, &all_rows, &weights, &features, min_leaf)
            .map(|s| (s.feature, s.threshold, s.impurity));
        let want = oracle_split(&data, min_leaf);
        let same = match (got, want) {
            (None, None) => true,
            (Some(a), Some(b)) => a.0 == b.0 && a.1 == b.1 && (a.2 - b.2).abs() <= REAL_TOL,
            _ => false,
        };
        if !same {
            return Err(format!("trial {t}: split {got:?} but oracle {want:?}"));
        }
    }
    Ok(())
}

/// Best training accuracy of any depth-<=2 tree, by exhaustive search over
/// every root split and every pair of child splits.
fn oracle_depth2_accuracy(data: &Dataset) -> f64 {
    let n = data.n_rows();
    let candidates: Vec<(usize, f64)> = (0..data.n_cols())
        .flat_map(|f| {
            let mut v: Vec<f64> = (0..n).map(|i| data.get(i, f)).collect();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.windows(2).map(|w| (f, 0.5 * (w[0] + w[1]))).collect::<Vec<_>>()
        })
        .collect();
    let majority_correct = |rows: &[usize]| {
        let ones = rows.iter().filter(|&&i| data.labels()[i] == 1).count();
        ones.max(rows.len() - ones)
    };
    let best_leaf_or_split = |rows: &[usize]| {
        let mut best = majority_correct(rows);
        for &(f, t) in &candidates {
            let (l, rr): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| data.get(i, f) < t);
            best = best.max(majority_correct(&l) + majority_correct(&rr));
        }
        best
    };
    let all: Vec<usize> = (0..n).collect();
    let mut best = best_leaf_or_split(&all);
    for &(f, t) in &candidates {
        let (l, rr): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| data.get(i, f) < t);
        best = best.max(best_leaf_or_split(&l) + best_leaf_or_split(&rr));
    }
    best as f64 / n as f64
}

pub fn xor_depth2() -> Result<(), String> {
    let data = Dataset::from_rows(
        &[vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
        &[0, 1, 1, 0],
    )
    .unwrap();
    let tree = fit_decision_tree(&data, Some(2), 1).map_err(|e| e.to_string())?;
    let correct = (0..4).filter(|&i| tree.predict(data.row(i)) == data.labels()[i]).count();
    let acc = correct as f64 / 4.0;
    let oracle = oracle_depth2_accuracy(&data);
    if acc == oracle && acc == 1.0 {
        Ok(())
    } else {
        Err(format!("depth-2 tree accuracy {acc}, oracle {oracle}"))
    }
}

pub fn knn_ranking(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(22);
    for t in 0..trials {
        let cols = r.gen_range(1..=4);
        let values: Vec<f64> = (0..20 * cols).map(|_| r.gen_range(-5.0..5.0)).collect();
        let labels: Vec<u8> = (0..20).map(|_| r.gen_range(0..2u8)).collect();
        let train = Dataset::new(20, cols, values, labels).unwrap();
        let query: Vec<f64> = (0..cols).map(|_| r.gen_range(-5.0..5.0)).collect();
        let mut all: Vec<(f64, usize)> = (0..20)
            .map(|i| {
                let d2: f64 = train.row(i).iter().zip(&query).map(|(a, b)| (a - b).powi(2)).sum();
                (d2.sqrt(), i)
            })
            .collect();
        all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let want: Vec<usize> = all[..3].iter().map(|p| p.1).collect();
        let got = nearest(&train, &query, 3).map_err(|e| e.to_string())?;
        let got_idx: Vec<usize> = got.iter().map(|p| p.0).collect();
        if got_idx != want {
            return Err(format!("trial {t}: neighbours {got_idx:?}, oracle {want:?}"));
        }
        for (g, w) in got.iter().zip(&all) {
            if (g.1 - w.0).abs() > REAL_TOL {
                return Err(format!("trial {t}: distance {} vs oracle {}", g.1, w.0));
            }
        }
        let ones = want.iter().filter(|&&i| train.labels()[i] == 1).count();
        let vote = u8::from(ones >= 2);
        let pred = knn_classify(&train, &query, 3).map_err(|e| e.to_string())?;
        if pred != vote {
            return Err(format!("trial {t}: vote {pred}, oracle {vote}"));
        }
    }
    Ok(())
}

/// Posteriors from the Gaussian density formula evaluated directly in linear
/// space, with maximum-likelihood (divide-by-n) variances.
fn oracle_posteriors(data: &Dataset, query: &[f64]) -> [f64; 2] {
    let n = data.n_rows() as f64;
    let mut joint = [0.0; 2];
    for c in 0..2u8 {
        let rows: Vec<usize> = (0..data.n_rows()).filter(|&i| data.labels()[i] == c).collect();
        let nc = rows.len() as f64;
        let mut p = nc / n;
        for (j, &x) in query.iter().enumerate() {
            let mu = rows.iter().map(|&i| data.get(i, j)).sum::<f64>() / nc;
            let var = rows.iter().map(|&i| (data.get(i, j) - mu).powi(2)).sum::<f64>() / nc;
            p *= (-(x - mu).powi(2) / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        }
        joint[usize::from(c)] = p;
    }
    let z = joint[0] + joint[1];
    [joint[0] / z, joint[1] / z]
}

pub fn gnb_posteriors(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(33);
    for t in 0..trials {
        let rows = r.gen_range(6..=30);
        let mut values = Vec::with_capacity(rows * 2);
        let mut labels = Vec::with_capacity(rows);
        for i in 0..rows {
            // Both classes present with at least two rows each.
            let y = if i < 4 { (i % 2) as u8 } else { r.gen_range(0..2u8) };
            let shift = if y == 1 { 1.0 } else { -1.0 };
            values.push(shift + r.gen_range(-1.5..1.5));
            values.push(0.5 * shift + r.gen_range(-2.0..2.0));
            labels.push(y);
        }
        let data = Dataset::new(rows, 2, values, labels).unwrap();
        let model = fit_gnb(&data).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let q = [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)];
            let got = model.posteriors(&q).map_err(|e| e.to_string())?;
            let want = oracle_posteriors(&data, &q);
            if (got[0] - want[0]).abs() > REAL_TOL || (got[1] - want[1]).abs() > REAL_TOL {
                return Err(format!("trial {t}: posteriors {got:?}, oracle {want:?}"));
            }
        }
    }
    Ok(())
}

/// `sup_x |F_a(x) - F_b(x)|` evaluated at every observed value.
pub fn oracle_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64;
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) - ecdf(b, x)).abs())
        .fold(0.0, f64::max)
}

pub fn ks(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(44);
    for t in 0..trials {
        let (na, nb) = (r.gen_range(1..=15), r.gen_range(1..=15));
        let levels = r.gen_range(2..20);
        let a: Vec<f64> = (0..na).map(|_| f64::from(r.gen_range(0..levels))).collect();
        let b: Vec<f64> = (0..nb).map(|_| f64::from(r.gen_range(0..levels)) + 0.5 * f64::from(r.gen_range(0..2))).collect();
        let got = ks_statistic(&a, &b);
        let want = oracle_ks(&a, &b);
        if (got - want).abs() > REAL_TOL {
            return Err(format!("trial {t}: D = {got}, oracle {want} for {a:?} vs {b:?}"));
        }
    }
    Ok(())
}

pub fn maxpool_windows(trials: usize) -> Result<(), String> {
    let mut r = rng::rng(55);
    for t in 0..trials {
        let x: Vec<f64> = (0..16).map(|_| r.gen_range(-10.0..10.0)).collect();
        let (y, _) = maxpool2d(&Tensor::new(vec![1, 1, 4, 4], x.clone()).unwrap(), (2, 2))
            .map_err(|e| e.to_string())?;
        for (oi, oj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let mut m = f64::NEG_INFINITY;
            for p in 0..2 {
                for q in 0..2 {
                    m = m.max(x[(2 * oi + p) * 4 + 2 * oj + q]);
                }
            }
            if y.data()[oi * 2 + oj] != m {
                return Err(format!("trial {t}: window ({oi},{oj}) {} vs {m}", y.data()[oi * 2 + oj]));
            }
        }
    }
    Ok(())
}
