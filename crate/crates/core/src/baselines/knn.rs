use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Lazy learner: the model is the stored training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: Dataset,
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The `k` nearest rows as `(row index, distance)`, nearest first; equal
/// distances are ordered by row index.
pub fn nearest(train: &Dataset, query: &[f64], k: usize) -> Result<Vec<(usize, f64)>> {
    if train.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::InvalidArgument(format!(
            "k must lie in [1, {}], got {k}",
            train.n_rows()
        )));
    }
    if query.len() != train.n_cols() {
        return Err(Error::Shape(format!(
            "query has {} features, training set {}",
            query.len(),
            train.n_cols()
        )));
    }
    let mut d: Vec<(usize, f64)> = train
        .rows()
        .enumerate()
        .map(|(i, r)| (i, euclidean(r, query)))
        .collect();
    d.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    d.truncate(k);
    Ok(d)
}

/// Majority class among the `k` nearest rows. A tied vote goes to the class
/// of the lowest-indexed row among the neighbours.
pub fn knn_classify(train: &Dataset, query: &[f64], k: usize) -> Result<u8> {
    let nn = nearest(train, query, k)?;
    let mut counts = [0usize; 2];
    for &(i, _) in &nn {
        counts[usize::from(train.labels()[i])] += 1;
    }
    Ok(match counts[0].cmp(&counts[1]) {
        std::cmp::Ordering::Greater => 0,
        std::cmp::Ordering::Less => 1,
        std::cmp::Ordering::Equal => {
            let first = nn.iter().map(|&(i, _)| i).min().unwrap();
            train.labels()[first]
        }
    })
}

impl KnnModel {
    pub fn fit(train: &Dataset, k: usize) -> Result<Self> {
        if train.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if k == 0 || k > train.n_rows() {
            return Err(Error::InvalidArgument(format!(
                "k must lie in [1, {}], got {k}",
                train.n_rows()
            )));
        }
        Ok(KnnModel {
            k,
            train: train.clone(),
        })
    }

    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        knn_classify(&self.train, row, self.k)
    }

    /// Fraction of positive neighbours.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        let nn = nearest(&self.train, row, self.k)?;
        Ok(nn.iter().filter(|&&(i, _)| self.train.labels()[i] == 1).count() as f64 / self.k as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_example() {
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]), 5.0);
    }

    #[test]
    fn exact_match_k1() {
        let d = Dataset::from_rows(&[vec![0.0, 0.0], vec![3.0, 4.0]], &[0, 1]).unwrap();
        assert_eq!(knn_classify(&d, &[3.0, 4.0], 1).unwrap(), 1);
        assert_eq!(nearest(&d, &[0.0, 0.0], 2).unwrap()[1], (1, 5.0));
    }

    #[test]
    fn k_out_of_range() {
        let d = Dataset::from_rows(&[vec![0.0]], &[0]).unwrap();
        assert!(knn_classify(&d, &[0.0], 0).is_err());
        assert!(knn_classify(&d, &[0.0], 2).is_err());
        let empty = Dataset::new(0, 1, vec![], vec![]).unwrap();
        assert!(matches!(knn_classify(&empty, &[0.0], 1), Err(Error::EmptyDataset)));
    }

    #[test]
    fn distance_tie_prefers_lower_index() {
        let d = Dataset::from_rows(&[vec![1.0], vec![-1.0]], &[1, 0]).unwrap();
        assert_eq!(knn_classify(&d, &[0.0], 1).unwrap(), 1);
        assert_eq!(knn_classify(&d, &[0.0], 2).unwrap(), 1);
    }
}
