//! The bundled synthetic 918-row fixture (see tests/fixtures/README.md).

#![allow(dead_code)]

use std::path::PathBuf;

use heartnet::data::{load_raw_dataset, preprocess, BinningSpec, Dataset, MinMaxScaler, SCALED_COLUMNS};

pub fn path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/synthetic_heart.csv")
}

/// Encoded rows in raw units.
pub fn features() -> Dataset {
    let raw = load_raw_dataset(path()).unwrap();
    preprocess(&raw, &BinningSpec::default()).unwrap().into_dataset()
}

/// Encoded rows with the scaled columns fitted on all rows.
pub fn scaled() -> (Dataset, MinMaxScaler) {
    let d = features();
    let s = MinMaxScaler::fit(&d, &SCALED_COLUMNS).unwrap();
    (s.transform(&d).unwrap(), s)
}

/// Deterministic subset of `n` rows, for tests that train networks.
pub fn scaled_subset(n: usize) -> (Dataset, MinMaxScaler) {
    let (d, s) = scaled();
    let step = d.n_rows() / n;
    let idx: Vec<usize> = (0..n).map(|i| i * step).collect();
    (d.select(&idx), s)
}
