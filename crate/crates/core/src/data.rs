//! Ingestion and feature engineering for the clinical heart-disease table.
//!
//! The raw file has twelve columns (eleven clinical features plus the label).
//! [`encode`] turns each record into 24 engineered columns:
//!
//! | index | name                | source                                 |
//! |-------|---------------------|----------------------------------------|
//! | 0-2   | `age_young`, `age_adult`, `age_elder` | age binned at (40, 60)  |
//! | 3-5   | `bp_low`, `bp_medium`, `bp_high`      | resting BP at (120, 140) |
//! | 6-8   | `chol_low`, `chol_medium`, `chol_high`| cholesterol at (200, 240)|
//! | 9-12  | `cp_TA`, `cp_ATA`, `cp_NAP`, `cp_ASY` | chest pain one-hot       |
//! | 13-15 | `ecg_Normal`, `ecg_ST`, `ecg_LVH`     | resting ECG one-hot      |
//! | 16-18 | `slope_Up`, `slope_Flat`, `slope_Down`| ST slope one-hot         |
//! | 19    | `sex`               | label encoded over (F, M)              |
//! | 20    | `exercise_angina`   | label encoded over (N, Y)              |
//! | 21    | `fasting_bs`        | copied                                 |
//! | 22    | `max_hr`            | min-max scaled                         |
//! | 23    | `oldpeak`           | min-max scaled                         |
//!
//! Scaling parameters are fitted with [`MinMaxScaler`] on training rows only;
//! cross-validation refits them per fold.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RAW_HEADER: [&str; 12] = [
    "Age",
    "Sex",
    "ChestPainType",
    "RestingBP",
    "Cholesterol",
    "FastingBS",
    "RestingECG",
    "MaxHR",
    "ExerciseAngina",
    "Oldpeak",
    "ST_Slope",
    "HeartDisease",
];

pub const N_FEATURES: usize = 24;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "age_young",
    "age_adult",
    "age_elder",
    "bp_low",
    "bp_medium",
    "bp_high",
    "chol_low",
    "chol_medium",
    "chol_high",
    "cp_TA",
    "cp_ATA",
    "cp_NAP",
    "cp_ASY",
    "ecg_Normal",
    "ecg_ST",
    "ecg_LVH",
    "slope_Up",
    "slope_Flat",
    "slope_Down",
    "sex",
    "exercise_angina",
    "fasting_bs",
    "max_hr",
    "oldpeak",
];

/// Column ranges of the six grouped encodings; each row sums to 1 within a group.
pub const ONE_HOT_GROUPS: [std::ops::Range<usize>; 6] = [0..3, 3..6, 6..9, 9..13, 13..16, 16..19];

/// Columns rescaled by [`MinMaxScaler`] in the engineered matrix.
pub const SCALED_COLUMNS: [usize; 2] = [22, 23];

pub const MAX_HR_RANGE: (i64, i64) = (60, 202);

pub const CHEST_PAIN_VOCAB: [&str; 4] = ["TA", "ATA", "NAP", "ASY"];
pub const RESTING_ECG_VOCAB: [&str; 3] = ["Normal", "ST", "LVH"];
pub const ST_SLOPE_VOCAB: [&str; 3] = ["Up", "Flat", "Down"];
pub const SEX_VOCAB: [&str; 2] = ["F", "M"];
pub const ANGINA_VOCAB: [&str; 2] = ["N", "Y"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChestPain {
    TA,
    ATA,
    NAP,
    ASY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RestingEcg {
    Normal,
    ST,
    LVH,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StSlope {
    Up,
    Flat,
    Down,
}

macro_rules! vocab_enum {
    ($ty:ident, $vocab:ident, [$($variant:ident),+]) => {
        impl $ty {
            const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn parse(token: &str) -> Result<Self> {
                let idx = vocab_index(token, &$vocab)?;
                Ok(Self::ALL[idx])
            }

            pub fn index(self) -> usize {
                Self::ALL.iter().position(|v| *v == self).unwrap()
            }

            pub fn token(self) -> &'static str {
                $vocab[self.index()]
            }
        }
    };
}

vocab_enum!(Sex, SEX_VOCAB, [F, M]);
vocab_enum!(ChestPain, CHEST_PAIN_VOCAB, [TA, ATA, NAP, ASY]);
vocab_enum!(RestingEcg, RESTING_ECG_VOCAB, [Normal, ST, LVH]);
vocab_enum!(StSlope, ST_SLOPE_VOCAB, [Up, Flat, Down]);

fn vocab_index(token: &str, vocabulary: &[&str]) -> Result<usize> {
    vocabulary
        .iter()
        .position(|v| *v == token)
        .ok_or_else(|| Error::UnknownCategory {
            token: token.to_string(),
            vocabulary: vocabulary.iter().map(|s| s.to_string()).collect(),
        })
}

/// One validated row of the raw clinical table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub age: i64,
    pub sex: Sex,
    pub chest_pain_type: ChestPain,
    pub resting_bp: i64,
    pub cholesterol: i64,
    pub fasting_bs: u8,
    pub resting_ecg: RestingEcg,
    pub max_hr: i64,
    pub exercise_angina: bool,
    pub oldpeak: f64,
    pub st_slope: StSlope,
    pub heart_disease: u8,
}

impl RawRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(MAX_HR_RANGE.0..=MAX_HR_RANGE.1).contains(&self.max_hr) {
            return Err(format!(
                "MaxHR {} outside [{}, {}]",
                self.max_hr, MAX_HR_RANGE.0, MAX_HR_RANGE.1
            ));
        }
        if self.fasting_bs > 1 {
            return Err(format!("FastingBS must be 0 or 1, got {}", self.fasting_bs));
        }
        if self.heart_disease > 1 {
            return Err(format!("HeartDisease must be 0 or 1, got {}", self.heart_disease));
        }
        if !self.oldpeak.is_finite() {
            return Err("Oldpeak is not finite".into());
        }
        Ok(())
    }

    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        fn int(name: &str, s: &str) -> std::result::Result<i64, String> {
            s.parse::<i64>()
                .map_err(|_| format!("{name}: cannot parse `{s}` as an integer"))
        }
        fn binary(name: &str, s: &str) -> std::result::Result<u8, String> {
            match s {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(format!("{name}: expected 0 or 1, got `{s}`")),
            }
        }
        fn cat<T>(name: &str, r: Result<T>) -> std::result::Result<T, String> {
            r.map_err(|e| format!("{name}: {e}"))
        }

        let oldpeak = fields[9]
            .parse::<f64>()
            .map_err(|_| format!("Oldpeak: cannot parse `{}` as a number", fields[9]))?;
        let record = RawRecord {
            age: int("Age", fields[0])?,
            sex: cat("Sex", Sex::parse(fields[1]))?,
            chest_pain_type: cat("ChestPainType", ChestPain::parse(fields[2]))?,
            resting_bp: int("RestingBP", fields[3])?,
            cholesterol: int("Cholesterol", fields[4])?,
            fasting_bs: binary("FastingBS", fields[5])?,
            resting_ecg: cat("RestingECG", RestingEcg::parse(fields[6]))?,
            max_hr: int("MaxHR", fields[7])?,
            exercise_angina: cat("ExerciseAngina", vocab_index(fields[8], &ANGINA_VOCAB))? == 1,
            oldpeak,
            st_slope: cat("ST_Slope", StSlope::parse(fields[10]))?,
            heart_disease: binary("HeartDisease", fields[11])?,
        };
        record.validate()?;
        Ok(record)
    }

    fn to_fields(&self) -> [String; 12] {
        [
            self.age.to_string(),
            self.sex.token().to_string(),
            self.chest_pain_type.token().to_string(),
            self.resting_bp.to_string(),
            self.cholesterol.to_string(),
            self.fasting_bs.to_string(),
            self.resting_ecg.token().to_string(),
            self.max_hr.to_string(),
            ANGINA_VOCAB[usize::from(self.exercise_angina)].to_string(),
            self.oldpeak.to_string(),
            self.st_slope.token().to_string(),
            self.heart_disease.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawDataset {
    pub records: Vec<RawRecord>,
    pub source_path: String,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// (negatives, positives)
    pub fn label_counts(&self) -> (usize, usize) {
        let pos = self.records.iter().filter(|r| r.heart_disease == 1).count();
        (self.records.len() - pos, pos)
    }
}

/// Reads and validates the raw clinical CSV. Rows are numbered from 1
/// (the first line after the header) in error messages.
pub fn load_raw_dataset(path: impl AsRef<Path>) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found != RAW_HEADER {
        return Err(Error::Header {
            expected: RAW_HEADER.join(","),
            found: found.join(","),
        });
    }

    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = row.map_err(|e| Error::Row {
            row: row_no,
            message: e.to_string(),
        })?;
        if row.len() != RAW_HEADER.len() {
            return Err(Error::Row {
                row: row_no,
                message: format!("expected {} fields, found {}", RAW_HEADER.len(), row.len()),
            });
        }
        let fields: Vec<&str> = row.iter().collect();
        let record = RawRecord::from_fields(&fields).map_err(|message| Error::Row {
            row: row_no,
            message,
        })?;
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(RawDataset {
        records,
        source_path: path.display().to_string(),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{}: {other:?}", path.display())),
    }
}

/// Writes records back in the canonical raw layout.
pub fn write_raw_dataset(path: impl AsRef<Path>, dataset: &RawDataset) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    writer.write_record(RAW_HEADER).map_err(|e| csv_error(path, e))?;
    for r in &dataset.records {
        writer.write_record(r.to_fields()).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Two ascending cut points splitting a numeric feature into low/medium/high.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub low: f64,
    pub high: f64,
}

impl Thresholds {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(Error::Config(format!(
                "bin thresholds must be finite and strictly ascending, got ({low}, {high})"
            )));
        }
        Ok(Thresholds { low, high })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningSpec {
    pub age: Thresholds,
    pub resting_bp: Thresholds,
    pub cholesterol: Thresholds,
}

impl Default for BinningSpec {
    fn default() -> Self {
        BinningSpec {
            age: Thresholds { low: 40.0, high: 60.0 },
            resting_bp: Thresholds { low: 120.0, high: 140.0 },
            cholesterol: Thresholds { low: 200.0, high: 240.0 },
        }
    }
}

impl BinningSpec {
    pub fn validate(&self) -> Result<()> {
        for t in [self.age, self.resting_bp, self.cholesterol] {
            Thresholds::new(t.low, t.high)?;
        }
        Ok(())
    }
}

/// Low/medium/high one-hot triple. The medium bin is `[low, high)`.
pub fn bin_numeric(value: f64, thresholds: Thresholds) -> [f64; 3] {
    if value < thresholds.low {
        [1.0, 0.0, 0.0]
    } else if value < thresholds.high {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    }
}

pub fn one_hot(category: &str, vocabulary: &[&str]) -> Result<Vec<f64>> {
    let idx = vocab_index(category, vocabulary)?;
    let mut v = vec![0.0; vocabulary.len()];
    v[idx] = 1.0;
    Ok(v)
}

pub fn label_encode(category: &str, vocabulary: &[&str; 2]) -> Result<u8> {
    Ok(vocab_index(category, vocabulary)? as u8)
}

/// Dense row-major feature matrix with binary labels.
///
/// This is the general container consumed by every learner; [`FeatureMatrix`]
/// adds the fixed 24-column schema on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Vec<u8>,
}

impl Dataset {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::Shape(format!(
                "{rows} rows but {} labels",
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidArgument(format!("labels must be 0/1, got {l}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix contains NaN or Inf".into()));
        }
        Ok(Dataset {
            rows,
            cols,
            values,
            labels,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: &[u8]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Dataset::new(rows.len(), cols, rows.concat(), labels.to_vec())
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.cols);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            rows: indices.len(),
            cols: self.cols,
            values,
            labels,
        }
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }
}

/// The engineered 24-column matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    data: Dataset,
    column_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(data: Dataset) -> Result<Self> {
        if data.n_cols() != N_FEATURES {
            return Err(Error::Shape(format!(
                "feature matrix must have {N_FEATURES} columns, got {}",
                data.n_cols()
            )));
        }
        for (r, row) in data.rows().enumerate() {
            for group in ONE_HOT_GROUPS.iter().cloned() {
                let cells = &row[group.clone()];
                let sum: f64 = cells.iter().sum();
                if cells.iter().any(|&v| v != 0.0 && v != 1.0) || sum != 1.0 {
                    return Err(Error::Row {
                        row: r + 1,
                        message: format!("columns {group:?} are not a valid one-hot group"),
                    });
                }
            }
            for c in 19..22 {
                if row[c] != 0.0 && row[c] != 1.0 {
                    return Err(Error::Row {
                        row: r + 1,
                        message: format!("column {} must be 0 or 1", FEATURE_NAMES[c]),
                    });
                }
            }
        }
        Ok(FeatureMatrix {
            data,
            column_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn into_dataset(self) -> Dataset {
        self.data
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn n_rows(&self) -> usize {
        self.data.n_rows()
    }

    pub fn labels(&self) -> &[u8] {
        self.data.labels()
    }

    /// CSV bytes with the fixed 24-name header plus `label`.
    pub fn to_csv_bytes(&self) -> Result<Vec<u8>> {
        let fmt = |e: csv::Error| Error::Format(e.to_string());
        let mut writer = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = self.column_names.iter().map(String::as_str).collect();
        header.push("label");
        writer.write_record(&header).map_err(fmt)?;
        for (row, label) in self.data.rows().zip(self.data.labels()) {
            let mut fields: Vec<String> = row.iter().map(f64::to_string).collect();
            fields.push(label.to_string());
            writer.write_record(&fields).map_err(fmt)?;
        }
        writer.into_inner().map_err(|e| Error::Format(e.to_string()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_bytes()?).map_err(|e| Error::io(path, e))
    }
}

/// Result of [`encode`]: numeric columns are still in raw units.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub matrix: FeatureMatrix,
    /// Records with a cholesterol reading of 0 (kept, binned as "low").
    pub zero_cholesterol: usize,
}

pub fn encode_record(r: &RawRecord, spec: &BinningSpec) -> [f64; N_FEATURES] {
    let mut row = [0.0; N_FEATURES];
    row[0..3].copy_from_slice(&bin_numeric(r.age as f64, spec.age));
    row[3..6].copy_from_slice(&bin_numeric(r.resting_bp as f64, spec.resting_bp));
    row[6..9].copy_from_slice(&bin_numeric(r.cholesterol as f64, spec.cholesterol));
    row[9 + r.chest_pain_type.index()] = 1.0;
    row[13 + r.resting_ecg.index()] = 1.0;
    row[16 + r.st_slope.index()] = 1.0;
    row[19] = r.sex.index() as f64;
    row[20] = f64::from(u8::from(r.exercise_angina));
    row[21] = f64::from(r.fasting_bs);
    row[22] = r.max_hr as f64;
    row[23] = r.oldpeak;
    row
}

/// Builds the 24-column matrix without fitting any scaler.
pub fn encode(raw: &RawDataset, spec: &BinningSpec) -> Result<Encoded> {
    spec.validate()?;
    if raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut values = Vec::with_capacity(raw.len() * N_FEATURES);
    let mut labels = Vec::with_capacity(raw.len());
    let mut zero_cholesterol = 0;
    for (i, r) in raw.records.iter().enumerate() {
        r.validate().map_err(|message| Error::Row {
            row: i + 1,
            message,
        })?;
        if r.cholesterol == 0 {
            zero_cholesterol += 1;
        }
        values.extend_from_slice(&encode_record(r, spec));
        labels.push(r.heart_disease);
    }
    if zero_cholesterol > 0 {
        log::warn!("{zero_cholesterol} records report a cholesterol of 0; binned as low");
    }
    let data = Dataset::new(raw.len(), N_FEATURES, values, labels)?;
    Ok(Encoded {
        matrix: FeatureMatrix::new(data)?,
        zero_cholesterol,
    })
}

/// Encodes every record and min-max scales `max_hr` and `oldpeak` using all
/// rows. For held-out evaluation fit a [`MinMaxScaler`] on training rows instead.
pub fn preprocess(raw: &RawDataset, spec: &BinningSpec) -> Result<FeatureMatrix> {
    let encoded = encode(raw, spec)?;
    let scaler = MinMaxScaler::fit(encoded.matrix.dataset(), &SCALED_COLUMNS)?;
    FeatureMatrix::new(scaler.transform(encoded.matrix.dataset())?)
}

/// Per-column min-max scaling fitted on one dataset and applied to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub columns: Vec<usize>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    /// Number of rows the parameters were fitted on.
    pub fitted_rows: usize,
}

impl MinMaxScaler {
    pub fn fit(data: &Dataset, columns: &[usize]) -> Result<Self> {
        if data.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Some(&c) = columns.iter().find(|&&c| c >= data.n_cols()) {
            return Err(Error::Shape(format!(
                "scaler column {c} out of range for {} columns",
                data.n_cols()
            )));
        }
        let mut min = vec![f64::INFINITY; columns.len()];
        let mut max = vec![f64::NEG_INFINITY; columns.len()];
        for row in data.rows() {
            for (k, &c) in columns.iter().enumerate() {
                min[k] = min[k].min(row[c]);
                max[k] = max[k].max(row[c]);
            }
        }
        Ok(MinMaxScaler {
            columns: columns.to_vec(),
            min,
            max,
            fitted_rows: data.n_rows(),
        })
    }

    /// Identity scaler (no columns).
    pub fn identity() -> Self {
        MinMaxScaler {
            columns: Vec::new(),
            min: Vec::new(),
            max: Vec::new(),
            fitted_rows: 0,
        }
    }

    pub fn scale_value(&self, k: usize, v: f64) -> f64 {
        let range = self.max[k] - self.min[k];
        if range > 0.0 {
            (v - self.min[k]) / range
        } else {
            0.0
        }
    }

    /// Values outside the fitted range map outside [0, 1]; that is not an error.
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if let Some(&c) = self.columns.iter().find(|&&c| c >= data.n_cols()) {
            return Err(Error::Shape(format!(
                "scaler column {c} out of range for {} columns",
                data.n_cols()
            )));
        }
        let mut out = data.clone();
        let cols = out.cols;
        for row in out.values.chunks_exact_mut(cols.max(1)) {
            for (k, &c) in self.columns.iter().enumerate() {
                row[c] = self.scale_value(k, row[c]);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for MinMaxScaler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.columns.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "col{}: [{}, {}]", c, self.min[k], self.max[k])?;
        }
        Ok(())
    }
}

/// Convenience: path of the default dataset, overridable via `HEARTNET_DATA`.
pub fn default_dataset_path() -> PathBuf {
    std::env::var_os("HEARTNET_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/heart.csv"))
}
