//! Results CSV round-trip, published reference constants, and the
//! comparison table.

use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{select_best, CVResult, FoldScore};
use crate::method::{Group, Hyperparams, MethodKind};

const RESULTS_HEADER: [&str; 7] = [
    "method",
    "group",
    "hyperparams",
    "fold",
    "accuracy",
    "precision",
    "recall",
];

/// One row per fold per grid point.
pub fn results_csv(results: &[CVResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(RESULTS_HEADER).map_err(fmt)?;
    for r in results {
        let hp = serde_json::to_string(&r.hyperparams).map_err(|e| Error::Format(e.to_string()))?;
        let group = r.group.map(Group::label).unwrap_or("");
        for (i, f) in r.folds.iter().enumerate() {
            w.write_record([
                r.method.clone(),
                group.to_string(),
                hp.clone(),
                i.to_string(),
                f.accuracy.to_string(),
                f.precision.to_string(),
                f.recall.to_string(),
            ])
            .map_err(fmt)?;
        }
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

/// Rebuilds CV results from a results CSV, grouping rows by
/// (method, hyperparameters) in order of first appearance.
pub fn parse_results_csv(text: &str, origin: &str) -> Result<Vec<CVResult>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(|e| Error::Format(format!("{origin}: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != RESULTS_HEADER {
        return Err(Error::Header {
            expected: RESULTS_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }
    type Key = (String, String);
    let mut groups: IndexMap<Key, (Option<Group>, Hyperparams, Vec<(usize, FoldScore)>)> =
        IndexMap::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let bad = |m: String| Error::Row { row, message: format!("{origin}: {m}") };
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let method = rec[0].to_string();
        MethodKind::parse(&method).map_err(|e| bad(e.to_string()))?;
        let group = match &rec[1] {
            "" => None,
            g => Some(Group::parse(g).map_err(|e| bad(e.to_string()))?),
        };
        let hp: Hyperparams =
            serde_json::from_str(&rec[2]).map_err(|e| bad(format!("hyperparams: {e}")))?;
        let fold: usize = rec[3].parse().map_err(|e| bad(format!("fold: {e}")))?;
        let num = |j: usize| -> Result<f64> {
            let v: f64 = rec[j]
                .parse()
                .map_err(|e| bad(format!("{}: {e}", RESULTS_HEADER[j])))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad(format!("{} {v} outside [0, 1]", RESULTS_HEADER[j])));
            }
            Ok(v)
        };
        let score = FoldScore {
            accuracy: num(4)?,
            precision: num(5)?,
            recall: num(6)?,
        };
        let key = (method, rec[2].to_string());
        groups
            .entry(key)
            .or_insert_with(|| (group, hp, Vec::new()))
            .2
            .push((fold, score));
    }
    groups
        .into_iter()
        .map(|((method, _), (group, hp, mut folds))| {
            folds.sort_by_key(|&(f, _)| f);
            if folds.iter().enumerate().any(|(i, &(f, _))| f != i) {
                return Err(Error::Format(format!(
                    "{origin}: {method} has missing or duplicate folds"
                )));
            }
            Ok(CVResult::from_folds(
                method,
                group,
                hp,
                folds.into_iter().map(|(_, s)| s).collect(),
            ))
        })
        .collect()
}

pub fn load_results(path: &Path) -> Result<Vec<CVResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results_csv(&text, &path.display().to_string())
}

/// Merges results from several files; a repeated (method, hyperparameters)
/// pair keeps its first occurrence.
pub fn merge_results(sets: Vec<Vec<CVResult>>) -> Vec<CVResult> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for r in sets.into_iter().flatten() {
        let key = (r.method.clone(), serde_json::to_string(&r.hyperparams).unwrap_or_default());
        if seen.insert(key) {
            out.push(r);
        }
    }
    out
}

/// Best grid point per method, in order of first appearance.
pub fn best_per_method(results: &[CVResult]) -> Vec<CVResult> {
    let mut by: IndexMap<&str, Vec<CVResult>> = IndexMap::new();
    for r in results {
        by.entry(r.method.as_str()).or_default().push(r.clone());
    }
    by.into_values()
        .map(|rs| rs[select_best(&rs).expect("nonempty")].clone())
        .collect()
}

/// Values entering the group test: the best configuration of every group I
/// method, and every evaluated configuration of the group II models (one
/// value per latent size and classifier).
pub fn comparison_inputs(results: &[CVResult]) -> Vec<CVResult> {
    let mut out: Vec<CVResult> = best_per_method(results)
        .into_iter()
        .filter(|r| r.group == Some(Group::Classical))
        .collect();
    out.extend(results.iter().filter(|r| r.group == Some(Group::Sae)).cloned());
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub method: String,
    pub citation: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub version: u32,
    pub reference: Vec<ReferenceRow>,
}

const REFERENCE_TOML: &str = include_str!("../../data/reference_results.toml");

/// Published accuracies bundled with the crate.
pub fn reference_table() -> ReferenceTable {
    toml::from_str(REFERENCE_TOML).expect("bundled reference table is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub source: String,
    pub method: String,
    /// Percent.
    pub accuracy: f64,
    pub sd: Option<f64>,
}

/// Reference rows followed by the best measured configuration per method,
/// the latter sorted by descending accuracy.
pub fn comparison_table(results: &[CVResult]) -> (Vec<ComparisonRow>, Vec<String>) {
    let mut rows: Vec<ComparisonRow> = reference_table()
        .reference
        .into_iter()
        .map(|r| ComparisonRow {
            source: "published".into(),
            method: r.citation,
            accuracy: r.accuracy,
            sd: None,
        })
        .collect();
    let mut warnings = Vec::new();
    if results.is_empty() {
        warnings.push("no measured results supplied; table holds reference rows only".to_string());
    }
    let mut measured: Vec<ComparisonRow> = best_per_method(results)
        .into_iter()
        .map(|r| ComparisonRow {
            source: "measured".into(),
            method: r.method,
            accuracy: r.mean * 100.0,
            sd: Some(r.sd * 100.0),
        })
        .collect();
    measured.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then(a.method.cmp(&b.method)));
    rows.extend(measured);
    (rows, warnings)
}

pub fn comparison_markdown(rows: &[ComparisonRow]) -> String {
    let mut s = String::from("| Source | Method | Accuracy (%) | SD |\n|---|---|---:|---:|\n");
    for r in rows {
        let sd = r.sd.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
        s.push_str(&format!("| {} | {} | {:.2} | {sd} |\n", r.source, r.method, r.accuracy));
    }
    s
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["source", "method", "accuracy", "sd"]).map_err(fmt)?;
    for r in rows {
        w.write_record([
            r.source.clone(),
            r.method.clone(),
            r.accuracy.to_string(),
            r.sd.map(|v| v.to_string()).unwrap_or_default(),
        ])
        .map_err(fmt)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}
