use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Format};
use super::plot::{bar_chart, line_chart, Bar, Series};
use super::report::{
    comparison_csv, comparison_inputs, comparison_markdown, comparison_table, load_results,
    merge_results, results_csv,
};
use crate::data::{encode, load_raw_dataset, BinningSpec, Dataset, FeatureMatrix, MinMaxScaler, SCALED_COLUMNS};
use crate::error::{Error, Result};
use crate::eval::{
    group_compare, grid_search, kfold_split, select_best, stratified_kfold_split, CVResult,
    FoldPlan,
};
use crate::method::{MethodKind, MethodSpec};
use crate::models::{build_model, train};
use crate::rng;

pub const MANIFEST_FORMAT: &str = "heartnet-manifest/1";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Preprocess,
    RunBaselines,
    RunMultitask,
    SweepLatent,
    Stats,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Preprocess => "preprocess",
            Command::RunBaselines => "run-baselines",
            Command::RunMultitask => "run-multitask",
            Command::SweepLatent => "sweep-latent",
            Command::Stats => "stats",
            Command::Report => "report",
        }
    }

    fn needs_dataset(self) -> bool {
        !matches!(self, Command::Stats | Command::Report)
    }
}

/// Files produced by a command, held in memory until everything succeeded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputBundle {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputBundle {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    fn add_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn digests(&self) -> BTreeMap<String, String> {
        self.files
            .iter()
            .map(|(n, b)| (n.clone(), sha256_hex(b)))
            .collect()
    }

    /// Writes every file under `dir`. If any write fails, files already
    /// written by this call are removed again.
    pub fn commit(&self, dir: &Path) -> Result<()> {
        let mut written: Vec<PathBuf> = Vec::new();
        let mut created: Vec<PathBuf> = Vec::new();
        let result = (|| {
            for (name, bytes) in &self.files {
                let path = dir.join(name);
                if let Some(parent) = path.parent() {
                    create_dirs(parent, &mut created)?;
                }
                std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
                written.push(path);
            }
            Ok(())
        })();
        if result.is_err() {
            for p in written {
                let _ = std::fs::remove_file(p);
            }
            for d in created.iter().rev() {
                let _ = std::fs::remove_dir(d);
            }
        }
        result
    }
}

/// `create_dir_all` that records every directory it had to create.
fn create_dirs(dir: &Path, created: &mut Vec<PathBuf>) -> Result<()> {
    if dir.as_os_str().is_empty() || dir.is_dir() {
        return Ok(());
    }
    if let Some(parent) = dir.parent() {
        create_dirs(parent, created)?;
    }
    std::fs::create_dir(dir).map_err(|e| Error::io(dir, e))?;
    created.push(dir.to_path_buf());
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

fn digest_file(path: &Path) -> Result<FileDigest> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: sha256_hex(&bytes),
    })
}

/// Everything needed to re-run a command and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub command: Command,
    pub version: String,
    pub config: ExperimentConfig,
    pub seeds: BTreeMap<String, u64>,
    pub dataset: Option<FileDigest>,
    pub inputs: Vec<FileDigest>,
    /// SHA-256 of every output except the manifest itself.
    pub outputs: BTreeMap<String, String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if m.format != MANIFEST_FORMAT {
            return Err(Error::Format(format!(
                "{}: unsupported manifest format `{}`",
                path.display(),
                m.format
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub command: Command,
    pub out_dir: PathBuf,
    pub bundle: OutputBundle,
    pub manifest: Manifest,
}

struct Loaded {
    data: Dataset,
    matrix: FeatureMatrix,
    zero_cholesterol: usize,
    digest: FileDigest,
}

fn load_data(config: &ExperimentConfig) -> Result<Loaded> {
    let digest = digest_file(&config.data)?;
    let raw = load_raw_dataset(&config.data)?;
    let encoded = encode(&raw, &BinningSpec::default())?;
    log::info!(
        "loaded {} rows from {} ({} with zero cholesterol)",
        raw.len(),
        config.data.display(),
        encoded.zero_cholesterol
    );
    Ok(Loaded {
        data: encoded.matrix.dataset().clone(),
        matrix: encoded.matrix,
        zero_cholesterol: encoded.zero_cholesterol,
        digest,
    })
}

pub fn fold_plan(config: &ExperimentConfig, data: &Dataset) -> Result<FoldPlan> {
    if config.stratified {
        stratified_kfold_split(data.labels(), config.folds, config.seed)
    } else {
        kfold_split(data.n_rows(), config.folds, config.seed)
    }
}

fn best_summary(r: &CVResult) -> Value {
    json!({
        "method": r.method,
        "group": r.group.map(|g| g.label()),
        "hyperparams": r.hyperparams,
        "mean_accuracy": r.mean,
        "sd_accuracy": r.sd,
        "mean_precision": r.mean_precision(),
        "mean_recall": r.mean_recall(),
        "fold_accuracies": r.fold_accuracies(),
    })
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(fmt)?;
    for r in rows {
        w.write_record(r).map_err(fmt)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

fn cmd_preprocess(config: &ExperimentConfig, l: &Loaded, out: &mut OutputBundle) -> Result<()> {
    let scaler = MinMaxScaler::fit(&l.data, &SCALED_COLUMNS)?;
    let scaled = FeatureMatrix::new(scaler.transform(&l.data)?)?;
    if config.wants(Format::Csv) {
        out.add("features.csv", scaled.to_csv_bytes()?);
    }
    if config.wants(Format::Json) {
        let pos = l.data.positives();
        out.add_json(
            "summary.json",
            &json!({
                "command": "preprocess",
                "rows": l.data.n_rows(),
                "columns": l.matrix.column_names(),
                "label_counts": {"0": l.data.n_rows() - pos, "1": pos},
                "zero_cholesterol": l.zero_cholesterol,
                "scaler": scaler,
            }),
        )?;
    }
    Ok(())
}

fn cmd_run_baselines(config: &ExperimentConfig, data: &Dataset, out: &mut OutputBundle) -> Result<()> {
    let plan = fold_plan(config, data)?;
    let mut all = Vec::new();
    let mut best = Vec::new();
    for &m in &config.methods {
        let grid = config.grid(m);
        log::info!("{m}: {} grid points x {} folds", grid.n_points(), plan.k);
        let (b, rs) = grid_search(m, &grid, data, &plan, &SCALED_COLUMNS, config.seed)?;
        log::info!("{m}: best mean accuracy {:.4}", b.mean);
        best.push(b);
        all.extend(rs);
    }
    if config.wants(Format::Csv) {
        out.add("results.csv", results_csv(&all)?);
        out.add(
            "accuracy_by_method.csv",
            csv_bytes(
                &["method", "mean_accuracy_pct", "sd_pct"],
                best.iter()
                    .map(|r| vec![r.method.clone(), (r.mean * 100.0).to_string(), (r.sd * 100.0).to_string()])
                    .collect(),
            )?,
        );
    }
    if config.wants(Format::Svg) {
        let bars: Vec<Bar> = best
            .iter()
            .map(|r| Bar {
                label: r.method.clone(),
                value: r.mean * 100.0,
                error: r.sd * 100.0,
            })
            .collect();
        out.add(
            "accuracy_by_method.svg",
            bar_chart(&format!("Mean {}-fold accuracy by method", plan.k), "accuracy (%)", &bars),
        );
    }
    if config.wants(Format::Json) {
        let mut ranking: Vec<&CVResult> = best.iter().collect();
        ranking.sort_by(|a, b| b.mean.total_cmp(&a.mean).then(a.method.cmp(&b.method)));
        out.add_json(
            "summary.json",
            &json!({
                "command": "run-baselines",
                "rows": data.n_rows(),
                "fold_sizes": plan.fold_sizes(),
                "best": best.iter().map(best_summary).collect::<Vec<_>>(),
                "ranking": ranking.iter().map(|r| r.method.as_str()).collect::<Vec<_>>(),
                "grid_points_evaluated": all.len(),
            }),
        )?;
    }
    Ok(())
}

fn cmd_run_multitask(config: &ExperimentConfig, data: &Dataset, out: &mut OutputBundle) -> Result<()> {
    let method = MethodKind::for_classifier(config.classifier);
    let plan = fold_plan(config, data)?;
    let grid = config.grid(method);
    let (best, all) = grid_search(method, &grid, data, &plan, &SCALED_COLUMNS, config.seed)?;
    log::info!("{method}: best mean accuracy {:.4}", best.mean);

    // final model on all rows with the selected configuration
    let spec = MethodSpec::new(method, best.hyperparams.clone())?;
    let mt = spec.to_multitask_config(rng::derive_str(config.seed, "final-model"))?;
    let scaler = MinMaxScaler::fit(data, &SCALED_COLUMNS)?;
    let model = train(build_model(&mt)?, &scaler.transform(data)?, scaler)?;
    for (name, bytes) in model.to_files()? {
        out.add(format!("model/{name}"), bytes);
    }

    if config.wants(Format::Csv) {
        out.add("results.csv", results_csv(&all)?);
        out.add(
            "training_history.csv",
            csv_bytes(
                &["epoch", "total", "bce", "mse", "l1", "train_accuracy"],
                model
                    .history
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        vec![
                            i.to_string(),
                            h.total.to_string(),
                            h.bce.to_string(),
                            h.mse.to_string(),
                            h.l1.to_string(),
                            h.train_accuracy.to_string(),
                        ]
                    })
                    .collect(),
            )?,
        );
    }
    if config.wants(Format::Json) {
        out.add_json(
            "summary.json",
            &json!({
                "command": "run-multitask",
                "classifier": config.classifier.name(),
                "rows": data.n_rows(),
                "fold_sizes": plan.fold_sizes(),
                "best": best_summary(&best),
                "all": all.iter().map(best_summary).collect::<Vec<_>>(),
                "final_model": {"config": mt, "final_epoch": model.history.last()},
            }),
        )?;
    }
    Ok(())
}

fn cmd_sweep_latent(config: &ExperimentConfig, data: &Dataset, out: &mut OutputBundle) -> Result<()> {
    let method = MethodKind::for_classifier(config.classifier);
    let plan = fold_plan(config, data)?;
    let mut grid = config.grid(method);
    grid.dims.shift_remove("latent");
    grid.dims.shift_insert(0, "latent".to_string(), config.latent_sizes.iter().map(|&l| json!(l)).collect());
    let (best, all) = grid_search(method, &grid, data, &plan, &SCALED_COLUMNS, config.seed)?;

    // best over the remaining dimensions at each latent size
    let mut per_latent: Vec<(usize, CVResult)> = Vec::new();
    for &l in &config.latent_sizes {
        let at: Vec<CVResult> = all
            .iter()
            .filter(|r| r.hyperparams.get("latent") == Some(&json!(l)))
            .cloned()
            .collect();
        if let Some(i) = select_best(&at) {
            per_latent.push((l, at[i].clone()));
        }
    }
    let name = format!("latent_curve_{}", config.classifier.name());
    if config.wants(Format::Csv) {
        out.add("results.csv", results_csv(&all)?);
        out.add(
            format!("{name}.csv"),
            csv_bytes(
                &["latent", "mean_accuracy_pct", "sd_pct"],
                per_latent
                    .iter()
                    .map(|(l, r)| vec![l.to_string(), (r.mean * 100.0).to_string(), (r.sd * 100.0).to_string()])
                    .collect(),
            )?,
        );
    }
    if config.wants(Format::Svg) {
        let series = Series {
            name: method.name().to_string(),
            points: per_latent.iter().map(|(l, r)| (*l as f64, r.mean * 100.0, r.sd * 100.0)).collect(),
        };
        out.add(
            format!("{name}.svg"),
            line_chart(
                &format!("Accuracy vs latent size ({method})"),
                "latent size",
                "accuracy (%)",
                &[series],
            ),
        );
    }
    if config.wants(Format::Json) {
        out.add_json(
            "summary.json",
            &json!({
                "command": "sweep-latent",
                "classifier": config.classifier.name(),
                "rows": data.n_rows(),
                "fold_sizes": plan.fold_sizes(),
                "best": best_summary(&best),
                "best_latent": best.hyperparams.get("latent"),
                "curve": per_latent.iter().map(|(l, r)| json!({
                    "latent": l, "mean_accuracy": r.mean, "sd_accuracy": r.sd,
                    "hyperparams": r.hyperparams,
                })).collect::<Vec<_>>(),
            }),
        )?;
    }
    Ok(())
}

fn load_inputs(config: &ExperimentConfig) -> Result<(Vec<CVResult>, Vec<FileDigest>)> {
    let mut sets = Vec::new();
    let mut digests = Vec::new();
    for p in &config.results {
        digests.push(digest_file(p)?);
        sets.push(load_results(p)?);
    }
    Ok((merge_results(sets), digests))
}

fn cmd_stats(results: &[CVResult], config: &ExperimentConfig, out: &mut OutputBundle) -> Result<()> {
    if config.results.is_empty() {
        return Err(Error::Config("stats needs at least one results file".into()));
    }
    let inputs = comparison_inputs(results);
    let cmp = group_compare(&inputs)?;
    if config.wants(Format::Csv) {
        let mut rows = Vec::new();
        for g in [&cmp.group_i, &cmp.group_ii] {
            for (m, v) in g.members.iter().zip(&g.values) {
                rows.push(vec![g.group.label().to_string(), m.clone(), v.to_string()]);
            }
        }
        out.add("group_values.csv", csv_bytes(&["group", "member", "accuracy_pct"], rows)?);
    }
    if config.wants(Format::Json) || !config.wants(Format::Csv) {
        out.add_json(
            "stats.json",
            &json!({
                "command": "stats",
                "alpha": 0.05,
                "significant": cmp.t_test.p_value < 0.05,
                "comparison": cmp,
            }),
        )?;
    }
    Ok(())
}

fn cmd_report(results: &[CVResult], config: &ExperimentConfig, out: &mut OutputBundle) -> Result<()> {
    let (rows, warnings) = comparison_table(results);
    for w in &warnings {
        log::warn!("{w}");
    }
    out.add("comparison.md", comparison_markdown(&rows));
    if config.wants(Format::Csv) {
        out.add("comparison.csv", comparison_csv(&rows)?);
    }
    if config.wants(Format::Svg) {
        let bars: Vec<Bar> = rows
            .iter()
            .map(|r| Bar {
                label: if r.source == "published" { format!("{} (pub.)", r.method) } else { r.method.clone() },
                value: r.accuracy,
                error: r.sd.unwrap_or(0.0),
            })
            .collect();
        out.add("comparison.svg", bar_chart("Published vs measured accuracy", "accuracy (%)", &bars));
    }
    if config.wants(Format::Json) {
        out.add_json(
            "report.json",
            &json!({"command": "report", "rows": rows, "warnings": warnings}),
        )?;
    }
    Ok(())
}

/// Computes every output of `command` in memory, without touching the
/// output directory.
pub fn build(command: Command, config: &ExperimentConfig) -> Result<(OutputBundle, Manifest)> {
    config.validate()?;
    let mut out = OutputBundle::default();
    let mut seeds = BTreeMap::from([("master".to_string(), config.seed)]);
    let mut dataset = None;
    let mut inputs = Vec::new();
    if command.needs_dataset() {
        let l = load_data(config)?;
        dataset = Some(l.digest.clone());
        match command {
            Command::Preprocess => cmd_preprocess(config, &l, &mut out)?,
            Command::RunBaselines => {
                for m in &config.methods {
                    seeds.insert(m.name().to_string(), rng::derive_str(config.seed, m.name()));
                }
                cmd_run_baselines(config, &l.data, &mut out)?
            }
            Command::RunMultitask | Command::SweepLatent => {
                let m = MethodKind::for_classifier(config.classifier);
                seeds.insert(m.name().to_string(), rng::derive_str(config.seed, m.name()));
                if command == Command::RunMultitask {
                    seeds.insert("final-model".into(), rng::derive_str(config.seed, "final-model"));
                    cmd_run_multitask(config, &l.data, &mut out)?
                } else {
                    cmd_sweep_latent(config, &l.data, &mut out)?
                }
            }
            Command::Stats | Command::Report => unreachable!(),
        }
    } else {
        let (results, digests) = load_inputs(config)?;
        inputs = digests;
        match command {
            Command::Stats => cmd_stats(&results, config, &mut out)?,
            _ => cmd_report(&results, config, &mut out)?,
        }
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        command,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seeds,
        dataset,
        inputs,
        outputs: out.digests(),
    };
    Ok((out, manifest))
}

/// Runs a command and writes its outputs plus `manifest.json` to
/// `config.out`. Nothing is written unless every step succeeded.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunOutcome> {
    let (mut bundle, manifest) = build(command, config)?;
    bundle.add_json(MANIFEST_FILE, &manifest)?;
    bundle.commit(&config.out)?;
    Ok(RunOutcome {
        command,
        out_dir: config.out.clone(),
        bundle,
        manifest,
    })
}

/// Re-runs the command recorded in a manifest, checking that the inputs are
/// unchanged and that every output is bit-identical to the recorded digest.
/// Outputs go to `out` (or the manifest's directory) only if all match.
pub fn replay(manifest_path: &Path, out: Option<PathBuf>) -> Result<RunOutcome> {
    let recorded = Manifest::load(manifest_path)?;
    let mut config = recorded.config.clone();
    if let Some(o) = out {
        config.out = o;
    }
    if let Some(d) = &recorded.dataset {
        let now = digest_file(&d.path)?;
        if now.sha256 != d.sha256 {
            return Err(Error::Mismatch(format!(
                "dataset {} changed since the recorded run",
                d.path.display()
            )));
        }
    }
    for d in &recorded.inputs {
        if digest_file(&d.path)?.sha256 != d.sha256 {
            return Err(Error::Mismatch(format!("input {} changed", d.path.display())));
        }
    }
    let (mut bundle, mut manifest) = build(recorded.command, &config)?;
    let differing: Vec<&String> = recorded
        .outputs
        .iter()
        .filter(|(k, v)| manifest.outputs.get(*k) != Some(v))
        .map(|(k, _)| k)
        .chain(manifest.outputs.keys().filter(|k| !recorded.outputs.contains_key(*k)))
        .collect();
    if !differing.is_empty() {
        return Err(Error::Mismatch(format!(
            "outputs differ from the recorded run: {}",
            differing.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    manifest.config.out = config.out.clone();
    bundle.add_json(MANIFEST_FILE, &manifest)?;
    bundle.commit(&config.out)?;
    Ok(RunOutcome {
        command: recorded.command,
        out_dir: config.out,
        bundle,
        manifest,
    })
}
