//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 1-4 and the dataset half of 7 need the canonical 918-row heart
//! dataset, looked up at `$HEARTNET_DATA` and then `<workspace>/data/heart.csv`.
//! Without it they are reported as FAIL with the reason; they are reproduction
//! targets and never abort the run. Criteria 5, 6, the fold-plan half of 7 and
//! 8 need no external data, and any failure among them fails this target.

#[path = "support/fd.rs"]
mod fd;
#[path = "support/fixture.rs"]
mod fixture;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use heartnet::data::{load_raw_dataset, preprocess, BinningSpec, N_FEATURES, ONE_HOT_GROUPS};
use heartnet::eval::{group_compare, kfold_split, CVResult};
use heartnet::experiment::{
    best_per_method, build, comparison_inputs, parse_results_csv, replay, run, Command,
    ConfigFile, ExperimentConfig, Overrides, MANIFEST_FILE,
};
use heartnet::models::ClassifierKind;

// Published anchors and tolerances, in accuracy percent.
const MLP_ANCHOR: f64 = 86.281;
const TREE_ANCHOR: f64 = 78.978;
const SAE_MLP_ANCHOR: f64 = 89.543;
const SAE_CNN_ANCHOR: f64 = 90.088;
const ACCURACY_TOL: f64 = 3.0;
const SWEEP_MAX_TOL: f64 = 1.0;
const GROUP_II_MEAN: f64 = 88.99;
const GROUP_II_SD: f64 = 1.13;
const GROUP_I_MEAN: f64 = 84.73;
const GROUP_I_SD: f64 = 2.61;
const GROUP_TOL: f64 = 2.0;
const SIGNIFICANCE: f64 = 0.05;
const BASELINE_BUDGET: Duration = Duration::from_secs(15 * 60);

const ROWS: usize = 918;
const HEALTHY: usize = 410;
const DISEASED: usize = 508;
const FD_TRIALS: usize = 100;

struct Line {
    id: u8,
    title: &'static str,
    pass: bool,
    /// Whether a failure fails the target (no external data involved).
    required: bool,
    detail: String,
}

fn canonical_data() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("HEARTNET_DATA").map(PathBuf::from),
        Some(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/heart.csv")),
    ];
    candidates.into_iter().flatten().find(|p| p.is_file())
}

fn pct(r: &CVResult) -> f64 {
    r.mean * 100.0
}

fn within(v: f64, anchor: f64, tol: f64) -> bool {
    (v - anchor).abs() <= tol
}

/// Results of the full experiment on the canonical data.
struct Canonical {
    baselines: Vec<CVResult>,
    baseline_time: Duration,
    sae_mlp: Vec<CVResult>,
    sae_cnn: Vec<CVResult>,
}

fn results_of(command: Command, config: &ExperimentConfig) -> Result<Vec<CVResult>, String> {
    let (bundle, _) = build(command, config).map_err(|e| e.to_string())?;
    let bytes = bundle.get("results.csv").ok_or("no results.csv produced")?;
    parse_results_csv(std::str::from_utf8(bytes).map_err(|e| e.to_string())?, command.name())
        .map_err(|e| e.to_string())
}

fn run_canonical(data: &Path) -> Result<Canonical, String> {
    let config = ExperimentConfig {
        data: data.to_path_buf(),
        ..ExperimentConfig::default()
    };
    let t0 = Instant::now();
    let baselines = results_of(Command::RunBaselines, &config)?;
    let baseline_time = t0.elapsed();
    let sweep = |kind| {
        let c = ExperimentConfig { classifier: kind, ..config.clone() };
        results_of(Command::SweepLatent, &c)
    };
    Ok(Canonical {
        baselines,
        baseline_time,
        sae_mlp: sweep(ClassifierKind::Mlp)?,
        sae_cnn: sweep(ClassifierKind::Cnn)?,
    })
}

fn best_of<'a>(best: &'a [CVResult], method: &str) -> Option<&'a CVResult> {
    best.iter().find(|r| r.method == method)
}

fn at_latent(results: &[CVResult], latent: usize) -> Option<&CVResult> {
    let at: Vec<CVResult> = results
        .iter()
        .filter(|r| r.hyperparams.get("latent") == Some(&serde_json::json!(latent)))
        .cloned()
        .collect();
    let i = heartnet::eval::select_best(&at)?;
    results.iter().find(|r| **r == at[i])
}

fn criterion_1(c: &Canonical) -> (bool, String) {
    let best = best_per_method(&c.baselines);
    let (Some(mlp), Some(tree)) = (best_of(&best, "mlp"), best_of(&best, "decision_tree")) else {
        return (false, "mlp or decision_tree missing from results".into());
    };
    let classical: Vec<&CVResult> = best
        .iter()
        .filter(|r| r.group == Some(heartnet::method::Group::Classical))
        .collect();
    let tree_last = classical.iter().all(|r| r.mean >= tree.mean);
    let ok = within(pct(mlp), MLP_ANCHOR, ACCURACY_TOL)
        && within(pct(tree), TREE_ANCHOR, ACCURACY_TOL)
        && tree_last
        && c.baseline_time <= BASELINE_BUDGET;
    (
        ok,
        format!(
            "mlp {:.3}% (target {MLP_ANCHOR}±{ACCURACY_TOL}), tree {:.3}% (target {TREE_ANCHOR}±{ACCURACY_TOL}), tree last: {tree_last}, baselines took {:.0?}",
            pct(mlp),
            pct(tree),
            c.baseline_time
        ),
    )
}

fn criterion_2(c: &Canonical) -> (bool, String) {
    let best = best_per_method(&c.baselines);
    let (Some(sae), Some(mlp)) = (at_latent(&c.sae_mlp, 100), best_of(&best, "mlp")) else {
        return (false, "missing sae_mlp latent 100 or mlp".into());
    };
    let ok = within(pct(sae), SAE_MLP_ANCHOR, ACCURACY_TOL) && sae.mean > mlp.mean;
    (
        ok,
        format!(
            "sae_mlp@100 {:.3}% (target {SAE_MLP_ANCHOR}±{ACCURACY_TOL}) vs mlp {:.3}%",
            pct(sae),
            pct(mlp)
        ),
    )
}

fn criterion_3(c: &Canonical) -> (bool, String) {
    let best = best_per_method(&c.baselines);
    let (Some(cnn), Some(sae_mlp), Some(mlp)) = (
        at_latent(&c.sae_cnn, 200),
        at_latent(&c.sae_mlp, 100),
        best_of(&best, "mlp"),
    ) else {
        return (false, "missing sae_cnn latent 200, sae_mlp latent 100 or mlp".into());
    };
    let sweep_max = c.sae_cnn.iter().map(pct).fold(f64::NEG_INFINITY, f64::max);
    let ordered = cnn.mean >= sae_mlp.mean && sae_mlp.mean > mlp.mean;
    let ok = within(pct(cnn), SAE_CNN_ANCHOR, ACCURACY_TOL)
        && pct(cnn) >= sweep_max - SWEEP_MAX_TOL
        && ordered;
    (
        ok,
        format!(
            "sae_cnn@200 {:.3}% (target {SAE_CNN_ANCHOR}±{ACCURACY_TOL}), sweep max {sweep_max:.3}%, ordering cnn>=sae_mlp>mlp: {ordered}",
            pct(cnn)
        ),
    )
}

fn criterion_4(c: &Canonical) -> (bool, String) {
    let mut all = c.baselines.clone();
    all.extend(c.sae_mlp.iter().cloned());
    all.extend(c.sae_cnn.iter().cloned());
    let g = match group_compare(&comparison_inputs(&all)) {
        Ok(g) => g,
        Err(e) => return (false, e.to_string()),
    };
    let (i, ii) = (&g.group_i, &g.group_ii);
    let ok = g.t_test.p_value < SIGNIFICANCE
        && ii.mean > i.mean
        && within(ii.mean, GROUP_II_MEAN, GROUP_TOL)
        && within(ii.sd, GROUP_II_SD, GROUP_TOL)
        && within(i.mean, GROUP_I_MEAN, GROUP_TOL)
        && within(i.sd, GROUP_I_SD, GROUP_TOL);
    (
        ok,
        format!(
            "II M={:.2} SD={:.2} (n={}), I M={:.2} SD={:.2} (n={}), t({})={:.3}, p={:.4}",
            ii.mean,
            ii.sd,
            ii.n,
            i.mean,
            i.sd,
            i.n,
            g.t_test.df.unwrap_or(f64::NAN),
            g.t_test.statistic,
            g.t_test.p_value
        ),
    )
}

fn criterion_5() -> (bool, String) {
    let checks: [(&str, fn(usize) -> Result<(), String>); 7] = [
        ("dense", fd::dense),
        ("conv2d", fd::conv2d),
        ("maxpool", fd::maxpool),
        ("bce", fd::bce),
        ("mse", fd::mse),
        ("l1", fd::l1),
        ("multitask", fd::multitask),
    ];
    let t0 = Instant::now();
    for (name, f) in checks {
        if let Err(e) = f(FD_TRIALS) {
            return (false, format!("{name}: {e}"));
        }
    }
    (
        true,
        format!(
            "7 checks x {FD_TRIALS} instances, step {:e}, rel tol {:e}, {:.1?}",
            fd::STEP,
            fd::TOL,
            t0.elapsed()
        ),
    )
}

fn criterion_6() -> (bool, String) {
    let checks: [(&str, Box<dyn Fn() -> Result<(), String>>); 6] = [
        ("tree split", Box::new(|| oracles::tree_split(300))),
        ("xor depth-2 tree", Box::new(oracles::xor_depth2)),
        ("knn ranking", Box::new(|| oracles::knn_ranking(200))),
        ("gnb posteriors", Box::new(|| oracles::gnb_posteriors(200))),
        ("ks statistic", Box::new(|| oracles::ks(300))),
        ("maxpool", Box::new(|| oracles::maxpool_windows(200))),
    ];
    for (name, f) in &checks {
        if let Err(e) = f() {
            return (false, format!("{name}: {e}"));
        }
    }
    (true, format!("tree split, xor tree, knn, gnb (tol {:e}), ks, maxpool", oracles::REAL_TOL))
}

/// Fold-plan half (no data needed) and dataset half of criterion 7.
fn criterion_7(data: Option<&Path>) -> (bool, bool, String) {
    let plan = kfold_split(ROWS, 10, 42).expect("fold plan");
    let sizes = plan.fold_sizes();
    let folds_ok = sizes.iter().filter(|&&s| s == 92).count() == 8
        && sizes.iter().filter(|&&s| s == 91).count() == 2;
    let mut detail = format!("fold sizes {sizes:?}: {}", if folds_ok { "ok" } else { "wrong" });
    let Some(path) = data else {
        detail.push_str("; canonical dataset unavailable, 918-row checks not run");
        return (folds_ok, false, detail);
    };
    let data_ok = (|| -> Result<String, String> {
        let raw = load_raw_dataset(path).map_err(|e| e.to_string())?;
        let m = preprocess(&raw, &BinningSpec::default()).map_err(|e| e.to_string())?;
        let d = m.dataset();
        if d.n_rows() != ROWS || d.n_cols() != N_FEATURES || m.column_names().len() != 24 {
            return Err(format!("{} rows x {} columns", d.n_rows(), d.n_cols()));
        }
        for (i, row) in d.rows().enumerate() {
            for g in ONE_HOT_GROUPS {
                let block = &row[g.clone()];
                let binary = block.iter().all(|&v| v == 0.0 || v == 1.0);
                if !binary || block.iter().sum::<f64>() != 1.0 {
                    return Err(format!("row {i}: one-hot block {g:?} is {block:?}"));
                }
            }
        }
        let pos = d.positives();
        if (ROWS - pos, pos) != (HEALTHY, DISEASED) {
            return Err(format!("label counts {}/{pos}", ROWS - pos));
        }
        Ok(format!("{ROWS} rows x 24 columns, one-hot valid, labels {HEALTHY}/{DISEASED}"))
    })();
    match data_ok {
        Ok(s) => {
            detail.push_str("; ");
            detail.push_str(&s);
            (folds_ok, true, detail)
        }
        Err(e) => {
            detail.push_str("; ");
            detail.push_str(&e);
            (folds_ok, false, detail)
        }
    }
}

const REPLAY_CONFIG: &str = r#"
folds = 3
methods = ["decision_tree", "random_forest", "knn", "adaboost", "gradient_boost", "gnb", "mlp", "majority"]
latent_sizes = [30, 36]

[grids.decision_tree]
max_depth = [3, "none"]

[grids.random_forest]
n_trees = [10]

[grids.adaboost]
n_rounds = [10]

[grids.gradient_boost]
n_rounds = [10]

[grids.mlp]
hidden = [[16]]
epochs = [3]

[grids.sae_mlp]
latent = [30]
epochs = [3]

[grids.sae_cnn]
latent = [36]
epochs = [2]
"#;

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).into_iter().flatten().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.file_name().is_some_and(|n| n != MANIFEST_FILE) {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&p).unwrap_or_default());
            }
        }
    }
    out
}

/// Runs every command on the synthetic fixture with reduced grids, replays
/// each from its manifest into a fresh directory and compares every byte.
fn criterion_8() -> (bool, String) {
    let res = (|| -> Result<usize, String> {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let base = ExperimentConfig::resolve(
            Some(ConfigFile::parse(REPLAY_CONFIG).map_err(|e| e.to_string())?),
            None,
            Overrides { data: Some(fixture::path()), ..Overrides::default() },
        )
        .map_err(|e| e.to_string())?;
        let dir = |n: &str| tmp.path().join(n);
        let mut steps: Vec<(Command, ExperimentConfig)> = vec![
            (Command::Preprocess, ExperimentConfig { out: dir("pre"), ..base.clone() }),
            (Command::RunBaselines, ExperimentConfig { out: dir("base"), ..base.clone() }),
            (
                Command::RunMultitask,
                ExperimentConfig { out: dir("mt"), classifier: ClassifierKind::Mlp, ..base.clone() },
            ),
            (
                Command::SweepLatent,
                ExperimentConfig { out: dir("sweep"), classifier: ClassifierKind::Cnn, ..base.clone() },
            ),
        ];
        let results = vec![dir("base/results.csv"), dir("mt/results.csv"), dir("sweep/results.csv")];
        steps.push((Command::Stats, ExperimentConfig { out: dir("stats"), results: results.clone(), ..base.clone() }));
        steps.push((Command::Report, ExperimentConfig { out: dir("report"), results, ..base.clone() }));
        let mut compared = 0;
        for (cmd, cfg) in &steps {
            run(*cmd, cfg).map_err(|e| format!("{}: {e}", cmd.name()))?;
            let again = cfg.out.with_extension("replay");
            replay(&cfg.out.join(MANIFEST_FILE), Some(again.clone()))
                .map_err(|e| format!("replay {}: {e}", cmd.name()))?;
            let (a, b) = (files(&cfg.out), files(&again));
            if a != b || a.is_empty() {
                return Err(format!("{}: replayed outputs differ", cmd.name()));
            }
            compared += a.len();
        }
        Ok(compared)
    })();
    match res {
        Ok(n) => (true, format!("6 commands replayed on the synthetic fixture, {n} files bit-identical")),
        Err(e) => (false, e),
    }
}

fn main() {
    let data = canonical_data();
    let mut lines = Vec::new();

    let canonical = match &data {
        Some(p) => run_canonical(p).map_err(|e| format!("experiment failed: {e}")),
        None => Err("canonical dataset unavailable (set HEARTNET_DATA or add data/heart.csv)".to_string()),
    };
    let dataset_criteria: [(u8, &'static str, fn(&Canonical) -> (bool, String)); 4] = [
        (1, "baseline accuracies and ranking", criterion_1),
        (2, "SAE+MLP at latent 100", criterion_2),
        (3, "SAE+CNN at latent 200 and ordering", criterion_3),
        (4, "group I vs group II statistics", criterion_4),
    ];
    for (id, title, f) in dataset_criteria {
        let (pass, detail) = match &canonical {
            Ok(c) => f(c),
            Err(e) => (false, e.clone()),
        };
        lines.push(Line { id, title, pass, required: false, detail });
    }

    let (pass, detail) = criterion_5();
    lines.push(Line { id: 5, title: "finite-difference gradient suite", pass, required: true, detail });
    let (pass, detail) = criterion_6();
    lines.push(Line { id: 6, title: "brute-force oracle suite", pass, required: true, detail });
    let (folds_ok, data_ok, detail) = criterion_7(data.as_deref());
    lines.push(Line {
        id: 7,
        title: "pipeline invariants",
        pass: folds_ok && data_ok,
        required: !folds_ok,
        detail,
    });
    let (pass, detail) = criterion_8();
    lines.push(Line { id: 8, title: "determinism via manifest replay", pass, required: true, detail });

    println!();
    for l in &lines {
        let tag = if l.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {}: {} -- {}", l.id, l.title, l.detail);
    }
    let passed = lines.iter().filter(|l| l.pass).count();
    println!("acceptance: {passed}/{} criteria passed", lines.len());
    if lines.iter().any(|l| l.required && !l.pass) {
        eprintln!("acceptance: a criterion that needs no external data failed");
        std::process::exit(1);
    }
}
