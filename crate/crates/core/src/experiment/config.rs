use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::data::default_dataset_path;
use crate::error::{Error, Result};
use crate::eval::GridSpec;
use crate::method::{default_latent, MethodKind, MethodSpec};
use crate::models::ClassifierKind;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "HEARTNET_OUT_DIR";

pub const DEFAULT_LATENT_SIZES: [usize; 6] = [50, 100, 150, 200, 250, 300];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::Config(format!("unknown format `{other}` (csv, json, svg)"))),
        }
    }
}

/// Fully resolved settings for one run. Serialized verbatim into the run
/// manifest, so everything that influences numbers must live here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub folds: usize,
    pub stratified: bool,
    /// Methods run by `run-baselines`.
    pub methods: Vec<MethodKind>,
    /// Classifier used by `run-multitask` and `sweep-latent`.
    pub classifier: ClassifierKind,
    pub latent_sizes: Vec<usize>,
    pub formats: Vec<Format>,
    /// Grid per method name.
    pub grids: BTreeMap<String, GridSpec>,
    /// Input results files for `stats` and `report`.
    pub results: Vec<PathBuf>,
}

/// Default grids, sized to finish a full baseline run in minutes on one core.
pub fn default_grids() -> BTreeMap<String, GridSpec> {
    let mut g = BTreeMap::new();
    g.insert(
        "decision_tree".into(),
        GridSpec::new()
            .with("max_depth", vec![json!(3), json!(5), json!(7), json!("none")])
            .with("min_leaf", vec![json!(1), json!(5)]),
    );
    g.insert(
        "random_forest".into(),
        GridSpec::new()
            .with("n_trees", vec![json!(100)])
            .with("m_features", vec![json!(3), json!(5), json!(8)])
            .with("max_depth", vec![json!(8), json!("none")]),
    );
    g.insert(
        "knn".into(),
        GridSpec::new().with("k", [3, 5, 7, 9, 11, 15].map(|k| json!(k)).to_vec()),
    );
    g.insert(
        "adaboost".into(),
        GridSpec::new()
            .with("n_rounds", vec![json!(50), json!(100)])
            .with("base_depth", vec![json!(1), json!(2)]),
    );
    g.insert(
        "gradient_boost".into(),
        GridSpec::new()
            .with("n_rounds", vec![json!(100)])
            .with("learning_rate", vec![json!(0.05), json!(0.1)])
            .with("base_depth", vec![json!(2), json!(3)]),
    );
    g.insert("gnb".into(), GridSpec::new());
    g.insert(
        "mlp".into(),
        GridSpec::new().with("learning_rate", vec![json!(0.001), json!(0.003)]),
    );
    g.insert("majority".into(), GridSpec::new());
    for kind in [ClassifierKind::Mlp, ClassifierKind::Cnn] {
        g.insert(
            MethodKind::for_classifier(kind).name().into(),
            GridSpec::new().with("latent", vec![json!(default_latent(kind))]),
        );
    }
    g
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data: default_dataset_path(),
            out: PathBuf::from("results"),
            seed: 42,
            folds: 10,
            stratified: false,
            methods: MethodKind::BASELINES.to_vec(),
            classifier: ClassifierKind::Cnn,
            latent_sizes: DEFAULT_LATENT_SIZES.to_vec(),
            formats: Format::ALL.to_vec(),
            grids: default_grids(),
            results: Vec::new(),
        }
    }
}

/// On-disk TOML layout; every key optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub stratified: Option<bool>,
    pub methods: Option<Vec<String>>,
    pub classifier: Option<String>,
    pub latent_sizes: Option<Vec<usize>>,
    pub formats: Option<Vec<String>>,
    #[serde(default)]
    pub grids: BTreeMap<String, GridSpec>,
    pub results: Option<Vec<PathBuf>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// A grid file is a TOML document whose tables are method names.
pub fn load_grid_file(path: &Path) -> Result<BTreeMap<String, GridSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Command-line values; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub folds: Option<usize>,
    pub stratified: Option<bool>,
    pub classifier: Option<ClassifierKind>,
    pub formats: Option<Vec<Format>>,
    pub grid_file: Option<PathBuf>,
    pub results: Option<Vec<PathBuf>>,
}

impl ExperimentConfig {
    /// Defaults, then the config file, then the environment, then flags.
    pub fn resolve(
        file: Option<ConfigFile>,
        env_out: Option<PathBuf>,
        flags: Overrides,
    ) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        if let Some(f) = file {
            c.apply_file(f)?;
        }
        if let Some(out) = env_out {
            c.out = out;
        }
        if let Some(v) = flags.data {
            c.data = v;
        }
        if let Some(v) = flags.out {
            c.out = v;
        }
        if let Some(v) = flags.seed {
            c.seed = v;
        }
        if let Some(v) = flags.folds {
            c.folds = v;
        }
        if let Some(v) = flags.stratified {
            c.stratified = v;
        }
        if let Some(v) = flags.classifier {
            c.classifier = v;
        }
        if let Some(v) = flags.formats {
            c.formats = v;
        }
        if let Some(path) = flags.grid_file {
            c.grids.extend(load_grid_file(&path)?);
        }
        if let Some(v) = flags.results {
            c.results = v;
        }
        c.formats.sort();
        c.formats.dedup();
        c.validate()?;
        Ok(c)
    }

    fn apply_file(&mut self, f: ConfigFile) -> Result<()> {
        if let Some(v) = f.data {
            self.data = v;
        }
        if let Some(v) = f.out {
            self.out = v;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.folds {
            self.folds = v;
        }
        if let Some(v) = f.stratified {
            self.stratified = v;
        }
        if let Some(v) = f.methods {
            self.methods = v.iter().map(|m| MethodKind::parse(m)).collect::<Result<_>>()?;
        }
        if let Some(v) = f.classifier {
            self.classifier = ClassifierKind::parse(&v)?;
        }
        if let Some(v) = f.latent_sizes {
            self.latent_sizes = v;
        }
        if let Some(v) = f.formats {
            self.formats = v.iter().map(|s| Format::parse(s)).collect::<Result<_>>()?;
        }
        self.grids.extend(f.grids);
        if let Some(v) = f.results {
            self.results = v;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if self.latent_sizes.is_empty() {
            return Err(Error::Config("latent_sizes is empty".into()));
        }
        for (name, grid) in &self.grids {
            let kind = MethodKind::parse(name)
                .map_err(|_| Error::Config(format!("grid for unknown method `{name}`")))?;
            for point in grid.points()? {
                MethodSpec::new(kind, point)?;
            }
        }
        Ok(())
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    pub fn grid(&self, method: MethodKind) -> GridSpec {
        self.grids.get(method.name()).cloned().unwrap_or_default()
    }
}
