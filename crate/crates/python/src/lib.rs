//! Python bindings: preprocessing, fold plans, metrics and tests, the
//! multitask models and the classical baselines.
//!
//! Feature matrices cross the boundary as lists of rows in raw units (the
//! output of `preprocess`); models fit and apply their own min-max scaler.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};
use serde_json::Value;

use heartnet::data::{self, BinningSpec, Dataset, MinMaxScaler, SCALED_COLUMNS};
use heartnet::error::ErrorKind;
use heartnet::eval;
use heartnet::method::{Classifier, Hyperparams, MethodKind, MethodSpec};
use heartnet::models::{self, ClassifierKind, TrainedModel};

fn err(e: heartnet::Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Io => PyIOError::new_err(msg),
        ErrorKind::Numeric => PyArithmeticError::new_err(msg),
        ErrorKind::Validation => PyValueError::new_err(msg),
    }
}

fn json_to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(u)) => u.into_pyobject(py)?.into_any(),
            _ => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(a) => {
            let items = a.iter().map(|x| json_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn py_to_json(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        Ok(Value::Null)
    } else if obj.is_instance_of::<PyBool>() {
        Ok(Value::Bool(obj.extract()?))
    } else if obj.is_instance_of::<PyInt>() {
        Ok(Value::from(obj.extract::<i64>()?))
    } else if obj.is_instance_of::<PyFloat>() {
        Ok(Value::from(obj.extract::<f64>()?))
    } else if obj.is_instance_of::<PyString>() {
        Ok(Value::String(obj.extract()?))
    } else if obj.is_instance_of::<PyList>() || obj.is_instance_of::<PyTuple>() {
        obj.try_iter()?.map(|x| py_to_json(&x?)).collect::<PyResult<Vec<_>>>().map(Value::Array)
    } else {
        Err(PyValueError::new_err(format!(
            "unsupported hyperparameter value {obj}"
        )))
    }
}

fn serialize_to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let v = value
        .serialize(serde_json::value::Serializer)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn hyperparams(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Hyperparams> {
    let mut hp = Hyperparams::new();
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            hp.insert(k.extract()?, py_to_json(&v)?);
        }
    }
    Ok(hp)
}

fn dataset(rows: Vec<Vec<f64>>, labels: Option<Vec<u8>>) -> PyResult<Dataset> {
    let labels = labels.unwrap_or_else(|| vec![0; rows.len()]);
    if labels.len() != rows.len() {
        return Err(PyValueError::new_err(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    Dataset::from_rows(&rows, &labels).map_err(err)
}

fn method(name: &str) -> PyResult<MethodKind> {
    MethodKind::parse(name).map_err(err)
}

/// Loads the raw CSV and returns `{"features", "labels", "columns"}` with
/// the 24-column encoding in raw units.
#[pyfunction]
fn preprocess<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let raw = data::load_raw_dataset(&path).map_err(err)?;
    let m = data::preprocess(&raw, &BinningSpec::default()).map_err(err)?;
    let d = m.dataset();
    let rows: Vec<Vec<f64>> = d.rows().map(<[f64]>::to_vec).collect();
    let out = PyDict::new(py);
    out.set_item("features", rows)?;
    out.set_item("labels", d.labels().to_vec())?;
    out.set_item("columns", m.column_names().to_vec())?;
    Ok(out)
}

/// Fold index of every row. Passing `labels` gives class-stratified folds.
#[pyfunction]
#[pyo3(signature = (n, k, seed = 42, labels = None))]
fn kfold_split(n: usize, k: usize, seed: u64, labels: Option<Vec<u8>>) -> PyResult<Vec<usize>> {
    let plan = match labels {
        Some(l) => {
            if l.len() != n {
                return Err(PyValueError::new_err("labels must have n entries"));
            }
            eval::stratified_kfold_split(&l, k, seed)
        }
        None => eval::kfold_split(n, k, seed),
    }
    .map_err(err)?;
    Ok(plan.assignments)
}

#[pyfunction]
fn accuracy(pred: Vec<u8>, labels: Vec<u8>) -> PyResult<f64> {
    eval::accuracy(&pred, &labels).map_err(err)
}

#[pyfunction]
fn ks_two_sample<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    serialize_to_py(py, &eval::ks_two_sample(&a, &b).map_err(err)?)
}

#[pyfunction]
fn ks_normality<'py>(py: Python<'py>, xs: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    serialize_to_py(py, &eval::ks_normality(&xs).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (a, b, equal_variance = true))]
fn t_test<'py>(py: Python<'py>, a: Vec<f64>, b: Vec<f64>, equal_variance: bool) -> PyResult<Bound<'py, PyAny>> {
    serialize_to_py(py, &eval::t_test_independent(&a, &b, equal_variance).map_err(err)?)
}

/// k-fold cross-validation of one method configuration. Keyword arguments
/// are the method's hyperparameters.
#[pyfunction]
#[pyo3(signature = (method_name, features, labels, folds = 10, seed = 42, stratified = false, **kwargs))]
#[allow(clippy::too_many_arguments)]
fn cross_validate<'py>(
    py: Python<'py>,
    method_name: &str,
    features: Vec<Vec<f64>>,
    labels: Vec<u8>,
    folds: usize,
    seed: u64,
    stratified: bool,
    kwargs: Option<&Bound<'py, PyDict>>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = MethodSpec::new(method(method_name)?, hyperparams(kwargs)?).map_err(err)?;
    let d = dataset(features, Some(labels))?;
    let result = py
        .detach(|| {
            let plan = if stratified {
                eval::stratified_kfold_split(d.labels(), folds, seed)
            } else {
                eval::kfold_split(d.n_rows(), folds, seed)
            }?;
            eval::run_cv(&spec, &d, &plan, &SCALED_COLUMNS, seed)
        })
        .map_err(err)?;
    serialize_to_py(py, &result)
}

/// A trained multitask sparse-autoencoder network.
#[pyclass(name = "MultitaskModel", module = "heartnet", frozen)]
struct PyMultitask {
    inner: TrainedModel,
}

#[pymethods]
impl PyMultitask {
    /// Trains on raw-unit features. `classifier` is "mlp" or "cnn"; keyword
    /// arguments (latent, alpha, l1_lambda, epochs, batch_size,
    /// learning_rate) override the defaults.
    #[staticmethod]
    #[pyo3(signature = (features, labels, classifier = "cnn", seed = 42, **kwargs))]
    fn train(
        py: Python<'_>,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        classifier: &str,
        seed: u64,
        kwargs: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Self> {
        let kind = MethodKind::for_classifier(ClassifierKind::parse(classifier).map_err(err)?);
        let spec = MethodSpec::new(kind, hyperparams(kwargs)?).map_err(err)?;
        let config = spec.to_multitask_config(seed).map_err(err)?;
        let raw = dataset(features, Some(labels))?;
        let inner = py
            .detach(|| {
                let scaler = MinMaxScaler::fit(&raw, &SCALED_COLUMNS)?;
                let scaled = scaler.transform(&raw)?;
                models::train(models::build_model(&config)?, &scaled, scaler)
            })
            .map_err(err)?;
        Ok(PyMultitask { inner })
    }

    #[staticmethod]
    fn load(dir: PathBuf) -> PyResult<Self> {
        Ok(PyMultitask {
            inner: TrainedModel::load(&dir).map_err(err)?,
        })
    }

    fn save(&self, dir: PathBuf) -> PyResult<()> {
        self.inner.save(&dir).map_err(err)
    }

    /// `(labels, probabilities)` for raw-unit features.
    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<(Vec<u8>, Vec<f64>)> {
        let rows = self.inner.scale(&dataset(features, None)?).map_err(err)?;
        self.inner.predict(&rows).map_err(err)
    }

    /// Latent (augmented) features, one list per row.
    fn extract(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        let rows = self.inner.scale(&dataset(features, None)?).map_err(err)?;
        let z = self.inner.extract_augmented_features(&rows).map_err(err)?;
        let width = self.inner.latent_dim();
        Ok(z.data().chunks(width).map(<[f64]>::to_vec).collect())
    }

    #[getter]
    fn latent_dim(&self) -> usize {
        self.inner.latent_dim()
    }

    /// Per-epoch losses and training accuracy.
    #[getter]
    fn history<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        serialize_to_py(py, &self.inner.history)
    }

    fn __repr__(&self) -> String {
        format!(
            "MultitaskModel(classifier={}, latent_dim={}, epochs={})",
            self.inner.config.classifier.kind.name(),
            self.inner.latent_dim(),
            self.inner.history.len()
        )
    }
}

/// A fitted classical method (decision_tree, random_forest, knn, adaboost,
/// gradient_boost, gnb, mlp or majority).
#[pyclass(name = "Baseline", module = "heartnet", frozen)]
struct PyBaseline {
    method: MethodKind,
    scaler: MinMaxScaler,
    model: Box<dyn Classifier>,
}

#[pymethods]
impl PyBaseline {
    #[staticmethod]
    #[pyo3(signature = (method_name, features, labels, seed = 42, **kwargs))]
    fn fit(
        py: Python<'_>,
        method_name: &str,
        features: Vec<Vec<f64>>,
        labels: Vec<u8>,
        seed: u64,
        kwargs: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Self> {
        let kind = method(method_name)?;
        let spec = MethodSpec::new(kind, hyperparams(kwargs)?).map_err(err)?;
        let raw = dataset(features, Some(labels))?;
        let (scaler, model) = py
            .detach(|| -> heartnet::Result<_> {
                let scaler = MinMaxScaler::fit(&raw, &SCALED_COLUMNS)?;
                let model = spec.fit(&scaler.transform(&raw)?, &scaler, seed)?;
                Ok((scaler, model))
            })
            .map_err(err)?;
        Ok(PyBaseline { method: kind, scaler, model })
    }

    fn predict(&self, features: Vec<Vec<f64>>) -> PyResult<Vec<u8>> {
        let rows = self.scaler.transform(&dataset(features, None)?).map_err(err)?;
        self.model.predict(&rows).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Baseline({})", self.method.name())
    }
}

#[pymodule]
#[pyo3(name = "heartnet")]
fn heartnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("N_FEATURES", data::N_FEATURES)?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(kfold_split, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(ks_normality, m)?)?;
    m.add_function(wrap_pyfunction!(t_test, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_class::<PyMultitask>()?;
    m.add_class::<PyBaseline>()?;
    Ok(())
}
