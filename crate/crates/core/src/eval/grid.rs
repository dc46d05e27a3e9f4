use std::cmp::Ordering;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::cv::{run_cv, CVResult, FoldPlan};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::method::{Hyperparams, MethodKind, MethodSpec};

/// Named hyperparameter dimensions. Enumeration order is the Cartesian
/// product with the last dimension varying fastest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridSpec {
    pub dims: IndexMap<String, Vec<Value>>,
}

impl GridSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, values: Vec<Value>) -> Self {
        self.dims.insert(name.to_string(), values);
        self
    }

    pub fn n_points(&self) -> usize {
        self.dims.values().map(Vec::len).product()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((name, _)) = self.dims.iter().find(|(_, v)| v.is_empty()) {
            return Err(Error::Config(format!("grid dimension `{name}` has no values")));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<Hyperparams>> {
        self.validate()?;
        let mut out = vec![Hyperparams::new()];
        for (name, values) in &self.dims {
            out = out
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.insert(name.clone(), v.clone());
                        q
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// Index of the best result: highest mean, then lowest SD, then earliest.
pub fn select_best(results: &[CVResult]) -> Option<usize> {
    (0..results.len()).min_by(|&a, &b| {
        let (ra, rb) = (&results[a], &results[b]);
        rb.mean
            .total_cmp(&ra.mean)
            .then(ra.sd.total_cmp(&rb.sd))
            .then(a.cmp(&b))
    })
}

/// Exhaustive search. Returns the best result and every result in
/// enumeration order.
pub fn grid_search(
    method: MethodKind,
    grid: &GridSpec,
    data: &Dataset,
    plan: &FoldPlan,
    scale_columns: &[usize],
    seed: u64,
) -> Result<(CVResult, Vec<CVResult>)> {
    let points = grid.points()?;
    let specs = points
        .into_iter()
        .map(|hp| MethodSpec::new(method, hp))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<CVResult> = specs
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            run_cv(spec, data, plan, scale_columns, seed).map_err(|e| Error::GridPoint {
                point: format!("{method} #{i} {}", serde_json::to_string(&spec.hyperparams).unwrap_or_default()),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let best = select_best(&all).expect("grid has at least one point");
    Ok((all[best].clone(), all))
}

/// Order used when several results are reported together.
pub fn report_order(a: &CVResult, b: &CVResult) -> Ordering {
    a.method
        .cmp(&b.method)
        .then_with(|| {
            serde_json::to_string(&a.hyperparams)
                .unwrap_or_default()
                .cmp(&serde_json::to_string(&b.hyperparams).unwrap_or_default())
        })
}
