//! Two-sample KS, one-sample KS against a fitted normal, and independent
//! t-tests, plus the group comparison built from them.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use super::cv::CVResult;
use super::metrics::{mean, sample_sd};
use crate::error::{Error, Result};
use crate::method::Group;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatTestResult {
    pub test: String,
    pub statistic: f64,
    /// Degrees of freedom (t-tests only).
    pub df: Option<f64>,
    pub p_value: f64,
    /// Set when a convention replaced the regular computation.
    pub note: Option<String>,
}

/// Survival function of the Kolmogorov distribution,
/// `Q(l) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 l^2)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `sup |F_a - F_b|` by a merged sweep over the sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value at
/// `sqrt(n_a n_b / (n_a + n_b)) D`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<StatTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("KS test needs two nonempty samples".into()));
    }
    let d = ks_statistic(a, b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let ne = na * nb / (na + nb);
    Ok(StatTestResult {
        test: "ks_two_sample".into(),
        statistic: d,
        df: None,
        p_value: kolmogorov_q(ne.sqrt() * d),
        note: None,
    })
}

/// One-sample KS against a normal with the sample's own mean and SD. The
/// p-value uses the plain asymptotic distribution, which is conservative
/// when the parameters are estimated.
pub fn ks_normality(xs: &[f64]) -> Result<StatTestResult> {
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("normality test needs at least 2 values".into()));
    }
    let (m, s) = (mean(xs), sample_sd(xs));
    if s == 0.0 {
        return Ok(StatTestResult {
            test: "ks_normality".into(),
            statistic: 0.0,
            df: None,
            p_value: 1.0,
            note: Some("zero variance; test is degenerate".into()),
        });
    }
    let normal = Normal::new(m, s).map_err(|e| Error::NonFinite(e.to_string()))?;
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(StatTestResult {
        test: "ks_normality".into(),
        statistic: d,
        df: None,
        p_value: kolmogorov_q(n.sqrt() * d),
        note: None,
    })
}

/// Independent two-sample t-test, pooled (`equal_variance`) or Welch, with
/// a two-sided p-value. With zero variance the statistic is undefined: equal
/// means give `t = 0, p = 1`, unequal means `t = ±inf, p = 0`, both flagged.
pub fn t_test_independent(a: &[f64], b: &[f64], equal_variance: bool) -> Result<StatTestResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument("t-test needs at least 2 values per group".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_sd(a).powi(2), sample_sd(b).powi(2));
    let (se2, df, name) = if equal_variance {
        let sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        (sp2 * (1.0 / na + 1.0 / nb), na + nb - 2.0, "t_test_pooled")
    } else {
        let (qa, qb) = (va / na, vb / nb);
        let se2 = qa + qb;
        let df = if se2 > 0.0 {
            se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
        } else {
            na + nb - 2.0
        };
        (se2, df, "t_test_welch")
    };
    let diff = ma - mb;
    if se2 <= 0.0 {
        let (t, p, note) = if diff == 0.0 {
            (0.0, 1.0, "zero variance with equal means")
        } else {
            (diff.signum() * f64::INFINITY, 0.0, "zero variance with unequal means")
        };
        return Ok(StatTestResult {
            test: name.into(),
            statistic: t,
            df: Some(df),
            p_value: p,
            note: Some(note.into()),
        });
    }
    let t = diff / se2.sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::NonFinite(e.to_string()))?;
    let p = (2.0 * dist.cdf(-t.abs())).clamp(0.0, 1.0);
    Ok(StatTestResult {
        test: name.into(),
        statistic: t,
        df: Some(df),
        p_value: p,
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub group: Group,
    pub n: usize,
    /// Accuracies in percent, in input order.
    pub values: Vec<f64>,
    pub members: Vec<String>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub group_i: GroupStats,
    pub group_ii: GroupStats,
    /// Group II minus group I, pooled variance.
    pub t_test: StatTestResult,
    pub welch: StatTestResult,
    pub ks_two_sample: StatTestResult,
    pub ks_normality_i: StatTestResult,
    pub ks_normality_ii: StatTestResult,
}

fn collect(results: &[CVResult], group: Group) -> Result<GroupStats> {
    let members: Vec<&CVResult> = results.iter().filter(|r| r.group == Some(group)).collect();
    if members.is_empty() {
        return Err(Error::InvalidArgument(format!("group {} is empty", group.label())));
    }
    let values: Vec<f64> = members.iter().map(|r| r.mean * 100.0).collect();
    Ok(GroupStats {
        group,
        n: values.len(),
        mean: mean(&values),
        sd: sample_sd(&values),
        members: members
            .iter()
            .map(|r| {
                if r.hyperparams.is_empty() {
                    r.method.clone()
                } else {
                    format!("{} {}", r.method, serde_json::to_string(&r.hyperparams).unwrap_or_default())
                }
            })
            .collect(),
        values,
    })
}

/// Compares the mean CV accuracies of group II (SAE models) against group I
/// (classical methods and the vanilla MLP). Each result contributes one
/// value; untagged results are ignored.
pub fn group_compare(results: &[CVResult]) -> Result<GroupComparison> {
    let g1 = collect(results, Group::Classical)?;
    let g2 = collect(results, Group::Sae)?;
    Ok(GroupComparison {
        t_test: t_test_independent(&g2.values, &g1.values, true)?,
        welch: t_test_independent(&g2.values, &g1.values, false)?,
        ks_two_sample: ks_two_sample(&g2.values, &g1.values)?,
        ks_normality_i: ks_normality(&g1.values)?,
        ks_normality_ii: ks_normality(&g2.values)?,
        group_i: g1,
        group_ii: g2,
    })
}
