use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::{accuracy, auc, LogisticRegression};
use super::ranking::ImportanceReport;
use crate::error::{IplError, Result};
use crate::polycore::{KernelModel, MultiIndex};
use crate::solver::check_labels;
use crate::timeseries::SupervisedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SweepMetric {
    #[default]
    Auc,
    Accuracy,
}

impl FromStr for SweepMetric {
    type Err = IplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auc" => Ok(SweepMetric::Auc),
            "accuracy" => Ok(SweepMetric::Accuracy),
            other => Err(IplError::InvalidParameter(format!("unknown sweep metric '{other}'"))),
        }
    }
}

impl std::fmt::Display for SweepMetric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepMetric::Auc => "auc",
            SweepMetric::Accuracy => "accuracy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub requested_k: usize,
    /// `requested_k` clamped to the number of ranked terms.
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub metric: SweepMetric,
    pub points: Vec<SweepPoint>,
    /// `(max - min) / min` over the curve.
    pub max_fluctuation: f64,
    pub clamped: bool,
}

/// Monomial values of `terms` at each row of `ds`, evaluated in the
/// model's (scaled) coordinates.
pub fn term_feature_matrix(model: &KernelModel, terms: &[MultiIndex], ds: &SupervisedDataset) -> Result<DMatrix<f64>> {
    if ds.dim() != model.dim() {
        return Err(IplError::DimensionMismatch {
            expected: model.dim(),
            found: ds.dim(),
            context: "dataset vs model dimension",
        });
    }
    let scaled = model.transform_matrix(&ds.inputs);
    let mut out = DMatrix::zeros(ds.len(), terms.len());
    for i in 0..ds.len() {
        let x: Vec<f64> = scaled.row(i).iter().copied().collect();
        for (c, t) in terms.iter().enumerate() {
            out[(i, c)] = t.monomial(&x);
        }
    }
    Ok(out)
}

/// For each `k`, fits logistic regression on the top-`k` ranked terms of
/// `train` and scores `test`.
pub fn sparsity_accuracy_sweep(
    train: &SupervisedDataset,
    test: &SupervisedDataset,
    model: &KernelModel,
    report: &ImportanceReport,
    k_values: &[usize],
    metric: SweepMetric,
) -> Result<SweepResult> {
    check_labels(&train.targets)?;
    check_labels(&test.targets)?;
    if report.is_empty() {
        return Err(IplError::Empty("importance report has no terms"));
    }
    if k_values.is_empty() {
        return Err(IplError::Empty("no sparsity levels requested"));
    }
    if k_values.contains(&0) {
        return Err(IplError::InvalidParameter("sparsity levels must be positive".into()));
    }
    let avail = report.len();
    let clamped = k_values.iter().any(|&k| k > avail);
    if clamped {
        log::warn!("sparsity levels above {avail} ranked terms are clamped");
    }
    let terms: Vec<MultiIndex> = report.entries.iter().map(|e| e.alpha.clone()).collect();
    let train_x = term_feature_matrix(model, &terms, train)?;
    let test_x = term_feature_matrix(model, &terms, test)?;
    let points: Vec<SweepPoint> = k_values
        .par_iter()
        .map(|&requested_k| {
            let k = requested_k.min(avail);
            let tx = train_x.columns(0, k).into_owned();
            let vx = test_x.columns(0, k).into_owned();
            let clf = LogisticRegression::fit(&tx, &train.targets)?;
            let scores = clf.decision_function(&vx);
            let value = match metric {
                SweepMetric::Auc => auc(&scores, &test.targets)?,
                SweepMetric::Accuracy => accuracy(&scores, &test.targets)?,
            };
            Ok(SweepPoint { requested_k, k, value })
        })
        .collect::<Result<_>>()?;
    let max = points.iter().map(|p| p.value).fold(f64::NEG_INFINITY, f64::max);
    let min = points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let max_fluctuation = if min > 0.0 { (max - min) / min } else { f64::INFINITY };
    Ok(SweepResult {
        metric,
        points,
        max_fluctuation,
        clamped,
    })
}
