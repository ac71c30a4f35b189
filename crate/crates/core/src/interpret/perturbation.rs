use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::estimators::LinearRegression;
use crate::error::{IplError, Result};
use crate::pipeline::mse;
use crate::rng::derive_seed;
use crate::timeseries::{perturb_feature, SupervisedDataset};

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationConfig {
    pub alphas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for PerturbationConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.0, 0.25, 0.5],
            trials: 10,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub alpha: f64,
    pub feature: usize,
    pub name: String,
    /// Mean of `(mse_perturbed - mse_clean) / mse_clean` over trials.
    pub mean_degradation: f64,
    /// Standard error of that mean; NaN with a single trial.
    pub std_error: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTable {
    pub clean_mse: f64,
    /// Ordered by alpha, then by the order of the requested features.
    pub rows: Vec<PerturbationRow>,
}

/// Fits linear least squares on clean `train`, then measures the relative
/// test MSE increase when each feature of `test` is perturbed at every
/// level. Trial `r` of feature `j` uses seed `derive_seed(seed, [j, r])`
/// for all levels, so levels share their noise draws.
pub fn perturbation_analysis(
    train: &SupervisedDataset,
    test: &SupervisedDataset,
    features: &[usize],
    cfg: &PerturbationConfig,
) -> Result<PerturbationTable> {
    if cfg.trials == 0 {
        return Err(IplError::InvalidParameter("trials must be positive".into()));
    }
    if let Some(a) = cfg.alphas.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
        return Err(IplError::InvalidParameter(format!(
            "perturbation levels must be finite and non-negative, got {a}"
        )));
    }
    if train.dim() != test.dim() {
        return Err(IplError::DimensionMismatch {
            expected: train.dim(),
            found: test.dim(),
            context: "test vs train dimension",
        });
    }
    if test.is_empty() {
        return Err(IplError::Empty("test set is empty"));
    }
    if let Some(&j) = features.iter().find(|&&j| j >= test.dim()) {
        return Err(IplError::InvalidParameter(format!("feature index {j} out of range")));
    }
    let model = LinearRegression::fit(&train.inputs, &train.targets)?;
    let clean_mse = mse(&model.predict(&test.inputs), &test.targets);
    if !(clean_mse > 0.0) {
        return Err(IplError::InvalidParameter(
            "clean test MSE is zero; relative degradation is undefined".into(),
        ));
    }
    let tasks: Vec<(usize, usize)> = features
        .iter()
        .flat_map(|&j| (0..cfg.trials).map(move |r| (j, r)))
        .collect();
    // degradation[task][alpha]
    let results: Vec<Vec<f64>> = tasks
        .par_iter()
        .map(|&(j, r)| {
            let seed = derive_seed(cfg.seed, &[j as u64, r as u64]);
            cfg.alphas
                .iter()
                .map(|&a| {
                    let p = perturb_feature(test, j, a, seed)?;
                    let m = mse(&model.predict(&p.dataset.inputs), &test.targets);
                    Ok((m - clean_mse) / clean_mse)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(cfg.alphas.len() * features.len());
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        for (fi, &j) in features.iter().enumerate() {
            let vals: Vec<f64> = (0..cfg.trials).map(|r| results[fi * cfg.trials + r][ai]).collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let std_error = if vals.len() < 2 {
                f64::NAN
            } else {
                (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
            };
            rows.push(PerturbationRow {
                alpha,
                feature: j,
                name: test.feature_names[j].clone(),
                mean_degradation: mean,
                std_error,
                trials: cfg.trials,
            });
        }
    }
    Ok(PerturbationTable { clean_mse, rows })
}
