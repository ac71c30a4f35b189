//! End-to-end fit: scale, choose centers, build the kernel matrix, solve,
//! expand into monomials and threshold.

use std::str::FromStr;
use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};
use crate::polycore::{
    build_centers, expand_to_monomials, kernel_matrix, predict_kernel, CenterStrategy, KernelModel,
    Scaling, SparsePolynomial,
};
use crate::solver::{check_labels, fit_admm, fit_pinv, AdmmConfig, FitReport, LossKind};
use crate::timeseries::SupervisedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Pseudo-inverse for squared loss, ADMM otherwise.
    #[default]
    Auto,
    Pinv,
    Admm,
}

impl FromStr for SolverChoice {
    type Err = IplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "auto" => Ok(SolverChoice::Auto),
            "pinv" => Ok(SolverChoice::Pinv),
            "admm" => Ok(SolverChoice::Admm),
            other => Err(IplError::InvalidParameter(format!("unknown solver '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IplConfig {
    pub degree: u32,
    pub loss: LossKind,
    pub centers: CenterStrategy,
    pub scale_inputs: bool,
    pub solver: SolverChoice,
    pub admm: AdmmConfig,
    /// Interpretability threshold on `|coefficient|`.
    pub threshold: f64,
}

impl Default for IplConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            loss: LossKind::Squared,
            centers: CenterStrategy::FirstSamples,
            scale_inputs: true,
            solver: SolverChoice::Auto,
            admm: AdmmConfig::default(),
            threshold: 0.0,
        }
    }
}

/// Solver-independent fit diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub solver: String,
    /// Mean training loss of the fitted scores.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub wall_time_secs: f64,
}

/// A fitted model with its monomial expansion.
#[derive(Debug, Clone)]
pub struct FittedIpl {
    pub model: KernelModel,
    /// Every monomial with `|alpha| <= s` (threshold 0).
    pub expansion: SparsePolynomial,
    /// The thresholded interpretable predictor.
    pub sparse: SparsePolynomial,
    pub summary: FitSummary,
    pub admm_report: Option<FitReport>,
}

impl FittedIpl {
    /// Kernel-form predictions for every row of `ds` (raw embedded inputs).
    pub fn predict_kernel(&self, ds: &SupervisedDataset) -> Result<Vec<f64>> {
        predict_rows(&self.model, ds, |x| predict_kernel(&self.model, x))
    }

    /// Sparse-form predictions for every row of `ds`.
    pub fn predict_sparse(&self, ds: &SupervisedDataset) -> Result<Vec<f64>> {
        predict_rows(&self.model, ds, |x| Ok(self.sparse.evaluate(x)))
    }
}

fn predict_rows(
    model: &KernelModel,
    ds: &SupervisedDataset,
    f: impl Fn(&[f64]) -> Result<f64>,
) -> Result<Vec<f64>> {
    if ds.dim() != model.dim() {
        return Err(IplError::DimensionMismatch {
            expected: model.dim(),
            found: ds.dim(),
            context: "dataset vs model dimension",
        });
    }
    let scaled = model.transform_matrix(&ds.inputs);
    (0..scaled.nrows())
        .map(|i| {
            let x: Vec<f64> = scaled.row(i).iter().copied().collect();
            f(&x)
        })
        .collect()
}

/// Fits the interpretable polynomial model on `train`.
pub fn fit_ipl(train: &SupervisedDataset, cfg: &IplConfig) -> Result<FittedIpl> {
    let start = Instant::now();
    if train.is_empty() {
        return Err(IplError::Empty("training set is empty"));
    }
    if cfg.loss.is_classification() {
        check_labels(&train.targets)?;
    }
    let scaling = if cfg.scale_inputs {
        Some(Scaling::fit(&train.inputs)?)
    } else {
        None
    };
    let inputs = match &scaling {
        Some(s) => s.apply_matrix(&train.inputs),
        None => train.inputs.clone(),
    };
    let centers = build_centers(&inputs, cfg.degree, cfg.centers)?;
    let a = kernel_matrix(&inputs, &centers, cfg.degree)?;
    let y = DVector::from_column_slice(&train.targets);

    let use_pinv = match cfg.solver {
        SolverChoice::Auto => cfg.loss == LossKind::Squared,
        SolverChoice::Pinv => {
            if cfg.loss != LossKind::Squared {
                return Err(IplError::InvalidParameter(
                    "the pseudo-inverse path only applies to squared loss".into(),
                ));
            }
            true
        }
        SolverChoice::Admm => false,
    };

    let (weights, admm_report) = if use_pinv {
        (fit_pinv(&a, &y)?, None)
    } else {
        let (u, report) = fit_admm(&a, &y, cfg.loss, &cfg.admm)?;
        (u, Some(report))
    };
    let scores = &a * &weights;
    let objective = cfg.loss.mean(scores.as_slice(), y.as_slice());

    let model = KernelModel::new(
        cfg.degree,
        centers,
        weights,
        scaling,
        train.lag_spec,
        cfg.loss,
        train.feature_names.clone(),
    )?;
    let expansion = expand_to_monomials(&model)?;
    let sparse = expansion.thresholded(cfg.threshold)?;
    let summary = match &admm_report {
        None => FitSummary {
            solver: "pinv".into(),
            objective,
            iterations: 1,
            converged: true,
            primal_residual: 0.0,
            dual_residual: 0.0,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
        Some(r) => FitSummary {
            solver: "admm".into(),
            objective,
            iterations: r.iterations,
            converged: r.converged,
            primal_residual: r.primal_residual,
            dual_residual: r.dual_residual,
            wall_time_secs: start.elapsed().as_secs_f64(),
        },
    };
    Ok(FittedIpl {
        model,
        expansion,
        sparse,
        summary,
        admm_report,
    })
}

/// Mean squared error between paired slices.
pub fn mse(pred: &[f64], truth: &[f64]) -> f64 {
    let n = pred.len().max(1) as f64;
    pred.iter()
        .zip(truth)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / n
}
