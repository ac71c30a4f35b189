//! Fitted kernel-form models and min-max input scaling.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_unchecked, CenterSet};
use crate::error::{ensure_finite, IplError, Result};
use crate::solver::LossKind;
use crate::timeseries::LagSpec;

/// Per-variable min-max map onto `[0, 1]`.
///
/// Constant columns are stored with a unit denominator (`max = min + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Scaling {
    pub fn fit(inputs: &DMatrix<f64>) -> Result<Self> {
        ensure_finite(inputs.as_slice(), "inputs")?;
        if inputs.nrows() == 0 {
            return Err(IplError::Empty("cannot fit scaling on zero rows"));
        }
        let mut min = Vec::with_capacity(inputs.ncols());
        let mut max = Vec::with_capacity(inputs.ncols());
        for col in inputs.column_iter() {
            let lo = col.min();
            let hi = col.max();
            min.push(lo);
            max.push(if hi > lo { hi } else { lo + 1.0 });
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| (v - lo) / (hi - lo))
            .collect()
    }

    pub fn apply_matrix(&self, inputs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = inputs.clone();
        for (k, mut col) in out.column_iter_mut().enumerate() {
            let (lo, hi) = (self.min[k], self.max[k]);
            col.apply(|v| *v = (*v - lo) / (hi - lo));
        }
        out
    }
}

/// `f(x) = sum_j u_j (1 + eta_j . x)^s` together with everything needed to
/// map raw embedded inputs into the coordinates it was fitted in.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel {
    pub degree: u32,
    pub centers: CenterSet,
    pub weights: DVector<f64>,
    pub scaling: Option<Scaling>,
    pub lag_spec: LagSpec,
    pub loss: LossKind,
    pub feature_names: Vec<String>,
}

impl KernelModel {
    pub fn new(
        degree: u32,
        centers: CenterSet,
        weights: DVector<f64>,
        scaling: Option<Scaling>,
        lag_spec: LagSpec,
        loss: LossKind,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if weights.len() != centers.len() {
            return Err(IplError::DimensionMismatch {
                expected: centers.len(),
                found: weights.len(),
                context: "weights vs centers",
            });
        }
        if feature_names.len() != centers.dim() {
            return Err(IplError::DimensionMismatch {
                expected: centers.dim(),
                found: feature_names.len(),
                context: "feature names vs embedded dimension",
            });
        }
        if let Some(s) = &scaling {
            if s.dim() != centers.dim() || s.min.iter().zip(&s.max).any(|(lo, hi)| hi <= lo) {
                return Err(IplError::InvalidParameter("malformed scaling".into()));
            }
        }
        Ok(Self {
            degree,
            centers,
            weights,
            scaling,
            lag_spec,
            loss,
            feature_names,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    /// Maps a raw embedded row into model coordinates.
    pub fn transform(&self, raw: &[f64]) -> Vec<f64> {
        match &self.scaling {
            Some(s) => s.apply(raw),
            None => raw.to_vec(),
        }
    }

    pub fn transform_matrix(&self, raw: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.scaling {
            Some(s) => s.apply_matrix(raw),
            None => raw.clone(),
        }
    }

    /// Kernel-form prediction for a raw (unscaled) embedded row.
    pub fn predict_raw(&self, raw: &[f64]) -> Result<f64> {
        if raw.len() != self.dim() {
            return Err(IplError::DimensionMismatch {
                expected: self.dim(),
                found: raw.len(),
                context: "prediction input",
            });
        }
        predict_kernel(self, &self.transform(raw))
    }
}

/// Kernel-form prediction `sum_j u_j (1 + eta_j . x)^s` for `x` already in
/// model coordinates.
pub fn predict_kernel(model: &KernelModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.dim() {
        return Err(IplError::DimensionMismatch {
            expected: model.dim(),
            found: x.len(),
            context: "prediction input",
        });
    }
    ensure_finite(x, "prediction input")?;
    let centers = model.centers.matrix();
    let mut eta = vec![0.0; model.dim()];
    let mut acc = 0.0;
    for (j, &u) in model.weights.iter().enumerate() {
        for (k, e) in eta.iter_mut().enumerate() {
            *e = centers[(j, k)];
        }
        acc += u * kernel_unchecked(x, &eta, model.degree);
    }
    Ok(acc)
}

/// Class label from a decision score; a zero score maps to `+1`.
pub fn classify(score: f64) -> f64 {
    if score >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polycore::{kernel_eval, CenterStrategy};

    fn model(weights: Vec<f64>, centers: DMatrix<f64>) -> KernelModel {
        let dim = centers.ncols();
        KernelModel::new(
            2,
            CenterSet::new(centers, CenterStrategy::FirstSamples).unwrap(),
            DVector::from_vec(weights),
            None,
            LagSpec::default(),
            LossKind::Squared,
            (1..=dim).map(|k| format!("x{k}")).collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_predict_zero() {
        let m = model(vec![0.0; 3], DMatrix::from_fn(3, 2, |i, k| (i + k) as f64));
        assert_eq!(predict_kernel(&m, &[0.4, -3.0]).unwrap(), 0.0);
    }

    #[test]
    fn single_center_is_kernel() {
        let m = model(vec![1.0], DMatrix::from_row_slice(1, 2, &[0.2, 0.7]));
        let x = [0.9, -0.1];
        assert_eq!(
            predict_kernel(&m, &x).unwrap(),
            kernel_eval(&x, &[0.2, 0.7], 2).unwrap()
        );
        assert!(predict_kernel(&m, &[1.0]).is_err());
    }

    #[test]
    fn classify_ties_are_positive() {
        assert_eq!(classify(0.0), 1.0);
        assert_eq!(classify(-1e-300), -1.0);
        assert_eq!(classify(2.0), 1.0);
    }

    #[test]
    fn scaling_handles_constant_columns() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let s = Scaling::fit(&x).unwrap();
        assert_eq!(s.min, vec![1.0, 5.0]);
        assert_eq!(s.max, vec![3.0, 6.0]);
        let y = s.apply_matrix(&x);
        assert_eq!(y.column(0).as_slice(), &[0.0, 0.5, 1.0]);
        assert_eq!(y.column(1).as_slice(), &[0.0, 0.0, 0.0]);
        assert_eq!(s.apply(&[2.0, 5.0]), vec![0.5, 0.0]);
    }
}
