//! Raw series and the lag embedding that turns them into supervised rows.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};

/// Number of lagged feature vectors (`lag_x`) and lagged targets (`lag_y`)
/// appended to each input row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct LagSpec {
    pub lag_x: usize,
    pub lag_y: usize,
}

impl LagSpec {
    pub fn new(lag_x: usize, lag_y: usize) -> Self {
        Self { lag_x, lag_y }
    }

    /// Embedded dimension `d (1 + lag_x) + lag_y`.
    pub fn embedded_dim(&self, raw_dim: usize) -> usize {
        raw_dim * (1 + self.lag_x) + self.lag_y
    }

    /// Leading rows without a complete history.
    pub fn warmup(&self) -> usize {
        self.lag_x.max(self.lag_y)
    }

    /// Names of the embedded variables, e.g. `x1[t]`, `x1[t-2]`, `y[t-1]`.
    pub fn embedded_names(&self, feature_names: &[String], target_name: &str) -> Vec<String> {
        let mut names = Vec::with_capacity(self.embedded_dim(feature_names.len()));
        for lag in 0..=self.lag_x {
            for f in feature_names {
                names.push(lagged_name(f, lag));
            }
        }
        for lag in 1..=self.lag_y {
            names.push(lagged_name(target_name, lag));
        }
        names
    }
}

fn lagged_name(base: &str, lag: usize) -> String {
    if lag == 0 {
        format!("{base}[t]")
    } else {
        format!("{base}[t-{lag}]")
    }
}

/// A time-ordered multivariate series with a scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    timestamps: Option<Vec<f64>>,
    features: DMatrix<f64>,
    targets: Vec<f64>,
    feature_names: Vec<String>,
    target_name: String,
}

impl RawSeries {
    /// Validates lengths, timestamp order and finiteness. Non-finite values
    /// are reported with their row rather than dropped.
    pub fn new(
        timestamps: Option<Vec<f64>>,
        features: DMatrix<f64>,
        targets: Vec<f64>,
        feature_names: Vec<String>,
        target_name: impl Into<String>,
    ) -> Result<Self> {
        let t = features.nrows();
        if targets.len() != t {
            return Err(IplError::DimensionMismatch {
                expected: t,
                found: targets.len(),
                context: "targets vs feature rows",
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(IplError::DimensionMismatch {
                expected: features.ncols(),
                found: feature_names.len(),
                context: "feature names",
            });
        }
        if let Some(ts) = &timestamps {
            if ts.len() != t {
                return Err(IplError::DimensionMismatch {
                    expected: t,
                    found: ts.len(),
                    context: "timestamps",
                });
            }
            if let Some(i) = ts.windows(2).position(|w| !(w[1] >= w[0])) {
                return Err(IplError::InvalidParameter(format!(
                    "timestamps decrease at row {}",
                    i + 2
                )));
            }
        }
        for i in 0..t {
            if !targets[i].is_finite() || features.row(i).iter().any(|v| !v.is_finite()) {
                return Err(IplError::InvalidParameter(format!(
                    "row {} contains a non-finite value",
                    i + 1
                )));
            }
        }
        Ok(Self {
            timestamps,
            features,
            targets,
            feature_names,
            target_name: target_name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    /// Rows `start..end` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            timestamps: self.timestamps.as_ref().map(|t| t[start..end].to_vec()),
            features: self.features.rows(start, end - start).into_owned(),
            targets: self.targets[start..end].to_vec(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }

    /// Every `stride`-th row starting at the first.
    pub fn subsample(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let keep: Vec<usize> = (0..self.len()).step_by(stride).collect();
        Self {
            timestamps: self
                .timestamps
                .as_ref()
                .map(|t| keep.iter().map(|&i| t[i]).collect()),
            features: self.features.select_rows(keep.iter()),
            targets: keep.iter().map(|&i| self.targets[i]).collect(),
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
        }
    }

    /// Same series with new targets and target name; `keep` leading rows are
    /// retained (used when targets look ahead and the tail has no label).
    pub fn with_targets(&self, targets: Vec<f64>, target_name: impl Into<String>) -> Result<Self> {
        let keep = targets.len();
        if keep > self.len() {
            return Err(IplError::DimensionMismatch {
                expected: self.len(),
                found: keep,
                context: "replacement targets",
            });
        }
        let mut s = self.slice(0, keep);
        s.targets = targets;
        s.target_name = target_name.into();
        Ok(s)
    }
}

/// Lag-embedded supervised rows. Row `r` corresponds to time index
/// `time_index[r]` of the source series.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedDataset {
    pub inputs: DMatrix<f64>,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub time_index: Vec<usize>,
    pub timestamps: Option<Vec<f64>>,
    pub lag_spec: LagSpec,
    pub raw_dim: usize,
}

impl SupervisedDataset {
    /// Wraps pre-embedded rows (no lags).
    pub fn from_rows(inputs: DMatrix<f64>, targets: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        if inputs.nrows() != targets.len() {
            return Err(IplError::DimensionMismatch {
                expected: inputs.nrows(),
                found: targets.len(),
                context: "targets vs rows",
            });
        }
        if inputs.ncols() != feature_names.len() {
            return Err(IplError::DimensionMismatch {
                expected: inputs.ncols(),
                found: feature_names.len(),
                context: "feature names",
            });
        }
        let raw_dim = inputs.ncols();
        Ok(Self {
            time_index: (0..targets.len()).collect(),
            inputs,
            targets,
            feature_names,
            timestamps: None,
            lag_spec: LagSpec::default(),
            raw_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.inputs.row(r).iter().copied().collect()
    }

    /// Rows `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> Self {
        Self {
            inputs: self.inputs.rows(start, end - start).into_owned(),
            targets: self.targets[start..end].to_vec(),
            feature_names: self.feature_names.clone(),
            time_index: self.time_index[start..end].to_vec(),
            timestamps: self.timestamps.as_ref().map(|t| t[start..end].to_vec()),
            lag_spec: self.lag_spec,
            raw_dim: self.raw_dim,
        }
    }
}

/// Builds `x~_i = (x_i, x_{i-1}, .., x_{i-lag_x}, y_{i-1}, .., y_{i-lag_y})`
/// with target `y_i`, dropping the first `max(lag_x, lag_y)` rows.
pub fn lag_embed(series: &RawSeries, spec: LagSpec) -> Result<SupervisedDataset> {
    let t = series.len();
    let warmup = spec.warmup();
    if t <= warmup {
        return Err(IplError::TooFewRows {
            required: warmup + 1,
            available: t,
            context: "lag embedding",
        });
    }
    let d = series.dim();
    let dim = spec.embedded_dim(d);
    let rows = t - warmup;
    let x = series.features();
    let y = series.targets();
    let mut data = Vec::with_capacity(rows * dim);
    for i in warmup..t {
        for lag in 0..=spec.lag_x {
            data.extend(x.row(i - lag).iter());
        }
        for lag in 1..=spec.lag_y {
            data.push(y[i - lag]);
        }
    }
    Ok(SupervisedDataset {
        inputs: DMatrix::from_row_slice(rows, dim, &data),
        targets: y[warmup..].to_vec(),
        feature_names: spec.embedded_names(series.feature_names(), series.target_name()),
        time_index: (warmup..t).collect(),
        timestamps: series.timestamps().map(|ts| ts[warmup..].to_vec()),
        lag_spec: spec,
        raw_dim: d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(prefix: &str, d: usize) -> Vec<String> {
        (1..=d).map(|k| format!("{prefix}{k}")).collect()
    }

    #[test]
    fn single_lag_example() {
        let s = RawSeries::new(
            None,
            DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
            vec![10.0, 20.0, 30.0],
            names("x", 1),
            "y",
        )
        .unwrap();
        let ds = lag_embed(&s, LagSpec::new(1, 1)).unwrap();
        // only the first max(L_x, L_y) = 1 row is dropped
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.row(1), vec![3.0, 2.0, 20.0]);
        assert_eq!(ds.targets[1], 30.0);
        assert_eq!(ds.row(0), vec![2.0, 1.0, 10.0]);
        assert_eq!(ds.feature_names, ["x1[t]", "x1[t-1]", "y[t-1]"]);
        assert_eq!(ds.time_index, vec![1, 2]);
    }

    #[test]
    fn zero_lags_is_identity() {
        let x = DMatrix::from_fn(6, 2, |i, k| (i * 2 + k) as f64);
        let s = RawSeries::new(None, x.clone(), vec![0.0; 6], names("x", 2), "y").unwrap();
        let ds = lag_embed(&s, LagSpec::default()).unwrap();
        assert_eq!(ds.inputs, x);
    }

    #[test]
    fn dimension_with_target_lags() {
        let s = RawSeries::new(None, DMatrix::zeros(10, 5), vec![0.0; 10], names("x", 5), "y").unwrap();
        let ds = lag_embed(&s, LagSpec::new(0, 3)).unwrap();
        assert_eq!(ds.dim(), 8);
        assert_eq!(ds.len(), 7);
        let ds = lag_embed(&s, LagSpec::new(2, 1)).unwrap();
        assert_eq!(ds.dim(), 16);
        assert_eq!(ds.feature_names[5], "x1[t-1]");
    }

    #[test]
    fn too_short_series() {
        let s = RawSeries::new(None, DMatrix::zeros(2, 1), vec![0.0; 2], names("x", 1), "y").unwrap();
        let err = lag_embed(&s, LagSpec::new(0, 2)).unwrap_err();
        assert!(err.to_string().contains("at least 3"), "{err}");
    }

    #[test]
    fn rejects_nan_rows_and_unsorted_time() {
        let mut x = DMatrix::zeros(3, 1);
        x[(1, 0)] = f64::NAN;
        let err = RawSeries::new(None, x, vec![0.0; 3], names("x", 1), "y").unwrap_err();
        assert!(err.to_string().contains("row 2"));
        let err = RawSeries::new(Some(vec![1.0, 3.0, 2.0]), DMatrix::zeros(3, 1), vec![0.0; 3], names("x", 1), "y")
            .unwrap_err();
        assert!(err.to_string().contains("decrease"));
    }
}
