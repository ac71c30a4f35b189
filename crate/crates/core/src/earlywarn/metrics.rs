use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::tree::WarningTree;
use crate::error::{IplError, Result};
use crate::solver::check_labels;

/// A maximal run of steps where the prediction and the truth are both `1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarningEpisode {
    /// Row index of the first step.
    pub start: usize,
    /// Run length `T_n`.
    pub length: usize,
    /// The truth label just before the run was `-1`.
    pub from_normal: bool,
}

/// Class-1 metrics; an undefined ratio (zero denominator) is reported as 0
/// with its flag set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarningMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
    pub episodes: Vec<WarningEpisode>,
}

pub fn metrics_from_counts(tp: usize, fp: usize, tn: usize, fn_: usize) -> Result<WarningMetrics> {
    let total = tp + fp + tn + fn_;
    if total == 0 {
        return Err(IplError::Empty("no rows to evaluate"));
    }
    let ratio = |num: usize, den: usize| {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (precision, precision_undefined) = ratio(tp, tp + fp);
    let (recall, recall_undefined) = ratio(tp, tp + fn_);
    let (f1, f1_undefined) = if precision_undefined || recall_undefined || precision + recall == 0.0 {
        (0.0, true)
    } else {
        (2.0 * precision * recall / (precision + recall), false)
    };
    Ok(WarningMetrics {
        precision,
        recall,
        f1,
        accuracy: (tp + tn) as f64 / total as f64,
        tp,
        fp,
        tn,
        fn_,
        precision_undefined,
        recall_undefined,
        f1_undefined,
        episodes: Vec::new(),
    })
}

/// Maximal runs with `pred == truth == 1`, in time order.
pub fn consecutive_warning_horizon(pred: &[f64], truth: &[f64]) -> Vec<WarningEpisode> {
    let mut out = Vec::new();
    let mut i = 0;
    let n = pred.len().min(truth.len());
    while i < n {
        if pred[i] > 0.0 && truth[i] > 0.0 {
            let start = i;
            while i < n && pred[i] > 0.0 && truth[i] > 0.0 {
                i += 1;
            }
            out.push(WarningEpisode {
                start,
                length: i - start,
                from_normal: start > 0 && truth[start - 1] < 0.0,
            });
        } else {
            i += 1;
        }
    }
    out
}

/// Confusion counts, class-1 metrics and alarm episodes of `tree` on
/// time-ordered rows.
pub fn evaluate_warning(tree: &WarningTree, inputs: &DMatrix<f64>, labels: &[f64]) -> Result<WarningMetrics> {
    if labels.is_empty() {
        return Err(IplError::Empty("test set is empty"));
    }
    if inputs.nrows() != labels.len() {
        return Err(IplError::DimensionMismatch {
            expected: inputs.nrows(),
            found: labels.len(),
            context: "warning labels",
        });
    }
    if let Some(p) = tree.pool.first() {
        if p.alpha.dim() != inputs.ncols() {
            return Err(IplError::DimensionMismatch {
                expected: p.alpha.dim(),
                found: inputs.ncols(),
                context: "warning inputs",
            });
        }
    }
    check_labels(labels)?;
    let pred = tree.predict_matrix(inputs);
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (p, t) in pred.iter().zip(labels) {
        match (*p > 0.0, *t > 0.0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    let mut m = metrics_from_counts(tp, fp, tn, fn_)?;
    m.episodes = consecutive_warning_horizon(&pred, labels);
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_counts() {
        let m = metrics_from_counts(3, 1, 5, 1).unwrap();
        assert_eq!(m.precision, 0.75);
        assert_eq!(m.recall, 0.75);
        assert_eq!(m.f1, 0.75);
        assert_eq!(m.accuracy, 0.8);
        assert!(!m.precision_undefined);
    }

    #[test]
    fn perfect_predictions() {
        let m = metrics_from_counts(4, 0, 6, 0).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn no_alarms_flags_precision() {
        let m = metrics_from_counts(0, 0, 6, 4).unwrap();
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.precision, 0.0);
        assert!(m.precision_undefined && m.f1_undefined && !m.recall_undefined);
        assert!(metrics_from_counts(0, 0, 0, 0).is_err());
    }

    #[test]
    fn horizon_examples() {
        let eps = consecutive_warning_horizon(&[-1.0, 1.0, 1.0], &[-1.0, 1.0, 1.0]);
        assert_eq!(
            eps,
            [WarningEpisode {
                start: 1,
                length: 2,
                from_normal: true
            }]
        );
        let mut truth = vec![-1.0];
        truth.extend([1.0; 10]);
        truth.push(-1.0);
        let eps = consecutive_warning_horizon(&truth, &truth);
        assert_eq!(eps.len(), 1);
        assert_eq!(eps[0].length, 10);
        assert!(consecutive_warning_horizon(&[-1.0; 5], &[1.0; 5]).is_empty());
    }

    #[test]
    fn missed_step_splits_episodes() {
        let eps = consecutive_warning_horizon(&[1.0, 1.0, -1.0, 1.0], &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(eps.len(), 2);
        assert_eq!((eps[0].start, eps[0].length, eps[0].from_normal), (0, 2, false));
        assert_eq!((eps[1].start, eps[1].length, eps[1].from_normal), (3, 1, false));
    }
}
