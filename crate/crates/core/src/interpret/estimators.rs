//! Minimal downstream estimators used to score feature selections.

use nalgebra::{DMatrix, DVector};

use crate::error::{IplError, Result};
use crate::solver::{check_labels, fit_pinv, sigmoid, softplus};

fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::from_element(x.nrows(), x.ncols() + 1, 1.0);
    out.columns_mut(1, x.ncols()).copy_from(x);
    out
}

/// Least squares with intercept through the pseudo-inverse (minimum-norm
/// solution when the design is singular).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearRegression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearRegression {
    pub fn fit(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(IplError::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
                context: "regression targets",
            });
        }
        if y.is_empty() {
            return Err(IplError::Empty("regression training set is empty"));
        }
        let w = fit_pinv(&with_intercept(x), &DVector::from_column_slice(y))?;
        Ok(Self {
            intercept: w[0],
            coefficients: w.as_slice()[1..].to_vec(),
        })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                self.intercept
                    + x.row(i)
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Logistic regression with intercept on labels in `{-1, 1}`, fitted by
/// damped Newton steps solved with the pseudo-inverse of the Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

impl LogisticRegression {
    pub const MAX_ITERS: usize = 100;

    pub fn fit(x: &DMatrix<f64>, y: &[f64]) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(IplError::DimensionMismatch {
                expected: x.nrows(),
                found: y.len(),
                context: "classification labels",
            });
        }
        if y.is_empty() {
            return Err(IplError::Empty("classification training set is empty"));
        }
        check_labels(y)?;
        let a = with_intercept(x);
        let t = y.len() as f64;
        let loss = |w: &DVector<f64>| -> f64 {
            let z = &a * w;
            z.iter().zip(y).map(|(z, y)| softplus(-y * z)).sum::<f64>() / t
        };
        let mut w = DVector::zeros(a.ncols());
        let mut f = loss(&w);
        let mut iterations = 0;
        for it in 0..Self::MAX_ITERS {
            iterations = it + 1;
            let z = &a * &w;
            // d/dz softplus(-y z) = -y sigmoid(-y z)
            let g_z = DVector::from_iterator(y.len(), z.iter().zip(y).map(|(z, y)| -y * sigmoid(-y * z)));
            let h_z: Vec<f64> = z.iter().map(|z| sigmoid(*z) * (1.0 - sigmoid(*z))).collect();
            let grad = a.tr_mul(&g_z) / t;
            if grad.amax() < 1e-10 {
                break;
            }
            let mut weighted = a.clone();
            for (i, h) in h_z.iter().enumerate() {
                weighted.row_mut(i).scale_mut(h.sqrt());
            }
            let hess = weighted.tr_mul(&weighted) / t;
            let step = fit_pinv(&hess, &grad)?;
            let slope = grad.dot(&step);
            let mut s = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let cand = &w - &step * s;
                let fc = loss(&cand);
                if fc.is_finite() && fc <= f - 1e-4 * s * slope {
                    let done = f - fc < 1e-15;
                    w = cand;
                    f = fc;
                    improved = !done;
                    break;
                }
                s *= 0.5;
            }
            if !improved {
                break;
            }
        }
        Ok(Self {
            intercept: w[0],
            coefficients: w.as_slice()[1..].to_vec(),
            iterations,
        })
    }

    /// Linear scores `b + x . w` (log-odds of class 1).
    pub fn decision_function(&self, x: &DMatrix<f64>) -> Vec<f64> {
        (0..x.nrows())
            .map(|i| {
                self.intercept
                    + x.row(i)
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Area under the ROC curve (Mann-Whitney statistic, ties count half).
pub fn auc(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(IplError::DimensionMismatch {
            expected: labels.len(),
            found: scores.len(),
            context: "AUC inputs",
        });
    }
    check_labels(labels)?;
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let pos = labels.iter().filter(|&&l| l > 0.0).count() as f64;
    let neg = labels.len() as f64 - pos;
    if pos == 0.0 || neg == 0.0 {
        return Err(IplError::InvalidParameter("AUC needs both classes".into()));
    }
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l > 0.0).map(|(r, _)| r).sum();
    Ok((rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg))
}

/// Fraction of rows where `sign(score)` (0 counted as 1) equals the label.
pub fn accuracy(scores: &[f64], labels: &[f64]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(IplError::DimensionMismatch {
            expected: labels.len(),
            found: scores.len(),
            context: "accuracy inputs",
        });
    }
    if labels.is_empty() {
        return Err(IplError::Empty("no rows to score"));
    }
    let hits = scores
        .iter()
        .zip(labels)
        .filter(|(s, l)| (if **s >= 0.0 { 1.0 } else { -1.0 }) == **l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_recovers_plane() {
        let x = DMatrix::from_fn(20, 2, |i, k| ((i * 7 + k * 3) % 11) as f64);
        let y: Vec<f64> = (0..20).map(|i| 1.5 + 2.0 * x[(i, 0)] - 0.5 * x[(i, 1)]).collect();
        let m = LinearRegression::fit(&x, &y).unwrap();
        assert!((m.intercept - 1.5).abs() < 1e-9);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-9);
        assert!((m.coefficients[1] + 0.5).abs() < 1e-9);
    }

    #[test]
    fn linear_handles_duplicate_columns() {
        let x = DMatrix::from_fn(10, 2, |i, _| i as f64);
        let y: Vec<f64> = (0..10).map(|i| 2.0 * i as f64).collect();
        let m = LinearRegression::fit(&x, &y).unwrap();
        assert!((m.coefficients[0] - 1.0).abs() < 1e-9);
        assert!((m.coefficients[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn logistic_matches_known_optimum() {
        // one feature, overlapping classes: the optimum satisfies the score
        // equations sum (sigmoid(z_i) - p_i) x_i = 0, checked directly
        let xs = [0.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [-1.0, -1.0, -1.0, -1.0, 1.0, 1.0, 1.0, 1.0];
        let x = DMatrix::from_column_slice(8, 1, &xs);
        let m = LogisticRegression::fit(&x, &ys).unwrap();
        let z = m.decision_function(&x);
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        for i in 0..8 {
            let p = if ys[i] > 0.0 { 1.0 } else { 0.0 };
            g0 += sigmoid(z[i]) - p;
            g1 += (sigmoid(z[i]) - p) * xs[i];
        }
        assert!(g0.abs() < 1e-8 && g1.abs() < 1e-8, "{g0} {g1}");
        assert!(m.coefficients[0] > 0.0);
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[-1.0, -1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[-1.0, -1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(auc(&[0.5; 4], &[-1.0, 1.0, -1.0, 1.0]).unwrap(), 0.5);
        // one discordant pair out of four
        assert_eq!(auc(&[0.1, 0.6, 0.5, 0.9], &[-1.0, -1.0, 1.0, 1.0]).unwrap(), 0.75);
        assert!(auc(&[0.1], &[1.0]).is_err());
    }

    #[test]
    fn accuracy_counts_zero_as_positive() {
        assert_eq!(accuracy(&[0.0, -1.0, 2.0, -3.0], &[1.0, -1.0, -1.0, -1.0]).unwrap(), 0.75);
    }
}
