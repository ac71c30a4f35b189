use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};

/// The per-sample loss `phi(v, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `(v - y)^2`
    #[default]
    Squared,
    /// `max(0, 1 - y v)`, `y` in {-1, 1}
    Hinge,
    /// `log(1 + exp(-y v))`, `y` in {-1, 1}
    Logistic,
}

impl LossKind {
    pub fn is_classification(self) -> bool {
        !matches!(self, LossKind::Squared)
    }

    pub fn value(self, v: f64, y: f64) -> f64 {
        match self {
            LossKind::Squared => (v - y) * (v - y),
            LossKind::Hinge => (1.0 - y * v).max(0.0),
            LossKind::Logistic => softplus(-y * v),
        }
    }

    /// `d phi / dv`. For the hinge loss this returns the subgradient
    /// element `0` at the kink.
    pub fn derivative(self, v: f64, y: f64) -> f64 {
        match self {
            LossKind::Squared => 2.0 * (v - y),
            LossKind::Hinge => {
                if y * v < 1.0 {
                    -y
                } else {
                    0.0
                }
            }
            LossKind::Logistic => y * (sigmoid(y * v) - 1.0),
        }
    }

    /// `d^2 phi / dv^2`; `None` for the hinge loss.
    pub fn second_derivative(self, v: f64, y: f64) -> Option<f64> {
        match self {
            LossKind::Squared => Some(2.0),
            LossKind::Hinge => None,
            LossKind::Logistic => {
                let s = sigmoid(y * v);
                Some(s * (1.0 - s))
            }
        }
    }

    /// Mean loss over paired scores and targets.
    pub fn mean(self, scores: &[f64], targets: &[f64]) -> f64 {
        let t = scores.len().max(1) as f64;
        scores
            .iter()
            .zip(targets)
            .map(|(&v, &y)| self.value(v, y))
            .sum::<f64>()
            / t
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Squared => "squared",
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        })
    }
}

impl FromStr for LossKind {
    type Err = IplError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "squared" | "square" | "l2" => Ok(LossKind::Squared),
            "hinge" => Ok(LossKind::Hinge),
            "logistic" | "log" => Ok(LossKind::Logistic),
            other => Err(IplError::InvalidParameter(format!("unknown loss '{other}'"))),
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Checks that every label is exactly -1 or 1.
pub fn check_labels(y: &[f64]) -> Result<()> {
    match y.iter().position(|&v| v != 1.0 && v != -1.0) {
        Some(index) => Err(IplError::InvalidLabel {
            index,
            value: y[index],
        }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-6;
        for loss in [LossKind::Squared, LossKind::Logistic] {
            for &(v, y) in &[(0.3, 1.0), (-1.2, -1.0), (2.5, -1.0), (0.0, 1.0)] {
                let fd = (loss.value(v + h, y) - loss.value(v - h, y)) / (2.0 * h);
                assert!((fd - loss.derivative(v, y)).abs() < 1e-7, "{loss} {v} {y}");
                let fd2 = (loss.derivative(v + h, y) - loss.derivative(v - h, y)) / (2.0 * h);
                assert!((fd2 - loss.second_derivative(v, y).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn hinge_values() {
        assert_eq!(LossKind::Hinge.value(2.0, 1.0), 0.0);
        assert_eq!(LossKind::Hinge.value(0.0, 1.0), 1.0);
        assert_eq!(LossKind::Hinge.value(0.5, -1.0), 1.5);
        assert!(LossKind::Hinge.second_derivative(0.0, 1.0).is_none());
    }

    #[test]
    fn logistic_is_stable_for_large_margins() {
        assert!(LossKind::Logistic.value(-800.0, 1.0).is_finite());
        assert!((LossKind::Logistic.value(-800.0, 1.0) - 800.0).abs() < 1e-9);
        assert_eq!(LossKind::Logistic.value(800.0, 1.0), 0.0);
    }

    #[test]
    fn parse_and_display() {
        for l in [LossKind::Squared, LossKind::Hinge, LossKind::Logistic] {
            assert_eq!(l.to_string().parse::<LossKind>().unwrap(), l);
        }
        assert!("absolute".parse::<LossKind>().is_err());
        assert!(check_labels(&[1.0, -1.0]).is_ok());
        assert!(check_labels(&[1.0, 0.0]).is_err());
    }
}
