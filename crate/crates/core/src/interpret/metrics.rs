use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::ranking::ImportanceReport;
use crate::error::{IplError, Result};
use crate::polycore::{MultiIndex, SparsePolynomial};

/// Cosine similarity with a flag for a zero method vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSimilarity {
    pub value: f64,
    pub zero_method_vector: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricBundle {
    pub feature_overlap_ratio: f64,
    /// NaN when fewer than two truth terms exist.
    pub ranking_similarity: f64,
    pub value_similarity: f64,
    pub ranking_undefined: bool,
    pub zero_method_vector: bool,
}

/// `|truth ∩ top_k(report)| / |truth|`.
pub fn feature_overlap_ratio(truth: &[MultiIndex], report: &ImportanceReport, top_k: usize) -> Result<f64> {
    if truth.is_empty() {
        return Err(IplError::Empty("truth term set is empty"));
    }
    let top = report.top_k(top_k);
    let hits = truth
        .iter()
        .filter(|t| top.iter().any(|e| &e.alpha == *t))
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// `1 - 6 sum d_i^2 / (n (n^2 - 1))` with `d_i = method_i - truth_i`.
/// NaN when `n < 2`.
pub fn spearman_rho(method_ranks: &[f64], truth_ranks: &[f64]) -> Result<f64> {
    if method_ranks.len() != truth_ranks.len() {
        return Err(IplError::DimensionMismatch {
            expected: truth_ranks.len(),
            found: method_ranks.len(),
            context: "rank vectors",
        });
    }
    let n = method_ranks.len() as f64;
    if method_ranks.len() < 2 {
        return Ok(f64::NAN);
    }
    let ss: f64 = method_ranks
        .iter()
        .zip(truth_ranks)
        .map(|(m, t)| (m - t) * (m - t))
        .sum();
    Ok(1.0 - 6.0 * ss / (n * (n * n - 1.0)))
}

/// Cosine of the angle between `method` and `truth`.
pub fn cosine_similarity(method: &[f64], truth: &[f64]) -> Result<ValueSimilarity> {
    if method.len() != truth.len() {
        return Err(IplError::DimensionMismatch {
            expected: truth.len(),
            found: method.len(),
            context: "coefficient vectors",
        });
    }
    if method.is_empty() {
        return Err(IplError::Empty("coefficient vectors are empty"));
    }
    let nt = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nt == 0.0 {
        return Err(IplError::InvalidParameter("truth coefficient vector is zero".into()));
    }
    let nm = method.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nm == 0.0 {
        return Ok(ValueSimilarity {
            value: 0.0,
            zero_method_vector: true,
        });
    }
    let dot: f64 = method.iter().zip(truth).map(|(a, b)| a * b).sum();
    Ok(ValueSimilarity {
        value: (dot / (nm * nt)).clamp(-1.0, 1.0),
        zero_method_vector: false,
    })
}

/// Non-constant truth terms lifted to the report's dimension, ordered by
/// `|coefficient|` descending (graded order on ties).
fn truth_terms(truth: &SparsePolynomial, dim: usize) -> Result<Vec<(MultiIndex, f64)>> {
    let mut out = Vec::new();
    for (alpha, c) in truth.terms() {
        if alpha.is_constant() || *c == 0.0 {
            continue;
        }
        let lifted = alpha.resized(dim).ok_or(IplError::DimensionMismatch {
            expected: dim,
            found: alpha.dim(),
            context: "truth term outside the model's variables",
        })?;
        out.push((lifted, *c));
    }
    if out.is_empty() {
        return Err(IplError::Empty("truth polynomial has no non-constant terms"));
    }
    out.sort_by(|(a1, c1), (a2, c2)| {
        c2.abs()
            .partial_cmp(&c1.abs())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a1.graded_cmp(a2))
    });
    Ok(out)
}

/// Spearman-style rho over the truth terms. The method rank of a truth term
/// is its position among the truth terms found in `top_k(report)`; absent
/// terms share rank `found + 1`.
pub fn ranking_similarity(truth: &SparsePolynomial, report: &ImportanceReport, top_k: usize) -> Result<f64> {
    let terms = truth_terms(truth, report.dim())?;
    let found: Vec<&MultiIndex> = report
        .top_k(top_k)
        .iter()
        .map(|e| &e.alpha)
        .filter(|a| terms.iter().any(|(t, _)| t == *a))
        .collect();
    let missing = (found.len() + 1) as f64;
    let method: Vec<f64> = terms
        .iter()
        .map(|(t, _)| {
            found
                .iter()
                .position(|a| *a == t)
                .map_or(missing, |p| (p + 1) as f64)
        })
        .collect();
    let truth_ranks: Vec<f64> = (1..=terms.len()).map(|r| r as f64).collect();
    spearman_rho(&method, &truth_ranks)
}

/// Cosine similarity between the report's coefficients on the truth terms
/// (0 where a term is not listed) and the true coefficients.
pub fn value_similarity(truth: &SparsePolynomial, report: &ImportanceReport) -> Result<ValueSimilarity> {
    let terms = truth_terms(truth, report.dim())?;
    let method: Vec<f64> = terms
        .iter()
        .map(|(t, _)| {
            report
                .entries
                .iter()
                .find(|e| &e.alpha == t)
                .map_or(0.0, |e| e.coefficient)
        })
        .collect();
    let target: Vec<f64> = terms.iter().map(|(_, c)| *c).collect();
    cosine_similarity(&method, &target)
}

/// All three interpretability metrics against a known generating polynomial.
pub fn interpretability_metrics(
    truth: &SparsePolynomial,
    report: &ImportanceReport,
    top_k: usize,
) -> Result<MetricBundle> {
    let terms: Vec<MultiIndex> = truth_terms(truth, report.dim())?.into_iter().map(|(a, _)| a).collect();
    let overlap = feature_overlap_ratio(&terms, report, top_k)?;
    let rho = ranking_similarity(truth, report, top_k)?;
    let value = value_similarity(truth, report)?;
    Ok(MetricBundle {
        feature_overlap_ratio: overlap,
        ranking_similarity: rho,
        value_similarity: value.value,
        ranking_undefined: rho.is_nan(),
        zero_method_vector: value.zero_method_vector,
    })
}
