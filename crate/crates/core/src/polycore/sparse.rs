//! Explicit monomial form of a kernel model and its thresholded sparse
//! predictor.

use std::collections::HashSet;

use rayon::prelude::*;

use super::model::KernelModel;
use super::multi_index::{enumerate_multi_indices, multinomial, MultiIndex, MAX_DEGREE};
use crate::error::{ensure_finite, IplError, Result};

/// A polynomial stored as `(multi-index, coefficient)` pairs whose
/// coefficients all satisfy `|coefficient| >= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsePolynomial {
    terms: Vec<(MultiIndex, f64)>,
    threshold: f64,
    degree: u32,
    feature_names: Vec<String>,
}

impl SparsePolynomial {
    /// Builds a polynomial, dropping terms below `threshold`. Fails on
    /// duplicate multi-indices, wrong dimensions or degree overflow.
    pub fn new(
        terms: Vec<(MultiIndex, f64)>,
        threshold: f64,
        degree: u32,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if !(threshold >= 0.0) {
            return Err(IplError::InvalidParameter(format!(
                "threshold must be non-negative, got {threshold}"
            )));
        }
        let dim = feature_names.len();
        let mut seen = HashSet::with_capacity(terms.len());
        for (alpha, c) in &terms {
            if alpha.dim() != dim {
                return Err(IplError::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                    context: "term multi-index",
                });
            }
            if alpha.degree() > degree {
                return Err(IplError::InvalidParameter(format!(
                    "term of degree {} exceeds polynomial degree {degree}",
                    alpha.degree()
                )));
            }
            if !c.is_finite() {
                return Err(IplError::NonFinite("polynomial coefficient"));
            }
            if !seen.insert(alpha.clone()) {
                return Err(IplError::InvalidParameter(format!(
                    "duplicate term {}",
                    alpha.name(&feature_names)
                )));
            }
        }
        let terms = terms.into_iter().filter(|(_, c)| c.abs() >= threshold).collect();
        Ok(Self {
            terms,
            threshold,
            degree,
            feature_names,
        })
    }

    pub fn terms(&self) -> &[(MultiIndex, f64)] {
        &self.terms
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Option<f64> {
        self.terms.iter().find(|(a, _)| a == alpha).map(|(_, c)| *c)
    }

    /// The sub-polynomial `{(alpha, w) : |w| >= threshold}`.
    pub fn thresholded(&self, threshold: f64) -> Result<Self> {
        Self::new(
            self.terms.clone(),
            threshold.max(self.threshold),
            self.degree,
            self.feature_names.clone(),
        )
    }

    /// `sum_alpha w_alpha prod_k x_k^alpha_k`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, c)| c * a.monomial(x)).sum()
    }
}

/// Expands `sum_j u_j (1 + eta_j . x)^s` into monomials:
/// `w_alpha = M(s, alpha) sum_j u_j prod_k eta_jk^alpha_k` for every
/// `|alpha| <= s`, in graded-lexicographic order. No threshold is applied.
pub fn expand_to_monomials(model: &KernelModel) -> Result<SparsePolynomial> {
    if model.degree == 0 || model.degree > MAX_DEGREE {
        return Err(IplError::UnsupportedDegree(model.degree));
    }
    let indices = enumerate_multi_indices(model.dim(), model.degree);
    let centers = model.centers.rows();
    let weights = model.weights.as_slice();
    let terms: Vec<(MultiIndex, f64)> = indices
        .into_par_iter()
        .map(|alpha| {
            let m = multinomial(model.degree, &alpha)?;
            let s: f64 = centers
                .iter()
                .zip(weights)
                .map(|(eta, u)| u * alpha.monomial(eta))
                .sum();
            Ok((alpha, m * s))
        })
        .collect::<Result<_>>()?;
    SparsePolynomial::new(terms, 0.0, model.degree, model.feature_names.clone())
}

/// Evaluates the sparse predictor at `x` (model coordinates).
pub fn predict_sparse(poly: &SparsePolynomial, x: &[f64]) -> Result<f64> {
    if x.len() != poly.dim() {
        return Err(IplError::DimensionMismatch {
            expected: poly.dim(),
            found: x.len(),
            context: "sparse prediction input",
        });
    }
    ensure_finite(x, "sparse prediction input")?;
    Ok(poly.evaluate(x))
}

#[cfg(test)]
mod tests {
    use nalgebra::{DMatrix, DVector};

    use super::*;
    use crate::polycore::{predict_kernel, CenterSet, CenterStrategy};
    use crate::solver::LossKind;
    use crate::timeseries::LagSpec;

    fn names(d: usize) -> Vec<String> {
        (1..=d).map(|k| format!("x{k}")).collect()
    }

    #[test]
    fn binomial_expansion_of_single_center() {
        let model = KernelModel::new(
            2,
            CenterSet::new(DMatrix::from_element(1, 1, 0.5), CenterStrategy::FirstSamples).unwrap(),
            DVector::from_element(1, 1.0),
            None,
            LagSpec::default(),
            LossKind::Squared,
            names(1),
        )
        .unwrap();
        let p = expand_to_monomials(&model).unwrap();
        let coeffs: Vec<f64> = p.terms().iter().map(|(_, c)| *c).collect();
        assert_eq!(coeffs, vec![1.0, 1.0, 0.25]);
        assert_eq!(p.terms()[2].0.exponents(), &[2]);
    }

    #[test]
    fn empty_and_constant_polynomials() {
        let empty = SparsePolynomial::new(vec![], 0.0, 2, names(3)).unwrap();
        assert_eq!(predict_sparse(&empty, &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let c = SparsePolynomial::new(vec![(MultiIndex::constant(3), 4.5)], 0.0, 2, names(3)).unwrap();
        assert_eq!(predict_sparse(&c, &[-1.0, 9.0, 0.3]).unwrap(), 4.5);
        assert!(predict_sparse(&c, &[1.0]).is_err());
    }

    #[test]
    fn duplicate_terms_rejected() {
        let t = vec![(MultiIndex::linear(2, 0), 1.0), (MultiIndex::linear(2, 0), 2.0)];
        assert!(SparsePolynomial::new(t, 0.0, 2, names(2)).is_err());
    }

    #[test]
    fn threshold_filters_and_nests() {
        let t = vec![
            (MultiIndex::constant(2), 0.1),
            (MultiIndex::linear(2, 0), -0.5),
            (MultiIndex::linear(2, 1), 0.3),
        ];
        let p = SparsePolynomial::new(t, 0.0, 1, names(2)).unwrap();
        let q = p.thresholded(0.3).unwrap();
        assert_eq!(q.len(), 2);
        assert!(q.terms().iter().all(|(_, c)| c.abs() >= 0.3));
        assert!(p.thresholded(f64::INFINITY).unwrap().is_empty());
    }

    #[test]
    fn random_model_expansion_matches_kernel() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let centers = DMatrix::from_fn(10, 3, |_, _| rng.random_range(-1.0..1.0));
        let weights = DVector::from_fn(10, |_, _| rng.random_range(-2.0..2.0));
        let model = KernelModel::new(
            2,
            CenterSet::new(centers, CenterStrategy::FirstSamples).unwrap(),
            weights,
            None,
            LagSpec::default(),
            LossKind::Squared,
            names(3),
        )
        .unwrap();
        let p = expand_to_monomials(&model).unwrap();
        assert_eq!(p.len(), 10);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k = predict_kernel(&model, &x).unwrap();
            let s = predict_sparse(&p, &x).unwrap();
            assert!((k - s).abs() <= 1e-8, "{k} vs {s}");
        }
    }
}
