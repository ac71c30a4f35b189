//! Exponent vectors for monomials and their graded-lexicographic enumeration.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{IplError, Result};

/// Largest degree for which multinomial coefficients are computed exactly.
pub const MAX_DEGREE: u32 = 20;

/// Exponent vector of a monomial `x_1^a_1 * ... * x_D^a_D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn constant(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// The monomial `x_var`.
    pub fn linear(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        Self(e)
    }

    /// The monomial `x_a * x_b` (`x_a^2` when `a == b`).
    pub fn pair(dim: usize, a: usize, b: usize) -> Self {
        let mut e = vec![0; dim];
        e[a] += 1;
        e[b] += 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree `|alpha|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Indices of the variables with a nonzero exponent, ascending.
    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(k, _)| k)
    }

    /// Pads or truncates to `dim` variables. Truncation requires the dropped
    /// exponents to be zero.
    pub fn resized(&self, dim: usize) -> Option<Self> {
        if dim < self.0.len() && self.0[dim..].iter().any(|&e| e != 0) {
            return None;
        }
        let mut e = self.0.clone();
        e.resize(dim, 0);
        Some(Self(e))
    }

    /// Value of the monomial at `x`. `x` must have length `dim()`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        let mut v = 1.0;
        for (&xk, &e) in x.iter().zip(&self.0) {
            if e > 0 {
                v *= xk.powi(e as i32);
            }
        }
        v
    }

    /// Human-readable name, e.g. `x2[t]*x3[t]` or `y[t-1]^2`; `1` for the
    /// constant term.
    pub fn name(&self, feature_names: &[String]) -> String {
        if self.is_constant() {
            return "1".to_string();
        }
        let mut parts = Vec::new();
        for (k, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = feature_names
                .get(k)
                .cloned()
                .unwrap_or_else(|| format!("v{}", k + 1));
            if e == 1 {
                parts.push(base);
            } else {
                parts.push(format!("{base}^{e}"));
            }
        }
        parts.join("*")
    }

    /// Inverse of [`MultiIndex::name`].
    pub fn parse_name(name: &str, feature_names: &[String]) -> Result<Self> {
        let name = name.trim();
        let mut e = vec![0u32; feature_names.len()];
        if name == "1" {
            return Ok(Self(e));
        }
        for factor in name.split('*') {
            let (base, power) = match factor.rsplit_once('^') {
                Some((b, p)) => {
                    let p: u32 = p
                        .parse()
                        .map_err(|_| IplError::Parse(format!("bad exponent in term '{name}'")))?;
                    (b, p)
                }
                None => (factor, 1),
            };
            let k = feature_names
                .iter()
                .position(|f| f == base)
                .ok_or_else(|| IplError::Parse(format!("unknown feature '{base}' in term '{name}'")))?;
            e[k] += power;
        }
        Ok(Self(e))
    }

    /// Graded-lexicographic order: total degree ascending, then exponent
    /// vectors descending, so `x1` precedes `x2` and `x1*x2` precedes `x1*x3`.
    pub fn graded_cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

/// `C(n, k)` by exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: usize = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Dimension of the space of polynomials of total degree `<= degree` in `dim`
/// variables, `C(degree + dim, degree)`.
pub fn polynomial_space_dim(dim: usize, degree: u32) -> usize {
    binomial(degree as usize + dim, degree as usize)
}

/// All multi-indices with `|alpha| <= degree` in graded-lexicographic order.
pub fn enumerate_multi_indices(dim: usize, degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(polynomial_space_dim(dim, degree));
    let mut current = vec![0u32; dim];
    for d in 0..=degree {
        fill(&mut current, 0, d, &mut out);
    }
    out
}

fn fill(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 >= current.len() {
        if let Some(last) = current.len().checked_sub(1) {
            current[last] = remaining;
            out.push(MultiIndex(current.to_vec()));
            current[last] = 0;
        } else if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// `s! / ((s - |alpha|)! * prod_k alpha_k!)`, the coefficient of
/// `prod_k (eta_k x_k)^alpha_k` in `(1 + eta . x)^s`.
pub fn multinomial(degree: u32, alpha: &MultiIndex) -> Result<f64> {
    if degree > MAX_DEGREE {
        return Err(IplError::UnsupportedDegree(degree));
    }
    if alpha.degree() > degree {
        return Ok(0.0);
    }
    let mut remaining = degree as u64;
    let mut coeff: u64 = 1;
    for &a in alpha.exponents() {
        let a = a as u64;
        let mut c: u64 = 1;
        for i in 0..a {
            c = c * (remaining - i) / (i + 1);
        }
        coeff = coeff
            .checked_mul(c)
            .ok_or_else(|| IplError::InvalidParameter("multinomial overflow".into()))?;
        remaining -= a;
    }
    Ok(coeff as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order_is_graded_lex() {
        let idx = enumerate_multi_indices(3, 2);
        let names: Vec<String> = idx
            .iter()
            .map(|a| a.name(&["a".into(), "b".into(), "c".into()]))
            .collect();
        assert_eq!(
            names,
            ["1", "a", "b", "c", "a^2", "a*b", "a*c", "b^2", "b*c", "c^2"]
        );
        for w in idx.windows(2) {
            assert_eq!(w[0].graded_cmp(&w[1]), Ordering::Less);
        }
    }

    #[test]
    fn dimension_law() {
        for s in 1..=4u32 {
            for d in 1..=8usize {
                assert_eq!(
                    enumerate_multi_indices(d, s).len(),
                    polynomial_space_dim(d, s),
                    "s={s} d={d}"
                );
            }
        }
        assert_eq!(polynomial_space_dim(5, 2), 21);
        assert_eq!(polynomial_space_dim(8, 2), 45);
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial(2, &MultiIndex::new(vec![1, 1])).unwrap(), 2.0);
        assert_eq!(multinomial(2, &MultiIndex::new(vec![0, 0])).unwrap(), 1.0);
        assert_eq!(multinomial(2, &MultiIndex::new(vec![2, 0])).unwrap(), 1.0);
        assert_eq!(multinomial(3, &MultiIndex::new(vec![1, 1, 1])).unwrap(), 6.0);
        assert_eq!(multinomial(3, &MultiIndex::new(vec![1, 0, 0])).unwrap(), 3.0);
        // 20! / (10! 10!) == C(20, 10)
        assert_eq!(
            multinomial(20, &MultiIndex::new(vec![10, 10])).unwrap(),
            184_756.0
        );
        assert_eq!(
            multinomial(20, &MultiIndex::new(vec![1; 20])).unwrap(),
            2_432_902_008_176_640_000.0
        );
        assert!(matches!(
            multinomial(21, &MultiIndex::new(vec![1])),
            Err(IplError::UnsupportedDegree(21))
        ));
    }

    #[test]
    fn names_round_trip() {
        let names: Vec<String> = ["x1[t]", "x2[t]", "y[t-1]"].iter().map(|s| s.to_string()).collect();
        for a in enumerate_multi_indices(3, 3) {
            let n = a.name(&names);
            assert_eq!(MultiIndex::parse_name(&n, &names).unwrap(), a, "{n}");
        }
        assert_eq!(MultiIndex::pair(3, 2, 2).name(&names), "y[t-1]^2");
        assert!(MultiIndex::parse_name("x9[t]", &names).is_err());
    }

    #[test]
    fn resize_keeps_nonzero_exponents() {
        let a = MultiIndex::pair(3, 0, 1);
        assert_eq!(a.resized(5).unwrap().exponents(), &[1, 1, 0, 0, 0]);
        assert!(MultiIndex::linear(3, 2).resized(2).is_none());
    }
}
