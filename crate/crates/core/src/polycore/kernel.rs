//! The inhomogeneous polynomial kernel, kernel centers and kernel matrices.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::multi_index::polynomial_space_dim;
use crate::error::{ensure_finite, IplError, Result};

/// `(1 + x . eta)^s`.
pub fn kernel_eval(x: &[f64], eta: &[f64], degree: u32) -> Result<f64> {
    if x.len() != eta.len() {
        return Err(IplError::DimensionMismatch {
            expected: eta.len(),
            found: x.len(),
            context: "kernel arguments",
        });
    }
    ensure_finite(x, "kernel input")?;
    ensure_finite(eta, "kernel center")?;
    Ok(kernel_unchecked(x, eta, degree))
}

#[inline]
pub(crate) fn kernel_unchecked(x: &[f64], eta: &[f64], degree: u32) -> f64 {
    let dot: f64 = x.iter().zip(eta).map(|(a, b)| a * b).sum();
    (1.0 + dot).powi(degree as i32)
}

/// How kernel centers are chosen from the training inputs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CenterStrategy {
    /// The first `n` rows in time order.
    #[default]
    FirstSamples,
    /// `n` points drawn uniformly inside the per-feature data range.
    RandomUniform { seed: u64 },
    /// `n` distinct rows drawn without replacement.
    RandomSubsample { seed: u64 },
}

/// The kernel centers `eta_1..eta_n`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: DMatrix<f64>,
    strategy: CenterStrategy,
}

impl CenterSet {
    pub fn new(centers: DMatrix<f64>, strategy: CenterStrategy) -> Result<Self> {
        ensure_finite(centers.as_slice(), "centers")?;
        Ok(Self { centers, strategy })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn strategy(&self) -> CenterStrategy {
        self.strategy
    }

    pub fn len(&self) -> usize {
        self.centers.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn row(&self, j: usize) -> Vec<f64> {
        self.centers.row(j).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|j| self.row(j)).collect()
    }
}

/// Picks `C(s + D, s)` centers from `inputs` (rows are time-ordered samples).
pub fn build_centers(
    inputs: &DMatrix<f64>,
    degree: u32,
    strategy: CenterStrategy,
) -> Result<CenterSet> {
    if degree == 0 {
        return Err(IplError::InvalidParameter("degree must be positive".into()));
    }
    let (rows, dim) = inputs.shape();
    let n = polynomial_space_dim(dim, degree);
    ensure_finite(inputs.as_slice(), "inputs")?;

    let centers = match strategy {
        CenterStrategy::FirstSamples => {
            check_rows(n, rows)?;
            inputs.rows(0, n).into_owned()
        }
        CenterStrategy::RandomSubsample { seed } => {
            check_rows(n, rows)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = index::sample(&mut rng, rows, n).into_vec();
            picked.sort_unstable();
            inputs.select_rows(picked.iter())
        }
        CenterStrategy::RandomUniform { seed } => {
            if rows == 0 {
                return Err(IplError::TooFewRows {
                    required: 1,
                    available: 0,
                    context: "uniform centers need a data range",
                });
            }
            let bounds: Vec<(f64, f64)> = (0..dim)
                .map(|k| {
                    let col = inputs.column(k);
                    (col.min(), col.max())
                })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut data = Vec::with_capacity(n * dim);
            for _ in 0..n {
                for &(lo, hi) in &bounds {
                    data.push(if hi > lo { rng.random_range(lo..hi) } else { lo });
                }
            }
            DMatrix::from_row_slice(n, dim, &data)
        }
    };
    CenterSet::new(centers, strategy)
}

fn check_rows(required: usize, available: usize) -> Result<()> {
    if available < required {
        Err(IplError::TooFewRows {
            required,
            available,
            context: "sample-based centers",
        })
    } else {
        Ok(())
    }
}

/// Outcome of the rank check on the center Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalCheck {
    /// The Gram matrix has full numerical rank.
    pub is_fundamental: bool,
    /// Additionally, the number of centers equals `C(s + D, s)`, so the
    /// kernel translates span every polynomial of degree `<= s`.
    pub spans_polynomial_space: bool,
    pub rank: usize,
    pub size: usize,
    pub smallest_singular_value: f64,
    pub largest_singular_value: f64,
}

/// Checks numerically that the centers form a fundamental system for the
/// degree-`s` kernel: the Gram matrix `G_ij = K_s(eta_i, eta_j)` must have
/// full rank. Costs one dense SVD of an `n x n` matrix.
pub fn validate_fundamental_system(centers: &CenterSet, degree: u32) -> FundamentalCheck {
    let n = centers.len();
    let rows = centers.rows();
    let gram = DMatrix::from_fn(n, n, |i, j| kernel_unchecked(&rows[i], &rows[j], degree));
    let sv = gram.singular_values();
    let largest = sv.iter().copied().fold(0.0, f64::max);
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = n as f64 * f64::EPSILON * largest;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    let expected = polynomial_space_dim(centers.dim(), degree);
    FundamentalCheck {
        is_fundamental: n > 0 && rank == n,
        spans_polynomial_space: n > 0 && rank == n && n == expected,
        rank,
        size: n,
        smallest_singular_value: if n == 0 { 0.0 } else { smallest },
        largest_singular_value: largest,
    }
}

/// `A_ij = K_s(x_i, eta_j)` for every input row `x_i` and center `eta_j`.
/// Rows are computed independently, so the result does not depend on the
/// number of worker threads.
pub fn kernel_matrix(inputs: &DMatrix<f64>, centers: &CenterSet, degree: u32) -> Result<DMatrix<f64>> {
    if inputs.ncols() != centers.dim() {
        return Err(IplError::DimensionMismatch {
            expected: centers.dim(),
            found: inputs.ncols(),
            context: "kernel matrix inputs",
        });
    }
    ensure_finite(inputs.as_slice(), "inputs")?;
    let center_rows = centers.rows();
    let t = inputs.nrows();
    let n = centers.len();
    let data: Vec<f64> = (0..t)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x: Vec<f64> = inputs.row(i).iter().copied().collect();
            center_rows
                .iter()
                .map(move |eta| kernel_unchecked(&x, eta, degree))
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(DMatrix::from_row_slice(t, n, &data))
}
