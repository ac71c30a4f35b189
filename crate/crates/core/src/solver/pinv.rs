//! Minimum-norm least squares through the singular value decomposition.

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_finite, IplError, Result};

/// Singular values below this fraction of the largest one are treated as
/// zero.
pub const PINV_RCOND: f64 = 1e-10;

/// `pinv(A) y`: the minimum-norm least-squares solution of `A u = y`.
pub fn fit_pinv(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    pinv_solve(a, y, PINV_RCOND)
}

/// Minimum-norm least-squares solve with singular values below
/// `rcond * sigma_max` truncated.
pub fn pinv_solve(a: &DMatrix<f64>, y: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    if a.nrows() != y.len() {
        return Err(IplError::DimensionMismatch {
            expected: a.nrows(),
            found: y.len(),
            context: "least-squares targets",
        });
    }
    ensure_finite(a.as_slice(), "design matrix")?;
    ensure_finite(y.as_slice(), "targets")?;
    if a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    if a.nrows() == 0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().ok_or(IplError::Factorization("SVD left vectors"))?;
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or(IplError::Factorization("SVD right vectors"))?;
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = rcond * sigma_max;
    let mut coeffs = u.transpose() * y;
    for (c, &s) in coeffs.iter_mut().zip(svd.singular_values.iter()) {
        *c = if s > cutoff && s > 0.0 { *c / s } else { 0.0 };
    }
    let out = v_t.transpose() * coeffs;
    ensure_finite(out.as_slice(), "least-squares solution")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn identity_returns_target() {
        let y = DVector::from_vec(vec![1.0, -2.0, 3.5]);
        let u = fit_pinv(&DMatrix::identity(3, 3), &y).unwrap();
        assert!((u - &y).norm() < 1e-14);
    }

    #[test]
    fn interpolates_targets_in_column_span() {
        let a = random(30, 5, 1);
        let truth = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.0, 3.0]);
        let y = &a * &truth;
        let u = fit_pinv(&a, &y).unwrap();
        assert!((&a * &u - &y).norm() <= 1e-8 * y.norm());
    }

    #[test]
    fn rank_deficient_gives_minimum_norm() {
        // duplicated column: any split of the weight between the twins is a
        // least-squares solution; the minimum-norm one splits it evenly
        let base = random(40, 3, 2);
        let a = DMatrix::from_fn(40, 4, |i, j| base[(i, j.min(2))]);
        let y = DVector::from_fn(40, |i, _| (i as f64 * 0.37).sin());
        let u = fit_pinv(&a, &y).unwrap();
        assert!((u[2] - u[3]).abs() < 1e-10);

        // oracle: ridge-regularized normal equations approach the same point
        let ata = a.transpose() * &a + DMatrix::identity(4, 4) * 1e-12;
        let ridge = ata.cholesky().unwrap().solve(&(a.transpose() * &y));
        let res_u = (&a * &u - &y).norm();
        let res_r = (&a * &ridge - &y).norm();
        assert!((res_u - res_r).abs() < 1e-8);
        assert!(u.norm() <= ridge.norm() + 1e-8);
        for shift in [-1.0, 0.3, 2.0] {
            let mut other = u.clone();
            other[2] += shift;
            other[3] -= shift;
            assert!(((&a * &other - &y).norm() - res_u).abs() < 1e-10);
            assert!(u.norm() <= other.norm());
        }
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = DMatrix::identity(2, 2);
        a[(0, 1)] = f64::NAN;
        assert!(fit_pinv(&a, &DVector::zeros(2)).is_err());
    }
}
