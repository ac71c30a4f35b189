use rand_distr::{Distribution, StandardNormal};

use super::lag::SupervisedDataset;
use crate::error::{IplError, Result};
use crate::rng::seeded_rng;

/// A perturbed copy of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed {
    pub dataset: SupervisedDataset,
    /// The column had zero spread and was left unchanged.
    pub constant_column: bool,
}

/// Sample standard deviation (`n - 1` denominator).
pub fn sample_std(values: impl ExactSizeIterator<Item = f64> + Clone) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Adds `alpha_p * sigma_j * z` (`z` standard normal, one draw per row in
/// row order) to column `feature`, where `sigma_j` is that column's sample
/// standard deviation. Other columns are untouched.
pub fn perturb_feature(ds: &SupervisedDataset, feature: usize, alpha_p: f64, seed: u64) -> Result<Perturbed> {
    if feature >= ds.dim() {
        return Err(IplError::InvalidParameter(format!(
            "feature index {feature} out of range for dimension {}",
            ds.dim()
        )));
    }
    if !(alpha_p >= 0.0 && alpha_p.is_finite()) {
        return Err(IplError::InvalidParameter(format!(
            "perturbation level must be non-negative, got {alpha_p}"
        )));
    }
    let sigma = sample_std(ds.inputs.column(feature).iter().copied());
    let mut out = ds.clone();
    if sigma == 0.0 {
        log::warn!("feature {} is constant; perturbation skipped", ds.feature_names[feature]);
        return Ok(Perturbed {
            dataset: out,
            constant_column: true,
        });
    }
    if alpha_p == 0.0 {
        return Ok(Perturbed {
            dataset: out,
            constant_column: false,
        });
    }
    let mut rng = seeded_rng(seed);
    for v in out.inputs.column_mut(feature).iter_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += alpha_p * sigma * z;
    }
    Ok(Perturbed {
        dataset: out,
        constant_column: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn ds(x: DMatrix<f64>) -> SupervisedDataset {
        let names = (1..=x.ncols()).map(|k| format!("x{k}[t]")).collect();
        let n = x.nrows();
        SupervisedDataset::from_rows(x, vec![0.0; n], names).unwrap()
    }

    #[test]
    fn zero_level_is_identity() {
        let d = ds(DMatrix::from_fn(50, 3, |i, k| ((i * 3 + k) as f64).sin()));
        let p = perturb_feature(&d, 1, 0.0, 1).unwrap();
        assert_eq!(p.dataset, d);
        assert!(!p.constant_column);
    }

    #[test]
    fn constant_column_flagged() {
        let d = ds(DMatrix::from_fn(20, 2, |i, k| if k == 0 { 3.0 } else { i as f64 }));
        let p = perturb_feature(&d, 0, 1.0, 1).unwrap();
        assert!(p.constant_column);
        assert_eq!(p.dataset, d);
    }

    #[test]
    fn only_target_column_changes() {
        let d = ds(DMatrix::from_fn(30, 3, |i, k| (i + k) as f64));
        let p = perturb_feature(&d, 2, 0.5, 4).unwrap();
        assert_eq!(p.dataset.inputs.column(0), d.inputs.column(0));
        assert_eq!(p.dataset.inputs.column(1), d.inputs.column(1));
        assert_ne!(p.dataset.inputs.column(2), d.inputs.column(2));
        assert_eq!(p, perturb_feature(&d, 2, 0.5, 4).unwrap());
        assert!(perturb_feature(&d, 3, 0.5, 4).is_err());
        assert!(perturb_feature(&d, 0, -1.0, 4).is_err());
    }

    #[test]
    fn unit_level_doubles_variance() {
        // oracle: sample variance of the perturbed column over several seeds
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = seeded_rng(99);
        let col: Vec<f64> = (0..4000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let d = ds(DMatrix::from_column_slice(4000, 1, &col));
        let base = sample_std(col.iter().copied()).powi(2);
        for seed in 0..5 {
            let p = perturb_feature(&d, 0, 1.0, seed).unwrap();
            let var = sample_std(p.dataset.inputs.column(0).iter().copied()).powi(2);
            assert!((var / base - 2.0).abs() < 0.2, "ratio {}", var / base);
        }
    }
}
