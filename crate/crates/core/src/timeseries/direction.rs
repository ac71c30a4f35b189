use crate::error::{IplError, Result};

use super::lag::RawSeries;

/// `label_t = 1` if `prices[t + k] > prices[t]`, else `-1`; the last `k`
/// positions have no label and are dropped.
pub fn make_direction_targets(prices: &[f64], horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(IplError::InvalidParameter("horizon must be positive".into()));
    }
    if horizon >= prices.len() {
        return Err(IplError::TooFewRows {
            required: horizon + 1,
            available: prices.len(),
            context: "direction targets",
        });
    }
    Ok(prices
        .iter()
        .zip(&prices[horizon..])
        .map(|(now, later)| if later > now { 1.0 } else { -1.0 })
        .collect())
}

/// Name of the direction target for horizon `k`, e.g. `Target_3period`.
pub fn direction_target_name(horizon: usize) -> String {
    format!("Target_{horizon}period")
}

/// Replaces the series' targets (read as prices) by direction labels.
pub fn direction_series(series: &RawSeries, horizon: usize) -> Result<RawSeries> {
    let labels = make_direction_targets(series.targets(), horizon)?;
    series.with_targets(labels, direction_target_name(horizon))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let l = make_direction_targets(&[100.0, 101.0, 99.0, 102.0], 3).unwrap();
        assert_eq!(l, vec![1.0]);
        assert_eq!(make_direction_targets(&[5.0; 6], 2).unwrap(), vec![-1.0; 4]);
        let up: Vec<f64> = (0..10).map(f64::from).collect();
        assert_eq!(make_direction_targets(&up, 5).unwrap(), vec![1.0; 5]);
        assert!(make_direction_targets(&up, 10).is_err());
        assert!(make_direction_targets(&up, 0).is_err());
        assert_eq!(direction_target_name(5), "Target_5period");
    }

    #[test]
    fn reversal_flips_strictly_monotone_labels() {
        let p: Vec<f64> = (0..20).map(|i| (i as f64).powi(2) + 1.0).collect();
        let mut r = p.clone();
        r.reverse();
        let a = make_direction_targets(&p, 3).unwrap();
        let b = make_direction_targets(&r, 3).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
    }
}
