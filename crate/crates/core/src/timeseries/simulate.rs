//! Synthetic series: the polynomial benchmark with autoregressive target,
//! a regime-switching price path, and an interaction-driven alarm series.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::lag::RawSeries;
use crate::error::{IplError, Result};
use crate::polycore::{MultiIndex, SparsePolynomial};
use crate::rng::{derive_seed, seeded_rng, IplRng};

const BENCH_DIM: usize = 5;

/// `f(x) = (1 + x1 + 2 x2 + 3 x3 + 4 x4 + 5 x5 + 6 x1 x2 - 7 x3 x4) / 15`.
pub fn benchmark_signal(x: &[f64]) -> f64 {
    (1.0 + x[0] + 2.0 * x[1] + 3.0 * x[2] + 4.0 * x[3] + 5.0 * x[4] + 6.0 * x[0] * x[1]
        - 7.0 * x[2] * x[3])
        / 15.0
}

/// Settings for [`simulate_benchmark`].
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub t_train: usize,
    pub t_test: usize,
    pub seed: u64,
    /// Adds `cos(y_{t-1}) sin(y_{t-2})` to each target.
    pub include_temporal: bool,
    pub noise_sd: f64,
    /// Appends an independent uniform column `x6` that the target ignores.
    pub add_irrelevant: bool,
    /// Adds noise to the test targets as well.
    pub noisy_test: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        Self {
            t_train: 4000,
            t_test: 1000,
            seed: 0,
            include_temporal: true,
            noise_sd: 0.1,
            add_irrelevant: false,
            noisy_test: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark {
    pub train: RawSeries,
    pub test: RawSeries,
    /// The polynomial part `f` in the raw feature coordinates.
    pub truth: SparsePolynomial,
}

/// Generates `y_t = cos(y_{t-1}) sin(y_{t-2}) + f(x_t) + eps_t` with
/// `x_t ~ U[0,1]^5` i.i.d., `eps_t ~ N(0, noise_sd^2)` and
/// `y_{-1} = y_{-2} = 0`. The test series is drawn from an independent
/// stream and is noiseless unless `noisy_test` is set.
pub fn simulate_benchmark(cfg: &BenchmarkConfig) -> Result<Benchmark> {
    if cfg.t_train < 3 || cfg.t_test < 3 {
        return Err(IplError::InvalidParameter(
            "benchmark series need at least 3 rows".into(),
        ));
    }
    if !(cfg.noise_sd >= 0.0 && cfg.noise_sd.is_finite()) {
        return Err(IplError::InvalidParameter(format!(
            "noise_sd must be non-negative, got {}",
            cfg.noise_sd
        )));
    }
    let d = BENCH_DIM + usize::from(cfg.add_irrelevant);
    let names: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
    let train = benchmark_series(cfg, cfg.t_train, derive_seed(cfg.seed, &[0]), cfg.noise_sd, &names)?;
    let test_noise = if cfg.noisy_test { cfg.noise_sd } else { 0.0 };
    let test = benchmark_series(cfg, cfg.t_test, derive_seed(cfg.seed, &[1]), test_noise, &names)?;
    Ok(Benchmark {
        train,
        test,
        truth: benchmark_truth(d)?,
    })
}

fn benchmark_series(
    cfg: &BenchmarkConfig,
    rows: usize,
    seed: u64,
    noise_sd: f64,
    names: &[String],
) -> Result<RawSeries> {
    let d = names.len();
    let mut rng = seeded_rng(seed);
    let mut x = Vec::with_capacity(rows * d);
    let mut y = Vec::with_capacity(rows);
    let (mut prev1, mut prev2) = (0.0f64, 0.0f64);
    for _ in 0..rows {
        let row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let eps: f64 = StandardNormal.sample(&mut rng);
        let mut v = benchmark_signal(&row) + noise_sd * eps;
        if cfg.include_temporal {
            v += prev1.cos() * prev2.sin();
        }
        x.extend_from_slice(&row);
        y.push(v);
        prev2 = prev1;
        prev1 = v;
    }
    let timestamps = (0..rows).map(|t| t as f64).collect();
    RawSeries::new(Some(timestamps), DMatrix::from_row_slice(rows, d, &x), y, names.to_vec(), "y")
}

/// Coefficients `(1, 1, 2, 3, 4, 5, 6, -7) / 15` on
/// `(1, x1, .., x5, x1 x2, x3 x4)`, padded with zeros to `dim` variables.
pub fn benchmark_truth(dim: usize) -> Result<SparsePolynomial> {
    let mut terms = vec![(MultiIndex::constant(dim), 1.0 / 15.0)];
    for k in 0..BENCH_DIM {
        terms.push((MultiIndex::linear(dim, k), (k + 1) as f64 / 15.0));
    }
    terms.push((MultiIndex::pair(dim, 0, 1), 6.0 / 15.0));
    terms.push((MultiIndex::pair(dim, 2, 3), -7.0 / 15.0));
    let names = (1..=dim).map(|k| format!("x{k}")).collect();
    SparsePolynomial::new(terms, 0.0, 2, names)
}

/// Settings for [`simulate_regime_prices`].
#[derive(Debug, Clone, PartialEq)]
pub struct RegimePriceConfig {
    pub rows: usize,
    pub seed: u64,
    /// Probability of staying in the current drift regime each step.
    pub stay_probability: f64,
    /// Per-step log drift, `+drift` in up regimes and `-drift` in down ones.
    pub drift: f64,
    pub volatility: f64,
}

impl Default for RegimePriceConfig {
    fn default() -> Self {
        Self {
            rows: 4000,
            seed: 0,
            stay_probability: 0.97,
            drift: 0.004,
            volatility: 0.004,
        }
    }
}

/// Log-price random walk whose drift switches sign in persistent regimes.
///
/// Features observable at time `t`: the last log return `ret`, the bar range
/// `log(high / low)` and `log_volume`; the target is the closing price.
pub fn simulate_regime_prices(cfg: &RegimePriceConfig) -> Result<RawSeries> {
    if cfg.rows < 2 {
        return Err(IplError::InvalidParameter("price series needs at least 2 rows".into()));
    }
    if !(0.0..=1.0).contains(&cfg.stay_probability) || !(cfg.volatility > 0.0) {
        return Err(IplError::InvalidParameter("invalid regime price settings".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut up = rng.random_bool(0.5);
    let mut close = 100.0f64;
    let mut data = Vec::with_capacity(cfg.rows * 3);
    let mut prices = Vec::with_capacity(cfg.rows);
    for _ in 0..cfg.rows {
        if !rng.random_bool(cfg.stay_probability) {
            up = !up;
        }
        let drift = if up { cfg.drift } else { -cfg.drift };
        let ret = drift + cfg.volatility * normal(&mut rng);
        let open = close;
        close = open * ret.exp();
        let wick_hi = (cfg.volatility * 0.5 * normal(&mut rng)).abs();
        let wick_lo = (cfg.volatility * 0.5 * normal(&mut rng)).abs();
        let range = (open.max(close) / open.min(close)).ln() + wick_hi + wick_lo;
        let log_volume = 10.0 + 0.3 * normal(&mut rng) + 20.0 * ret.abs();
        data.extend_from_slice(&[ret, range, log_volume]);
        prices.push(close);
    }
    let names = vec!["ret".to_string(), "range".to_string(), "log_volume".to_string()];
    let ts = (0..cfg.rows).map(|t| t as f64).collect();
    RawSeries::new(
        Some(ts),
        DMatrix::from_row_slice(cfg.rows, 3, &data),
        prices,
        names,
        "close",
    )
}

/// Settings for [`simulate_alarm_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct AlarmConfig {
    pub rows: usize,
    pub seed: u64,
    /// AR(1) persistence of each sensor channel.
    pub persistence: f64,
    /// Stationary standard deviation of each channel around 0.5.
    pub spread: f64,
    /// Abnormal when `x2 * x3` exceeds this.
    pub threshold: f64,
}

impl Default for AlarmConfig {
    fn default() -> Self {
        Self {
            rows: 3000,
            seed: 0,
            persistence: 0.98,
            spread: 0.2,
            threshold: 0.3,
        }
    }
}

/// Five slowly varying sensor channels in `[0, 1]`; the label is `1`
/// (abnormal) when the product `x2 * x3` exceeds the threshold, else `-1`.
/// Channel persistence makes abnormal states arrive in runs.
pub fn simulate_alarm_series(cfg: &AlarmConfig) -> Result<RawSeries> {
    if cfg.rows == 0 || !(0.0..1.0).contains(&cfg.persistence) {
        return Err(IplError::InvalidParameter("invalid alarm settings".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let innovation = cfg.spread * (1.0 - cfg.persistence * cfg.persistence).sqrt();
    let mut state: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
    let mut data = Vec::with_capacity(cfg.rows * 5);
    let mut labels = Vec::with_capacity(cfg.rows);
    for _ in 0..cfg.rows {
        for s in state.iter_mut() {
            *s = (0.5 + cfg.persistence * (*s - 0.5) + innovation * normal(&mut rng)).clamp(0.0, 1.0);
        }
        data.extend_from_slice(&state);
        labels.push(if state[1] * state[2] > cfg.threshold { 1.0 } else { -1.0 });
    }
    let names = (1..=5).map(|k| format!("x{k}")).collect();
    let ts = (0..cfg.rows).map(|t| t as f64).collect();
    RawSeries::new(Some(ts), DMatrix::from_row_slice(cfg.rows, 5, &data), labels, names, "label")
}

fn normal(rng: &mut IplRng) -> f64 {
    StandardNormal.sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeseries::perturb::sample_std;

    #[test]
    fn signal_examples() {
        assert!((benchmark_signal(&[0.0; 5]) - 1.0 / 15.0).abs() < 1e-15);
        assert!((benchmark_signal(&[1.0; 5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_targets_follow_signal() {
        let b = simulate_benchmark(&BenchmarkConfig {
            t_train: 50,
            t_test: 10,
            include_temporal: false,
            noise_sd: 0.0,
            ..Default::default()
        })
        .unwrap();
        for i in 0..50 {
            let x: Vec<f64> = b.train.features().row(i).iter().copied().collect();
            assert_eq!(b.train.targets()[i], benchmark_signal(&x));
            assert!((b.truth.evaluate(&x) - benchmark_signal(&x)).abs() < 1e-14);
        }
    }

    #[test]
    fn default_sizes_and_moments() {
        let b = simulate_benchmark(&BenchmarkConfig::default()).unwrap();
        assert_eq!(b.train.len(), 4000);
        assert_eq!(b.test.len(), 1000);
        for col in b.train.features().column_iter() {
            let mean = col.mean();
            let var = sample_std(col.iter().copied()).powi(2);
            assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
            assert!((var * 12.0 - 1.0).abs() < 0.1, "var {var}");
        }
    }

    #[test]
    fn test_series_is_noiseless_with_temporal_term() {
        let b = simulate_benchmark(&BenchmarkConfig {
            t_train: 20,
            t_test: 20,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        let y = b.test.targets();
        for t in 2..20 {
            let x: Vec<f64> = b.test.features().row(t).iter().copied().collect();
            let expect = y[t - 1].cos() * y[t - 2].sin() + benchmark_signal(&x);
            assert!((y[t] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn irrelevant_column_and_determinism() {
        let cfg = BenchmarkConfig {
            t_train: 30,
            t_test: 5,
            seed: 11,
            add_irrelevant: true,
            ..Default::default()
        };
        let a = simulate_benchmark(&cfg).unwrap();
        assert_eq!(a.train.dim(), 6);
        assert_eq!(a.truth.dim(), 6);
        assert_eq!(a, simulate_benchmark(&cfg).unwrap());
        assert!(simulate_benchmark(&BenchmarkConfig { t_train: 2, ..cfg }).is_err());
    }

    #[test]
    fn alarm_labels_follow_interaction() {
        let s = simulate_alarm_series(&AlarmConfig {
            rows: 500,
            ..Default::default()
        })
        .unwrap();
        for i in 0..500 {
            let r = s.features().row(i);
            let expect = if r[1] * r[2] > 0.3 { 1.0 } else { -1.0 };
            assert_eq!(s.targets()[i], expect);
        }
        let positives = s.targets().iter().filter(|&&v| v > 0.0).count();
        assert!(positives > 0 && positives < 500);
    }

    #[test]
    fn regime_prices_are_positive() {
        let s = simulate_regime_prices(&RegimePriceConfig {
            rows: 300,
            ..Default::default()
        })
        .unwrap();
        assert!(s.targets().iter().all(|&p| p > 0.0));
        assert_eq!(s.dim(), 3);
    }
}
