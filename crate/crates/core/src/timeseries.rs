//! Lag embedding, chronological splits, synthetic generators, direction
//! targets and feature perturbation.

mod direction;
mod lag;
mod perturb;
mod simulate;
mod split;

pub use direction::{direction_series, direction_target_name, make_direction_targets};
pub use lag::{lag_embed, LagSpec, RawSeries, SupervisedDataset};
pub use perturb::{perturb_feature, sample_std, Perturbed};
pub use simulate::{
    benchmark_signal, benchmark_truth, simulate_alarm_series, simulate_benchmark,
    simulate_regime_prices, AlarmConfig, Benchmark, BenchmarkConfig, RegimePriceConfig,
};
pub use split::{chronological_split, Split, SplitSpec};
