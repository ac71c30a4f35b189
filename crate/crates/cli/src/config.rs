//! Run configuration: documented defaults, a flat `key = value` file and
//! command-line overrides applied through the same key names.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use ipl_core::interpret::SweepMetric;
use ipl_core::polycore::CenterStrategy;
use ipl_core::solver::{AdmmConfig, LossKind};
use ipl_core::timeseries::{LagSpec, SplitSpec};
use ipl_core::{IplConfig, SolverChoice};

use crate::error::{CliError, CliResult};

/// Which columns of the CSV play which role and how rows are prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DataConfig {
    /// `None` picks `timestamp` when such a column exists.
    pub timestamp_column: Option<String>,
    /// `None` means every column except the timestamp and the target.
    pub feature_columns: Option<Vec<String>>,
    /// `None` means the last non-timestamp column.
    pub target_column: Option<String>,
    /// Replace the target by the `k`-step direction label.
    pub direction_horizon: Option<usize>,
    /// Keep every `stride`-th row.
    pub stride: usize,
    pub split: Option<SplitSettings>,
}

/// Serializable mirror of [`SplitSpec`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitSettings {
    Counts { train: usize, validation: usize, test: usize },
    Fractions { train: f64, validation: f64 },
}

impl From<SplitSettings> for SplitSpec {
    fn from(s: SplitSettings) -> Self {
        match s {
            SplitSettings::Counts { train, validation, test } => SplitSpec::Counts { train, validation, test },
            SplitSettings::Fractions { train, validation } => SplitSpec::Fractions { train, validation },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub loss: LossKind,
    pub degree: u32,
    pub lag_x: usize,
    pub lag_y: usize,
    pub threshold: f64,
    pub centers: String,
    pub center_seed: u64,
    pub solver: SolverChoice,
    pub scale: bool,
    pub admm: AdmmConfig,
    pub data: DataConfig,
    split_train: Option<usize>,
    split_validation: Option<usize>,
    split_test: Option<usize>,
    split_train_fraction: Option<f64>,
    split_validation_fraction: Option<f64>,
    pub seed: u64,
    pub alphas: Vec<f64>,
    pub trials: usize,
    pub k_values: Vec<usize>,
    pub sweep_metric: SweepMetric,
    pub depth: usize,
    pub pool_size: usize,
    pub min_leaf: usize,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            loss: LossKind::Squared,
            degree: 2,
            lag_x: 0,
            lag_y: 0,
            threshold: 0.0,
            centers: "first_samples".into(),
            center_seed: 0,
            solver: SolverChoice::Auto,
            scale: true,
            admm: AdmmConfig::default(),
            data: DataConfig {
                stride: 1,
                ..Default::default()
            },
            split_train: None,
            split_validation: None,
            split_test: None,
            split_train_fraction: None,
            split_validation_fraction: None,
            seed: 0,
            alphas: vec![0.0, 0.25, 0.5],
            trials: 10,
            k_values: (1..=15).collect(),
            sweep_metric: SweepMetric::Auc,
            depth: 2,
            pool_size: 3,
            min_leaf: 5,
            top_k: 10,
        }
    }
}

/// `(key, default, description)` for every accepted key.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("loss", "squared", "squared | hinge | logistic"),
    ("degree", "2", "polynomial degree s"),
    ("lag_x", "0", "lagged feature blocks L_x"),
    ("lag_y", "0", "lagged target values L_y"),
    ("threshold", "0", "interpretability threshold I on |coefficient|"),
    ("centers", "first_samples", "first_samples | random_uniform | random_subsample"),
    ("center_seed", "0", "seed for random center strategies"),
    ("solver", "auto", "auto (pinv for squared, ADMM otherwise) | pinv | admm"),
    ("scale", "true", "min-max scale embedded inputs to [0, 1]"),
    ("admm_alpha", "auto", "proximal parameter; auto = 1e-12 * beta * trace(A'A) / n"),
    ("admm_beta", "auto", "augmented Lagrangian parameter; auto = 1 / T"),
    ("admm_max_iters", "5000", "ADMM iteration cap"),
    ("admm_tol_primal", "1e-6", "primal tolerance (scaled by sqrt(T))"),
    ("admm_tol_dual", "1e-6", "dual tolerance (scaled by sqrt(T))"),
    ("admm_newton_max_iters", "50", "Newton iterations per logistic coordinate"),
    ("admm_newton_tol", "1e-12", "Newton step tolerance"),
    ("timestamp_column", "timestamp if present", "time column; row order otherwise"),
    ("feature_columns", "all others", "comma-separated feature columns"),
    ("target_column", "last column", "target column"),
    ("direction_horizon", "none", "replace the target by its k-step direction label"),
    ("stride", "1", "keep every n-th row"),
    ("split_train", "none", "training rows (counts split)"),
    ("split_validation", "0", "validation rows (counts split)"),
    ("split_test", "none", "test rows, the most recent (counts split)"),
    ("split_train_fraction", "none", "training fraction (fraction split)"),
    ("split_validation_fraction", "0", "validation fraction (fraction split)"),
    ("seed", "0", "master seed for perturbation trials"),
    ("alphas", "0,0.25,0.5", "perturbation levels"),
    ("trials", "10", "perturbation trials"),
    ("k_values", "1..15", "sweep sizes, e.g. 1..15 or 1,2,5"),
    ("sweep_metric", "auc", "auc | accuracy"),
    ("depth", "2", "warning tree depth k"),
    ("pool_size", "3", "number of top-ranked terms offered to the tree"),
    ("min_leaf", "5", "minimum rows per tree leaf"),
    ("top_k", "10", "rows shown by explain"),
];

fn parse<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim()
        .parse()
        .map_err(|_| CliError::input(format!("invalid value '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str) -> CliResult<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(CliError::input(format!("invalid boolean '{v}' for {key}"))),
    }
}

/// `1..15` (inclusive) and comma-separated integers, mixed freely.
pub fn parse_k_list(v: &str) -> CliResult<Vec<usize>> {
    let mut out = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let a: usize = parse("k_values", a)?;
            let b: usize = parse("k_values", b.trim_start_matches('='))?;
            if a > b {
                return Err(CliError::input(format!("empty range '{item}'")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse("k_values", item)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::input("k_values is empty"));
    }
    Ok(out)
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> CliResult<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn optional(v: &str) -> Option<&str> {
    let v = v.trim();
    if v.is_empty() || v.eq_ignore_ascii_case("none") || v.eq_ignore_ascii_case("auto") {
        None
    } else {
        Some(v)
    }
}

impl RunConfig {
    /// Sets one key; unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key.trim() {
            "loss" => self.loss = v.parse()?,
            "degree" => self.degree = parse(key, v)?,
            "lag_x" => self.lag_x = parse(key, v)?,
            "lag_y" => self.lag_y = parse(key, v)?,
            "threshold" => self.threshold = parse(key, v)?,
            "centers" => {
                let s = v.to_ascii_lowercase().replace('-', "_");
                match s.as_str() {
                    "first_samples" | "random_uniform" | "random_subsample" => self.centers = s,
                    _ => return Err(CliError::input(format!("unknown center strategy '{v}'"))),
                }
            }
            "center_seed" => self.center_seed = parse(key, v)?,
            "solver" => self.solver = v.parse()?,
            "scale" => self.scale = parse_bool(key, v)?,
            "admm_alpha" => self.admm.alpha = optional(v).map(|s| parse(key, s)).transpose()?,
            "admm_beta" => self.admm.beta = optional(v).map(|s| parse(key, s)).transpose()?,
            "admm_max_iters" => self.admm.max_iters = parse(key, v)?,
            "admm_tol_primal" => self.admm.tol_primal = parse(key, v)?,
            "admm_tol_dual" => self.admm.tol_dual = parse(key, v)?,
            "admm_newton_max_iters" => self.admm.newton_max_iters = parse(key, v)?,
            "admm_newton_tol" => self.admm.newton_tol = parse(key, v)?,
            "timestamp_column" => self.data.timestamp_column = optional(v).map(str::to_string),
            "feature_columns" => {
                self.data.feature_columns = optional(v).map(|s| s.split(',').map(|c| c.trim().to_string()).collect())
            }
            "target_column" => self.data.target_column = optional(v).map(str::to_string),
            "direction_horizon" => self.data.direction_horizon = optional(v).map(|s| parse(key, s)).transpose()?,
            "stride" => self.data.stride = parse(key, v)?,
            "split_train" => self.split_train = optional(v).map(|s| parse(key, s)).transpose()?,
            "split_validation" => self.split_validation = optional(v).map(|s| parse(key, s)).transpose()?,
            "split_test" => self.split_test = optional(v).map(|s| parse(key, s)).transpose()?,
            "split_train_fraction" => self.split_train_fraction = optional(v).map(|s| parse(key, s)).transpose()?,
            "split_validation_fraction" => {
                self.split_validation_fraction = optional(v).map(|s| parse(key, s)).transpose()?
            }
            "seed" => self.seed = parse(key, v)?,
            "alphas" => self.alphas = parse_list(key, v)?,
            "trials" => self.trials = parse(key, v)?,
            "k_values" => self.k_values = parse_k_list(v)?,
            "sweep_metric" => self.sweep_metric = v.parse()?,
            "depth" => self.depth = parse(key, v)?,
            "pool_size" => self.pool_size = parse(key, v)?,
            "min_leaf" => self.min_leaf = parse(key, v)?,
            "top_k" => self.top_k = parse(key, v)?,
            other => return Err(CliError::input(format!("unknown configuration key '{other}'"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("line {}: expected key = value", i + 1)))?;
            self.set(k, v)
                .map_err(|e| CliError::input(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Checks cross-field constraints and folds the split keys into
    /// [`DataConfig::split`].
    pub fn validate(&mut self) -> CliResult<()> {
        if self.degree == 0 || self.degree > ipl_core::polycore::MAX_DEGREE {
            return Err(CliError::input(format!("degree must be in 1..=20, got {}", self.degree)));
        }
        if !(self.threshold >= 0.0) {
            return Err(CliError::input("threshold must be non-negative"));
        }
        if self.data.stride == 0 {
            return Err(CliError::input("stride must be positive"));
        }
        if self.data.direction_horizon == Some(0) {
            return Err(CliError::input("direction_horizon must be positive"));
        }
        if self.trials == 0 {
            return Err(CliError::input("trials must be positive"));
        }
        if self.pool_size == 0 || self.min_leaf == 0 {
            return Err(CliError::input("pool_size and min_leaf must be positive"));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(CliError::input("alphas must be finite and non-negative"));
        }
        self.admm.validate()?;
        let counts = self.split_train.is_some() || self.split_test.is_some() || self.split_validation.is_some();
        let fractions = self.split_train_fraction.is_some() || self.split_validation_fraction.is_some();
        self.data.split = match (counts, fractions) {
            (true, true) => return Err(CliError::input("use either split counts or split fractions, not both")),
            (true, false) => {
                let (train, test) = match (self.split_train, self.split_test) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(CliError::input("counts split needs split_train and split_test")),
                };
                Some(SplitSettings::Counts {
                    train,
                    validation: self.split_validation.unwrap_or(0),
                    test,
                })
            }
            (false, true) => {
                let train = self
                    .split_train_fraction
                    .ok_or_else(|| CliError::input("fraction split needs split_train_fraction"))?;
                let validation = self.split_validation_fraction.unwrap_or(0.0);
                if !(train > 0.0 && validation >= 0.0 && train + validation < 1.0) {
                    return Err(CliError::input("split fractions must satisfy 0 < train, train + validation < 1"));
                }
                Some(SplitSettings::Fractions { train, validation })
            }
            (false, false) => self.data.split,
        };
        Ok(())
    }

    pub fn lag_spec(&self) -> LagSpec {
        LagSpec::new(self.lag_x, self.lag_y)
    }

    pub fn center_strategy(&self) -> CenterStrategy {
        match self.centers.as_str() {
            "random_uniform" => CenterStrategy::RandomUniform { seed: self.center_seed },
            "random_subsample" => CenterStrategy::RandomSubsample { seed: self.center_seed },
            _ => CenterStrategy::FirstSamples,
        }
    }

    pub fn ipl_config(&self) -> IplConfig {
        IplConfig {
            degree: self.degree,
            loss: self.loss,
            centers: self.center_strategy(),
            scale_inputs: self.scale,
            solver: self.solver,
            admm: self.admm.clone(),
            threshold: self.threshold,
        }
    }
}

/// Help text listing every configuration key with its default.
pub fn keys_help() -> String {
    let mut s = String::from("Configuration keys (key = value, '#' comments):\n");
    for (k, d, desc) in KEYS {
        let _ = writeln!(s, "  {k:<26} default {d:<22} {desc}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_and_overrides() {
        let mut c = RunConfig::default();
        c.apply_text("# comment\nloss = hinge\nlag_y=3 # trailing\nk_values = 1..3, 7\n").unwrap();
        c.set("degree", "3").unwrap();
        c.validate().unwrap();
        assert_eq!(c.loss, LossKind::Hinge);
        assert_eq!(c.lag_spec(), LagSpec::new(0, 3));
        assert_eq!(c.k_values, vec![1, 2, 3, 7]);
        assert_eq!(c.degree, 3);
    }

    #[test]
    fn unknown_key_rejected() {
        let mut c = RunConfig::default();
        let e = c.apply_text("los = hinge").unwrap_err();
        assert!(e.to_string().contains("unknown configuration key"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn split_keys_fold() {
        let mut c = RunConfig::default();
        c.apply_text("split_train = 80\nsplit_test = 20").unwrap();
        c.validate().unwrap();
        assert_eq!(
            c.data.split,
            Some(SplitSettings::Counts {
                train: 80,
                validation: 0,
                test: 20
            })
        );
        let mut c = RunConfig::default();
        c.apply_text("split_train = 80\nsplit_train_fraction = 0.5").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn every_documented_key_is_accepted() {
        let mut c = RunConfig::default();
        for (k, _, _) in KEYS {
            let v = match *k {
                "loss" => "logistic",
                "centers" => "random_subsample",
                "solver" => "admm",
                "scale" => "false",
                "sweep_metric" => "accuracy",
                "timestamp_column" | "target_column" => "t",
                "feature_columns" => "a,b",
                "alphas" => "0,1",
                "k_values" => "1..2",
                "admm_tol_primal" | "admm_tol_dual" | "admm_newton_tol" | "admm_alpha" | "admm_beta" => "0.001",
                "split_train_fraction" | "split_validation_fraction" | "threshold" => "0.2",
                _ => "3",
            };
            c.set(k, v).unwrap_or_else(|e| panic!("{k}: {e}"));
        }
    }
}
