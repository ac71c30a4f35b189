//! Subcommand implementations, independent of argument parsing.

use std::path::{Path, PathBuf};

use ipl_core::earlywarn::{build_warning_tree, evaluate_warning, pool_from_report, render_rules};
use ipl_core::interpret::{
    perturbation_analysis, rank_features, rank_polynomial, sparsity_accuracy_sweep, ImportanceReport,
    PerturbationConfig, SweepMetric,
};
use ipl_core::polycore::{classify, expand_to_monomials, predict_kernel};
use ipl_core::solver::check_labels;
use ipl_core::timeseries::{
    chronological_split, direction_series, lag_embed, simulate_alarm_series, simulate_benchmark,
    simulate_regime_prices, AlarmConfig, BenchmarkConfig, LagSpec, RawSeries, RegimePriceConfig, SupervisedDataset,
};
use ipl_core::fit_ipl;

use crate::config::{DataConfig, RunConfig};
use crate::csvio::{fmt_f64, read_table, resolve_columns, series_from_table, write_csv, write_output, Columns};
use crate::error::{CliError, CliResult};
use crate::model_file::ModelFile;

/// Reads `path` and applies column roles, stride, direction labels and the
/// lag embedding.
pub fn prepare(path: &Path, data: &DataConfig, lag: LagSpec) -> CliResult<(SupervisedDataset, Columns)> {
    let table = read_table(path)?;
    let cols = resolve_columns(&table, data)?;
    let mut series = series_from_table(&table, &cols)?;
    if data.stride > 1 {
        series = series.subsample(data.stride);
    }
    if let Some(k) = data.direction_horizon {
        series = direction_series(&series, k)?;
    }
    let ds = lag_embed(&series, lag)?;
    Ok((ds, cols))
}

/// Data settings of a saved model with the column roles pinned.
fn model_data(m: &ModelFile) -> DataConfig {
    DataConfig {
        feature_columns: Some(m.raw_feature_names.clone()),
        target_column: Some(m.target_name.clone()),
        ..m.data.clone()
    }
}

/// Training and test sets for evaluation commands: `--test` when given,
/// otherwise the split recorded in the model.
pub fn train_test(m: &ModelFile, data: &Path, test: Option<&Path>) -> CliResult<(SupervisedDataset, SupervisedDataset)> {
    let cfg = model_data(m);
    let (ds, _) = prepare(data, &cfg, m.lag_spec)?;
    check_dim(m, &ds)?;
    match test {
        Some(t) => {
            let (te, _) = prepare(t, &cfg, m.lag_spec)?;
            check_dim(m, &te)?;
            Ok((ds, te))
        }
        None => {
            let split = cfg
                .split
                .ok_or_else(|| CliError::input("no --test file given and the model records no split"))?;
            let s = chronological_split(&ds, split.into())?;
            Ok((s.train, s.test))
        }
    }
}

fn check_dim(m: &ModelFile, ds: &SupervisedDataset) -> CliResult<()> {
    if ds.feature_names != m.feature_names {
        return Err(CliError::input(format!(
            "data columns do not match the model: expected {}, found {}",
            m.feature_names.join(","),
            ds.feature_names.join(",")
        )));
    }
    Ok(())
}

fn timestamps(ds: &SupervisedDataset) -> Vec<f64> {
    match &ds.timestamps {
        Some(t) => t.clone(),
        None => ds.time_index.iter().map(|&i| i as f64).collect(),
    }
}

// ---- simulate ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimKind {
    Benchmark,
    Prices,
    Alarm,
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub out_dir: PathBuf,
    pub kind: SimKind,
    pub t_train: usize,
    pub t_test: usize,
    pub rows: usize,
    pub seed: u64,
    pub noise_sd: f64,
    pub temporal: bool,
    pub add_irrelevant: bool,
    pub noisy_test: bool,
}

fn series_rows(s: &RawSeries) -> (Vec<String>, Vec<Vec<String>>) {
    let mut headers = vec!["timestamp".to_string()];
    headers.extend(s.feature_names().iter().cloned());
    headers.push(s.target_name().to_string());
    let ts: Vec<f64> = match s.timestamps() {
        Some(t) => t.to_vec(),
        None => (0..s.len()).map(|i| i as f64).collect(),
    };
    let rows = (0..s.len())
        .map(|i| {
            let mut r = vec![fmt_f64(ts[i])];
            r.extend(s.features().row(i).iter().map(|v| fmt_f64(*v)));
            r.push(fmt_f64(s.targets()[i]));
            r
        })
        .collect();
    (headers, rows)
}

fn write_series(path: &Path, s: &RawSeries, comments: &[String]) -> CliResult<()> {
    let (h, rows) = series_rows(s);
    let h: Vec<&str> = h.iter().map(String::as_str).collect();
    write_csv(Some(path), comments, &h, &rows)
}

pub fn simulate(a: &SimulateArgs) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(&a.out_dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", a.out_dir.display())))?;
    let seed_note = vec![format!("seed={}", a.seed)];
    match a.kind {
        SimKind::Benchmark => {
            let b = simulate_benchmark(&BenchmarkConfig {
                t_train: a.t_train,
                t_test: a.t_test,
                seed: a.seed,
                include_temporal: a.temporal,
                noise_sd: a.noise_sd,
                add_irrelevant: a.add_irrelevant,
                noisy_test: a.noisy_test,
            })?;
            let train = a.out_dir.join("train.csv");
            let test = a.out_dir.join("test.csv");
            let truth = a.out_dir.join("truth.csv");
            write_series(&train, &b.train, &seed_note)?;
            write_series(&test, &b.test, &seed_note)?;
            let rows: Vec<Vec<String>> = b
                .truth
                .terms()
                .iter()
                .map(|(alpha, c)| {
                    let e: Vec<String> = alpha.exponents().iter().map(|x| x.to_string()).collect();
                    vec![alpha.name(b.truth.feature_names()), e.join(":"), fmt_f64(*c)]
                })
                .collect();
            write_csv(Some(&truth), &seed_note, &["term", "exponents", "coefficient"], &rows)?;
            Ok(vec![train, test, truth])
        }
        SimKind::Prices => {
            let s = simulate_regime_prices(&RegimePriceConfig {
                rows: a.rows,
                seed: a.seed,
                ..Default::default()
            })?;
            let p = a.out_dir.join("series.csv");
            write_series(&p, &s, &seed_note)?;
            Ok(vec![p])
        }
        SimKind::Alarm => {
            let s = simulate_alarm_series(&AlarmConfig {
                rows: a.rows,
                seed: a.seed,
                ..Default::default()
            })?;
            let p = a.out_dir.join("series.csv");
            write_series(&p, &s, &seed_note)?;
            Ok(vec![p])
        }
    }
}

// ---- fit ----

/// Fits a model on `data` (its training block when a split is configured)
/// and writes the model document. Returns the one-line fit summary.
pub fn fit(cfg: &RunConfig, data: &Path, out: &Path) -> CliResult<String> {
    let (ds, cols) = prepare(data, &cfg.data, cfg.lag_spec())?;
    let train = match cfg.data.split {
        Some(s) => chronological_split(&ds, s.into())?.train,
        None => ds,
    };
    let fitted = fit_ipl(&train, &cfg.ipl_config())?;
    let file = ModelFile::from_fit(&fitted, cols.features.clone(), cols.target.clone(), cfg.data.clone());
    file.save(out)?;
    let s = &fitted.summary;
    Ok(format!(
        "solver={} rows={} centers={} objective={} iterations={} converged={} primal_residual={} dual_residual={} terms={} wall_time_secs={:.3}",
        s.solver,
        train.len(),
        fitted.model.centers.len(),
        s.objective,
        s.iterations,
        s.converged,
        s.primal_residual,
        s.dual_residual,
        fitted.sparse.len(),
        s.wall_time_secs
    ))
}

// ---- predict ----

pub fn predict(model: &Path, data: &Path, out: Option<&Path>, use_kernel: bool) -> CliResult<()> {
    let m = ModelFile::load(model)?;
    let (ds, _) = prepare(data, &model_data(&m), m.lag_spec)?;
    check_dim(&m, &ds)?;
    let km = m.kernel_model()?;
    let sparse = if use_kernel { None } else { m.sparse()? };
    let scaled = km.transform_matrix(&ds.inputs);
    let ts = timestamps(&ds);
    let classify_out = m.loss.is_classification();
    let mut rows = Vec::with_capacity(ds.len());
    for i in 0..ds.len() {
        let x: Vec<f64> = scaled.row(i).iter().copied().collect();
        let p = match &sparse {
            Some(s) => s.evaluate(&x),
            None => predict_kernel(&km, &x)?,
        };
        let mut r = vec![fmt_f64(ts[i]), fmt_f64(p)];
        if classify_out {
            r.push(fmt_f64(classify(p)));
        }
        rows.push(r);
    }
    let headers: &[&str] = if classify_out {
        &["timestamp", "prediction", "label"]
    } else {
        &["timestamp", "prediction"]
    };
    write_csv(out, &[], headers, &rows)
}

// ---- explain ----

pub fn explain_report(m: &ModelFile, threshold: Option<f64>, include_constant: bool) -> CliResult<ImportanceReport> {
    let km = m.kernel_model()?;
    let poly = expand_to_monomials(&km)?;
    let threshold = threshold.unwrap_or(m.threshold);
    Ok(rank_polynomial(&poly, threshold, !include_constant, m.lag_spec, m.loss)?)
}

pub fn explain(
    model: &Path,
    top_k: usize,
    threshold: Option<f64>,
    include_constant: bool,
    out: Option<&Path>,
) -> CliResult<String> {
    let m = ModelFile::load(model)?;
    let report = explain_report(&m, threshold, include_constant)?;
    let mut text = format!(
        "# {} ranked terms (threshold {}), constant {}\n{:<6}{:<32}{:>24}  sign\n",
        report.len(),
        report.threshold,
        report.constant,
        "rank",
        "term",
        "coefficient"
    );
    for e in report.top_k(top_k) {
        let sign = if e.coefficient >= 0.0 { "+" } else { "-" };
        text.push_str(&format!("{:<6}{:<32}{:>24}  {sign}\n", e.rank, e.name, e.coefficient));
    }
    if let Some(p) = out {
        write_output(Some(p), report.to_table().as_bytes())?;
    }
    Ok(text)
}

// ---- perturb ----

pub fn perturb(
    model: &Path,
    data: &Path,
    test: Option<&Path>,
    cfg: &RunConfig,
    features: Option<&[String]>,
    out: Option<&Path>,
) -> CliResult<()> {
    let m = ModelFile::load(model)?;
    let (train, test) = train_test(&m, data, test)?;
    let idx: Vec<usize> = match features {
        Some(names) => names
            .iter()
            .map(|n| {
                m.feature_names
                    .iter()
                    .position(|f| f == n)
                    .ok_or_else(|| CliError::input(format!("unknown feature '{n}'")))
            })
            .collect::<CliResult<_>>()?,
        None => (0..m.feature_names.len()).collect(),
    };
    let report = rank_features(&m.kernel_model()?, m.threshold, true)?;
    let top = report.top_feature().map_or("none".to_string(), |j| m.feature_names[j].clone());
    let table = perturbation_analysis(
        &train,
        &test,
        &idx,
        &PerturbationConfig {
            alphas: cfg.alphas.clone(),
            trials: cfg.trials,
            seed: cfg.seed,
        },
    )
    .map_err(CliError::evaluation)?;
    let comments = vec![
        format!("seed={}", cfg.seed),
        format!("clean_mse={}", table.clean_mse),
        format!("top_feature={top}"),
    ];
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.alpha),
                r.name.clone(),
                fmt_f64(r.mean_degradation),
                fmt_f64(r.std_error),
                r.trials.to_string(),
            ]
        })
        .collect();
    write_csv(out, &comments, &["alpha", "feature", "mean_degradation", "std_error", "trials"], &rows)
}

// ---- sweep ----

pub fn sweep(
    model: &Path,
    data: &Path,
    test: Option<&Path>,
    k_values: &[usize],
    metric: SweepMetric,
    out: Option<&Path>,
) -> CliResult<()> {
    let m = ModelFile::load(model)?;
    let (train, test) = train_test(&m, data, test)?;
    check_labels(&train.targets)?;
    check_labels(&test.targets)?;
    let km = m.kernel_model()?;
    let report = rank_features(&km, m.threshold, true)?;
    let r = sparsity_accuracy_sweep(&train, &test, &km, &report, k_values, metric).map_err(CliError::evaluation)?;
    let comments = vec![
        format!("metric={}", r.metric),
        format!("max_fluctuation={}", r.max_fluctuation),
        format!("clamped={}", r.clamped),
    ];
    let rows: Vec<Vec<String>> = r
        .points
        .iter()
        .map(|p| vec![p.k.to_string(), p.requested_k.to_string(), fmt_f64(p.value)])
        .collect();
    write_csv(out, &comments, &["k", "requested_k", "value"], &rows)
}

// ---- warn ----

#[derive(Debug, Clone, Default)]
pub struct WarnOutputs {
    pub rules: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub episodes: Option<PathBuf>,
    pub save_model: Option<PathBuf>,
}

/// Builds a warning tree on the training block, evaluates it on the test
/// block and returns the printable report.
pub fn warn(
    model: &Path,
    data: &Path,
    test: Option<&Path>,
    cfg: &RunConfig,
    outputs: &WarnOutputs,
) -> CliResult<String> {
    let mut m = ModelFile::load(model)?;
    let (train, test) = train_test(&m, data, test)?;
    check_labels(&train.targets)?;
    check_labels(&test.targets)?;
    let report = rank_features(&m.kernel_model()?, m.threshold, true)?;
    let pool = pool_from_report(&report, cfg.pool_size);
    if pool.is_empty() {
        return Err(CliError::Numerical("no ranked terms available for the tree".into()));
    }
    let tree = build_warning_tree(&train.inputs, &train.targets, pool, cfg.depth, cfg.min_leaf)
        .map_err(CliError::evaluation)?;
    let metrics = evaluate_warning(&tree, &test.inputs, &test.targets).map_err(CliError::evaluation)?;
    let rules = render_rules(&tree);
    let ts = timestamps(&test);

    let metric_rows: Vec<Vec<String>> = vec![
        ("precision", fmt_f64(metrics.precision)),
        ("recall", fmt_f64(metrics.recall)),
        ("f1", fmt_f64(metrics.f1)),
        ("accuracy", fmt_f64(metrics.accuracy)),
        ("tp", metrics.tp.to_string()),
        ("fp", metrics.fp.to_string()),
        ("tn", metrics.tn.to_string()),
        ("fn", metrics.fn_.to_string()),
        ("precision_undefined", metrics.precision_undefined.to_string()),
        ("recall_undefined", metrics.recall_undefined.to_string()),
        ("f1_undefined", metrics.f1_undefined.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| vec![k.to_string(), v])
    .collect();
    let episode_rows: Vec<Vec<String>> = metrics
        .episodes
        .iter()
        .map(|e| {
            vec![
                e.start.to_string(),
                fmt_f64(ts[e.start]),
                e.length.to_string(),
                e.from_normal.to_string(),
            ]
        })
        .collect();

    if let Some(p) = &outputs.rules {
        write_output(Some(p), rules.as_bytes())?;
    }
    if let Some(p) = &outputs.metrics {
        write_csv(Some(p), &[], &["metric", "value"], &metric_rows)?;
    }
    if let Some(p) = &outputs.episodes {
        write_csv(Some(p), &[], &["row", "timestamp", "length", "from_normal"], &episode_rows)?;
    }
    if let Some(p) = &outputs.save_model {
        m.warning_tree = Some(tree.clone());
        m.save(p)?;
    }

    let mut text = format!("# rules (depth {}, pool {})\n{rules}# metrics\n", cfg.depth, tree.pool.len());
    for r in &metric_rows {
        text.push_str(&format!("{} {}\n", r[0], r[1]));
    }
    text.push_str("# episodes: row timestamp length from_normal\n");
    for r in &episode_rows {
        text.push_str(&r.join(" "));
        text.push('\n');
    }
    Ok(text)
}
