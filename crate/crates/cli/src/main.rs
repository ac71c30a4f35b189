use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use ipl_cli::commands::{self, SimKind, SimulateArgs, WarnOutputs};
use ipl_cli::config::{keys_help, RunConfig};
use ipl_cli::{CliError, CliResult};

/// Interpretable polynomial learning for time series.
#[derive(Parser)]
#[command(name = "ipl", version)]
struct Cli {
    /// Maximum worker threads (outputs do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write simulated series: the benchmark (train.csv, test.csv,
    /// truth.csv), a regime price series or an alarm series (series.csv).
    Simulate(SimulateCmd),
    /// Fit a model on a CSV file and write the model document.
    Fit(FitCmd),
    /// Predict with a saved model.
    Predict(PredictCmd),
    /// Print the ranked monomial terms of a saved model.
    Explain(ExplainCmd),
    /// Test-MSE degradation of a linear regressor when single features are
    /// perturbed with Gaussian noise.
    Perturb(PerturbCmd),
    /// Classifier AUC or accuracy using only the top-k ranked terms.
    Sweep(SweepCmd),
    /// Build and evaluate an early-warning rule tree on top-ranked terms.
    Warn(WarnCmd),
    /// List every configuration key with its default.
    ConfigKeys,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Benchmark,
    Prices,
    Alarm,
}

#[derive(Args)]
struct SimulateCmd {
    /// Output directory.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "benchmark")]
    kind: KindArg,
    #[arg(long, default_value_t = 4000)]
    t_train: usize,
    #[arg(long, default_value_t = 1000)]
    t_test: usize,
    /// Rows for the price and alarm series.
    #[arg(long, default_value_t = 4000)]
    rows: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    noise_sd: f64,
    /// Include the cos(y[t-1]) sin(y[t-2]) term.
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    temporal: bool,
    /// Add an independent uniform input x6.
    #[arg(long)]
    add_irrelevant: bool,
    /// Add noise to the test targets as well.
    #[arg(long)]
    noisy_test: bool,
}

/// Configuration file plus `--set key=value` overrides.
#[derive(Args)]
struct ConfigArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct FitCmd {
    /// Input CSV with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Model document to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    loss: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long)]
    lag_x: Option<String>,
    #[arg(long)]
    lag_y: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    centers: Option<String>,
    #[arg(long)]
    center_seed: Option<String>,
    #[arg(long)]
    solver: Option<String>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    timestamp: Option<String>,
    /// Comma-separated feature columns.
    #[arg(long)]
    features: Option<String>,
    #[arg(long)]
    target: Option<String>,
    /// Use the k-step price direction of the target as the label.
    #[arg(long)]
    direction_horizon: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    /// Chronological split counts TRAIN,VALIDATION,TEST (test = latest rows).
    #[arg(long)]
    split: Option<String>,
}

#[derive(Args)]
struct PredictCmd {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the kernel form instead of the stored sparse polynomial.
    #[arg(long)]
    use_kernel: bool,
}

#[derive(Args)]
struct ExplainCmd {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    top_k: usize,
    /// Threshold on |coefficient| (default: the model's; accepts inf).
    #[arg(long)]
    threshold: Option<f64>,
    /// Rank the constant term too.
    #[arg(long)]
    include_constant: bool,
    /// Machine-readable table (rank, term, exponents, coefficient).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalData {
    #[arg(long)]
    model: PathBuf,
    /// Training CSV, or the whole series when the model records a split.
    #[arg(long)]
    data: PathBuf,
    /// Separate test CSV.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct PerturbCmd {
    #[command(flatten)]
    eval: EvalData,
    /// Comma-separated perturbation levels.
    #[arg(long)]
    alphas: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated embedded feature names (default: all).
    #[arg(long)]
    features: Option<String>,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    eval: EvalData,
    /// Sizes such as 1..15 or 1,2,5.
    #[arg(long)]
    k: Option<String>,
    /// auc or accuracy.
    #[arg(long)]
    metric: Option<String>,
}

#[derive(Args)]
struct WarnCmd {
    #[command(flatten)]
    eval: EvalData,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    pool_size: Option<String>,
    #[arg(long)]
    min_leaf: Option<String>,
    /// Write the rule text here.
    #[arg(long)]
    rules_out: Option<PathBuf>,
    /// Write the episode table here.
    #[arg(long)]
    episodes_out: Option<PathBuf>,
    /// Save a copy of the model document including the tree.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

fn load_config(args: &ConfigArgs, flags: &[(&str, &Option<String>)]) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    for kv in &args.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::input(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k, v)?;
    }
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::ConfigKeys => print!("{}", keys_help()),
        Command::Simulate(a) => {
            let paths = commands::simulate(&SimulateArgs {
                out_dir: a.out_dir,
                kind: match a.kind {
                    KindArg::Benchmark => SimKind::Benchmark,
                    KindArg::Prices => SimKind::Prices,
                    KindArg::Alarm => SimKind::Alarm,
                },
                t_train: a.t_train,
                t_test: a.t_test,
                rows: a.rows,
                seed: a.seed,
                noise_sd: a.noise_sd,
                temporal: a.temporal,
                add_irrelevant: a.add_irrelevant,
                noisy_test: a.noisy_test,
            })?;
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Command::Fit(a) => {
            let mut split = (None, None, None);
            if let Some(s) = &a.split {
                let parts: Vec<&str> = s.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(CliError::input("--split expects TRAIN,VALIDATION,TEST"));
                }
                split = (
                    Some(parts[0].to_string()),
                    Some(parts[1].to_string()),
                    Some(parts[2].to_string()),
                );
            }
            let cfg = load_config(
                &a.cfg,
                &[
                    ("loss", &a.loss),
                    ("degree", &a.degree),
                    ("lag_x", &a.lag_x),
                    ("lag_y", &a.lag_y),
                    ("threshold", &a.threshold),
                    ("centers", &a.centers),
                    ("center_seed", &a.center_seed),
                    ("solver", &a.solver),
                    ("scale", &a.scale),
                    ("timestamp_column", &a.timestamp),
                    ("feature_columns", &a.features),
                    ("target_column", &a.target),
                    ("direction_horizon", &a.direction_horizon),
                    ("stride", &a.stride),
                    ("split_train", &split.0),
                    ("split_validation", &split.1),
                    ("split_test", &split.2),
                ],
            )?;
            println!("{}", commands::fit(&cfg, &a.data, &a.out)?);
        }
        Command::Predict(a) => commands::predict(&a.model, &a.data, a.out.as_deref(), a.use_kernel)?,
        Command::Explain(a) => {
            let text = commands::explain(&a.model, a.top_k, a.threshold, a.include_constant, a.out.as_deref())?;
            print!("{text}");
        }
        Command::Perturb(a) => {
            let cfg = load_config(
                &a.eval.cfg,
                &[("alphas", &a.alphas), ("trials", &a.trials), ("seed", &a.seed)],
            )?;
            let features: Option<Vec<String>> = a
                .features
                .as_ref()
                .map(|f| f.split(',').map(|s| s.trim().to_string()).collect());
            commands::perturb(
                &a.eval.model,
                &a.eval.data,
                a.eval.test.as_deref(),
                &cfg,
                features.as_deref(),
                a.eval.out.as_deref(),
            )?;
        }
        Command::Sweep(a) => {
            let cfg = load_config(&a.eval.cfg, &[("k_values", &a.k), ("sweep_metric", &a.metric)])?;
            commands::sweep(
                &a.eval.model,
                &a.eval.data,
                a.eval.test.as_deref(),
                &cfg.k_values,
                cfg.sweep_metric,
                a.eval.out.as_deref(),
            )?;
        }
        Command::Warn(a) => {
            let cfg = load_config(
                &a.eval.cfg,
                &[("depth", &a.depth), ("pool_size", &a.pool_size), ("min_leaf", &a.min_leaf)],
            )?;
            let outputs = WarnOutputs {
                rules: a.rules_out,
                metrics: a.eval.out.clone(),
                episodes: a.episodes_out,
                save_model: a.save_model,
            };
            let text = commands::warn(&a.eval.model, &a.eval.data, a.eval.test.as_deref(), &cfg, &outputs)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
