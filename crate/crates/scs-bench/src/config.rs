//! CLI surface and run configuration.
//!
//! A run is configured by flags, by a `key=value` file whose keys mirror the
//! flag names, or both; explicit flags always win over the file.  Resolution
//! validates everything before any output file is touched, so configuration
//! mistakes exit cleanly with nothing half-written.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use scs_opt::optim::{HyperParams, OptimizerKind};

pub const PROBLEMS: [&str; 5] = ["l1-quadratic", "hinge-svm", "quadratic", "rosenbrock", "charlm"];

#[derive(Debug, Parser)]
#[command(
    name = "scs-bench",
    version,
    about = "Optimizer benchmark harness: seeded training runs, loss-curve comparison, and property verification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one optimizer on one problem, streaming records to a file.
    ///
    /// Negative numbers must reach our own validation so the complaint can
    /// name the offending flag instead of clap's "unexpected argument".
    #[command(allow_negative_numbers = true)]
    Run(Box<RunArgs>),
    /// Align result files into a CSV of loss curves plus summary rows.
    #[command(allow_negative_numbers = true)]
    Compare(CompareArgs),
    /// Execute property suites and report per-check results.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct RunArgs {
    /// key=value file mirroring these flags; explicit flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Objective: l1-quadratic, hinge-svm, quadratic, rosenbrock, or charlm.
    #[arg(long)]
    pub problem: Option<String>,
    /// Step rule: sgd, polyak, adam, adamw, or scsadamw.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Learning rate η.
    #[arg(long)]
    pub lr: Option<f64>,
    /// Weight-decay coefficient.
    #[arg(long)]
    pub wd: Option<f64>,
    /// First-moment decay (adam, adamw).
    #[arg(long)]
    pub beta1: Option<f64>,
    /// Second-moment decay.
    #[arg(long)]
    pub beta2: Option<f64>,
    /// Adaptive-denominator floor.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Direction-norm threshold that ends a conjugate run early.
    #[arg(long)]
    pub eps_stop: Option<f64>,
    /// Certificate threshold parameter η_th.
    #[arg(long)]
    pub eta_th: Option<f64>,
    /// Heavy-ball momentum (polyak).
    #[arg(long)]
    pub momentum: Option<f64>,
    /// Stop after this many epochs.
    #[arg(long)]
    pub epochs: Option<u64>,
    /// Stop after this many steps.
    #[arg(long)]
    pub max_steps: Option<u64>,
    /// Fixed batch size (ignored under adaptive sampling).
    #[arg(long)]
    pub batch: Option<usize>,
    /// Window length for the language model.
    #[arg(long)]
    pub seq_len: Option<usize>,
    /// Parameter dimension for synthetic problems.
    #[arg(long)]
    pub dim: Option<usize>,
    /// LSTM depth.
    #[arg(long)]
    pub layers: Option<usize>,
    /// LSTM hidden width.
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Vocabulary budget including the unknown-character id.
    #[arg(long)]
    pub max_vocab: Option<usize>,
    /// Choose batch sizes from the concentration bound instead of --batch.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub adaptive_sampling: Option<bool>,
    /// Confidence parameter ε of the sampling bound.
    #[arg(long)]
    pub eps_conf: Option<f64>,
    /// Curvature constant κ of the sampling bound.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Initial accuracy radius δ₀.
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Geometric δ decay factor in (0,1); omitted keeps δ constant.
    #[arg(long)]
    pub delta_decay: Option<f64>,
    /// Floor for the δ schedule.
    #[arg(long)]
    pub delta_min: Option<f64>,
    /// Adaptive sample-size cap as a multiple of the dataset size.
    #[arg(long)]
    pub cap_multiplier: Option<f64>,
    /// Squash the mixing weight through a sigmoid before use.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub smooth_lambda: Option<bool>,
    /// Reset the direction recursion every this many steps.
    #[arg(long)]
    pub restart_period: Option<u64>,
    /// RNG seed; mandatory, there is no wall-clock fallback.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output path for the record stream.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain-text corpus for charlm; defaults to the bundled one.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Record per-step wall time (makes result files nondeterministic).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub timing: Option<bool>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Two or more record files over the same problem.
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also report the first step whose loss reaches this value.
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite name or "all": direction-optimality, hull-membership,
    /// theorem1-rate, theorem2-implication, p-lambda, grad-check,
    /// concentration, optimizer-reductions.
    #[arg(default_value = "all")]
    pub suite: String,
}

/// Configuration mistakes; always reported before any output exists.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<scs_opt::Error> for ConfigError {
    fn from(e: scs_opt::Error) -> Self {
        ConfigError(e.to_string())
    }
}

/// Batch-size policy after resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplingMode {
    Fixed,
    Adaptive {
        eps_conf: f64,
        kappa: f64,
        delta0: f64,
        delta_decay: Option<f64>,
        delta_min: f64,
        cap_multiplier: f64,
    },
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub problem: String,
    pub optimizer: OptimizerKind,
    pub hp: HyperParams,
    pub batch: usize,
    pub seq_len: usize,
    pub dim: usize,
    pub layers: usize,
    pub hidden: usize,
    pub max_vocab: usize,
    pub sampling: SamplingMode,
    pub epochs: Option<u64>,
    pub max_steps: Option<u64>,
    pub seed: u64,
    pub out: PathBuf,
    pub corpus: Option<PathBuf>,
    pub timing: bool,
}

/// Parsed key=value file; `#` starts a comment, blank lines are skipped.
struct FileValues(BTreeMap<String, String>);

impl FileValues {
    fn parse(text: &str, path: &std::path::Path) -> Result<FileValues, ConfigError> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "{}:{}: expected key=value, got `{line}`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileValues(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.0.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                ConfigError(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
        }
    }
}

const KNOWN_KEYS: [&str; 31] = [
    "problem",
    "optimizer",
    "lr",
    "wd",
    "beta1",
    "beta2",
    "zeta",
    "eps-stop",
    "eta-th",
    "momentum",
    "epochs",
    "max-steps",
    "batch",
    "seq-len",
    "dim",
    "layers",
    "hidden",
    "max-vocab",
    "adaptive-sampling",
    "eps-conf",
    "kappa",
    "delta0",
    "delta-decay",
    "delta-min",
    "cap-multiplier",
    "smooth-lambda",
    "restart-period",
    "seed",
    "out",
    "corpus",
    "timing",
];

/// Merges flags over the optional config file and validates the result.
pub fn resolve(args: &RunArgs) -> Result<ResolvedRun, ConfigError> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                ConfigError(format!("cannot read config {}: {e}", path.display()))
            })?;
            let values = FileValues::parse(&text, path)?;
            if let Some(unknown) = values.0.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
                return Err(ConfigError(format!(
                    "config key `{unknown}` is not a recognized flag name"
                )));
            }
            values
        }
        None => FileValues(BTreeMap::new()),
    };

    let problem = args
        .problem
        .clone()
        .or(file.get::<String>("problem")?)
        .ok_or_else(|| ConfigError("missing --problem".into()))?;
    if !PROBLEMS.contains(&problem.as_str()) {
        return Err(ConfigError(format!(
            "unknown problem `{problem}` (expected one of {})",
            PROBLEMS.join(", ")
        )));
    }
    let optimizer_name = args
        .optimizer
        .clone()
        .or(file.get::<String>("optimizer")?)
        .ok_or_else(|| ConfigError("missing --optimizer".into()))?;
    let optimizer = OptimizerKind::from_str(&optimizer_name)?;

    let hp = HyperParams {
        eta: args.lr.or(file.get("lr")?).unwrap_or(1e-3),
        beta1: args.beta1.or(file.get("beta1")?).unwrap_or(0.9),
        beta2: args.beta2.or(file.get("beta2")?).unwrap_or(0.999),
        lambda_wd: args.wd.or(file.get("wd")?).unwrap_or(0.0),
        zeta: args.zeta.or(file.get("zeta")?).unwrap_or(1e-8),
        epsilon_stop: args.eps_stop.or(file.get("eps-stop")?).unwrap_or(1e-8),
        theta_momentum: args.momentum.or(file.get("momentum")?).unwrap_or(0.9),
        eta_th: args.eta_th.or(file.get("eta-th")?).unwrap_or(1.0),
        smooth_lambda: args
            .smooth_lambda
            .or(file.get("smooth-lambda")?)
            .unwrap_or(false),
        restart_period: args.restart_period.or(file.get("restart-period")?),
    };
    hp.validate()?;

    let adaptive = args
        .adaptive_sampling
        .or(file.get("adaptive-sampling")?)
        .unwrap_or(false);
    let sampling = if adaptive {
        SamplingMode::Adaptive {
            eps_conf: args.eps_conf.or(file.get("eps-conf")?).unwrap_or(0.01),
            kappa: args.kappa.or(file.get("kappa")?).unwrap_or(8.0),
            delta0: args.delta0.or(file.get("delta0")?).unwrap_or(0.5),
            delta_decay: args.delta_decay.or(file.get("delta-decay")?),
            delta_min: args.delta_min.or(file.get("delta-min")?).unwrap_or(0.1),
            cap_multiplier: args
                .cap_multiplier
                .or(file.get("cap-multiplier")?)
                .unwrap_or(1.0),
        }
    } else {
        SamplingMode::Fixed
    };
    if let SamplingMode::Adaptive { delta_decay: Some(g), .. } = sampling {
        if !(0.0..1.0).contains(&g) {
            return Err(ConfigError(format!(
                "--delta-decay must lie in (0,1), got {g}"
            )));
        }
    }

    let epochs = args.epochs.or(file.get("epochs")?);
    let max_steps = args.max_steps.or(file.get("max-steps")?);
    if epochs.is_none() && max_steps.is_none() {
        return Err(ConfigError("need --epochs or --max-steps".into()));
    }
    if epochs == Some(0) || max_steps == Some(0) {
        return Err(ConfigError("step and epoch budgets must be at least 1".into()));
    }

    let batch = args.batch.or(file.get("batch")?).unwrap_or(16);
    let seq_len = args.seq_len.or(file.get("seq-len")?).unwrap_or(32);
    if batch == 0 {
        return Err(ConfigError("--batch must be at least 1".into()));
    }
    if seq_len == 0 {
        return Err(ConfigError("--seq-len must be at least 1".into()));
    }

    let seed = args
        .seed
        .or(file.get("seed")?)
        .ok_or_else(|| ConfigError("missing --seed (runs never seed from the clock)".into()))?;
    let out = args
        .out
        .clone()
        .or(file.get::<PathBuf>("out")?)
        .ok_or_else(|| ConfigError("missing --out".into()))?;

    Ok(ResolvedRun {
        problem,
        optimizer,
        hp,
        batch,
        seq_len,
        dim: args.dim.or(file.get("dim")?).unwrap_or(50),
        layers: args.layers.or(file.get("layers")?).unwrap_or(2),
        hidden: args.hidden.or(file.get("hidden")?).unwrap_or(64),
        max_vocab: args.max_vocab.or(file.get("max-vocab")?).unwrap_or(256),
        sampling,
        epochs,
        max_steps,
        seed,
        out,
        corpus: args.corpus.clone().or(file.get::<PathBuf>("corpus")?),
        timing: args.timing.or(file.get("timing")?).unwrap_or(false),
    })
}
