//! Experiment execution and output writing.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use dmwf_core::netsim::{
    batch_trial, channel_forms, complexity_report, compression_factors, online_trial, simulate_bandwidth, Algorithm,
    BatchTrial, ExperimentConfig, NodeComplexity, OnlineTrial, RunMode,
};
use dmwf_core::report::{
    collect_failures, complexity_csv, compression_csv, compression_plot, compression_rows, failures_csv, mse_csv,
    mse_mean_csv, mse_plot, ser_csv, ser_mean_csv, ser_plot, CompressionRow, FailureRow,
};
use dmwf_core::scenario::generate_scenario;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{parse_algorithms, parse_config, serialize_config, ConfigError};

pub const THREADS_ENV: &str = "WASN_DMWF_THREADS";

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub algos: Option<String>,
    pub trials: Option<usize>,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// Every algorithm failed numerically in every trial.
    AllTrialsFailed(usize),
    Core(dmwf_core::Error),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::AllTrialsFailed(_) => 3,
            RunError::Core(_) | RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::AllTrialsFailed(n) => write!(f, "numerical failure in all {n} trials (see failures.csv)"),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<dmwf_core::Error> for RunError {
    fn from(e: dmwf_core::Error) -> Self {
        RunError::Core(e)
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

/// SHA-256 of the git blob object for `bytes` (`"blob <len>\0" ++ bytes`).
pub fn git_blob_sha256(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Loads the configuration file and applies command-line overrides.
pub fn load_config(path: &Path, ov: &Overrides) -> Result<(ExperimentConfig, Vec<u8>), RunError> {
    let bytes = fs::read(path)
        .map_err(|e| RunError::Config(ConfigError::general(format!("cannot read {}: {e}", path.display()))))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| RunError::Config(ConfigError::general(format!("{} is not UTF-8", path.display()))))?;
    let mut cfg = parse_config(text).map_err(RunError::Config)?;
    let flag = |key: &str, message: String| {
        RunError::Config(ConfigError {
            line: None,
            key: Some(key.into()),
            message,
        })
    };
    if let Some(m) = &ov.mode {
        cfg.mode = RunMode::parse(m).map_err(|e| flag("--mode", e.to_string()))?;
    }
    if let Some(s) = ov.seed {
        cfg.seed = s;
    }
    if let Some(a) = &ov.algos {
        cfg.algorithms = parse_algorithms(a).map_err(|m| flag("--algos", m))?;
    }
    if let Some(t) = ov.trials {
        cfg.trials = t;
    }
    cfg.validate().map_err(|e| RunError::Config(ConfigError::general(e.to_string())))?;
    if cfg.mode == RunMode::BatchOracle && cfg.algorithms.contains(&Algorithm::Unprocessed) {
        return Err(flag("algorithms", "unprocessed is only available in online mode".into()));
    }
    Ok((cfg, bytes))
}

/// Provenance record written before any result file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub seed: u64,
    pub config_hash: String,
    pub output_dir: PathBuf,
    pub mode: RunMode,
    pub trials: usize,
    /// Output files holding each algorithm's results.
    pub files: BTreeMap<String, Vec<String>>,
}

pub const RESOLVED_CONFIG: &str = "config.resolved.cfg";
pub const MANIFEST: &str = "manifest.json";

struct Outputs {
    per_trial: &'static str,
    mean: &'static str,
    plot: &'static str,
}

fn outputs(mode: RunMode) -> Outputs {
    match mode {
        RunMode::BatchOracle => Outputs {
            per_trial: "mse_w.csv",
            mean: "mse_w_mean.csv",
            plot: "mse_vs_iteration.dat",
        },
        RunMode::Online => Outputs {
            per_trial: "ser.csv",
            mean: "ser_mean.csv",
            plot: "ser_vs_time.dat",
        },
    }
}

const SHARED: [&str; 4] = ["failures.csv", "compression.csv", "complexity.csv", "compression.dat"];

impl RunManifest {
    pub fn new(config_path: &Path, config_bytes: &[u8], cfg: &ExperimentConfig, out: &Path) -> Self {
        let o = outputs(cfg.mode);
        let files = cfg
            .algorithms
            .iter()
            .map(|a| {
                let mut f = vec![o.per_trial.to_string(), o.mean.to_string(), o.plot.to_string(), "failures.csv".into()];
                if matches!(a, Algorithm::Dmwf) || a.danse().is_some() {
                    f.push("compression.csv".into());
                }
                (a.name().to_string(), f)
            })
            .collect();
        Self {
            config_path: config_path.to_path_buf(),
            seed: cfg.seed,
            config_hash: git_blob_sha256(config_bytes),
            output_dir: out.to_path_buf(),
            mode: cfg.mode,
            trials: cfg.trials,
            files,
        }
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::json!({
            "config_path": self.config_path.display().to_string(),
            "seed": self.seed,
            "config_hash": format!("sha256:{}", self.config_hash),
            "resolved_config": RESOLVED_CONFIG,
            "output_dir": self.output_dir.display().to_string(),
            "mode": self.mode.name(),
            "trials": self.trials,
            "files": self.files,
            "shared_files": SHARED,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("manifest is plain JSON");
        s.push('\n');
        s
    }
}

/// Worker count from `WASN_DMWF_THREADS`; `None` lets rayon decide.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

fn par_trials<T: Send>(cfg: &ExperimentConfig, f: impl Fn(usize) -> dmwf_core::Result<T> + Sync) -> Result<Vec<T>, RunError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| RunError::Io(e.to_string()))?;
    // Results come back in trial order regardless of scheduling.
    let results: Vec<dmwf_core::Result<T>> = pool.install(|| (0..cfg.trials).into_par_iter().map(&f).collect());
    results.into_iter().map(|r| r.map_err(RunError::from)).collect()
}

struct Extras {
    compression: Vec<CompressionRow>,
    complexity: Vec<(usize, Vec<NodeComplexity>)>,
    failures: Vec<FailureRow>,
}

fn batch_extras(cfg: &ExperimentConfig, trials: &[BatchTrial]) -> Result<Extras, RunError> {
    let mut ex = Extras {
        compression: Vec::new(),
        complexity: Vec::new(),
        failures: Vec::new(),
    };
    for t in trials {
        let s = generate_scenario(&cfg.trial_params(t.trial))?;
        let sensors = &s.params.sensors;
        let forms = channel_forms(&s.obs, sensors, cfg.probe_width);
        let ledger = simulate_bandwidth(&s, cfg, 4 * cfg.n_ds).ok();
        let cf = compression_factors(&forms, cfg.n_ds, ledger.as_ref(), sensors);
        ex.compression.extend(compression_rows(t.trial, t.seed, &cf));
        ex.complexity.push((t.trial, complexity_report(&s.obs, sensors)));
        ex.failures.extend(collect_failures(t.trial, t.seed, &t.results));
    }
    Ok(ex)
}

fn online_extras(cfg: &ExperimentConfig, trials: &[OnlineTrial]) -> Extras {
    let mut ex = Extras {
        compression: Vec::new(),
        complexity: Vec::new(),
        failures: Vec::new(),
    };
    for t in trials {
        let sensors = &cfg.scenario.sensors;
        let forms = channel_forms(&t.pattern, sensors, cfg.probe_width);
        let ledger = (!t.ledger.frames.is_empty()).then_some(&t.ledger);
        let cf = compression_factors(&forms, cfg.n_ds, ledger, sensors);
        ex.compression.extend(compression_rows(t.trial, t.seed, &cf));
        ex.complexity.push((t.trial, complexity_report(&t.pattern, sensors)));
        ex.failures.extend(collect_failures(t.trial, t.seed, &t.results));
    }
    ex
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_err(&path, e))
}

/// Summary of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub manifest: RunManifest,
    pub trials: usize,
    pub failures: usize,
}

/// Runs the experiment described by `config_path` and writes every output
/// file under `out`.
pub fn run(config_path: &Path, out: &Path, ov: &Overrides) -> Result<RunSummary, RunError> {
    let (cfg, bytes) = load_config(config_path, ov)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let manifest = RunManifest::new(config_path, &bytes, &cfg, out);
    write(out, MANIFEST, &manifest.to_json())?;
    write(out, RESOLVED_CONFIG, &serialize_config(&cfg))?;

    let o = outputs(cfg.mode);
    let (extras, all_failed, plot) = match cfg.mode {
        RunMode::BatchOracle => {
            let trials = par_trials(&cfg, |t| batch_trial(&cfg, t))?;
            write(out, o.per_trial, &mse_csv(&trials)?)?;
            write(out, o.mean, &mse_mean_csv(&trials)?)?;
            let failed = trials.iter().all(BatchTrial::all_failed);
            let plot = if failed { None } else { Some(mse_plot(&trials)?) };
            (batch_extras(&cfg, &trials)?, failed, plot)
        }
        RunMode::Online => {
            let trials = par_trials(&cfg, |t| online_trial(&cfg, t))?;
            write(out, o.per_trial, &ser_csv(&trials)?)?;
            write(out, o.mean, &ser_mean_csv(&trials)?)?;
            let failed = trials.iter().all(OnlineTrial::all_failed);
            let plot = if failed { None } else { Some(ser_plot(&trials)?) };
            (online_extras(&cfg, &trials), failed, plot)
        }
    };
    write(out, "failures.csv", &failures_csv(&extras.failures)?)?;
    write(out, "compression.csv", &compression_csv(&extras.compression)?)?;
    write(out, "complexity.csv", &complexity_csv(&extras.complexity)?)?;
    write(out, "compression.dat", &compression_plot(&extras.compression)?)?;
    if all_failed {
        return Err(RunError::AllTrialsFailed(cfg.trials));
    }
    if let Some(p) = plot {
        write(out, o.plot, &p)?;
    }
    Ok(RunSummary {
        manifest,
        trials: cfg.trials,
        failures: extras.failures.len(),
    })
}
