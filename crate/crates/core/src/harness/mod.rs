//! Experiment protocols: satisfaction curves, composability curves and the
//! oracle suite, plus the configuration and CSV rows they share.

mod composability;
mod eval;
mod oracle;
mod satisfaction;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::automata::Task;
use crate::baselines::{FlatOptionsConfig, QrmConfig};
use crate::options::OptionTrainConfig;
use crate::planner::LofQlConfig;
use crate::runtime::Trace;

pub use composability::{run_composability, ComposabilityOutput, ComposabilitySummary};
pub use eval::{EvalPoint, Evaluator};
pub use oracle::{oracle_checks, run_oracle_suite, OracleCheck, OracleReport};
pub use satisfaction::run_satisfaction;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{context}: {message}")]
    Job { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn job(context: impl Into<String>, err: impl fmt::Display) -> Self {
        HarnessError::Job {
            context: context.into(),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "lof-vi")]
    LofVi,
    #[serde(rename = "lof-ql")]
    LofQl,
    #[serde(rename = "greedy")]
    Greedy,
    #[serde(rename = "flat")]
    Flat,
    #[serde(rename = "qrm")]
    Qrm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::LofVi,
        Method::LofQl,
        Method::Greedy,
        Method::Flat,
        Method::Qrm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::LofVi => "lof-vi",
            Method::LofQl => "lof-ql",
            Method::Greedy => "greedy",
            Method::Flat => "flat",
            Method::Qrm => "qrm",
        }
    }

    /// Methods that run on top of learned options.
    pub fn uses_options(self) -> bool {
        self != Method::Qrm
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeedConfig {
    pub count: usize,
    pub master: u64,
}

impl Default for SeedConfig {
    fn default() -> Self {
        SeedConfig {
            count: 10,
            master: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComposabilityConfig {
    pub max_sweeps: usize,
    pub tolerance: f64,
    pub ql_episodes: usize,
}

impl Default for ComposabilityConfig {
    fn default() -> Self {
        ComposabilityConfig {
            max_sweeps: 50,
            tolerance: 1e-6,
            ql_episodes: 300,
        }
    }
}

/// One JSON document drives every experiment. Relative paths resolve
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: PathBuf,
    pub tasks: Vec<Task>,
    pub methods: Vec<Method>,
    pub seeds: SeedConfig,
    pub options: OptionTrainConfig,
    pub lof_ql: LofQlConfig,
    pub flat: FlatOptionsConfig,
    pub qrm: QrmConfig,
    /// Training steps between evaluations.
    pub eval_every: u64,
    pub rollouts: usize,
    pub step_cap: usize,
    pub composability: ComposabilityConfig,
    /// Options bundle reused by the composability experiment; trained from
    /// scratch when absent.
    pub options_bundle: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            map: PathBuf::from("delivery.txt"),
            tasks: Task::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            seeds: SeedConfig::default(),
            options: OptionTrainConfig::default(),
            lof_ql: LofQlConfig::default(),
            flat: FlatOptionsConfig::default(),
            qrm: QrmConfig::default(),
            eval_every: 2000,
            rollouts: 10,
            step_cap: 400,
            composability: ComposabilityConfig::default(),
            options_bundle: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config and make its paths absolute.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut cfg = Self::from_json_str(&std::fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.map = base.join(&cfg.map);
        cfg.options_bundle = cfg.options_bundle.map(|p| base.join(p));
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.tasks.is_empty() {
            return bad("task list is empty");
        }
        if self.methods.is_empty() {
            return bad("method list is empty");
        }
        if self.eval_every == 0 {
            return bad("eval_every must be at least 1");
        }
        if self.rollouts == 0 {
            return bad("rollouts must be at least 1");
        }
        if self.seeds.count == 0 {
            return bad("need at least one seed");
        }
        self.options
            .check()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    /// Seed of run `index`, derived from the master seed.
    pub fn run_seed(&self, index: usize) -> u64 {
        derive_seed(self.seeds.master, &[index as u64])
    }
}

/// Deterministic seed derivation by splitmix64 mixing.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    tags.iter().fold(mix(master), |acc, &t| mix(acc ^ mix(t)))
}

/// One evaluation point on a learning curve.
///
/// Columns: `experiment, method, task, seed, steps, meta_steps,
/// mean_normalized, std, satisfaction_rate, mean_raw`. `steps` is
/// environment interaction (option training for option-based methods,
/// retraining steps in the composability experiment); `meta_steps` counts
/// planning sweeps or meta-level decisions. `std` is over the rollouts of
/// this evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub experiment: String,
    pub method: Method,
    pub task: Task,
    pub seed: usize,
    pub steps: u64,
    pub meta_steps: u64,
    pub mean_normalized: f64,
    pub std: f64,
    pub satisfaction_rate: f64,
    pub mean_raw: f64,
}

/// One evaluation episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub experiment: String,
    pub method: Method,
    pub task: Task,
    pub seed: usize,
    pub steps: u64,
    pub episode_steps: usize,
    pub raw: f64,
    pub normalized: f64,
    pub satisfied: bool,
}

/// Everything an experiment writes.
#[derive(Debug, Default)]
pub struct HarnessOutput {
    pub rows: Vec<MetricsRow>,
    /// Episodes of the final evaluation of each curve.
    pub episodes: Vec<EpisodeRow>,
    pub traces: Vec<(String, Trace)>,
    pub artifacts: Vec<(String, serde_json::Value)>,
}

impl HarnessOutput {
    pub(crate) fn sort(&mut self) {
        let key = |r: &MetricsRow| (r.method, r.task, r.seed, r.steps, r.meta_steps);
        self.rows.sort_by_key(key);
        self.episodes.sort_by_key(|r| (r.method, r.task, r.seed));
        self.traces.sort_by(|a, b| a.0.cmp(&b.0));
        self.artifacts.sort_by(|a, b| a.0.cmp(&b.0));
    }

    pub(crate) fn extend(&mut self, other: HarnessOutput) {
        self.rows.extend(other.rows);
        self.episodes.extend(other.episodes);
        self.traces.extend(other.traces);
        self.artifacts.extend(other.artifacts);
    }

    pub fn metrics_csv(&self) -> Result<String, HarnessError> {
        to_csv(&self.rows)
    }

    /// `metrics.csv`, `episodes.csv`, `traces/*.jsonl`, `artifacts/*.json`.
    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir.join("traces"))?;
        std::fs::create_dir_all(dir.join("artifacts"))?;
        std::fs::write(dir.join("metrics.csv"), self.metrics_csv()?)?;
        std::fs::write(dir.join("episodes.csv"), to_csv(&self.episodes)?)?;
        for (name, trace) in &self.traces {
            std::fs::write(
                dir.join("traces").join(format!("{name}.jsonl")),
                trace.to_jsonl(),
            )?;
        }
        for (name, value) in &self.artifacts {
            std::fs::write(
                dir.join("artifacts").join(format!("{name}.json")),
                serde_json::to_string_pretty(value)?,
            )?;
        }
        Ok(())
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
