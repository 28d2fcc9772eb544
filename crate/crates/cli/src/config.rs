//! Run configuration: parsing, overrides and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use qloop::oracle::Family;
use qloop::{DirectConfig, Error as CoreError, Graph, GraphSpec, MetropolisConfig, SamplerConfig, WeightSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Sample,
    VerifyZ,
    Correlate,
    GibbsCheck,
    ConfigsCheck,
    Ed,
    MacroLoop,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Task::Sample => "sample",
            Task::VerifyZ => "verify-z",
            Task::Correlate => "correlate",
            Task::GibbsCheck => "gibbs-check",
            Task::ConfigsCheck => "configs-check",
            Task::Ed => "ed",
            Task::MacroLoop => "macro-loop",
        };
        f.write_str(name)
    }
}

fn default_two_s() -> u32 {
    1
}

fn default_family() -> Family {
    Family::Q
}

fn default_realizations() -> usize {
    200
}

/// Contents of a JSON config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSpec,
    /// Twice the spin.
    #[serde(default = "default_two_s")]
    pub two_s: u32,
    pub u: f64,
    pub beta: f64,
    /// Per-site field; empty means zero everywhere.
    #[serde(default)]
    pub h: Vec<f64>,
    #[serde(default = "default_family")]
    pub family: Family,
    /// Uniform loop weight for `sample` and `macro-loop`. Defaults to `2S+1`.
    #[serde(default)]
    pub theta: Option<f64>,
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub task: Option<Task>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Site pairs for `correlate`; all pairs when absent.
    #[serde(default)]
    pub pairs: Option<Vec<[usize; 2]>>,
    /// Realizations drawn by `configs-check`.
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
}

/// A validated run, ready to dispatch.
#[derive(Clone, Debug)]
pub struct Run {
    pub task: Task,
    pub config: RunConfig,
    pub graph: Graph,
    pub h: Vec<f64>,
    pub seed: u64,
    pub sampler: SamplerConfig,
    pub config_sha256: String,
    pub out_dir: PathBuf,
}

impl Run {
    pub fn theta(&self) -> f64 {
        self.config.theta.unwrap_or(f64::from(self.config.two_s + 1))
    }

    /// Loop weight whose partition function matches the configured family.
    pub fn field_weights(&self) -> Result<WeightSpec, CliError> {
        let spec = match self.config.family {
            Family::Q => WeightSpec::field(self.config.two_s, self.h.clone()),
            Family::P => WeightSpec::field_directed(self.config.two_s, self.h.clone()),
        };
        spec.map_err(|e| core_invalid("", e))
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        match &self.config.pairs {
            Some(p) => p.iter().map(|&[x, y]| (x, y)).collect(),
            None => {
                let n = self.graph.n_sites();
                (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect()
            }
        }
    }
}

pub fn parse(bytes: &[u8]) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let value: serde_json::Value = serde_path_to_error::deserialize(de).map_err(|e| path_error("", e))?;
    // The sampler is an internally tagged enum, which loses inner paths when
    // parsed in one pass, so it is parsed on its own.
    if let Some(serde_json::Value::Object(mut fields)) = value.get("sampler").cloned() {
        let kind = fields.remove("kind");
        let rest = serde_json::Value::Object(fields);
        let checked = match kind.as_ref().and_then(|k| k.as_str()) {
            Some("direct") => serde_path_to_error::deserialize::<_, DirectConfig>(rest).map(drop),
            Some("metropolis") => serde_path_to_error::deserialize::<_, MetropolisConfig>(rest).map(drop),
            _ => return Err(invalid("sampler.kind", "expected `direct` or `metropolis`")),
        };
        checked.map_err(|e| path_error("sampler", e))?;
    }
    serde_path_to_error::deserialize(value).map_err(|e| path_error("", e))
}

fn path_error<E: std::fmt::Display>(prefix: &str, e: serde_path_to_error::Error<E>) -> CliError {
    let inner = e.path().to_string();
    let path = match (prefix.is_empty(), inner.as_str()) {
        (true, _) => inner,
        (false, ".") => prefix.to_string(),
        (false, _) => format!("{prefix}.{inner}"),
    };
    invalid(path, e.inner().to_string())
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Maps a core parameter error onto a config path under `prefix`.
fn core_invalid(prefix: &str, e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter { name, reason } if prefix.is_empty() => invalid(name, reason),
        CoreError::InvalidParameter { name, reason } => invalid(format!("{prefix}.{name}"), reason),
        other => invalid(if prefix.is_empty() { "." } else { prefix }, other.to_string()),
    }
}

pub struct Overrides {
    pub task: Task,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Applies command-line overrides and checks everything that can be checked
/// before running.
pub fn prepare(bytes: &[u8], overrides: Overrides) -> Result<Run, CliError> {
    let config = parse(bytes)?;
    let task = overrides.task;
    if let Some(t) = config.task {
        if t != task {
            return Err(invalid("task", format!("config says `{t}` but `{task}` was requested")));
        }
    }
    if !(config.beta.is_finite() && config.beta > 0.0) {
        return Err(invalid("beta", format!("must be positive and finite, got {}", config.beta)));
    }
    if !(0.0..=1.0).contains(&config.u) {
        return Err(invalid("u", format!("must lie in [0, 1], got {}", config.u)));
    }
    if config.two_s == 0 {
        return Err(invalid("two_s", "spin must be positive"));
    }
    if config.family == Family::P && config.two_s % 2 == 1 {
        return Err(invalid("family", "the p family needs integer spin (even two_s)"));
    }
    if let Some(theta) = config.theta {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(invalid("theta", format!("must be positive, got {theta}")));
        }
    }
    let graph = Graph::build(&config.graph).map_err(|e| invalid("graph", e.to_string()))?;
    let n = graph.n_sites();
    let h = if config.h.is_empty() { vec![0.0; n] } else { config.h.clone() };
    if h.len() != n {
        return Err(invalid("h", format!("expected {n} values, got {}", h.len())));
    }
    if let Some(i) = h.iter().position(|x| !x.is_finite()) {
        return Err(invalid(format!("h[{i}]"), "must be finite"));
    }
    if h.iter().any(|&x| x != 0.0) && matches!(task, Task::Correlate | Task::MacroLoop) {
        return Err(invalid("h", format!("task `{task}` needs zero field")));
    }
    if let Some(pairs) = &config.pairs {
        if pairs.is_empty() {
            return Err(invalid("pairs", "no pairs given"));
        }
        for (i, &[x, y]) in pairs.iter().enumerate() {
            if x >= n || y >= n || x == y {
                return Err(invalid(format!("pairs[{i}]"), format!("need two distinct sites below {n}")));
            }
        }
    }
    if config.n_realizations == 0 {
        return Err(invalid("n_realizations", "must be positive"));
    }
    if task == Task::GibbsCheck && !matches!(config.sampler, SamplerConfig::Direct(_)) {
        return Err(invalid("sampler.kind", "gibbs-check needs the direct sampler"));
    }
    if task == Task::MacroLoop && !(matches!(config.graph, GraphSpec::Torus(_)) || graph.is_periodic()) {
        return Err(invalid("graph", "macro-loop needs a torus or a periodic chain"));
    }
    config.sampler.validate().map_err(|e| core_invalid("sampler", e))?;

    let seed = overrides.seed.unwrap_or(config.seed);
    let sampler = config.sampler.clone().with_seed(seed);
    let out_dir = overrides
        .out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| Path::new("qloop-out").to_path_buf());
    Ok(Run {
        task,
        graph,
        h,
        seed,
        sampler,
        config_sha256: hex::encode(Sha256::digest(bytes)),
        out_dir,
        config,
    })
}
