//! Experiment configuration: a flat TOML file, overridden by command-line
//! flags, validated into an [`ExperimentConfig`].
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `command` | from the command line | `enumerate`, `km`, `predict`, `utoe-stream`, `select`, `mdl-score`, `experiment` |
//! | `experiment` | none | `ockham`, `nfl`, `pi-mdl`, `km-vs-m`, `localization` when `command = "experiment"` |
//! | `machine` | `"M1"` | reference machine; only `M1` exists |
//! | `max_len` | 12 | program length bound L, at most 26 |
//! | `steps` | 10 · 2^L | per-run step budget |
//! | `output_bits` | longest query + 64 | per-run output cap |
//! | `seed` | 0 | random seed |
//! | `targets` | `[]` | observed bit strings |
//! | `out` | `"out"` | output directory |
//! | `cache` | true | reuse runs from `$CTOE_CACHE_DIR` when set |
//! | `shards` | 1 | parallel workers |
//! | `horizon` | 1 | prediction horizon |
//! | `trials` | 10000 | trials per regime (nfl) |
//! | `t` | 4 | observed bits before predicting (nfl) |
//! | `n` | 5 | universe length (nfl) |
//! | `cells` | 1000 | stream cells (utoe-stream), observation length (pi-mdl: 64) |
//! | `max_target_len` | 3 | suite targets are all strings up to this length |
//! | `pairs` | `[]` | `"q:s"` candidates for select |
//! | `models` | coin, pi, champernowne | model specs for mdl-score |
//! | `observer` | `"identity"` | observer spec for mdl-score |
//! | `locations` | 8, 7e9, 3e22 | location counts (localization) |
//!
//! Program specs are bit strings or `ident:K`, the K-bit copy observer.
//! Model specs: `coin`, `bernoulli:A/B`, `markov:K:P0,P1,...` with each
//! `Pi` a fraction `a/b`, `pi`, `champernowne`, `m1:BITS`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ctoe::bits::BitString;
use ctoe::machine::gadgets::ident;
use ctoe::machine::{Program, RunBudget, MACHINE_VERSION};
use ctoe::mdl::model::{ModelExpr, ObservationModel, Prob, StreamSource};

pub const MAX_LEN_CAP: u32 = 26;
pub const MAX_STEPS_CAP: u64 = 10 << MAX_LEN_CAP;
pub const MAX_OUTPUT_CAP: u64 = 1 << 16;
pub const MAX_TRIALS: u64 = 10_000_000;
pub const MAX_CELLS: u64 = 10_000_000;
pub const MAX_HORIZON: usize = 16;
pub const MAX_T: usize = 20;
pub const MAX_TARGET_LEN: usize = 12;
pub const MAX_IDENT: usize = 64;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{field}: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.into(),
    }
}

/// Unvalidated settings; every key optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub command: Option<String>,
    pub experiment: Option<String>,
    pub machine: Option<String>,
    pub max_len: Option<u32>,
    pub steps: Option<u64>,
    pub output_bits: Option<u64>,
    pub seed: Option<u64>,
    pub targets: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub cache: Option<bool>,
    pub shards: Option<usize>,
    pub horizon: Option<usize>,
    pub trials: Option<u64>,
    pub t: Option<usize>,
    pub n: Option<usize>,
    pub cells: Option<u64>,
    pub max_target_len: Option<usize>,
    pub pairs: Option<Vec<String>>,
    pub models: Option<Vec<String>>,
    pub observer: Option<String>,
    pub locations: Option<Vec<String>>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        RawConfig { $($f: $top.$f.or($base.$f)),* }
    };
}

impl RawConfig {
    /// Fields set in `top` win.
    pub fn overlay(self, top: RawConfig) -> RawConfig {
        let base = self;
        overlay!(
            base, top, command, experiment, machine, max_len, steps, output_bits, seed, targets, out, cache,
            shards, horizon, trials, t, n, cells, max_target_len, pairs, models, observer, locations
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Enumerate,
    Km,
    Predict,
    UtoeStream,
    Select,
    MdlScore,
    Experiment(Experiment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Ockham,
    Nfl,
    PiMdl,
    KmVsM,
    Localization,
}

impl Command {
    pub fn name(self) -> String {
        match self {
            Command::Enumerate => "enumerate".into(),
            Command::Km => "km".into(),
            Command::Predict => "predict".into(),
            Command::UtoeStream => "utoe-stream".into(),
            Command::Select => "select".into(),
            Command::MdlScore => "mdl-score".into(),
            Command::Experiment(e) => format!("experiment {}", e.name()),
        }
    }

    fn takes_one_target(self) -> bool {
        matches!(
            self,
            Command::Enumerate | Command::Km | Command::Predict | Command::Select | Command::MdlScore
        )
    }
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Ockham => "ockham",
            Experiment::Nfl => "nfl",
            Experiment::PiMdl => "pi-mdl",
            Experiment::KmVsM => "km-vs-m",
            Experiment::Localization => "localization",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            Experiment::Ockham,
            Experiment::Nfl,
            Experiment::PiMdl,
            Experiment::KmVsM,
            Experiment::Localization,
        ]
        .into_iter()
        .find(|e| e.name() == s)
    }
}

/// Validated settings. Serializes to the resolved form recorded in the
/// manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub machine: String,
    pub max_len: u32,
    pub steps: u64,
    pub output_bits: u64,
    pub seed: u64,
    pub targets: Vec<BitString>,
    pub out: PathBuf,
    pub cache: bool,
    pub shards: usize,
    pub horizon: usize,
    pub trials: u64,
    pub t: usize,
    pub n: usize,
    pub cells: u64,
    pub max_target_len: usize,
    pub pairs: Vec<String>,
    pub models: Vec<String>,
    pub observer: String,
    pub locations: Vec<u128>,
    #[serde(skip)]
    pub parsed_pairs: Vec<(Program, Program)>,
    #[serde(skip)]
    pub parsed_models: Vec<ModelExpr>,
    #[serde(skip)]
    pub parsed_observer: ObservationModel,
}

impl ExperimentConfig {
    pub fn budget(&self) -> RunBudget {
        RunBudget::new(self.steps, self.output_bits).expect("validated budget")
    }

    pub fn target(&self) -> &BitString {
        &self.targets[0]
    }
}

/// Reads a config file without validating it.
pub fn read_raw(path: &Path) -> Result<RawConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    validate(read_raw(path)?)
}

pub fn parse_bits(name: &'static str, s: &str) -> Result<BitString, ConfigError> {
    s.parse().map_err(|e: ctoe::bits::ParseBitsError| field(name, e.to_string()))
}

/// A bit string, or `ident:K` for the K-bit copy observer.
pub fn parse_program(name: &'static str, s: &str) -> Result<Program, ConfigError> {
    if let Some(k) = s.strip_prefix("ident:") {
        let k: usize = k.parse().map_err(|_| field(name, format!("bad copy length in {s:?}")))?;
        if k > MAX_IDENT {
            return Err(field(name, format!("copy length {k} exceeds {MAX_IDENT}")));
        }
        return Ok(ident(k));
    }
    parse_bits(name, s).map(Program::from_bits)
}

fn parse_fraction(name: &'static str, s: &str) -> Result<(u64, u64), ConfigError> {
    let bad = || field(name, format!("bad fraction {s:?}"));
    let (a, b) = s.split_once('/').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

pub fn parse_model(s: &str) -> Result<ModelExpr, ConfigError> {
    const NAME: &str = "models";
    let model_err = |e: ctoe::mdl::model::ModelError| field(NAME, format!("{s:?}: {e}"));
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    match kind {
        "coin" if rest.is_empty() => Ok(ModelExpr::Coin),
        "pi" if rest.is_empty() => Ok(ModelExpr::DetStream(StreamSource::PiBits)),
        "champernowne" if rest.is_empty() => Ok(ModelExpr::DetStream(StreamSource::ChampernowneBits)),
        "bernoulli" => {
            let (a, b) = parse_fraction(NAME, rest)?;
            ModelExpr::bernoulli(a, b).map_err(model_err)
        }
        "markov" => {
            let (k, table) = rest
                .split_once(':')
                .ok_or_else(|| field(NAME, format!("{s:?}: expected markov:K:P0,P1,...")))?;
            let k: u32 = k.parse().map_err(|_| field(NAME, format!("{s:?}: bad order")))?;
            let probs = table
                .split(',')
                .map(|p| {
                    let (a, b) = parse_fraction(NAME, p)?;
                    Prob::new(a, b).map_err(model_err)
                })
                .collect::<Result<Vec<_>, _>>()?;
            ModelExpr::markov(k, probs).map_err(model_err)
        }
        "m1" => Ok(ModelExpr::DetStream(StreamSource::M1Program(Program::from_bits(parse_bits(
            NAME, rest,
        )?)))),
        _ => Err(field(NAME, format!("unknown model {s:?}"))),
    }
}

pub fn parse_observer(s: &str) -> Result<ObservationModel, ConfigError> {
    if s == "identity" {
        return Ok(ObservationModel::Identity);
    }
    let p = s.strip_prefix("m1:").unwrap_or(s);
    parse_program("observer", p).map(ObservationModel::M1Observer)
}

fn parse_command(raw: &RawConfig) -> Result<Command, ConfigError> {
    let name = raw
        .command
        .as_deref()
        .ok_or_else(|| field("command", "no command given"))?;
    let cmd = match name {
        "enumerate" => Command::Enumerate,
        "km" => Command::Km,
        "predict" => Command::Predict,
        "utoe-stream" => Command::UtoeStream,
        "select" => Command::Select,
        "mdl-score" => Command::MdlScore,
        "experiment" => {
            let e = raw
                .experiment
                .as_deref()
                .ok_or_else(|| field("experiment", "experiment name required"))?;
            Command::Experiment(Experiment::parse(e).ok_or_else(|| field("experiment", format!("unknown experiment {e:?}")))?)
        }
        other => return Err(field("command", format!("unknown command {other:?}"))),
    };
    if raw.experiment.is_some() && !matches!(cmd, Command::Experiment(_)) {
        return Err(field("experiment", "only valid with command = \"experiment\""));
    }
    Ok(cmd)
}

fn check_max<T: PartialOrd + std::fmt::Display>(name: &'static str, v: T, max: T) -> Result<T, ConfigError> {
    if v > max {
        return Err(field(name, format!("{v} exceeds the cap of {max}")));
    }
    Ok(v)
}

/// Applies defaults and checks every field.
pub fn validate(raw: RawConfig) -> Result<ExperimentConfig, ConfigError> {
    let command = parse_command(&raw)?;
    let machine = raw.machine.clone().unwrap_or_else(|| MACHINE_VERSION.to_string());
    if machine != MACHINE_VERSION {
        return Err(field("machine", format!("unknown machine {machine:?}; only {MACHINE_VERSION}")));
    }
    let max_len = check_max("max_len", raw.max_len.unwrap_or(12), MAX_LEN_CAP)?;
    let targets = raw
        .targets
        .clone()
        .unwrap_or_default()
        .iter()
        .map(|t| parse_bits("targets", t))
        .collect::<Result<Vec<_>, _>>()?;
    if command.takes_one_target() && targets.len() != 1 {
        return Err(field(
            "targets",
            format!("{} needs exactly one target, got {}", command.name(), targets.len()),
        ));
    }
    let horizon = check_max("horizon", raw.horizon.unwrap_or(1), MAX_HORIZON)?;
    let t = check_max("t", raw.t.unwrap_or(4), MAX_T)?;
    let n = raw.n.unwrap_or(5);
    if n <= t {
        return Err(field("n", format!("universe length {n} must exceed t = {t}")));
    }
    let trials = check_max("trials", raw.trials.unwrap_or(10_000), MAX_TRIALS)?;
    if trials == 0 {
        return Err(field("trials", "must be at least 1"));
    }
    let default_cells = if command == Command::Experiment(Experiment::PiMdl) { 64 } else { 1000 };
    let cells = check_max("cells", raw.cells.unwrap_or(default_cells), MAX_CELLS)?;
    if cells == 0 {
        return Err(field("cells", "must be at least 1"));
    }
    let max_target_len = check_max("max_target_len", raw.max_target_len.unwrap_or(3), MAX_TARGET_LEN)?;
    let shards = raw.shards.unwrap_or(1);
    if shards == 0 {
        return Err(field("shards", "must be at least 1"));
    }

    let longest_target = targets.iter().map(|t| t.len()).max().unwrap_or(0);
    let query_bits = match command {
        Command::Predict => longest_target + horizon,
        Command::Experiment(Experiment::Ockham) => max_target_len + horizon,
        Command::Experiment(Experiment::Nfl) => n,
        Command::Experiment(Experiment::KmVsM) => max_target_len,
        Command::Experiment(Experiment::PiMdl) => cells as usize,
        _ => longest_target,
    };
    let output_bits = check_max("output_bits", raw.output_bits.unwrap_or(query_bits as u64 + 64), MAX_OUTPUT_CAP)?;
    if output_bits < query_bits as u64 {
        return Err(field(
            "output_bits",
            format!("{output_bits} is below the {query_bits} bits this query inspects"),
        ));
    }
    let steps = check_max("steps", raw.steps.unwrap_or(10u64 << max_len), MAX_STEPS_CAP)?;
    RunBudget::new(steps, output_bits).map_err(|e| field("steps", e.to_string()))?;

    let pairs = raw.pairs.clone().unwrap_or_default();
    let parsed_pairs = pairs
        .iter()
        .map(|p| {
            let (q, s) = p
                .split_once(':')
                .filter(|(q, _)| !q.starts_with("ident"))
                .ok_or_else(|| field("pairs", format!("expected \"q:s\", got {p:?}")))?;
            Ok((parse_program("pairs", q)?, parse_program("pairs", s)?))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    if command == Command::Select && parsed_pairs.is_empty() {
        return Err(field("pairs", "select needs at least one candidate pair"));
    }
    let models = raw
        .models
        .clone()
        .unwrap_or_else(|| vec!["coin".into(), "pi".into(), "champernowne".into()]);
    let parsed_models = models.iter().map(|m| parse_model(m)).collect::<Result<Vec<_>, _>>()?;
    if parsed_models.is_empty() {
        return Err(field("models", "at least one model required"));
    }
    let observer = raw.observer.clone().unwrap_or_else(|| "identity".into());
    let parsed_observer = parse_observer(&observer)?;
    let locations = raw
        .locations
        .clone()
        .unwrap_or_else(|| vec!["8".into(), "7000000000".into(), "30000000000000000000000".into()])
        .iter()
        .map(|s| parse_count(s))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ExperimentConfig {
        command,
        machine,
        max_len,
        steps,
        output_bits,
        seed: raw.seed.unwrap_or(0),
        targets,
        out: raw.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        cache: raw.cache.unwrap_or(true),
        shards,
        horizon,
        trials,
        t,
        n,
        cells,
        max_target_len,
        pairs,
        models,
        observer,
        locations,
        parsed_pairs,
        parsed_models,
        parsed_observer,
    })
}

/// A positive integer, in plain digits or as `Me<k>` / `M×10^k` shorthand.
fn parse_count(s: &str) -> Result<u128, ConfigError> {
    let bad = || field("locations", format!("bad location count {s:?}"));
    let s = s.trim().replace('_', "");
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m.to_string(), e.parse::<u32>().map_err(|_| bad())?),
        None => (s.clone(), 0),
    };
    let m: u128 = mantissa.parse().map_err(|_| bad())?;
    let n = 10u128
        .checked_pow(exp)
        .and_then(|p| m.checked_mul(p))
        .ok_or_else(bad)?;
    if n == 0 {
        return Err(field("locations", "location counts must be positive"));
    }
    Ok(n)
}
