//! `ctoe`: batch runner for the enumeration, prediction and code-length
//! experiments. Every run writes CSV/JSON artifacts and a manifest into the
//! output directory. Failures print a JSON error report on stderr and exit
//! with 2 (invalid arguments or config) or 1 (runtime failure).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ctoe_cli::config::{self, ConfigError, RawConfig};
use ctoe_cli::{artifacts, commands};

#[derive(Parser)]
#[command(name = "ctoe", version, about = "Toy universal machine experiments")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    /// Omit to take the command from the config file.
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML config; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Observed bit string.
    #[arg(long, global = true)]
    target: Option<String>,
    /// Program length bound L.
    #[arg(long, global = true)]
    max_len: Option<u32>,
    /// Per-run step budget.
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Ignore the run cache.
    #[arg(long, global = true)]
    no_cache: bool,
    /// Parallel workers.
    #[arg(long, global = true)]
    shards: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Consistent set Q_L of a target.
    Enumerate,
    /// Shortest consistent program.
    Km,
    /// Counting prediction of the next bits.
    Predict {
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Prefix of the dovetailed universal stream.
    UtoeStream {
        #[arg(long)]
        cells: Option<u64>,
    },
    /// Shortest perfect (generator, observer) pair.
    Select {
        /// Candidate "q:s"; repeatable. Programs are bit strings or ident:K.
        #[arg(long = "pair")]
        pairs: Vec<String>,
    },
    /// Two-part code lengths of models for the target.
    MdlScore {
        /// Model spec; repeatable.
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long)]
        observer: Option<String>,
    },
    /// Batch experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Shortest program's continuation vs the counting argmax.
    Ockham {
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        max_target_len: Option<usize>,
    },
    /// Counting predictor on uniform vs self-sampled universes.
    Nfl {
        #[arg(long)]
        trials: Option<u64>,
        #[arg(short = 't', long = "observed")]
        t: Option<usize>,
        #[arg(short = 'n', long = "length")]
        n: Option<usize>,
    },
    /// π stream vs fair coin as the observation length grows.
    PiMdl {
        #[arg(long)]
        cells: Option<u64>,
    },
    /// Km against the counting estimate of M.
    KmVsM {
        #[arg(long)]
        max_target_len: Option<usize>,
    },
    /// Bits needed to single out one of N locations.
    Localization {
        /// Location count; repeatable, e.g. 7e9.
        #[arg(long = "locations")]
        locations: Vec<String>,
    },
}

fn non_empty(v: Vec<String>) -> Option<Vec<String>> {
    (!v.is_empty()).then_some(v)
}

impl Cli {
    fn into_raw(self) -> (Option<PathBuf>, RawConfig) {
        let c = self.common;
        let mut raw = RawConfig {
            max_len: c.max_len,
            steps: c.steps,
            seed: c.seed,
            out: c.out,
            shards: c.shards,
            targets: c.target.map(|t| vec![t]),
            cache: c.no_cache.then_some(false),
            ..RawConfig::default()
        };
        let set = |raw: &mut RawConfig, name: &str| raw.command = Some(name.into());
        match self.command {
            None => {}
            Some(Cmd::Enumerate) => set(&mut raw, "enumerate"),
            Some(Cmd::Km) => set(&mut raw, "km"),
            Some(Cmd::Predict { horizon }) => {
                set(&mut raw, "predict");
                raw.horizon = horizon;
            }
            Some(Cmd::UtoeStream { cells }) => {
                set(&mut raw, "utoe-stream");
                raw.cells = cells;
            }
            Some(Cmd::Select { pairs }) => {
                set(&mut raw, "select");
                raw.pairs = non_empty(pairs);
            }
            Some(Cmd::MdlScore { models, observer }) => {
                set(&mut raw, "mdl-score");
                raw.models = non_empty(models);
                raw.observer = observer;
            }
            Some(Cmd::Experiment(e)) => {
                set(&mut raw, "experiment");
                let name = match e {
                    ExperimentCmd::Ockham {
                        horizon,
                        max_target_len,
                    } => {
                        raw.horizon = horizon;
                        raw.max_target_len = max_target_len;
                        "ockham"
                    }
                    ExperimentCmd::Nfl { trials, t, n } => {
                        raw.trials = trials;
                        raw.t = t;
                        raw.n = n;
                        "nfl"
                    }
                    ExperimentCmd::PiMdl { cells } => {
                        raw.cells = cells;
                        "pi-mdl"
                    }
                    ExperimentCmd::KmVsM { max_target_len } => {
                        raw.max_target_len = max_target_len;
                        "km-vs-m"
                    }
                    ExperimentCmd::Localization { locations } => {
                        raw.locations = non_empty(locations);
                        "localization"
                    }
                };
                raw.experiment = Some(name.into());
            }
        }
        (c.config, raw)
    }
}

fn report(kind: &str, message: String, field: Option<&str>) {
    let r = json!({ "status": "error", "kind": kind, "message": message, "field": field });
    eprintln!("{r}");
}

fn invalid(e: ConfigError) -> ExitCode {
    let field = match &e {
        ConfigError::Field { field, .. } => Some(*field),
        _ => None,
    };
    report("invalid-arguments", e.to_string(), field);
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("invalid-arguments", e.kind().to_string() + ": " + &e.render().to_string(), None);
            return ExitCode::from(2);
        }
    };
    let (config_path, flags) = cli.into_raw();
    let base = match config_path {
        Some(p) => match config::read_raw(&p) {
            Ok(raw) => raw,
            Err(e) => return invalid(e),
        },
        None => RawConfig::default(),
    };
    if let (Some(a), Some(b)) = (&base.command, &flags.command) {
        if a != b {
            return invalid(ConfigError::Field {
                field: "command",
                message: format!("config says {a:?} but {b:?} was invoked"),
            });
        }
    }
    let cfg = match config::validate(base.overlay(flags)) {
        Ok(c) => c,
        Err(e) => return invalid(e),
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cfg.shards).build_global() {
        report("runtime", format!("thread pool: {e}"), None);
        return ExitCode::from(1);
    }
    let result = commands::run(&cfg).and_then(|a| {
        artifacts::write_all(&cfg.out, &cfg, &a)?;
        Ok(a)
    });
    match result {
        Ok(written) => {
            for a in &written {
                println!("{}", cfg.out.join(&a.name).display());
            }
            println!("{}", cfg.out.join(artifacts::MANIFEST_FILE).display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            report("runtime", e.to_string(), None);
            ExitCode::from(1)
        }
    }
}
