//! Prediction by counting consistent programs, universal self-sampling and
//! the experiments built on them. Observers are the identity throughout:
//! predictions are about raw universe bits.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::enumerate::{default_budget, program_count, RunTable};
use crate::machine::{run_generator, GeneratorRun, Program, RunBudget};

/// Longest supported prediction horizon.
pub const MAX_HORIZON: usize = 16;
/// Default cap on rejection-sampling attempts per trial.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("no program of length at most {max_len} is consistent with {target}")]
    EmptyConditioningSet { target: BitString, max_len: u32 },
    #[error("query needs {needed} output bits but the budget allows {cap}")]
    OutputCap { needed: usize, cap: u64 },
    #[error("horizon {0} exceeds the supported maximum")]
    Horizon(usize),
    #[error("trial {trial}: no sample satisfied the condition within {attempts} attempts")]
    ConditionUnsatisfiable { trial: u64, attempts: u64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// One continuation of the conditioning prefix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Continuation {
    pub bits: BitString,
    /// |Q_L^n|.
    pub count: u64,
    /// count / |Q_L|.
    pub probability: Ratio<u64>,
    /// Length of the shortest program emitting target · bits.
    pub l_n: Option<u32>,
}

/// Counting distribution over the next `horizon` bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictorReport {
    pub target: BitString,
    pub horizon: usize,
    pub max_len: u32,
    /// |Q_L|.
    pub total: u64,
    pub l: u32,
    pub q_min: Program,
    /// All 2^horizon continuations in lexicographic order.
    pub continuations: Vec<Continuation>,
    /// Mass of consistent programs that stop before horizon bits.
    pub deficit: Ratio<u64>,
    /// Most probable continuation; ties go to the lexicographically
    /// smallest. `None` when every count is zero.
    pub argmax: Option<BitString>,
}

impl PredictorReport {
    pub fn probability_of(&self, continuation: &[bool]) -> Option<Ratio<u64>> {
        self.continuations
            .iter()
            .find(|c| &c.bits[..] == continuation)
            .map(|c| c.probability)
    }
}

fn check_query(table: &RunTable, target: &BitString, horizon: usize) -> Result<(), PredictError> {
    if horizon > MAX_HORIZON {
        return Err(PredictError::Horizon(horizon));
    }
    let needed = target.len() + horizon;
    let cap = table.budget().max_output_bits();
    if needed as u64 > cap {
        return Err(PredictError::OutputCap { needed, cap });
    }
    Ok(())
}

/// P(u_{t+1:t+h} | target) = |Q_L^n| / |Q_L| from a precomputed table.
pub fn predict_from_table(table: &RunTable, target: &BitString, horizon: usize) -> Result<PredictorReport, PredictError> {
    check_query(table, target, horizon)?;
    let split = table.split_counts(target, horizon);
    let total = split.base.count;
    let q_min = split.base.q_min.clone().ok_or_else(|| PredictError::EmptyConditioningSet {
        target: target.clone(),
        max_len: table.max_len(),
    })?;
    let continuations: Vec<Continuation> = split
        .counts
        .iter()
        .zip(&split.min_lengths)
        .enumerate()
        .map(|(k, (&count, &l_n))| Continuation {
            bits: BitString::from_u64(k as u64, horizon),
            count,
            probability: Ratio::new(count, total),
            l_n,
        })
        .collect();
    // max_by_key keeps the last maximum; scan in reverse to keep the first.
    let argmax = continuations
        .iter()
        .rev()
        .max_by_key(|c| c.count)
        .filter(|c| c.count > 0)
        .map(|c| c.bits.clone());
    Ok(PredictorReport {
        target: target.clone(),
        horizon,
        max_len: table.max_len(),
        total,
        l: q_min.len() as u32,
        q_min,
        continuations,
        deficit: Ratio::new(split.short, total),
        argmax,
    })
}

/// Counting prediction by exhaustive enumeration at length bound
/// `max_len`.
pub fn counting_predictor(
    target: &BitString,
    horizon: usize,
    max_len: u32,
    budget: RunBudget,
) -> Result<PredictorReport, PredictError> {
    let needed = target.len() + horizon;
    if needed as u64 > budget.max_output_bits() {
        return Err(PredictError::OutputCap {
            needed,
            cap: budget.max_output_bits(),
        });
    }
    predict_from_table(&RunTable::build(max_len, budget), target, horizon)
}

/// What the shortest consistent program predicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OckhamReport {
    pub target: BitString,
    pub horizon: usize,
    pub q_min: Program,
    /// q_min's next `horizon` bits, or as many as it emits.
    pub continuation: BitString,
    /// q_min emits fewer than |target| + horizon bits.
    pub truncated: bool,
    pub argmax: Option<BitString>,
    /// The continuation is complete and equals the counting argmax.
    pub agrees: bool,
}

pub fn ockham_from_table(table: &RunTable, target: &BitString, horizon: usize) -> Result<OckhamReport, PredictError> {
    let report = predict_from_table(table, target, horizon)?;
    let q_min = report.q_min.clone();
    let out = table.output(q_min.index().expect("table programs are indexable"));
    let t = target.len();
    let end = out.len().min(t + horizon);
    let continuation: BitString = out[t..end].iter().copied().collect();
    let truncated = continuation.len() < horizon;
    let agrees = !truncated && report.argmax.as_ref() == Some(&continuation);
    Ok(OckhamReport {
        target: target.clone(),
        horizon,
        q_min,
        continuation,
        truncated,
        argmax: report.argmax,
        agrees,
    })
}

/// The continuation of the simplest consistent universe.
pub fn ockham_choice(
    target: &BitString,
    horizon: usize,
    max_len: u32,
    budget: RunBudget,
) -> Result<OckhamReport, PredictError> {
    let needed = target.len() + horizon;
    if needed as u64 > budget.max_output_bits() {
        return Err(PredictError::OutputCap {
            needed,
            cap: budget.max_output_bits(),
        });
    }
    ockham_from_table(&RunTable::build(max_len, budget), target, horizon)
}

/// How programs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingScheme {
    /// Uniform over all 2^(L+1) - 1 strings of length at most L.
    #[default]
    UniformStrings,
    /// Length uniform in 0..=L, then a uniform string of that length.
    LengthFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub max_len: u32,
    pub seed: u64,
    pub trials: u64,
    pub condition: Option<BitString>,
    pub scheme: SamplingScheme,
    pub max_attempts: u64,
}

impl SampleConfig {
    pub fn new(max_len: u32, seed: u64, trials: u64) -> Self {
        Self {
            max_len,
            seed,
            trials,
            condition: None,
            scheme: SamplingScheme::UniformStrings,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn with_condition(mut self, condition: BitString) -> Self {
        self.condition = Some(condition);
        self
    }

    pub fn with_scheme(mut self, scheme: SamplingScheme) -> Self {
        self.scheme = scheme;
        self
    }
}

/// Generator for trial `trial` of a run seeded with `seed`; the `domain`
/// separates independent uses of one seed.
pub fn trial_rng(seed: u64, domain: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial);
    rng
}

/// Index of one program drawn under `scheme`.
pub fn draw_program_index<R: Rng>(rng: &mut R, max_len: u32, scheme: SamplingScheme) -> u64 {
    match scheme {
        SamplingScheme::UniformStrings => rng.gen_range(0..program_count(max_len)),
        SamplingScheme::LengthFirst => {
            let len = rng.gen_range(0..=max_len);
            // Strings of length `len` occupy indices 2^len - 1 .. 2^(len+1) - 1.
            (1u64 << len) - 1 + rng.gen_range(0..1u64 << len)
        }
    }
}

const DOMAIN_SAMPLE: u64 = 1;
const DOMAIN_NFL_A: u64 = 2;
const DOMAIN_NFL_B: u64 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub trial: u64,
    pub program: Program,
    pub run: GeneratorRun,
    /// Draws needed to satisfy the condition, at least 1.
    pub attempts: u64,
}

fn check_sample_config(cfg: &SampleConfig) -> Result<(), PredictError> {
    if cfg.trials == 0 {
        return Err(PredictError::Config("trials must be at least 1".into()));
    }
    if cfg.max_attempts == 0 {
        return Err(PredictError::Config("max_attempts must be at least 1".into()));
    }
    if cfg.max_len > 62 {
        return Err(PredictError::Config("max_len must be at most 62".into()));
    }
    Ok(())
}

/// Draws `cfg.trials` programs; each trial has its own random stream, so
/// the result does not depend on evaluation order.
pub fn self_sample(cfg: &SampleConfig, budget: RunBudget) -> Result<Vec<Sample>, PredictError> {
    check_sample_config(cfg)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, DOMAIN_SAMPLE, trial);
            for attempts in 1..=cfg.max_attempts {
                let program = Program::from_index(draw_program_index(&mut rng, cfg.max_len, cfg.scheme));
                let run = run_generator(&program, budget);
                if cfg.condition.as_ref().map_or(true, |c| run.output.starts_with(c)) {
                    return Ok(Sample {
                        trial,
                        program,
                        run,
                        attempts,
                    });
                }
            }
            Err(PredictError::ConditionUnsatisfiable {
                trial,
                attempts: cfg.max_attempts,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NflConfig {
    pub max_len: u32,
    /// Bits observed before predicting.
    pub t: usize,
    /// Universe length required in the self-sampled regime.
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub max_attempts: u64,
}

/// Accuracy tallies for one regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeStats {
    pub trials: u64,
    pub predictor_correct: u64,
    pub predictor_accuracy: f64,
    pub predictor_se: f64,
    pub baseline_correct: u64,
    pub baseline_accuracy: f64,
    pub baseline_se: f64,
    /// Draws rejected for emitting fewer than n bits.
    pub discarded: u64,
}

impl RegimeStats {
    fn new(trials: u64, predictor_correct: u64, baseline_correct: u64, discarded: u64) -> Self {
        let acc = |c: u64| c as f64 / trials as f64;
        let se = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
        let (pa, ba) = (acc(predictor_correct), acc(baseline_correct));
        Self {
            trials,
            predictor_correct,
            predictor_accuracy: pa,
            predictor_se: se(pa),
            baseline_correct,
            baseline_accuracy: ba,
            baseline_se: se(ba),
            discarded,
        }
    }

    /// Standard error of an accuracy of exactly 1/2 over these trials.
    pub fn null_se(&self) -> f64 {
        (0.25 / self.trials as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NflReport {
    pub config: NflConfig,
    /// Uniformly random universes.
    pub uniform: RegimeStats,
    /// Universes of self-sampled programs.
    pub universal: RegimeStats,
}

/// Counting predictor's guess for bit t+1 after every t-bit prefix,
/// indexed by the prefix read as a binary number. Prefixes with no
/// consistent program, and ties, predict 0.
pub fn next_bit_table(table: &RunTable, t: usize) -> Vec<bool> {
    (0..1u64 << t)
        .into_par_iter()
        .map(|k| {
            let split = table.split_counts(&BitString::from_u64(k, t), 1);
            split.counts[1] > split.counts[0]
        })
        .collect()
}

fn prefix_key(bits: &[bool]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Counting predictor vs an always-0 baseline on uniformly random bits and
/// on universes of self-sampled programs.
pub fn nfl_experiment(cfg: &NflConfig) -> Result<NflReport, PredictError> {
    if cfg.trials == 0 || cfg.max_attempts == 0 {
        return Err(PredictError::Config("trials and max_attempts must be positive".into()));
    }
    if cfg.n <= cfg.t {
        return Err(PredictError::Config("n must exceed t".into()));
    }
    if cfg.t > 20 {
        return Err(PredictError::Config("t must be at most 20".into()));
    }
    let table = RunTable::build(cfg.max_len, default_budget(cfg.max_len, cfg.n));
    nfl_with_table(cfg, &table)
}

/// [`nfl_experiment`] against a prebuilt table covering `cfg.max_len` and
/// at least `cfg.n` output bits.
pub fn nfl_with_table(cfg: &NflConfig, table: &RunTable) -> Result<NflReport, PredictError> {
    if table.max_len() != cfg.max_len || (table.budget().max_output_bits() as usize) < cfg.n {
        return Err(PredictError::Config("run table does not match the experiment".into()));
    }
    let guess = next_bit_table(table, cfg.t);
    let t = cfg.t;

    // (predictor correct, baseline correct, discarded)
    let tally = |a: (u64, u64, u64), b: (u64, u64, u64)| (a.0 + b.0, a.1 + b.1, a.2 + b.2);
    let score = |universe: &[bool]| {
        let truth = universe[t];
        (u64::from(guess[prefix_key(&universe[..t])] == truth), u64::from(!truth))
    };

    let uniform = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, DOMAIN_NFL_A, trial);
            let u: Vec<bool> = (0..cfg.n).map(|_| rng.gen()).collect();
            let (p, b) = score(&u);
            (p, b, 0)
        })
        .reduce(|| (0, 0, 0), tally);

    let universal = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, DOMAIN_NFL_B, trial);
            for discarded in 0..cfg.max_attempts {
                let i = draw_program_index(&mut rng, cfg.max_len, SamplingScheme::UniformStrings);
                let out = table.output(i);
                if out.len() >= cfg.n {
                    let (p, b) = score(&out[..cfg.n]);
                    return Ok((p, b, discarded));
                }
            }
            Err(PredictError::ConditionUnsatisfiable {
                trial,
                attempts: cfg.max_attempts,
            })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold((0, 0, 0), tally);

    Ok(NflReport {
        config: cfg.clone(),
        uniform: RegimeStats::new(cfg.trials, uniform.0, uniform.1, 0),
        universal: RegimeStats::new(cfg.trials, universal.0, universal.1, universal.2),
    })
}

/// Km_L against the counting estimate of M for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub target: BitString,
    pub count: u64,
    /// Shortest consistent length; `None` when no program is consistent.
    pub km: Option<u32>,
    /// −log2(count / (2^(L+1) − 1)).
    pub neg_log2_p: Option<f64>,
    /// km − neg_log2_p.
    pub gap: Option<f64>,
}

pub fn km_vs_logm_from_table(table: &RunTable, targets: &[BitString]) -> Vec<GapRow> {
    let universe = program_count(table.max_len()) as f64;
    targets
        .iter()
        .map(|target| {
            let set = table.consistent_set(target);
            let neg_log2_p = (set.count > 0).then(|| (universe / set.count as f64).log2());
            GapRow {
                target: target.clone(),
                count: set.count,
                km: set.l,
                neg_log2_p,
                gap: set.l.zip(neg_log2_p).map(|(l, p)| f64::from(l) - p),
            }
        })
        .collect()
}

/// The gap table for `targets` at length bound `max_len`.
pub fn km_vs_logm(targets: &[BitString], max_len: u32, budget: RunBudget) -> Result<Vec<GapRow>, PredictError> {
    if let Some(t) = targets.iter().find(|t| t.len() as u64 > budget.max_output_bits()) {
        return Err(PredictError::OutputCap {
            needed: t.len(),
            cap: budget.max_output_bits(),
        });
    }
    Ok(km_vs_logm_from_table(&RunTable::build(max_len, budget), targets))
}

/// Every bit string of length 0..=max_len in length-lex order.
pub fn all_targets(max_len: usize) -> Vec<BitString> {
    (0..=max_len)
        .flat_map(|len| (0..1u64 << len).map(move |k| BitString::from_u64(k, len)))
        .collect()
}
