//! Two-part code lengths: complete-theory scores, partial theories with an
//! error table, probabilistic models, and parameter precision.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::gamma::{gamma_encode, gamma_len, BitReader, GammaError};
use super::model::{ModelExpr, ObservationModel, StreamSource, TAG_BITS};
use super::streams::{champernowne_bits, pi_bits};
use crate::bits::BitString;
use crate::machine::{run_generator, run_interleaved, run_observer_on, ObserverStatus, Program, RunBudget};

/// Step limit for M1 stream models when no budget is given.
pub const DEFAULT_STREAM_STEPS: u64 = 1 << 20;
/// Universe prefixes explored when summing over universes for an M1
/// observer.
pub const MAX_SEARCH_NODES: usize = 1 << 16;
/// Longest universe prefix explored for an M1 observer.
pub const MAX_SEARCH_DEPTH: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("pair is not perfect: {0}")]
    NotPerfect(String),
    #[error("no candidate reproduces the observations")]
    NoPerfectCandidate,
    #[error("candidate list is empty")]
    NoCandidates,
    #[error("model assigns probability 0 to the observations")]
    Inadmissible,
    #[error("universe search exceeded {nodes} nodes or depth {depth}")]
    SearchLimit { nodes: usize, depth: usize },
    #[error("observation sequence is empty")]
    EmptyObservation,
    #[error("number of locations must be positive")]
    ZeroLocations,
    #[error("malformed error table: {0}")]
    BadTable(String),
    #[error(transparent)]
    Gamma(#[from] GammaError),
}

/// Components of a two-part code length, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeLengthReport {
    pub model_bits: u64,
    pub observer_bits: u64,
    pub noise_bits: f64,
    pub error_table_bits: u64,
    pub total: f64,
}

impl CodeLengthReport {
    pub fn new(model_bits: u64, observer_bits: u64, noise_bits: f64, error_table_bits: u64) -> Self {
        Self {
            model_bits,
            observer_bits,
            noise_bits,
            error_table_bits,
            total: (model_bits + observer_bits + error_table_bits) as f64 + noise_bits,
        }
    }
}

/// A model's next-bit distribution given the universe so far.
#[derive(Debug, Clone)]
pub struct Predictive<'a> {
    model: &'a ModelExpr,
    stream: Option<BitString>,
}

impl<'a> Predictive<'a> {
    /// Prepares `model` for universes up to `horizon` bits; M1 streams run
    /// under `budget`.
    pub fn new(model: &'a ModelExpr, horizon: usize, budget: RunBudget) -> Self {
        let stream = match model {
            ModelExpr::DetStream(StreamSource::M1Program(q)) => {
                let b = budget.with_output_bits(horizon.max(1) as u64).expect("positive");
                Some(run_generator(q, b).output)
            }
            ModelExpr::DetStream(StreamSource::PiBits) => Some(pi_bits(horizon)),
            ModelExpr::DetStream(StreamSource::ChampernowneBits) => Some(champernowne_bits(horizon)),
            _ => None,
        };
        Self { model, stream }
    }

    /// P(next bit = 1 | prefix), or `None` where a stream is undefined.
    pub fn p_one(&self, prefix: &[bool]) -> Option<f64> {
        match self.model {
            ModelExpr::Coin => Some(0.5),
            ModelExpr::Bernoulli { p_num, p_den } => Some(*p_num as f64 / *p_den as f64),
            ModelExpr::MarkovK { k, p_one } => {
                let k = *k as usize;
                let ctx = (0..k).fold(0usize, |acc, j| {
                    let bit = (prefix.len() + j)
                        .checked_sub(k)
                        .map_or(false, |i| prefix[i]);
                    (acc << 1) | bit as usize
                });
                Some(p_one[ctx].value())
            }
            ModelExpr::DetStream(_) => {
                let s = self.stream.as_ref().expect("stream prepared");
                s.get(prefix.len()).map(|&b| if b { 1.0 } else { 0.0 })
            }
        }
    }

    /// P(next bit = `bit` | prefix).
    pub fn prob(&self, prefix: &[bool], bit: bool) -> f64 {
        match self.p_one(prefix) {
            Some(p) if bit => p,
            Some(p) => 1.0 - p,
            None => 0.0,
        }
    }
}

/// −log2 of the model's probability of `obs`; infinite when it is 0.
pub fn nll_bits(model: &ModelExpr, obs: &[bool]) -> f64 {
    let budget = RunBudget::new(DEFAULT_STREAM_STEPS, obs.len().max(1) as u64).expect("positive");
    nll_bits_with_budget(model, obs, budget)
}

pub fn nll_bits_with_budget(model: &ModelExpr, obs: &[bool], budget: RunBudget) -> f64 {
    let pred = Predictive::new(model, obs.len(), budget);
    let mut total = 0.0;
    for i in 0..obs.len() {
        let p = pred.prob(&obs[..i], obs[i]);
        if p == 0.0 {
            return f64::INFINITY;
        }
        total -= p.log2();
    }
    total
}

/// Length(Q) + Length(S) + |lb P(o)| with P(o) = Σ_u S(o|u) Q(u).
pub fn prob_score(
    model: &ModelExpr,
    observer: &ObservationModel,
    obs: &[bool],
    budget: RunBudget,
) -> Result<CodeLengthReport, ScoreError> {
    let noise = match observer {
        ObservationModel::Identity => nll_bits_with_budget(model, obs, budget),
        ObservationModel::M1Observer(s) => -observed_probability(model, s, obs, budget)?.log2(),
    };
    if noise.is_infinite() {
        return Err(ScoreError::Inadmissible);
    }
    Ok(CodeLengthReport::new(
        model.code_length(),
        observer.code_length(),
        noise.max(0.0),
        0,
    ))
}

/// Probability that observer `s` reports a prefix extending `obs` when the
/// universe is drawn from `model`: a search over the universe prefixes the
/// observer actually reads.
pub fn observed_probability(
    model: &ModelExpr,
    s: &Program,
    obs: &[bool],
    budget: RunBudget,
) -> Result<f64, ScoreError> {
    let budget = budget
        .with_output_bits(budget.max_output_bits().max(obs.len() as u64))
        .expect("positive");
    let pred = Predictive::new(model, MAX_SEARCH_DEPTH, budget);
    let mut stack: Vec<(Vec<bool>, f64)> = vec![(Vec::new(), 1.0)];
    let mut total = 0.0;
    let mut nodes = 0usize;
    let limit = ScoreError::SearchLimit {
        nodes: MAX_SEARCH_NODES,
        depth: MAX_SEARCH_DEPTH,
    };
    while let Some((u, p)) = stack.pop() {
        nodes += 1;
        if nodes > MAX_SEARCH_NODES {
            return Err(limit);
        }
        let run = run_observer_on(s, &u, budget);
        let seen = &run.observation;
        let common = seen.len().min(obs.len());
        if seen[..common] != obs[..common] {
            continue;
        }
        if seen.len() >= obs.len() {
            total += p;
            continue;
        }
        if run.status != ObserverStatus::Blocked {
            continue;
        }
        if u.len() >= MAX_SEARCH_DEPTH {
            return Err(limit);
        }
        for bit in [true, false] {
            let pb = pred.prob(&u, bit);
            if pb > 0.0 {
                let mut next = u.clone();
                next.push(bit);
                stack.push((next, p * pb));
            }
        }
    }
    Ok(total)
}

/// |q| + |s| when the interleaved run of (q, s) observes a prefix
/// extending `o_true`.
pub fn ctoe_score(q: &Program, s: &Program, o_true: &[bool], budget: RunBudget) -> Result<u64, ScoreError> {
    let (_, obs) = run_interleaved(q, s, budget);
    if obs.observation.starts_with(o_true) {
        return Ok((q.len() + s.len()) as u64);
    }
    let n = obs.observation.len().min(o_true.len());
    let reason = match (0..n).find(|&i| obs.observation[i] != o_true[i]) {
        Some(i) => format!("mismatch at position {}", i + 1),
        None => format!(
            "observation stops after {} of {} bits ({:?})",
            obs.observation.len(),
            o_true.len(),
            obs.status
        ),
    };
    Err(ScoreError::NotPerfect(reason))
}

/// The winning pair of [`select_ctoe`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtoeSelection {
    pub index: usize,
    pub q: Program,
    pub s: Program,
    pub total: u64,
}

/// Shortest perfect pair; ties go to the length-lex smaller q·s, then to
/// the earlier candidate.
pub fn select_ctoe(
    candidates: &[(Program, Program)],
    o_true: &[bool],
    budget: RunBudget,
) -> Result<CtoeSelection, ScoreError> {
    if candidates.is_empty() {
        return Err(ScoreError::NoCandidates);
    }
    candidates
        .iter()
        .enumerate()
        .filter_map(|(index, (q, s))| {
            ctoe_score(q, s, o_true, budget).ok().map(|total| CtoeSelection {
                index,
                q: q.clone(),
                s: s.clone(),
                total,
            })
        })
        .min_by(|a, b| {
            a.total
                .cmp(&b.total)
                .then_with(|| a.q.concat(&a.s).cmp_length_lex(&b.q.concat(&b.s)))
                .then(a.index.cmp(&b.index))
        })
        .ok_or(ScoreError::NoPerfectCandidate)
}

/// Positions (1-based, increasing) where the observation is wrong or
/// missing, with the true bits of the missing ones.
///
/// Wire format: γ(m + 1), then γ of each gap between successive positions
/// (the first measured from 0), then one literal bit per missing position.
/// Missing positions always form a suffix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub positions: Vec<u64>,
    pub literals: BitString,
}

impl ErrorTable {
    /// The table that corrects `observed` into `o_true`.
    pub fn between(observed: &[bool], o_true: &[bool]) -> Self {
        let mut positions = Vec::new();
        let mut literals = BitString::new();
        for (i, &b) in o_true.iter().enumerate() {
            match observed.get(i) {
                Some(&o) if o == b => {}
                Some(_) => positions.push(i as u64 + 1),
                None => {
                    positions.push(i as u64 + 1);
                    literals.push(b);
                }
            }
        }
        Self { positions, literals }
    }

    pub fn code_length(&self) -> u64 {
        let g = |n: u64| gamma_len(n).expect("positive");
        let gaps: u64 = self.gaps().map(g).sum();
        g(self.positions.len() as u64 + 1) + gaps + self.literals.len() as u64
    }

    fn gaps(&self) -> impl Iterator<Item = u64> + '_ {
        self.positions
            .iter()
            .scan(0u64, |prev, &p| Some(p - std::mem::replace(prev, p)))
    }

    pub fn encode(&self) -> BitString {
        let mut out = BitString::new();
        gamma_encode(self.positions.len() as u64 + 1, &mut out).expect("positive");
        for gap in self.gaps() {
            gamma_encode(gap, &mut out).expect("increasing positions");
        }
        out.extend_from(&self.literals);
        out
    }

    /// Reads a table whose missing positions are those past
    /// `observed_len`.
    pub fn decode(bits: &[bool], observed_len: usize) -> Result<(Self, usize), ScoreError> {
        let mut r = BitReader::new(bits);
        let m = r.read_gamma()? - 1;
        let mut positions = Vec::with_capacity(m as usize);
        let mut pos = 0u64;
        for _ in 0..m {
            pos = pos
                .checked_add(r.read_gamma()?)
                .ok_or_else(|| ScoreError::BadTable("position overflow".into()))?;
            positions.push(pos);
        }
        let missing = positions.iter().filter(|&&p| p > observed_len as u64).count();
        let literals = r
            .read_bits(missing)
            .ok_or_else(|| ScoreError::BadTable("missing literal bits".into()))?;
        Ok((
            Self {
                positions,
                literals: literals.to_vec().into(),
            },
            r.position(),
        ))
    }

    /// Applies the table to `observed`, producing `t` bits.
    pub fn apply(&self, observed: &[bool], t: usize) -> Result<BitString, ScoreError> {
        let mut out: Vec<Option<bool>> = (0..t).map(|i| observed.get(i).copied()).collect();
        let mut literals = self.literals.iter();
        for &p in &self.positions {
            let i = (p as usize)
                .checked_sub(1)
                .filter(|&i| i < t)
                .ok_or_else(|| ScoreError::BadTable(format!("position {p} outside 1..{t}")))?;
            out[i] = Some(match out[i] {
                Some(b) => !b,
                None => *literals
                    .next()
                    .ok_or_else(|| ScoreError::BadTable("missing literal bits".into()))?,
            });
        }
        out.into_iter()
            .map(|b| b.ok_or_else(|| ScoreError::BadTable("uncovered missing position".into())))
            .collect()
    }
}

/// Result of [`partial_score`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialScore {
    pub report: CodeLengthReport,
    pub table: ErrorTable,
    pub observation: BitString,
}

/// |q| + |b| + |s|, where b corrects the pair's observation into `o_true`.
pub fn partial_score(q: &Program, s: &Program, o_true: &[bool], budget: RunBudget) -> PartialScore {
    let (_, obs) = run_interleaved(q, s, budget);
    let table = ErrorTable::between(&obs.observation, o_true);
    PartialScore {
        report: CodeLengthReport::new(q.len() as u64, s.len() as u64, 0.0, table.code_length()),
        table,
        observation: obs.observation,
    }
}

/// Recovers the `t` true observations from (q, s, b).
pub fn reconstruct(
    q: &Program,
    s: &Program,
    table: &ErrorTable,
    t: usize,
    budget: RunBudget,
) -> Result<BitString, ScoreError> {
    let (_, obs) = run_interleaved(q, s, budget);
    table.apply(&obs.observation, t)
}

/// A Bernoulli parameter fitted on a finite grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParametricScore {
    pub report: CodeLengthReport,
    pub levels: u64,
    /// Chosen parameter as num/den.
    pub p_num: u64,
    pub p_den: u64,
}

/// Smallest `m` with m² ≥ n.
fn ceil_sqrt(n: u64) -> u64 {
    let mut m = (n as f64).sqrt() as u64;
    while m * m < n {
        m += 1;
    }
    while m > 0 && (m - 1) * (m - 1) >= n {
        m -= 1;
    }
    m
}

/// ⌈log2 n⌉ for n ≥ 1.
fn ceil_log2(n: u64) -> u32 {
    64 - (n - 1).leading_zeros()
}

/// Bernoulli fit on a grid of `levels` points: level 0 is 1/2, level i is
/// i/levels for 0 < i < levels. Picks the point nearest the maximum
/// likelihood estimate, ties to the smaller value, and charges
/// `param_bits` for it.
pub fn bernoulli_grid_score(obs: &[bool], levels: u64, param_bits: u64) -> Result<ParametricScore, ScoreError> {
    if obs.is_empty() {
        return Err(ScoreError::EmptyObservation);
    }
    assert!(levels >= 1, "grid needs a level");
    let n = obs.len() as u64;
    let ones = obs.iter().filter(|&&b| b).count() as u64;
    // Compare |num/den - ones/n| exactly via cross-multiplication.
    let distance = |num: u64, den: u64| (u128::from(num) * u128::from(n)).abs_diff(u128::from(ones) * u128::from(den));
    let candidates = std::iter::once((1u64, 2u64)).chain((1..levels).map(|i| (i, levels)));
    let (p_num, p_den) = candidates
        .min_by(|&(a, b), &(c, d)| {
            let lhs = distance(a, b) * u128::from(d);
            let rhs = distance(c, d) * u128::from(b);
            lhs.cmp(&rhs).then_with(|| (u128::from(a) * u128::from(d)).cmp(&(u128::from(c) * u128::from(b))))
        })
        .expect("non-empty grid");
    let p = p_num as f64 / p_den as f64;
    let noise = -(ones as f64 * p.log2() + (n - ones) as f64 * (1.0 - p).log2());
    Ok(ParametricScore {
        report: CodeLengthReport::new(TAG_BITS + param_bits, 0, noise, 0),
        levels,
        p_num,
        p_den,
    })
}

/// The ½·lb n rule: ⌈√n⌉ levels at ⌈½ log2 n⌉ bits.
pub fn parametric_score(obs: &[bool]) -> Result<ParametricScore, ScoreError> {
    if obs.is_empty() {
        return Err(ScoreError::EmptyObservation);
    }
    let n = obs.len() as u64;
    let param_bits = u64::from(ceil_log2(n).div_ceil(2));
    bernoulli_grid_score(obs, ceil_sqrt(n), param_bits)
}

/// The grid of 2^j levels at j bits, for j = 1..=⌈log2 n⌉.
pub fn dyadic_grid_scores(obs: &[bool]) -> Result<Vec<ParametricScore>, ScoreError> {
    if obs.is_empty() {
        return Err(ScoreError::EmptyObservation);
    }
    let n = obs.len() as u64;
    (1..=u64::from(ceil_log2(n).max(1)))
        .map(|j| bernoulli_grid_score(obs, 1 << j, j))
        .collect()
}

/// Bits to single out one of `n` locations: ⌈log2 n⌉.
pub fn localization_bits(n: u128) -> Result<u32, ScoreError> {
    if n == 0 {
        return Err(ScoreError::ZeroLocations);
    }
    Ok(128 - (n - 1).leading_zeros())
}

/// Orders reports by total, for selection.
pub fn cmp_total(a: &CodeLengthReport, b: &CodeLengthReport) -> Ordering {
    a.total.total_cmp(&b.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;
    use crate::machine::gadgets::{ident, ident_1};
    use crate::mdl::model::Prob;
    use proptest::prelude::*;

    const PI29: &str = "11001001000011111101101010100";

    fn budget() -> RunBudget {
        RunBudget::new(10_000, 64).unwrap()
    }

    fn prog(s: &str) -> Program {
        s.parse().unwrap()
    }

    #[test]
    fn nll_examples() {
        let o = bits(PI29);
        assert_eq!(nll_bits(&ModelExpr::Coin, &o), 29.0);
        assert_eq!(nll_bits(&ModelExpr::DetStream(StreamSource::PiBits), &o), 0.0);
        let b = ModelExpr::bernoulli(3, 4).unwrap();
        assert!((nll_bits(&b, &bits("1")) - (4.0f64 / 3.0).log2()).abs() < 1e-9);
        let mut wrong = o.clone().into_bits();
        wrong[5] = !wrong[5];
        assert!(nll_bits(&ModelExpr::DetStream(StreamSource::PiBits), &wrong).is_infinite());
    }

    #[test]
    fn m1_stream_nll() {
        let m = ModelExpr::DetStream(StreamSource::M1Program(prog("001001")));
        assert_eq!(nll_bits(&m, &bits("11")), 0.0);
        assert!(nll_bits(&m, &bits("111")).is_infinite());
        assert!(nll_bits(&m, &bits("10")).is_infinite());
    }

    #[test]
    fn markov_context_padding() {
        let p = |a, b| Prob::new(a, b).unwrap();
        // Order 1: after 0 emit 1, after 1 emit 0.
        let m = ModelExpr::markov(1, vec![p(1, 1), p(0, 1)]).unwrap();
        assert_eq!(nll_bits(&m, &bits("1010")), 0.0);
        assert!(nll_bits(&m, &bits("0")).is_infinite());
    }

    #[test]
    fn pi_beats_coin_past_crossover() {
        let pi = ModelExpr::DetStream(StreamSource::PiBits);
        let coin = ModelExpr::Coin;
        let t_star = (pi.code_length() - coin.code_length()) as usize;
        assert_eq!(t_star, 32);
        let o = pi_bits(t_star + 1);
        let total = |m: &ModelExpr, t: usize| {
            prob_score(m, &ObservationModel::Identity, &o[..t], budget()).unwrap().total
        };
        assert!(total(&pi, t_star - 1) > total(&coin, t_star - 1));
        assert_eq!(total(&pi, t_star), total(&coin, t_star));
        assert!(total(&pi, t_star + 1) < total(&coin, t_star + 1));
    }

    #[test]
    fn correct_deterministic_model_has_no_noise() {
        let r = prob_score(
            &ModelExpr::DetStream(StreamSource::ChampernowneBits),
            &ObservationModel::Identity,
            &champernowne_bits(40),
            budget(),
        )
        .unwrap();
        assert_eq!(r.noise_bits, 0.0);
        assert_eq!(r.total, 22.0);
    }

    #[test]
    fn ident_observer_matches_identity() {
        let obs = bits("1101");
        let coin = ModelExpr::Coin;
        let p = observed_probability(&coin, &ident(4), &obs, budget()).unwrap();
        assert!((p - 1.0 / 16.0).abs() < 1e-12);
        let b = ModelExpr::bernoulli(1, 3).unwrap();
        let p = observed_probability(&b, &ident(4), &obs, budget()).unwrap();
        assert!((-p.log2() - nll_bits(&b, &obs)).abs() < 1e-9);
    }

    #[test]
    fn observer_on_deterministic_stream() {
        let coin = ModelExpr::Coin;
        let pi = ModelExpr::DetStream(StreamSource::PiBits);
        let r = prob_score(&pi, &ObservationModel::M1Observer(ident(3)), &bits("110"), budget()).unwrap();
        assert_eq!(r.noise_bits, 0.0);
        assert!(prob_score(&coin, &ObservationModel::M1Observer(ident_1()), &bits(""), budget()).is_ok());
        assert_eq!(
            prob_score(&pi, &ObservationModel::M1Observer(ident_1()), &bits("0"), budget()),
            Err(ScoreError::Inadmissible)
        );
    }

    #[test]
    fn ctoe_examples() {
        let s = ident_1();
        assert_eq!(ctoe_score(&prog("001"), &s, &bits("1"), budget()), Ok(36));
        assert!(matches!(
            ctoe_score(&prog("000"), &s, &bits("1"), budget()),
            Err(ScoreError::NotPerfect(_))
        ));
    }

    #[test]
    fn selection() {
        let s = ident_1();
        let o = bits("1");
        let pairs = vec![(prog("001"), s.clone()), (prog("001001"), s.clone())];
        let best = select_ctoe(&pairs, &o, budget()).unwrap();
        assert_eq!((best.index, best.total), (0, 36));
        let rev: Vec<_> = pairs.iter().rev().cloned().collect();
        assert_eq!(select_ctoe(&rev, &o, budget()).unwrap().index, 1);
        let bad = vec![(prog("000"), s.clone())];
        assert_eq!(select_ctoe(&bad, &o, budget()), Err(ScoreError::NoPerfectCandidate));
        assert_eq!(select_ctoe(&[], &o, budget()), Err(ScoreError::NoCandidates));
        let single = vec![(prog("001001001"), s.clone())];
        assert_eq!(select_ctoe(&single, &o, budget()).unwrap().total, 42);
    }

    #[test]
    fn tie_break_is_length_lex() {
        let s = ident_1();
        let o = bits("1");
        // Same total, different bits: "001" + "0" padding vs "001" + "1".
        let a = (prog("0011"), s.clone());
        let b = (prog("0010"), s.clone());
        let best = select_ctoe(&[a, b], &o, budget()).unwrap();
        assert_eq!(best.index, 1);
    }

    #[test]
    fn error_table_examples() {
        let perfect = partial_score(&prog("001"), &ident_1(), &bits("1"), budget());
        assert_eq!(perfect.report.error_table_bits, 1);
        assert_eq!(perfect.report.total, 37.0);
        let table = ErrorTable::between(&bits("00000000"), &bits("01001000"));
        assert_eq!(table.positions, vec![2, 5]);
        assert_eq!(table.code_length(), 9);
        assert_eq!(table.encode().len(), 9);
    }

    #[test]
    fn partial_with_missing_bits() {
        let o = bits("1101");
        let p = partial_score(&prog("001"), &ident_1(), &o, budget());
        assert_eq!(p.table.positions, vec![2, 3, 4]);
        assert_eq!(p.table.literals.to_string(), "101");
        assert_eq!(reconstruct(&prog("001"), &ident_1(), &p.table, 4, budget()).unwrap(), o);
    }

    #[test]
    fn parametric_examples() {
        let obs = vec![true; 1024];
        let s = parametric_score(&obs).unwrap();
        assert_eq!(s.levels, 32);
        assert_eq!(s.report.model_bits, TAG_BITS + 5);
        assert_eq!((s.p_num, s.p_den), (31, 32));
        let one = parametric_score(&[true]).unwrap();
        assert_eq!((one.levels, one.report.model_bits), (1, TAG_BITS));
        assert_eq!((one.p_num, one.p_den), (1, 2));
        assert_eq!(parametric_score(&[]), Err(ScoreError::EmptyObservation));
    }

    #[test]
    fn grid_tie_goes_low() {
        // MLE 1/2 on a 4-level grid {1/2, 1/4, 2/4, 3/4}: 1/2 appears twice.
        let s = bernoulli_grid_score(&bits("10"), 4, 2).unwrap();
        assert_eq!((s.p_num, s.p_den), (1, 2));
        // MLE 3/8 is equidistant from 1/4 and 2/4.
        let s = bernoulli_grid_score(&bits("11100000"), 4, 2).unwrap();
        assert_eq!((s.p_num, s.p_den), (1, 4));
    }

    #[test]
    fn localization_examples() {
        assert_eq!(localization_bits(8), Ok(3));
        assert_eq!(localization_bits(7_000_000_000), Ok(33));
        assert_eq!(localization_bits(30_000_000_000_000_000_000_000), Ok(75));
        assert_eq!(localization_bits(1), Ok(0));
        assert_eq!(localization_bits(9), Ok(4));
        assert_eq!(localization_bits(0), Err(ScoreError::ZeroLocations));
    }

    proptest! {
        #[test]
        fn report_is_additive(m in 0u64..100, s in 0u64..100, e in 0u64..100, noise in 0.0f64..100.0) {
            let r = CodeLengthReport::new(m, s, noise, e);
            prop_assert_eq!(r.total, (m + s + e) as f64 + noise);
        }

        #[test]
        fn table_round_trip(
            observed in proptest::collection::vec(any::<bool>(), 0..24),
            o_true in proptest::collection::vec(any::<bool>(), 0..24),
        ) {
            let table = ErrorTable::between(&observed, &o_true);
            let code = table.encode();
            prop_assert_eq!(code.len() as u64, table.code_length());
            let (back, used) = ErrorTable::decode(&code, observed.len()).unwrap();
            prop_assert_eq!(used, code.len());
            prop_assert_eq!(&back, &table);
            prop_assert_eq!(back.apply(&observed, o_true.len()).unwrap().into_bits(), o_true);
        }

        #[test]
        fn partial_reconstructs(q in 0u64..2000, o_true in proptest::collection::vec(any::<bool>(), 0..8)) {
            let q = Program::from_index(q);
            let s = ident_1();
            let p = partial_score(&q, &s, &o_true, budget());
            prop_assert_eq!(reconstruct(&q, &s, &p.table, o_true.len(), budget()).unwrap().into_bits(), o_true.clone());
            prop_assert_eq!(p.table.positions.is_empty(), ctoe_score(&q, &s, &o_true, budget()).is_ok());
        }

        #[test]
        fn partial_ranking_matches_ctoe_on_equal_observations(
            a in 0u64..3000, b in 0u64..3000, o_true in proptest::collection::vec(any::<bool>(), 1..6),
        ) {
            let (a, b) = (Program::from_index(a), Program::from_index(b));
            let s = ident_1();
            let pa = partial_score(&a, &s, &o_true, budget());
            let pb = partial_score(&b, &s, &o_true, budget());
            if pa.observation == pb.observation {
                prop_assert_eq!(&pa.table, &pb.table);
                prop_assert_eq!(
                    pa.report.total.total_cmp(&pb.report.total),
                    (a.len() + s.len()).cmp(&(b.len() + s.len()))
                );
            }
        }
    }
}
