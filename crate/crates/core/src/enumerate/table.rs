use rayon::prelude::*;

use super::cache::{CacheError, RunCache};
use super::{program_count, programs_upto, QSet};
use crate::bits::BitString;
use crate::machine::{run_generator, GeneratorRun, Program, RunBudget, RunStatus};

/// Outputs and statuses of every program of length at most `max_len`
/// under one budget, indexed in length-lexicographic order.
///
/// Consistency with a target of length t depends only on the first t
/// output bits, which do not depend on the output cap as long as the cap
/// is at least t. One table therefore answers every query with
/// |target| ≤ `max_output_bits` exactly as a fresh enumeration would.
#[derive(Debug, Clone)]
pub struct RunTable {
    max_len: u32,
    budget: RunBudget,
    outputs: Vec<BitString>,
    statuses: Vec<RunStatus>,
}

/// Exact counts for every continuation of `target` over a fixed horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitCounts {
    pub target: BitString,
    pub horizon: usize,
    /// The full consistent set Q_L for `target`.
    pub base: QSet,
    /// |Q_L^n| per continuation; index = continuation read as a binary number.
    pub counts: Vec<u64>,
    /// Length of the shortest program per continuation (l_n).
    pub min_lengths: Vec<Option<u32>>,
    /// Consistent programs emitting fewer than |target| + horizon bits.
    pub short: u64,
}

impl RunTable {
    pub fn build(max_len: u32, budget: RunBudget) -> Self {
        let runs: Vec<(BitString, RunStatus)> = (0..program_count(max_len))
            .into_par_iter()
            .map(|i| {
                let r = run_generator(&Program::from_index(i), budget);
                (r.output, r.status)
            })
            .collect();
        let (outputs, statuses) = runs.into_iter().unzip();
        Self {
            max_len,
            budget,
            outputs,
            statuses,
        }
    }

    /// Builds the table, reusing cached runs and appending new ones.
    pub fn build_cached(max_len: u32, budget: RunBudget, cache: &RunCache) -> Result<Self, CacheError> {
        let known = cache.load(budget)?;
        let programs: Vec<Program> = programs_upto(max_len).collect();
        let fresh: Vec<GeneratorRun> = programs
            .par_iter()
            .filter(|p| !known.contains_key(*p))
            .map(|p| run_generator(p, budget))
            .collect();
        cache.append(budget, &fresh)?;
        let mut fresh = fresh.into_iter().peekable();
        let mut outputs = Vec::with_capacity(programs.len());
        let mut statuses = Vec::with_capacity(programs.len());
        for p in &programs {
            let run = match known.get(p) {
                Some(r) => r.clone(),
                None => fresh.next().expect("fresh runs follow program order"),
            };
            outputs.push(run.output);
            statuses.push(run.status);
        }
        Ok(Self {
            max_len,
            budget,
            outputs,
            statuses,
        })
    }

    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    pub fn budget(&self) -> RunBudget {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn output(&self, index: u64) -> &BitString {
        &self.outputs[index as usize]
    }

    pub fn status(&self, index: u64) -> RunStatus {
        self.statuses[index as usize]
    }

    fn check_cap(&self, bits: usize) {
        assert!(
            bits as u64 <= self.budget.max_output_bits(),
            "table output cap {} below query length {}",
            self.budget.max_output_bits(),
            bits
        );
    }

    pub fn consistent_set(&self, target: &[bool]) -> QSet {
        self.check_cap(target.len());
        let mut set = QSet::empty();
        for (i, (out, status)) in self.outputs.iter().zip(&self.statuses).enumerate() {
            if out.starts_with(target) || *status == RunStatus::OutOfBudget {
                set.absorb(&Program::from_index(i as u64), out, *status, target);
            }
        }
        set
    }

    /// Partitions Q_L(target) by the next `horizon` output bits.
    pub fn split_counts(&self, target: &BitString, horizon: usize) -> SplitCounts {
        assert!(horizon < 32, "horizon too large");
        let t = target.len();
        self.check_cap(t + horizon);
        let mut base = QSet::empty();
        let mut counts = vec![0u64; 1 << horizon];
        let mut min_lengths = vec![None; 1 << horizon];
        let mut short = 0;
        for (i, (out, status)) in self.outputs.iter().zip(&self.statuses).enumerate() {
            if !out.starts_with(target) {
                if *status == RunStatus::OutOfBudget {
                    base.undecided += 1;
                }
                continue;
            }
            let program = Program::from_index(i as u64);
            base.absorb(&program, out, *status, target);
            if out.len() < t + horizon {
                short += 1;
                continue;
            }
            let k = out[t..t + horizon]
                .iter()
                .fold(0usize, |acc, &b| (acc << 1) | b as usize);
            counts[k] += 1;
            // Index order is length-lex, so the first hit is the shortest.
            if min_lengths[k].is_none() {
                min_lengths[k] = Some(program.len() as u32);
            }
        }
        SplitCounts {
            target: target.clone(),
            horizon,
            base,
            counts,
            min_lengths,
            short,
        }
    }
}
