//! Exhaustive enumeration of the program space and the consistent sets
//! built from it.
//!
//! Programs of length at most `L` are visited in length-lexicographic
//! order, which is also their row order in the universal matrix. Any
//! contiguous index range can be processed independently; per-range
//! results merge with [`QSet::merge`], which is associative and
//! commutative.

mod cache;
mod table;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::machine::{run_generator, GeneratorRun, Program, RunBudget, RunStatus};

pub use cache::{CacheError, RunCache, CACHE_DIR_ENV};
pub use table::{RunTable, SplitCounts};

/// Upper bound on the number of witnesses kept in [`QSet::members_sample`].
pub const SAMPLE_LIMIT: usize = 8;

/// Number of programs of length at most `max_len`: 2^(L+1) - 1.
pub fn program_count(max_len: u32) -> u64 {
    assert!(max_len < 63, "program length bound too large");
    (1u64 << (max_len + 1)) - 1
}

/// A contiguous range of length-lexicographic program indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramRange {
    next: u64,
    end: u64,
}

impl ProgramRange {
    pub fn new(start: u64, end: u64) -> Self {
        Self {
            next: start,
            end: end.max(start),
        }
    }

    pub fn start(&self) -> u64 {
        self.next
    }

    pub fn end(&self) -> u64 {
        self.end
    }

    /// Splits `0..program_count(max_len)` into `shards` near-equal ranges.
    pub fn shards(max_len: u32, shards: usize) -> Vec<ProgramRange> {
        let total = program_count(max_len);
        let shards = shards.max(1) as u64;
        (0..shards)
            .map(|k| ProgramRange::new(total * k / shards, total * (k + 1) / shards))
            .collect()
    }
}

impl Iterator for ProgramRange {
    type Item = Program;

    fn next(&mut self) -> Option<Program> {
        if self.next >= self.end {
            return None;
        }
        let p = Program::from_index(self.next);
        self.next += 1;
        Some(p)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for ProgramRange {}

/// All bit strings of length at most `max_len` in length-lexicographic
/// order. Restartable by constructing a fresh range.
pub fn programs_upto(max_len: u32) -> ProgramRange {
    ProgramRange::new(0, program_count(max_len))
}

/// Default per-program budget for a query: 10 * 2^L steps and |target| + 64
/// output bits.
pub fn default_budget(max_len: u32, target_len: usize) -> RunBudget {
    RunBudget::new(10u64 << max_len, target_len as u64 + 64).expect("positive budget")
}

/// Which programs of length at most `max_len` produce output extending
/// `target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyQuery {
    pub target: BitString,
    pub max_len: u32,
    pub budget: RunBudget,
}

impl ConsistencyQuery {
    pub fn new(target: BitString, max_len: u32) -> Self {
        let budget = default_budget(max_len, target.len());
        Self {
            target,
            max_len,
            budget,
        }
    }

    pub fn with_budget(mut self, budget: RunBudget) -> Self {
        self.budget = budget;
        self
    }
}

/// Whether a run's output extends `target`.
pub fn is_consistent(run_output: &[bool], target: &[bool]) -> bool {
    run_output.starts_with(target)
}

/// The consistent set Q_L for one target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSet {
    pub count: u64,
    pub q_min: Option<Program>,
    /// Length of `q_min`.
    pub l: Option<u32>,
    /// Programs that ran out of budget before emitting |target| bits.
    pub undecided: u64,
    /// The first consistent programs in length-lex order, at most
    /// [`SAMPLE_LIMIT`].
    pub members_sample: Vec<Program>,
}

impl Default for QSet {
    fn default() -> Self {
        Self::empty()
    }
}

impl QSet {
    pub fn empty() -> Self {
        Self {
            count: 0,
            q_min: None,
            l: None,
            undecided: 0,
            members_sample: Vec::new(),
        }
    }

    /// Records one program's run against `target`.
    pub fn absorb(&mut self, program: &Program, output: &[bool], status: RunStatus, target: &[bool]) {
        if is_consistent(output, target) {
            self.count += 1;
            let better = match &self.q_min {
                None => true,
                Some(cur) => program.cmp_length_lex(cur) == Ordering::Less,
            };
            if better {
                self.q_min = Some(program.clone());
                self.l = Some(program.len() as u32);
            }
            if self.members_sample.len() < SAMPLE_LIMIT
                || self
                    .members_sample
                    .last()
                    .is_some_and(|last| program.cmp_length_lex(last) == Ordering::Less)
            {
                self.members_sample.push(program.clone());
                self.members_sample.sort_by(Program::cmp_length_lex);
                self.members_sample.truncate(SAMPLE_LIMIT);
            }
        } else if status == RunStatus::OutOfBudget {
            self.undecided += 1;
        }
    }

    /// Order-independent combination of two disjoint partial results.
    pub fn merge(mut self, other: QSet) -> QSet {
        self.count += other.count;
        self.undecided += other.undecided;
        if let Some(q) = other.q_min {
            let better = match &self.q_min {
                None => true,
                Some(cur) => q.cmp_length_lex(cur) == Ordering::Less,
            };
            if better {
                self.l = Some(q.len() as u32);
                self.q_min = Some(q);
            }
        }
        self.members_sample.extend(other.members_sample);
        self.members_sample.sort_by(Program::cmp_length_lex);
        self.members_sample.dedup();
        self.members_sample.truncate(SAMPLE_LIMIT);
        self
    }

    /// The garbage lower bound 2^(L-l+1) - 1 implied by `q_min`.
    pub fn garbage_bound(&self, max_len: u32) -> Option<u64> {
        self.l.map(|l| (1u64 << (max_len - l + 1)) - 1)
    }
}

/// Runs every program of `range` and folds the results for `query`.
pub fn consistent_set_range(query: &ConsistencyQuery, range: ProgramRange) -> QSet {
    let mut set = QSet::empty();
    for program in range {
        let run = run_generator(&program, query.budget);
        set.absorb(&program, &run.output, run.status, &query.target);
    }
    set
}

/// Q_L for `query.target`, sequentially.
pub fn consistent_set(query: &ConsistencyQuery) -> QSet {
    consistent_set_range(query, programs_upto(query.max_len))
}

/// Q_L evaluated over `shards` index ranges in parallel. Identical to
/// [`consistent_set`] for every shard count.
pub fn consistent_set_sharded(query: &ConsistencyQuery, shards: usize) -> QSet {
    ProgramRange::shards(query.max_len, shards)
        .into_par_iter()
        .map(|range| consistent_set_range(query, range))
        .reduce(QSet::empty, QSet::merge)
}

/// Shortest consistent program and its length: the monotone complexity
/// upper bound at this length bound and budget.
pub fn km_upper(target: &BitString, max_len: u32, budget: RunBudget) -> Option<(u32, Program)> {
    let q = ConsistencyQuery {
        target: target.clone(),
        max_len,
        budget,
    };
    let set = consistent_set(&q);
    set.q_min.map(|p| (p.len() as u32, p))
}

/// Q_L^n: programs consistent with `target` followed by `continuation`.
pub fn consistent_split(
    target: &BitString,
    continuation: &BitString,
    max_len: u32,
    budget: RunBudget,
) -> QSet {
    consistent_set(&ConsistencyQuery {
        target: target.concat(continuation),
        max_len,
        budget,
    })
}

/// Runs every program of length at most `max_len`, in index order.
pub fn run_all(max_len: u32, budget: RunBudget) -> Vec<GeneratorRun> {
    programs_upto(max_len)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|p| run_generator(p, budget))
        .collect()
}
