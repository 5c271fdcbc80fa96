use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::program::{Opcode, Program};
use crate::bits::BitString;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("max_steps must be positive")]
    ZeroSteps,
    #[error("max_output_bits must be positive")]
    ZeroOutput,
}

/// Resource limits for one run (or one interleaved pair of runs).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RunBudget {
    max_steps: u64,
    max_output_bits: u64,
}

impl RunBudget {
    pub fn new(max_steps: u64, max_output_bits: u64) -> Result<Self, BudgetError> {
        if max_steps == 0 {
            return Err(BudgetError::ZeroSteps);
        }
        if max_output_bits == 0 {
            return Err(BudgetError::ZeroOutput);
        }
        Ok(Self {
            max_steps,
            max_output_bits,
        })
    }

    pub fn max_steps(&self) -> u64 {
        self.max_steps
    }

    pub fn max_output_bits(&self) -> u64 {
        self.max_output_bits
    }

    pub fn with_steps(self, max_steps: u64) -> Result<Self, BudgetError> {
        Self::new(max_steps, self.max_output_bits)
    }

    pub fn with_output_bits(self, max_output_bits: u64) -> Result<Self, BudgetError> {
        Self::new(self.max_steps, max_output_bits)
    }
}

/// Shared step counter. In interleaved execution the generator and the
/// observer draw from the same meter.
#[derive(Debug, Clone)]
pub struct StepMeter {
    used: u64,
    max: u64,
}

impl StepMeter {
    pub fn new(max: u64) -> Self {
        Self { used: 0, max }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    fn exhausted(&self) -> bool {
        self.used >= self.max
    }

    fn charge(&mut self) {
        self.used += 1;
    }
}

/// Why a machine halted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltCause {
    /// The program counter passed the last complete opcode.
    EndOfProgram,
    /// IN executed in generator mode.
    Input,
    /// A JZ scan reached the end of the program without a match.
    NoForwardMatch,
    /// A JNZ scan reached the start of the program without a match.
    NoBackwardMatch,
}

impl HaltCause {
    /// Whether the halt observed the end of the program, i.e. whether
    /// appending bits could have changed the outcome.
    pub fn observes_end(self) -> bool {
        matches!(self, HaltCause::EndOfProgram | HaltCause::NoForwardMatch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    OutOfBudget,
    /// Paused by an interleaved observer that never needed more bits.
    Suspended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverStatus {
    Halted,
    OutOfBudget,
    /// An input read could never be served.
    Blocked,
}

/// Execution record of a generator program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorRun {
    pub program: Program,
    pub output: BitString,
    pub status: RunStatus,
    pub halt_cause: Option<HaltCause>,
    pub steps_used: u64,
    pub fetched_bits: u64,
}

impl GeneratorRun {
    /// True when nothing past `fetched_bits` influenced the run, so any
    /// suffix appended to the program leaves the record unchanged.
    pub fn suffix_invariant(&self) -> bool {
        !self.halt_cause.is_some_and(HaltCause::observes_end)
    }
}

/// Execution record of an observer program.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObserverRun {
    pub observer: Program,
    pub observation: BitString,
    pub consumed_input: u64,
    pub status: ObserverStatus,
    pub halt_cause: Option<HaltCause>,
    pub steps_used: u64,
    pub fetched_bits: u64,
}

/// Binary work tape, unbounded both ways, initialised to 0.
#[derive(Debug, Clone, Default)]
struct Tape {
    right: Vec<bool>,
    left: Vec<bool>,
}

impl Tape {
    fn slot(&mut self, pos: i64) -> &mut bool {
        let (half, i) = if pos >= 0 {
            (&mut self.right, pos as usize)
        } else {
            (&mut self.left, (-pos - 1) as usize)
        };
        if i >= half.len() {
            half.resize(i + 1, false);
        }
        &mut half[i]
    }

    fn get(&self, pos: i64) -> bool {
        let (half, i) = if pos >= 0 {
            (&self.right, pos as usize)
        } else {
            (&self.left, (-pos - 1) as usize)
        };
        half.get(i).copied().unwrap_or(false)
    }
}

/// Where an observer's IN bits come from.
pub trait UniverseSource {
    /// Returns universe bit `index` (0-based), or `None` if it can never be
    /// served. May spend steps from `meter` producing it.
    fn bit(&mut self, index: usize, meter: &mut StepMeter) -> Option<bool>;
}

impl UniverseSource for &[bool] {
    fn bit(&mut self, index: usize, _meter: &mut StepMeter) -> Option<bool> {
        self.get(index).copied()
    }
}

/// Outcome of a single `Core::step`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Continue,
    Emit(bool),
    Halt(HaltCause),
    OutOfSteps,
    /// IN in observer mode; the opcode has not been executed yet.
    NeedInput,
    /// OUT with the output cap reached; not executed.
    OutputFull,
}

/// Program counter, head, and tape of one running machine.
#[derive(Debug, Clone, Default)]
struct Core {
    pc: usize,
    head: i64,
    tape: Tape,
    fetched_ops: usize,
}

impl Core {
    #[inline]
    fn fetch(&mut self, program: &Program, i: usize) -> Opcode {
        self.fetched_ops = self.fetched_ops.max(i + 1);
        program.opcode(i)
    }

    fn fetched_bits(&self) -> u64 {
        3 * self.fetched_ops as u64
    }

    /// Executes one opcode including any jump scan.
    fn step(&mut self, program: &Program, meter: &mut StepMeter, observer: bool, can_emit: bool) -> Step {
        let n = program.num_opcodes();
        if self.pc >= n {
            return Step::Halt(HaltCause::EndOfProgram);
        }
        if meter.exhausted() {
            return Step::OutOfSteps;
        }
        let op = self.fetch(program, self.pc);
        match op {
            Opcode::In if observer => return Step::NeedInput,
            Opcode::Out0 | Opcode::Out1 if !can_emit => return Step::OutputFull,
            _ => {}
        }
        meter.charge();
        match op {
            Opcode::Out0 | Opcode::Out1 => {
                self.pc += 1;
                return Step::Emit(op == Opcode::Out1);
            }
            Opcode::Left => self.head -= 1,
            Opcode::Right => self.head += 1,
            Opcode::Flip => {
                let cell = self.tape.slot(self.head);
                *cell = !*cell;
            }
            Opcode::Jz if !self.tape.get(self.head) => {
                let mut depth = 0usize;
                let mut j = self.pc + 1;
                loop {
                    if j >= n {
                        return Step::Halt(HaltCause::NoForwardMatch);
                    }
                    if meter.exhausted() {
                        return Step::OutOfSteps;
                    }
                    meter.charge();
                    match self.fetch(program, j) {
                        Opcode::Jz => depth += 1,
                        Opcode::Jnz if depth == 0 => break,
                        Opcode::Jnz => depth -= 1,
                        _ => {}
                    }
                    j += 1;
                }
                self.pc = j + 1;
                return Step::Continue;
            }
            Opcode::Jnz if self.tape.get(self.head) => {
                let mut depth = 0usize;
                let mut j = self.pc;
                loop {
                    if j == 0 {
                        return Step::Halt(HaltCause::NoBackwardMatch);
                    }
                    j -= 1;
                    if meter.exhausted() {
                        return Step::OutOfSteps;
                    }
                    meter.charge();
                    match self.fetch(program, j) {
                        Opcode::Jnz => depth += 1,
                        Opcode::Jz if depth == 0 => break,
                        Opcode::Jz => depth -= 1,
                        _ => {}
                    }
                }
                self.pc = j + 1;
                return Step::Continue;
            }
            Opcode::Jz | Opcode::Jnz => {}
            Opcode::In => return Step::Halt(HaltCause::Input),
        }
        self.pc += 1;
        Step::Continue
    }

    /// Completes a pending observer IN with `bit`.
    fn supply(&mut self, bit: bool, meter: &mut StepMeter) {
        meter.charge();
        *self.tape.slot(self.head) = bit;
        self.pc += 1;
    }
}

/// A generator that can be paused after any emitted bit and resumed.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    program: Program,
    core: Core,
    output: Vec<bool>,
    max_output: usize,
    steps_used: u64,
    finished: Option<(RunStatus, Option<HaltCause>)>,
}

impl GeneratorState {
    pub fn new(program: Program, budget: RunBudget) -> Self {
        Self {
            program,
            core: Core::default(),
            output: Vec::new(),
            max_output: budget.max_output_bits() as usize,
            steps_used: 0,
            finished: None,
        }
    }

    pub fn output(&self) -> &[bool] {
        &self.output
    }

    pub fn is_finished(&self) -> bool {
        self.finished.is_some()
    }

    /// Runs until the output holds at least `len` bits or the run ends.
    pub fn advance_to(&mut self, len: usize, meter: &mut StepMeter) {
        while self.finished.is_none() && self.output.len() < len {
            let before = meter.used();
            let can_emit = self.output.len() < self.max_output;
            let step = self.core.step(&self.program, meter, false, can_emit);
            self.steps_used += meter.used() - before;
            match step {
                Step::Continue => {}
                Step::Emit(bit) => self.output.push(bit),
                Step::Halt(cause) => self.finished = Some((RunStatus::Halted, Some(cause))),
                Step::OutOfSteps | Step::OutputFull => {
                    self.finished = Some((RunStatus::OutOfBudget, None))
                }
                Step::NeedInput => unreachable!("generator mode never requests input"),
            }
        }
    }

    pub fn into_run(self) -> GeneratorRun {
        let (status, halt_cause) = self.finished.unwrap_or((RunStatus::Suspended, None));
        GeneratorRun {
            program: self.program,
            output: self.output.into(),
            status,
            halt_cause,
            steps_used: self.steps_used,
            fetched_bits: self.core.fetched_bits(),
        }
    }
}

/// Serves universe bits from a generator that is resumed on demand.
#[derive(Debug, Clone)]
pub struct LiveGenerator {
    state: GeneratorState,
}

impl LiveGenerator {
    pub fn new(program: Program, budget: RunBudget) -> Self {
        Self {
            state: GeneratorState::new(program, budget),
        }
    }

    pub fn into_run(self) -> GeneratorRun {
        self.state.into_run()
    }
}

impl UniverseSource for LiveGenerator {
    fn bit(&mut self, index: usize, meter: &mut StepMeter) -> Option<bool> {
        self.state.advance_to(index + 1, meter);
        self.state.output().get(index).copied()
    }
}

/// An observer in mid-run, resumable and cloneable.
#[derive(Debug, Clone)]
pub struct ObserverState {
    program: Program,
    core: Core,
    observation: Vec<bool>,
    consumed: usize,
    steps_used: u64,
}

impl ObserverState {
    pub fn new(program: Program) -> Self {
        Self {
            program,
            core: Core::default(),
            observation: Vec::new(),
            consumed: 0,
            steps_used: 0,
        }
    }

    /// Runs to completion against `source`, drawing steps from `meter`.
    pub fn run<S: UniverseSource>(
        mut self,
        source: &mut S,
        meter: &mut StepMeter,
        max_output: u64,
    ) -> ObserverRun {
        let (status, halt_cause) = loop {
            let before = meter.used();
            let can_emit = (self.observation.len() as u64) < max_output;
            let step = self.core.step(&self.program, meter, true, can_emit);
            self.steps_used += meter.used() - before;
            match step {
                Step::Continue => {}
                Step::Emit(bit) => self.observation.push(bit),
                Step::Halt(cause) => break (ObserverStatus::Halted, Some(cause)),
                Step::OutOfSteps | Step::OutputFull => break (ObserverStatus::OutOfBudget, None),
                Step::NeedInput => match source.bit(self.consumed, meter) {
                    Some(bit) => {
                        if meter.exhausted() {
                            break (ObserverStatus::OutOfBudget, None);
                        }
                        let before = meter.used();
                        self.core.supply(bit, meter);
                        self.steps_used += meter.used() - before;
                        self.consumed += 1;
                    }
                    None => break (ObserverStatus::Blocked, None),
                },
            }
        };
        ObserverRun {
            observer: self.program,
            observation: self.observation.into(),
            consumed_input: self.consumed as u64,
            status,
            halt_cause,
            steps_used: self.steps_used,
            fetched_bits: self.core.fetched_bits(),
        }
    }
}

/// Runs `program` as a universe generator.
pub fn run_generator(program: &Program, budget: RunBudget) -> GeneratorRun {
    let mut meter = StepMeter::new(budget.max_steps());
    let mut state = GeneratorState::new(program.clone(), budget);
    state.advance_to(usize::MAX, &mut meter);
    state.into_run()
}

/// Runs `observer` against an arbitrary universe source.
pub fn run_observer<S: UniverseSource>(
    observer: &Program,
    universe: &mut S,
    budget: RunBudget,
) -> ObserverRun {
    let mut meter = StepMeter::new(budget.max_steps());
    ObserverState::new(observer.clone()).run(universe, &mut meter, budget.max_output_bits())
}

/// Runs `observer` against a fixed, finite universe prefix.
pub fn run_observer_on(observer: &Program, universe: &[bool], budget: RunBudget) -> ObserverRun {
    let mut source = universe;
    run_observer(observer, &mut source, budget)
}

/// Co-executes generator `q` and observer `s` on one combined step budget:
/// the observer runs until it needs a universe bit `q` has not produced,
/// then `q` runs until it produces it.
pub fn run_interleaved(q: &Program, s: &Program, budget: RunBudget) -> (GeneratorRun, ObserverRun) {
    let mut meter = StepMeter::new(budget.max_steps());
    let mut source = LiveGenerator::new(q.clone(), budget);
    let obs = ObserverState::new(s.clone()).run(&mut source, &mut meter, budget.max_output_bits());
    (source.into_run(), obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::bits;

    fn budget(steps: u64) -> RunBudget {
        RunBudget::new(steps, 64).unwrap()
    }

    fn gen(p: &str, steps: u64) -> GeneratorRun {
        run_generator(&p.parse().unwrap(), budget(steps))
    }

    #[test]
    fn budget_rejects_zero() {
        assert_eq!(RunBudget::new(0, 1), Err(BudgetError::ZeroSteps));
        assert_eq!(RunBudget::new(1, 0), Err(BudgetError::ZeroOutput));
    }

    #[test]
    fn single_out1() {
        let r = gen("001", 10);
        assert_eq!(r.output, bits("1"));
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.fetched_bits, 3);
        assert_eq!(r.steps_used, 1);
    }

    #[test]
    fn empty_program_halts_at_once() {
        let r = gen("", 1);
        assert!(r.output.is_empty());
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.fetched_bits, 0);
        assert_eq!(r.halt_cause, Some(HaltCause::EndOfProgram));
    }

    #[test]
    fn unmatched_forward_jump_halts() {
        let r = gen("101001", 10);
        assert!(r.output.is_empty());
        assert_eq!(r.status, RunStatus::Halted);
        assert_eq!(r.halt_cause, Some(HaltCause::NoForwardMatch));
        assert_eq!(r.fetched_bits, 6);
        assert_eq!(r.steps_used, 2);
    }

    #[test]
    fn step_budget_stops_run() {
        let r = gen("001001", 1);
        assert_eq!(r.output, bits("1"));
        assert_eq!(r.status, RunStatus::OutOfBudget);
        assert_eq!(r.fetched_bits, 3);
    }

    #[test]
    fn output_cap_stops_run() {
        let r = run_generator(&"001001001".parse().unwrap(), RunBudget::new(100, 2).unwrap());
        assert_eq!(r.output, bits("11"));
        assert_eq!(r.status, RunStatus::OutOfBudget);
        assert_eq!(r.steps_used, 2);
    }

    #[test]
    fn in_halts_generator() {
        let r = gen("001111001", 10);
        assert_eq!(r.output, bits("1"));
        assert_eq!(r.halt_cause, Some(HaltCause::Input));
        assert_eq!(r.fetched_bits, 6);
    }

    #[test]
    fn trailing_bits_never_fetched() {
        let r = gen("00110", 10);
        assert_eq!(r.output, bits("1"));
        assert_eq!(r.fetched_bits, 3);
    }

    #[test]
    fn backward_loop_until_budget() {
        // FLIP, JZ (not taken), OUT1, JNZ (back to OUT1): emits 1s forever.
        let r = run_generator(&"100101001110".parse().unwrap(), RunBudget::new(100, 5).unwrap());
        assert_eq!(r.output, bits("11111"));
        assert_eq!(r.status, RunStatus::OutOfBudget);
    }

    #[test]
    fn unmatched_backward_jump_halts() {
        let r = gen("100110", 10);
        assert_eq!(r.halt_cause, Some(HaltCause::NoBackwardMatch));
        assert!(r.suffix_invariant());
    }

    #[test]
    fn observer_out0_ignores_input() {
        let r = run_observer_on(&"000".parse().unwrap(), &bits("1111"), budget(10));
        assert_eq!(r.observation, bits("0"));
        assert_eq!(r.status, ObserverStatus::Halted);
        assert_eq!(r.consumed_input, 0);
    }

    #[test]
    fn observer_blocks_on_exhausted_universe() {
        let r = run_observer_on(&"111111".parse().unwrap(), &bits("1"), budget(10));
        assert_eq!(r.status, ObserverStatus::Blocked);
        assert_eq!(r.consumed_input, 1);
    }

    #[test]
    fn live_empty_generator_blocks() {
        let mut live = LiveGenerator::new(Program::empty(), budget(10));
        let r = run_observer(&"111001".parse().unwrap(), &mut live, budget(10));
        assert!(r.observation.is_empty());
        assert_eq!(r.status, ObserverStatus::Blocked);
    }

    #[test]
    fn interleaving_shares_the_budget() {
        // Generator loops without output; the observer's IN waits on it.
        let q: Program = "100101110".parse().unwrap();
        let s: Program = "001111001".parse().unwrap();
        let (g, o) = run_interleaved(&q, &s, budget(50));
        assert_eq!(o.observation, bits("1"));
        assert_eq!(o.status, ObserverStatus::Blocked);
        assert_eq!(g.status, RunStatus::OutOfBudget);
        assert_eq!(g.steps_used + o.steps_used, 50);
    }

    #[test]
    fn interleaved_generator_suspended_when_unread() {
        let (g, o) = run_interleaved(&"000".parse().unwrap(), &"001".parse().unwrap(), budget(10));
        assert_eq!(o.observation, bits("1"));
        assert_eq!(g.status, RunStatus::Suspended);
        assert_eq!(g.steps_used, 0);
    }
}
