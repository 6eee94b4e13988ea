//! Operational semantics: configurations, single steps, and runs.
//!
//! A word is accepted when some reachable configuration has consumed the whole
//! word and sits in a final state. For marked machines that configuration may
//! be reached through stay moves on the end marker; unmarked machines have no
//! such moves, so acceptance is decided by the configuration right after the
//! last letter.

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::machine::{CounterMachine, Guard, Input, Move, StateId};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    #[default]
    None,
    Up,
    Down,
}

/// Reversal bookkeeping for one counter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CounterBudget {
    pub reversals: u32,
    pub direction: Direction,
}

impl CounterBudget {
    /// Budget after applying `delta`; a change between up and down counts one reversal.
    pub fn after(self, delta: i8) -> CounterBudget {
        let (reversals, direction) = match (delta.signum(), self.direction) {
            (0, d) => (self.reversals, d),
            (1, Direction::Down) => (self.reversals + 1, Direction::Up),
            (1, _) => (self.reversals, Direction::Up),
            (_, Direction::Up) => (self.reversals + 1, Direction::Down),
            (_, _) => (self.reversals, Direction::Down),
        };
        CounterBudget { reversals, direction }
    }

    pub fn code(self) -> String {
        match self.direction {
            Direction::None => "n".to_string(),
            Direction::Up => format!("u{}", self.reversals),
            Direction::Down => format!("d{}", self.reversals),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: StateId,
    /// Number of input letters consumed so far.
    pub consumed: usize,
    pub counters: Vec<u64>,
    pub budgets: Vec<CounterBudget>,
}

impl Configuration {
    pub fn initial(m: &CounterMachine) -> Configuration {
        Configuration {
            state: m.initial(),
            consumed: 0,
            counters: vec![0; m.counters()],
            budgets: vec![CounterBudget::default(); m.counters()],
        }
    }

    pub fn guard(&self) -> Guard {
        Guard::from_counters(&self.counters)
    }

    pub fn max_reversals(&self) -> u32 {
        self.budgets.iter().map(|b| b.reversals).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Exclude transitions whose application would exceed the machine's reversal bound.
    pub enforce_budget: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { enforce_budget: true }
    }
}

fn symbol_at(word: &[char], consumed: usize) -> Input {
    match word.get(consumed) {
        Some(&c) => Input::Letter(c),
        None => Input::End,
    }
}

pub(crate) fn is_accepting(m: &CounterMachine, c: &Configuration, word_len: usize) -> bool {
    c.consumed == word_len && m.is_final(c.state)
}

/// Successors of `c` on `word`, paired with the index of the transition taken.
pub fn step_with(
    m: &CounterMachine,
    c: &Configuration,
    word: &[char],
    opts: RunOptions,
) -> Vec<(Configuration, usize)> {
    let input = symbol_at(word, c.consumed);
    let guard = c.guard();
    let bound = if opts.enforce_budget { m.reversals() } else { None };
    let mut out = Vec::new();
    'next: for &ti in m.lookup(c.state, input, guard) {
        let t = m.transition(ti);
        if input.is_end() && t.mv == Move::Right {
            continue;
        }
        let mut counters = c.counters.clone();
        let mut budgets = c.budgets.clone();
        for (i, &d) in t.deltas.iter().enumerate() {
            if d < 0 && counters[i] == 0 {
                continue 'next;
            }
            counters[i] = (counters[i] as i64 + d as i64) as u64;
            budgets[i] = budgets[i].after(d);
            if let Some(l) = bound {
                if budgets[i].reversals > l {
                    continue 'next;
                }
            }
        }
        let consumed = c.consumed + usize::from(t.mv == Move::Right);
        out.push((Configuration { state: t.to, consumed, counters, budgets }, ti));
    }
    out
}

/// Successor configurations per the one-step relation; empty means the machine halts.
pub fn step(m: &CounterMachine, c: &Configuration, word: &[char]) -> Vec<Configuration> {
    step_with(m, c, word, RunOptions::default()).into_iter().map(|(c, _)| c).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject,
    Diverge,
}

/// Lasso witnessing an infinite run: the segment between steps `start` and
/// `end` repeats forever, each pass adding `growth[i]` to counter `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceCertificate {
    pub start: usize,
    pub end: usize,
    pub growth: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub config: Configuration,
    /// Transition that produced this configuration; `None` for the initial one.
    pub via: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
    pub verdict: Verdict,
    pub certificate: Option<DivergenceCertificate>,
}

/// Exact divergence detector for single-successor runs.
///
/// Snapshots are keyed by state, guard and (when budgets constrain the run)
/// reversal bookkeeping. Two snapshots with no input consumed in between form a
/// lasso when no counter shrank and every counter that grew stayed positive
/// throughout, since the segment's choices then repeat verbatim.
pub(crate) struct LassoDetector {
    consumed: usize,
    key_budgets: bool,
    seen: HashMap<(StateId, Guard, Vec<CounterBudget>), (usize, Vec<u64>)>,
    last_zero: Vec<Option<usize>>,
    time: usize,
}

impl LassoDetector {
    pub fn new(m: &CounterMachine, opts: RunOptions) -> LassoDetector {
        LassoDetector {
            consumed: usize::MAX,
            key_budgets: opts.enforce_budget && m.reversals().is_some(),
            seen: HashMap::new(),
            last_zero: vec![None; m.counters()],
            time: 0,
        }
    }

    /// Records `c` as the next configuration of the run; returns a certificate
    /// if it closes a lasso.
    pub fn observe(&mut self, c: &Configuration) -> Option<DivergenceCertificate> {
        let now = self.time;
        self.time += 1;
        if c.consumed != self.consumed {
            self.consumed = c.consumed;
            self.seen.clear();
        }
        for (i, &v) in c.counters.iter().enumerate() {
            if v == 0 {
                self.last_zero[i] = Some(now);
            }
        }
        let budgets = if self.key_budgets {
            c.budgets.clone()
        } else {
            c.budgets
                .iter()
                .map(|b| CounterBudget { reversals: 0, direction: b.direction })
                .collect()
        };
        let key = (c.state, c.guard(), budgets);
        if let Some((t1, before)) = self.seen.get(&key) {
            let t1 = *t1;
            let growth: Vec<i64> =
                c.counters.iter().zip(before).map(|(&a, &b)| a as i64 - b as i64).collect();
            let monotone = growth.iter().enumerate().all(|(i, &d)| {
                d == 0 || (d > 0 && self.last_zero[i].map_or(true, |z| z < t1))
            });
            if monotone {
                return Some(DivergenceCertificate { start: t1, end: now, growth });
            }
        }
        self.seen.insert(key, (now, c.counters.clone()));
        None
    }
}

/// Runs a deterministic machine on `word`, recording every configuration.
pub fn run_deterministic(m: &CounterMachine, word: &[char]) -> Result<RunTrace> {
    run_deterministic_with(m, word, RunOptions::default())
}

pub fn run_deterministic_with(m: &CounterMachine, word: &[char], opts: RunOptions) -> Result<RunTrace> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(Error::NondeterministicInput);
    }
    let mut steps = Vec::new();
    let mut detector = LassoDetector::new(m, opts);
    let mut current = Configuration::initial(m);
    let mut via = None;
    loop {
        let cert = detector.observe(&current);
        let accepting = is_accepting(m, &current, word.len());
        steps.push(TraceStep { config: current.clone(), via });
        if accepting {
            return Ok(RunTrace { steps, verdict: Verdict::Accept, certificate: None });
        }
        if let Some(cert) = cert {
            return Ok(RunTrace { steps, verdict: Verdict::Diverge, certificate: Some(cert) });
        }
        let mut next = step_with(m, &current, word, opts);
        match next.pop() {
            None => return Ok(RunTrace { steps, verdict: Verdict::Reject, certificate: None }),
            Some((c, ti)) => {
                debug_assert!(next.is_empty());
                current = c;
                via = Some(ti);
            }
        }
    }
}

/// Verdict of a deterministic run without keeping the trace.
pub fn verdict_deterministic(m: &CounterMachine, word: &[char]) -> Result<Verdict> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(Error::NondeterministicInput);
    }
    Ok(run_from(m, Configuration::initial(m), word, RunOptions::default()))
}

/// Verdict of the run from an arbitrary configuration of a deterministic machine.
pub(crate) fn run_from(m: &CounterMachine, start: Configuration, word: &[char], opts: RunOptions) -> Verdict {
    let mut detector = LassoDetector::new(m, opts);
    let mut current = start;
    loop {
        if is_accepting(m, &current, word.len()) {
            return Verdict::Accept;
        }
        if detector.observe(&current).is_some() {
            return Verdict::Diverge;
        }
        match step_with(m, &current, word, opts).pop() {
            None => return Verdict::Reject,
            Some((c, _)) => current = c,
        }
    }
}

/// Explores the configuration graph of a (possibly nondeterministic) machine on
/// `word`. Single-successor chains are followed with the lasso detector, so
/// divergent deterministic stretches are cut off exactly.
///
/// Returns `None` when more than `limit` configurations would be visited;
/// otherwise the answer is exact.
pub fn accepts_bounded(m: &CounterMachine, word: &[char], limit: usize) -> Option<bool> {
    let opts = RunOptions::default();
    let mut visited: HashSet<Configuration> = HashSet::new();
    let mut stack = vec![Configuration::initial(m)];
    while let Some(start) = stack.pop() {
        let mut detector = LassoDetector::new(m, opts);
        let mut current = start;
        loop {
            if visited.contains(&current) {
                break;
            }
            if is_accepting(m, &current, word.len()) {
                return Some(true);
            }
            if visited.len() >= limit {
                return None;
            }
            visited.insert(current.clone());
            let mut next = step_with(m, &current, word, opts);
            if next.len() == 1 {
                if detector.observe(&current).is_some() {
                    break;
                }
                current = next.pop().unwrap().0;
            } else {
                stack.extend(next.into_iter().map(|(c, _)| c));
                break;
            }
        }
    }
    Some(false)
}
