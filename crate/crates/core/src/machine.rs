//! One-way counter machines with guarded, reversal-bounded counters.
//!
//! A machine reads its input left to right. Every transition is selected by
//! the current state, the symbol under the head (or the end marker), and the
//! zero/positive status of each counter. It then moves the head (stay or
//! right), adds a delta in `{-1, 0, +1}` to every counter and, for
//! transducers, emits an output word.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub type StateId = usize;

/// Largest counter count a [`Guard`] can address.
pub const MAX_COUNTERS: usize = 32;

/// The symbol a transition reads: an input letter or the right end marker.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Input {
    Letter(char),
    End,
}

impl Input {
    pub fn is_end(self) -> bool {
        matches!(self, Input::End)
    }

    pub fn letter(self) -> Option<char> {
        match self {
            Input::Letter(c) => Some(c),
            Input::End => None,
        }
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Letter(c) => write!(f, "{c}"),
            Input::End => f.write_str("$"),
        }
    }
}

/// Zero/positive status of every counter; bit `i` is set when counter `i` is positive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard(pub u32);

impl Guard {
    pub const ZERO: Guard = Guard(0);

    pub fn from_counters(values: &[u64]) -> Guard {
        let mut bits = 0u32;
        for (i, &v) in values.iter().enumerate() {
            if v > 0 {
                bits |= 1 << i;
            }
        }
        Guard(bits)
    }

    pub fn from_bits(bits: &[bool]) -> Guard {
        let mut g = 0u32;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                g |= 1 << i;
            }
        }
        Guard(g)
    }

    pub fn is_positive(self, counter: usize) -> bool {
        self.0 & (1 << counter) != 0
    }

    pub fn with(self, counter: usize, positive: bool) -> Guard {
        if positive {
            Guard(self.0 | (1 << counter))
        } else {
            Guard(self.0 & !(1 << counter))
        }
    }

    /// Places `self` (over `width` counters) and `other` side by side.
    pub fn concat(self, width: usize, other: Guard) -> Guard {
        Guard(self.0 | (other.0 << width))
    }

    /// Extracts the `width` counters starting at `offset`.
    pub fn slice(self, offset: usize, width: usize) -> Guard {
        let mask = if width >= 32 { u32::MAX } else { (1u32 << width) - 1 };
        Guard((self.0 >> offset) & mask)
    }

    /// All `2^k` guard patterns over `k` counters.
    pub fn all(k: usize) -> impl Iterator<Item = Guard> {
        assert!(k <= 20, "guard enumeration over {k} counters");
        (0u32..(1u32 << k)).map(Guard)
    }

    /// True if no bit at index `>= k` is set.
    pub fn fits(self, k: usize) -> bool {
        k >= 32 || self.0 >> k == 0
    }

    pub fn render(self, k: usize) -> String {
        (0..k)
            .map(|i| if self.is_positive(i) { 'p' } else { 'z' })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Move {
    Stay,
    Right,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Move::Stay => "S",
            Move::Right => "R",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Transition {
    pub from: StateId,
    pub input: Input,
    pub guard: Guard,
    pub to: StateId,
    pub mv: Move,
    pub deltas: Vec<i8>,
    /// Emitted word; always empty for acceptors.
    pub output: Vec<char>,
}

impl Transition {
    pub fn new(
        from: StateId,
        input: Input,
        guard: Guard,
        to: StateId,
        mv: Move,
        deltas: Vec<i8>,
    ) -> Transition {
        Transition { from, input, guard, to, mv, deltas, output: Vec::new() }
    }

    pub fn with_output(mut self, output: Vec<char>) -> Transition {
        self.output = output;
        self
    }
}

/// A one-way counter machine.
///
/// Values are immutable once built; use [`MachineBuilder`] or
/// [`CounterMachine::to_builder`] to derive new machines.
#[derive(Clone, Debug)]
pub struct CounterMachine {
    name: String,
    counters: usize,
    reversals: Option<u32>,
    alphabet: Vec<char>,
    states: Vec<String>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<Transition>,
    marked: bool,
    deterministic: bool,
    index: HashMap<(StateId, Input, Guard), Vec<usize>>,
}

impl PartialEq for CounterMachine {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.counters == other.counters
            && self.reversals == other.reversals
            && self.alphabet == other.alphabet
            && self.states == other.states
            && self.initial == other.initial
            && self.finals == other.finals
            && self.marked == other.marked
            && self.deterministic == other.deterministic
            && self.sorted_transitions() == other.sorted_transitions()
    }
}

impl Eq for CounterMachine {}

impl CounterMachine {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn counters(&self) -> usize {
        self.counters
    }

    /// Per-counter reversal bound; `None` means unbounded.
    pub fn reversals(&self) -> Option<u32> {
        self.reversals
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        self.states.get(q).map(String::as_str).unwrap_or("?")
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.finals.get(q).copied().unwrap_or(false)
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        self.finals.iter().enumerate().filter(|(_, f)| **f).map(|(q, _)| q)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, idx: usize) -> &Transition {
        &self.transitions[idx]
    }

    /// Whether the end marker is visible (transitions on `$` allowed).
    pub fn is_marked(&self) -> bool {
        self.marked
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn has_letter(&self, c: char) -> bool {
        self.alphabet.contains(&c)
    }

    /// Indices of the transitions applicable from `q` on `input` under `guard`.
    pub fn lookup(&self, q: StateId, input: Input, guard: Guard) -> &[usize] {
        self.index.get(&(q, input, guard)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Transitions leaving `q`, in insertion order.
    pub fn outgoing(&self, q: StateId) -> impl Iterator<Item = (usize, &Transition)> + '_ {
        self.transitions.iter().enumerate().filter(move |(_, t)| t.from == q)
    }

    /// `self.alphabet` as inputs, followed by the end marker.
    pub fn inputs(&self) -> Vec<Input> {
        let mut v: Vec<Input> = self.alphabet.iter().map(|&c| Input::Letter(c)).collect();
        v.push(Input::End);
        v
    }

    pub fn has_eot_transitions(&self) -> bool {
        self.transitions.iter().any(|t| t.input.is_end())
    }

    /// True if no transition leaves a final state.
    pub fn is_non_exiting(&self) -> bool {
        self.transitions.iter().all(|t| !self.is_final(t.from))
    }

    /// True if every `(state, input, guard)` key has at most one transition.
    pub fn is_structurally_deterministic(&self) -> bool {
        self.index.values().all(|v| v.len() <= 1)
    }

    pub fn sorted_transitions(&self) -> Vec<Transition> {
        let mut ts = self.transitions.clone();
        ts.sort();
        ts.dedup();
        ts
    }

    pub fn to_builder(&self) -> MachineBuilder {
        MachineBuilder {
            name: self.name.clone(),
            counters: self.counters,
            reversals: self.reversals,
            alphabet: self.alphabet.clone(),
            states: self.states.clone(),
            initial: self.initial,
            finals: self.finals.clone(),
            transitions: self.transitions.clone(),
            marked: self.marked,
            deterministic: self.deterministic,
        }
    }

    /// The same machine with a different name.
    pub fn renamed(&self, name: impl Into<String>) -> CounterMachine {
        let mut b = self.to_builder();
        b.name = name.into();
        b.build()
    }

    /// Flips the end-marker flag. Only sound for machines without `$` transitions,
    /// for which both acceptance conditions coincide.
    pub fn with_marked(&self, marked: bool) -> CounterMachine {
        let mut b = self.to_builder();
        b.marked = marked;
        b.build()
    }

    /// The same machine over a larger alphabet; new letters have no transitions.
    pub fn with_alphabet(&self, alphabet: &[char]) -> CounterMachine {
        let mut b = self.to_builder();
        for &c in alphabet {
            if !b.alphabet.contains(&c) {
                b.alphabet.push(c);
            }
        }
        b.build()
    }

    /// Accepts nothing: one non-final state and no transitions.
    pub fn empty(alphabet: &[char], counters: usize, reversals: Option<u32>) -> CounterMachine {
        let mut b = MachineBuilder::new("empty", counters, alphabet.to_vec());
        b.reversals(reversals);
        let q = b.add_state("q0");
        b.set_initial(q);
        b.build()
    }

    /// Accepts exactly `{λ}`.
    pub fn lambda(alphabet: &[char]) -> CounterMachine {
        let mut b = MachineBuilder::new("lambda", 0, alphabet.to_vec());
        b.reversals(Some(0));
        let q = b.add_state("q0");
        b.set_initial(q);
        b.set_final(q, true);
        b.build()
    }

    /// Accepts `Σ*` with zero counters, unmarked.
    pub fn universal(alphabet: &[char]) -> CounterMachine {
        let mut b = MachineBuilder::new("universal", 0, alphabet.to_vec());
        b.reversals(Some(0));
        let q = b.add_state("q0");
        b.set_initial(q);
        b.set_final(q, true);
        for &c in alphabet {
            b.add_transition(Transition::new(q, Input::Letter(c), Guard::ZERO, q, Move::Right, vec![]));
        }
        b.build()
    }
}

/// `a` followed by the letters of `b` it lacks.
pub fn union_alphabet(a: &[char], b: &[char]) -> Vec<char> {
    let mut out = a.to_vec();
    out.extend(b.iter().filter(|c| !a.contains(c)));
    out
}

/// Incremental construction of a [`CounterMachine`].
#[derive(Clone, Debug)]
pub struct MachineBuilder {
    pub name: String,
    pub counters: usize,
    pub reversals: Option<u32>,
    pub alphabet: Vec<char>,
    pub states: Vec<String>,
    pub initial: StateId,
    pub finals: Vec<bool>,
    pub transitions: Vec<Transition>,
    pub marked: bool,
    pub deterministic: bool,
}

impl MachineBuilder {
    /// A deterministic, marked machine with one reversal per counter and no states yet.
    pub fn new(name: impl Into<String>, counters: usize, alphabet: Vec<char>) -> MachineBuilder {
        MachineBuilder {
            name: name.into(),
            counters,
            reversals: Some(1),
            alphabet,
            states: Vec::new(),
            initial: 0,
            finals: Vec::new(),
            transitions: Vec::new(),
            marked: true,
            deterministic: true,
        }
    }

    pub fn reversals(&mut self, l: Option<u32>) -> &mut Self {
        self.reversals = l;
        self
    }

    pub fn marked(&mut self, marked: bool) -> &mut Self {
        self.marked = marked;
        self
    }

    pub fn deterministic(&mut self, det: bool) -> &mut Self {
        self.deterministic = det;
        self
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.states.push(name.into());
        self.finals.push(false);
        self.states.len() - 1
    }

    pub fn set_initial(&mut self, q: StateId) -> &mut Self {
        self.initial = q;
        self
    }

    pub fn set_final(&mut self, q: StateId, is_final: bool) -> &mut Self {
        if q >= self.finals.len() {
            self.finals.resize(q + 1, false);
        }
        self.finals[q] = is_final;
        self
    }

    pub fn add_transition(&mut self, t: Transition) -> &mut Self {
        self.transitions.push(t);
        self
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn build(mut self) -> CounterMachine {
        self.finals.resize(self.states.len(), false);
        let mut seen = BTreeSet::new();
        self.transitions.retain(|t| seen.insert(t.clone()));
        let mut index: HashMap<(StateId, Input, Guard), Vec<usize>> = HashMap::new();
        for (i, t) in self.transitions.iter().enumerate() {
            index.entry((t.from, t.input, t.guard)).or_default().push(i);
        }
        CounterMachine {
            name: self.name,
            counters: self.counters,
            reversals: self.reversals,
            alphabet: self.alphabet,
            states: self.states,
            initial: self.initial,
            finals: self.finals,
            transitions: self.transitions,
            marked: self.marked,
            deterministic: self.deterministic,
            index,
        }
    }
}

/// Interns product-state keys into fresh builder states, handing out each new
/// key once through [`StateInterner::next`] for worklist-style exploration.
pub(crate) struct StateInterner<K> {
    ids: HashMap<K, StateId>,
    keys: Vec<K>,
    cursor: usize,
}

impl<K: Clone + Eq + std::hash::Hash> StateInterner<K> {
    pub fn new() -> Self {
        StateInterner { ids: HashMap::new(), keys: Vec::new(), cursor: 0 }
    }

    pub fn intern(&mut self, b: &mut MachineBuilder, key: K, name: impl FnOnce(&K) -> String) -> StateId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = b.add_state(name(&key));
        debug_assert_eq!(id, self.keys.len());
        self.ids.insert(key.clone(), id);
        self.keys.push(key);
        id
    }

    pub fn next(&mut self) -> Option<(StateId, K)> {
        let k = self.keys.get(self.cursor)?.clone();
        self.cursor += 1;
        Some((self.cursor - 1, k))
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }
}

/// Kind of well-formedness problem found by [`validate_machine`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DecrementOnZero,
    EotInUnmarked,
    EotRightMove,
    Nondeterministic,
    UnknownState,
    UnknownSymbol,
    GuardWidth,
    DeltaWidth,
    DeltaRange,
    TooManyCounters,
    OutputOnAcceptor,
    OutputOutsideAlphabet,
    FinalEotInDeterministicTransducer,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub(crate) fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }
}

/// Checks every structural invariant of a counter machine.
///
/// Acceptors must not emit output; use
/// [`validate_transducer`](crate::transduce::validate_transducer) for transducers.
pub fn validate_machine(m: &CounterMachine) -> ValidationReport {
    let mut report = validate_structure(m);
    for (i, t) in m.transitions().iter().enumerate() {
        if !t.output.is_empty() {
            report.push(
                ViolationKind::OutputOnAcceptor,
                format!("transition {i}: acceptor transition emits output"),
            );
        }
    }
    report
}

pub(crate) fn validate_structure(m: &CounterMachine) -> ValidationReport {
    let mut report = ValidationReport::default();
    let k = m.counters();
    let n = m.num_states();
    if k > MAX_COUNTERS {
        report.push(ViolationKind::TooManyCounters, format!("{k} counters exceed the limit of {MAX_COUNTERS}"));
    }
    if m.initial() >= n {
        report.push(ViolationKind::UnknownState, format!("initial state {} out of range", m.initial()));
    }
    for (i, t) in m.transitions().iter().enumerate() {
        let name = format!("transition {i} ({} {} {})", m.state_name(t.from), t.input, t.guard.render(k));
        if t.from >= n || t.to >= n {
            report.push(ViolationKind::UnknownState, format!("{name}: endpoint out of range"));
        }
        if let Input::Letter(c) = t.input {
            if !m.has_letter(c) {
                report.push(ViolationKind::UnknownSymbol, format!("{name}: symbol {c:?} not in alphabet"));
            }
        }
        if !t.guard.fits(k) {
            report.push(ViolationKind::GuardWidth, format!("{name}: guard wider than {k} counters"));
        }
        if t.deltas.len() != k {
            report.push(
                ViolationKind::DeltaWidth,
                format!("{name}: {} deltas for {k} counters", t.deltas.len()),
            );
        }
        for (c, &d) in t.deltas.iter().enumerate() {
            if !(-1..=1).contains(&d) {
                report.push(ViolationKind::DeltaRange, format!("{name}: delta {d} on counter {c}"));
            } else if d < 0 && !t.guard.is_positive(c) {
                report.push(ViolationKind::DecrementOnZero, format!("{name}: decrement on zero (counter {c})"));
            }
        }
        if t.input.is_end() {
            if !m.is_marked() {
                report.push(ViolationKind::EotInUnmarked, format!("{name}: EOT in unmarked machine"));
            }
            if t.mv == Move::Right {
                report.push(ViolationKind::EotRightMove, format!("{name}: right move on EOT"));
            }
        }
    }
    if m.is_deterministic() {
        let mut keys: Vec<_> = m.index.iter().filter(|(_, v)| v.len() > 1).map(|(k, _)| *k).collect();
        keys.sort();
        for (q, input, guard) in keys {
            report.push(
                ViolationKind::Nondeterministic,
                format!(
                    "state {} on {} under {}: several transitions in a deterministic machine",
                    m.state_name(q),
                    input,
                    guard.render(k)
                ),
            );
        }
    }
    report
}
