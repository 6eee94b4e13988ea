//! End-to-end acceptance checks. Each criterion runs in isolation and prints
//! one PASS/FAIL line; the process fails if any criterion fails.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use revbound::constructions::{
    boolean_dcm, concat_dcm1_regular, concat_dcmne_regular, concat_ncm, concat_pf_dcmne_dcm, concat_pf_regular_dcm,
    intersect_machines, intersect_regular, inverse_insertion_ncm, inverse_prefix_dcm1, left_quotient_word,
    make_non_exiting, strip_end_marker_one_counter, strip_end_marker_traced, BooleanMode, InsertionOp,
};
use revbound::decide::{
    all_words, compare, enumerate_words, is_empty, member, parikh_image, prefix_free_check_machine, CompareMode,
    Emptiness,
};
use revbound::format::{parse_machine, serialize_artifact};
use revbound::machine::union_alphabet;
use revbound::normalize::{enforce_reversal_control, no_stay_into_final, stay_runs_terminate, totalize};
use revbound::random::{random_dfa, random_machine, rng, MachineShape};
use revbound::sim::{run_deterministic, run_deterministic_with, RunOptions, Verdict};
use revbound::transduce::{inverse_apply, to_null_transducer};
use revbound::{corpus, Artifact, CounterMachine, Dfa, Error, Guard, Input, MachineBuilder, Move, Transition};
use revbound_cli::run_cli;

type Word = Vec<char>;

fn w(s: &str) -> Word {
    s.chars().collect()
}

fn show(w: &[char]) -> String {
    w.iter().collect()
}

// ---------------------------------------------------------------------------
// Reference membership: breadth-first search over configurations with counters
// capped at COUNTER_CAP, written against the step relation directly.

const COUNTER_CAP: u64 = 16;

#[derive(Clone, PartialEq, Eq, Hash)]
struct RefConfig {
    state: usize,
    pos: usize,
    counters: Vec<u64>,
    /// (reversals, last nonzero delta sign)
    budgets: Vec<(u32, i8)>,
}

/// Successors under the step relation, with reversal control and no cap.
fn reference_step(m: &CounterMachine, c: &RefConfig, word: &[char]) -> Vec<RefConfig> {
    let k = m.counters();
    let input = word.get(c.pos).map_or(Input::End, |&a| Input::Letter(a));
    let mut out = Vec::new();
    'trans: for (_, t) in m.outgoing(c.state) {
        if t.input != input {
            continue;
        }
        if (0..k).any(|i| t.guard.is_positive(i) != (c.counters[i] > 0)) {
            continue;
        }
        if input == Input::End && t.mv == Move::Right {
            continue;
        }
        let mut next = c.clone();
        for (i, &d) in t.deltas.iter().enumerate() {
            if d == 0 {
                continue;
            }
            if d < 0 && next.counters[i] == 0 {
                continue 'trans;
            }
            next.counters[i] = (next.counters[i] as i64 + d as i64) as u64;
            let (r, last) = next.budgets[i];
            let r = if last != 0 && last != d.signum() { r + 1 } else { r };
            if m.reversals().is_some_and(|l| r > l) {
                continue 'trans;
            }
            next.budgets[i] = (r, d.signum());
        }
        next.state = t.to;
        if t.mv == Move::Right {
            next.pos += 1;
        }
        out.push(next);
    }
    out
}

fn reference_start(m: &CounterMachine) -> RefConfig {
    let k = m.counters();
    RefConfig { state: m.initial(), pos: 0, counters: vec![0; k], budgets: vec![(0, 0); k] }
}

fn reference_accepts(m: &CounterMachine, word: &[char]) -> bool {
    let start = reference_start(m);
    let mut seen = HashSet::from([start.clone()]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        if c.pos == word.len() && m.is_final(c.state) {
            return true;
        }
        for next in reference_step(m, &c, word) {
            if next.counters.iter().all(|&v| v <= COUNTER_CAP) && seen.insert(next.clone()) {
                stack.push(next);
            }
        }
    }
    false
}

/// Memoized reference membership for one machine.
struct Reference<'a> {
    m: &'a CounterMachine,
    cache: RefCell<HashMap<Word, bool>>,
}

impl<'a> Reference<'a> {
    fn new(m: &'a CounterMachine) -> Self {
        Reference { m, cache: RefCell::new(HashMap::new()) }
    }

    fn accepts(&self, word: &[char]) -> bool {
        if let Some(&b) = self.cache.borrow().get(word) {
            return b;
        }
        let b = reference_accepts(self.m, word);
        self.cache.borrow_mut().insert(word.to_vec(), b);
        b
    }
}

fn dfa_accepts(d: &Dfa, word: &[char]) -> bool {
    let mut q = d.initial();
    for &c in word {
        match d.next(q, c) {
            Some(p) => q = p,
            None => return false,
        }
    }
    d.is_final(q)
}

fn concat_holds(word: &[char], left: impl Fn(&[char]) -> bool, right: impl Fn(&[char]) -> bool) -> bool {
    (0..=word.len()).any(|i| left(&word[..i]) && right(&word[i..]))
}

/// Words obtained from `word` by deleting at most `gaps` contiguous blocks.
fn block_deletions(word: &[char], gaps: usize, out: &mut HashSet<Word>) {
    out.insert(word.to_vec());
    if gaps == 0 {
        return;
    }
    for i in 0..word.len() {
        for j in i + 1..=word.len() {
            let mut v = word[..i].to_vec();
            v.extend_from_slice(&word[j..]);
            block_deletions(&v, gaps - 1, out);
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 1

const MAX_LEN: usize = 7;

#[derive(Default)]
struct Tally {
    checked: HashMap<&'static str, usize>,
    skipped: HashMap<&'static str, usize>,
    mismatches: Vec<String>,
}

impl Tally {
    /// Compares the constructed machine with `expected` on all words over
    /// `sigma` up to MAX_LEN. Precondition refusals are counted as skips.
    fn check(
        &mut self,
        op: &'static str,
        built: revbound::Result<CounterMachine>,
        sigma: &[char],
        expected: impl Fn(&[char]) -> bool,
    ) {
        let m = match built {
            Ok(m) => m,
            Err(Error::PreconditionViolated(_) | Error::NotPrefixFree | Error::NondeterministicInput) => {
                *self.skipped.entry(op).or_default() += 1;
                return;
            }
            Err(e) => {
                self.mismatches.push(format!("{op}: unexpected error {e}"));
                return;
            }
        };
        *self.checked.entry(op).or_default() += 1;
        for word in all_words(sigma, MAX_LEN) {
            let got = member(&m, &word).expect("membership on a constructed machine");
            if got != expected(&word) {
                self.mismatches.push(format!("{op} on {}: {:?} expected {}", m.name(), show(&word), !got));
                return;
            }
        }
    }
}

fn deterministic(m: &CounterMachine) -> bool {
    m.is_deterministic() && m.is_structurally_deterministic()
}

/// Drops every transition leaving a final state, which makes the language prefix-free.
fn cut_finals(m: &CounterMachine) -> CounterMachine {
    let mut b = m.to_builder();
    b.transitions.retain(|t| !m.is_final(t.from));
    b.build()
}

fn prefix_free_dfa(d: &Dfa) -> Dfa {
    let n = d.num_states();
    let sigma = d.alphabet().to_vec();
    let delta = (0..=n)
        .map(|q| {
            sigma
                .iter()
                .map(|&c| if q == n || d.is_final(q) { n } else { d.next(q, c).unwrap() })
                .collect()
        })
        .collect();
    let finals = (0..=n).map(|q| q < n && d.is_final(q)).collect();
    Dfa::new(sigma, d.initial(), finals, delta).unwrap()
}

fn unary_ops(t: &mut Tally, m: &CounterMachine, quotient_by: &[char]) {
    let r = Reference::new(m);
    let sigma = m.alphabet().to_vec();
    if deterministic(m) {
        t.check("boolean_not", boolean_dcm(m, None, BooleanMode::Not), &sigma, |x| !r.accepts(x));
        t.check("left_quotient_word", left_quotient_word(m, quotient_by), &sigma, |x| {
            let mut v = quotient_by.to_vec();
            v.extend_from_slice(x);
            r.accepts(&v)
        });
        t.check("make_non_exiting", make_non_exiting(m), &sigma, |x| r.accepts(x));
    }
    if m.counters() == 1 && deterministic(m) {
        t.check("strip_end_marker_one_counter", strip_end_marker_one_counter(m), &sigma, |x| r.accepts(x));
        t.check("inverse_prefix_dcm1", inverse_prefix_dcm1(m), &sigma, |x| (0..=x.len()).any(|i| r.accepts(&x[..i])));
    }
    let ideal = |x: &[char], left: bool, right: bool| {
        (0..=x.len()).any(|i| {
            (i..=x.len()).any(|j| (left || i == 0) && (right || j == x.len()) && r.accepts(&x[i..j]))
        })
    };
    t.check("inverse_prefix", inverse_insertion_ncm(m, InsertionOp::Prefix, 1), &sigma, |x| ideal(x, false, true));
    t.check("inverse_suffix", inverse_insertion_ncm(m, InsertionOp::Suffix, 1), &sigma, |x| ideal(x, true, false));
    t.check("inverse_infix", inverse_insertion_ncm(m, InsertionOp::Infix, 1), &sigma, |x| ideal(x, true, true));
    for (op, kind, gaps) in [("inverse_outfix", InsertionOp::Outfix, 1), ("inverse_embed_2", InsertionOp::Embed, 2)] {
        t.check(op, inverse_insertion_ncm(m, kind, gaps), &sigma, |x| {
            let mut subs = HashSet::new();
            block_deletions(x, gaps, &mut subs);
            subs.iter().any(|v| r.accepts(v))
        });
    }
}

fn binary_ops(t: &mut Tally, m1: &CounterMachine, m2: &CounterMachine) {
    let (r1, r2) = (Reference::new(m1), Reference::new(m2));
    let sigma = union_alphabet(m1.alphabet(), m2.alphabet());
    t.check("intersect_machines", intersect_machines(m1, m2), &sigma, |x| r1.accepts(x) && r2.accepts(x));
    t.check("concat_ncm", concat_ncm(m1, m2), &sigma, |x| concat_holds(x, |u| r1.accepts(u), |v| r2.accepts(v)));
    if deterministic(m1) && deterministic(m2) {
        t.check("boolean_and", boolean_dcm(m1, Some(m2), BooleanMode::And), &sigma, |x| r1.accepts(x) && r2.accepts(x));
        t.check("boolean_or", boolean_dcm(m1, Some(m2), BooleanMode::Or), &sigma, |x| r1.accepts(x) || r2.accepts(x));
        if m1.is_non_exiting() && !m1.has_eot_transitions() {
            t.check("concat_pf_dcmne_dcm", concat_pf_dcmne_dcm(m1, m2), &sigma, |x| {
                concat_holds(x, |u| r1.accepts(u), |v| r2.accepts(v))
            });
        }
    }
}

fn regular_ops(t: &mut Tally, m: &CounterMachine, d: &Dfa, pf: &Dfa) {
    let r = Reference::new(m);
    let sigma = union_alphabet(m.alphabet(), d.alphabet());
    t.check("intersect_regular", intersect_regular(m, d), &sigma, |x| r.accepts(x) && dfa_accepts(d, x));
    if deterministic(m) {
        if !m.has_eot_transitions() {
            t.check("concat_dcmne_regular", concat_dcmne_regular(m, d), &sigma, |x| {
                concat_holds(x, |u| r.accepts(u), |v| dfa_accepts(d, v))
            });
        }
        if m.counters() == 1 {
            t.check("concat_dcm1_regular", concat_dcm1_regular(m, d), &sigma, |x| {
                concat_holds(x, |u| r.accepts(u), |v| dfa_accepts(d, v))
            });
        }
        let sigma = union_alphabet(m.alphabet(), pf.alphabet());
        t.check("concat_pf_regular_dcm", concat_pf_regular_dcm(pf, m), &sigma, |x| {
            concat_holds(x, |u| dfa_accepts(pf, u), |v| r.accepts(v))
        });
    }
}

fn criterion_1() -> Result<String, String> {
    let mut t = Tally::default();
    let machines = corpus::machines();
    let dfa = |name: &str| Dfa::from_machine(&corpus::machine(name).unwrap()).unwrap();
    let (ab_star, pf_ab) = (dfa("astar_bstar"), dfa("pf_ab"));
    let m_ab = corpus::machine("M_ab").unwrap();
    for m in &machines {
        let first = m.alphabet()[..1].to_vec();
        unary_ops(&mut t, m, &first);
        binary_ops(&mut t, m, &m_ab);
        regular_ops(&mut t, m, &ab_star, &pf_ab);
    }

    let mut r = rng(0xacce_0001);
    let base = MachineShape::default();
    let quotients = all_words(&['a', 'b'], 2);
    for i in 0..100 {
        let det_marked = random_machine(&mut r, &MachineShape { marked: Some(true), ..base.clone() });
        let det_unmarked = random_machine(&mut r, &MachineShape { marked: Some(false), ..base.clone() });
        let nondet = random_machine(&mut r, &MachineShape { deterministic: false, ..base.clone() });
        let one_counter = loop {
            let m = random_machine(&mut r, &MachineShape { marked: Some(true), ..base.clone() });
            if m.counters() == 1 {
                break m;
            }
        };
        let d = random_dfa(&mut r, 3, &['a', 'b']);
        let pf = prefix_free_dfa(&random_dfa(&mut r, 3, &['a', 'b']));
        let non_exiting = cut_finals(&det_unmarked);

        unary_ops(&mut t, &det_marked, &quotients[i % quotients.len()]);
        unary_ops(&mut t, &one_counter, &quotients[(i + 3) % quotients.len()]);
        unary_ops(&mut t, &nondet, &[]);
        unary_ops(&mut t, &non_exiting, &[]);
        binary_ops(&mut t, &det_marked, &one_counter);
        binary_ops(&mut t, &nondet, &det_marked);
        binary_ops(&mut t, &non_exiting, &det_marked);
        regular_ops(&mut t, &det_unmarked, &d, &pf);
        regular_ops(&mut t, &one_counter, &d, &pf);
        regular_ops(&mut t, &nondet, &d, &pf);
    }
    let ops = [
        "boolean_not",
        "boolean_and",
        "boolean_or",
        "intersect_machines",
        "intersect_regular",
        "left_quotient_word",
        "make_non_exiting",
        "strip_end_marker_one_counter",
        "inverse_prefix_dcm1",
        "concat_pf_dcmne_dcm",
        "concat_dcmne_regular",
        "concat_dcm1_regular",
        "concat_pf_regular_dcm",
        "concat_ncm",
        "inverse_prefix",
        "inverse_suffix",
        "inverse_infix",
        "inverse_outfix",
        "inverse_embed_2",
    ];
    let untested: Vec<&str> = ops.iter().copied().filter(|op| t.checked.get(op).copied().unwrap_or(0) < 10).collect();
    if !t.mismatches.is_empty() {
        return Err(format!("{} mismatches, first: {}", t.mismatches.len(), t.mismatches[0]));
    }
    if !untested.is_empty() {
        return Err(format!("too few applicable inputs for {untested:?}"));
    }
    let total: usize = t.checked.values().sum();
    let skipped: usize = t.skipped.values().sum();
    Ok(format!("{total} constructed machines over {} operations, 0 mismatches ({skipped} precondition refusals)", ops.len()))
}

fn err(e: Error) -> String {
    e.to_string()
}

// ---------------------------------------------------------------------------
// Criterion 2

fn criterion_2() -> Result<String, String> {
    let mut steps_checked = 0usize;
    for name in ["M_ab", "M_ab1", "mod_counter"] {
        let m = corpus::machine(name).map_err(err)?;
        let bound = m.reversals().expect("corpus machines have finite budgets");
        let traced = strip_end_marker_traced(&m).map_err(err)?;
        let s = &traced.machine;
        if s.is_marked() || s.has_eot_transitions() {
            return Err(format!("{name}: result still uses the end marker"));
        }
        if s.counters() != 1 {
            return Err(format!("{name}: result has {} counters", s.counters()));
        }
        if !compare(s, &m, CompareMode::Equal).map_err(err)?.holds {
            return Err(format!("{name}: languages differ"));
        }
        let free = RunOptions { enforce_budget: false };
        for word in all_words(m.alphabet(), 10) {
            let run = run_deterministic_with(s, &word, free).map_err(err)?;
            let source = run_deterministic(&traced.source, &word).map_err(err)?;
            for (i, step) in run.steps.iter().enumerate() {
                let c = &step.config;
                if c.max_reversals() > bound {
                    return Err(format!("{name} on {:?}: {} reversals", show(&word), c.max_reversals()));
                }
                let st = traced.states[c.state];
                let e = c.counters[0] as usize;
                if st.d + st.j != traced.delta_d(e + st.d) {
                    return Err(format!("{name} on {:?}: d+j = {} but position is {}", show(&word), st.d + st.j, traced.delta_d(e + st.d)));
                }
                let Some(src) = source.steps.get(i) else { break };
                let on_letters = src.via.map_or(true, |ti| !traced.source.transition(ti).input.is_end());
                if on_letters && (st.base != src.config.state || (e + st.d) as u64 != src.config.counters[0]) {
                    return Err(format!("{name} on {:?}: step {i} does not track the source run", show(&word)));
                }
                steps_checked += 1;
            }
        }
    }
    Ok(format!("3 machines equal after end-marker removal, {steps_checked} co-simulated steps"))
}

// ---------------------------------------------------------------------------
// Criterion 3

fn criterion_3() -> Result<String, String> {
    let mut r = rng(0xacce_0003);
    let base = MachineShape::default();
    let unmarked = MachineShape { marked: Some(false), ..base.clone() };
    let mut counts = [0usize; 3];
    let mut violations = Vec::new();
    for _ in 0..60 {
        let m1 = cut_finals(&random_machine(&mut r, &unmarked));
        let m2 = random_machine(&mut r, &base);
        if let Ok(c) = concat_pf_dcmne_dcm(&m1, &m2) {
            counts[0] += 1;
            if c.counters() != m1.counters() + m2.counters() {
                violations.push(format!("concat_pf_dcmne_dcm: {} counters from {}+{}", c.counters(), m1.counters(), m2.counters()));
            }
        }

        let u = random_machine(&mut r, &unmarked);
        let d = random_dfa(&mut r, 4, &['a', 'b']);
        if let Ok(c) = concat_dcmne_regular(&u, &d) {
            counts[1] += 1;
            let sigma = union_alphabet(u.alphabet(), d.alphabet());
            let e = enforce_reversal_control(&u.with_alphabet(&sigma).with_marked(false));
            assert!(stay_runs_terminate(&e));
            let q1 = no_stay_into_final(&totalize(&e)).map_err(err)?.num_states();
            let q2 = d.with_alphabet(&sigma).num_states();
            if c.num_states() > q1 << q2 {
                violations.push(format!("concat_dcmne_regular: {} states > {q1}*2^{q2}", c.num_states()));
            }
            if !deterministic(&c) {
                violations.push("concat_dcmne_regular: result not deterministic".into());
            }
        }

        let one = loop {
            let m = random_machine(&mut r, &MachineShape { marked: Some(true), ..base.clone() });
            if m.counters() == 1 {
                break m;
            }
        };
        if let Ok(c) = concat_dcm1_regular(&one, &d) {
            counts[2] += 1;
            if c.counters() != 1 {
                violations.push(format!("concat_dcm1_regular: {} counters", c.counters()));
            }
        }
    }
    for name in ["M_ab", "M_ab1", "mod_counter"] {
        let m = corpus::machine(name).map_err(err)?;
        let d = Dfa::from_machine(&corpus::machine("astar_bstar").unwrap()).unwrap();
        let c = concat_dcm1_regular(&m, &d).map_err(err)?;
        counts[2] += 1;
        if c.counters() != 1 {
            violations.push(format!("concat_dcm1_regular on {name}: {} counters", c.counters()));
        }
        let pf = make_non_exiting(&corpus::machine("pf_ab").unwrap()).map_err(err)?;
        let c = concat_pf_dcmne_dcm(&pf, &m).map_err(err)?;
        counts[0] += 1;
        if c.counters() != m.counters() {
            violations.push(format!("concat_pf_dcmne_dcm with {name}: {} counters", c.counters()));
        }
    }
    if counts.iter().any(|&c| c < 20) {
        return Err(format!("too few applicable inputs: {counts:?}"));
    }
    if let Some(v) = violations.first() {
        return Err(format!("{} violations, first: {v}", violations.len()));
    }
    Ok(format!("{} outputs checked, 0 violations", counts.iter().sum::<usize>()))
}

// ---------------------------------------------------------------------------
// Criterion 4

fn random_pool(seed: u64, count: usize) -> Vec<CounterMachine> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| random_machine(&mut r, &MachineShape { deterministic: i % 2 == 0, ..MachineShape::default() }))
        .collect()
}

fn criterion_4() -> Result<String, String> {
    let mut machines = corpus::machines();
    machines.extend(random_pool(0xacce_0004, 200));
    let mut nonempty = 0;
    for (i, m) in machines.iter().enumerate() {
        let words = enumerate_words(m, 10).map_err(err)?;
        match is_empty(m).map_err(err)? {
            Emptiness::Empty => {
                if let Some(x) = words.first() {
                    return Err(format!("machine {i} ({}): empty verdict but accepts {:?}", m.name(), show(x)));
                }
            }
            Emptiness::Nonempty(x) => {
                nonempty += 1;
                if !member(m, &x).map_err(err)? || !reference_accepts(m, &x) {
                    return Err(format!("machine {i}: witness {:?} is not accepted", show(&x)));
                }
                if words.is_empty() && x.len() <= 10 {
                    return Err(format!("machine {i}: enumeration missed witness {:?}", show(&x)));
                }
            }
        }
    }
    Ok(format!("{} machines, {nonempty} non-empty with verified witnesses", machines.len()))
}

// ---------------------------------------------------------------------------
// Criterion 5

fn criterion_5() -> Result<String, String> {
    let m = corpus::machine("M_ab").map_err(err)?;
    let image = parikh_image(&m).map_err(err)?;
    let enumerated: HashSet<Vec<u64>> = enumerate_words(&m, 12)
        .map_err(err)?
        .iter()
        .map(|x| vec![x.iter().filter(|&&c| c == 'a').count() as u64, x.iter().filter(|&&c| c == 'b').count() as u64])
        .collect();
    let mut points = 0;
    for i in 0..=12u64 {
        for j in 0..=12 - i {
            let v = vec![i, j];
            let inside = image.contains(&v);
            if inside != (i == j) || inside != enumerated.contains(&v) {
                return Err(format!("({i},{j}): image says {inside}"));
            }
            points += 1;
        }
    }
    Ok(format!("{points} vectors agree with {{(n,n)}} and with enumeration"))
}

// ---------------------------------------------------------------------------
// Criterion 6

fn criterion_6() -> Result<String, String> {
    let mut done = Vec::new();
    for m in corpus::machines().iter().filter(|m| deterministic(m)) {
        let t = to_null_transducer(m).map_err(err)?;
        let lambda = CounterMachine::lambda(m.alphabet());
        let inv = inverse_apply(&t, &lambda).map_err(err)?;
        for word in all_words(m.alphabet(), MAX_LEN) {
            if member(&inv, &word).map_err(err)? != reference_accepts(m, &word) {
                return Err(format!("{}: differs on {:?}", m.name(), show(&word)));
            }
        }
        done.push(m.name().to_string());
    }
    Ok(format!("{} machines reproduced: {}", done.len(), done.join(", ")))
}

// ---------------------------------------------------------------------------
// Criterion 7

fn shuffle_definition(x: &[char]) -> bool {
    let count = |c: char| x.iter().filter(|&&y| y == c).count();
    let ab: String = x.iter().filter(|c| matches!(c, 'a' | 'b')).collect();
    let cd: String = x.iter().filter(|c| matches!(c, 'c' | 'd')).collect();
    let ab_ok = ab == "a".repeat(count('a')) + &"b".repeat(count('b')) && count('a') == count('b');
    let cd_ok = cd == "c".repeat(count('c')) + &"d".repeat(count('d')) && count('c') == count('d');
    ab_ok && cd_ok
}

fn criterion_7() -> Result<String, String> {
    let t = corpus::transducer("T_shuffle").map_err(err)?;
    let m = corpus::machine("M_ab").map_err(err)?;
    let inv = inverse_apply(&t, &m).map_err(err)?;
    let rows = ["", "acbd", "cadb", "adbc", "ab", "cd", "ba", "dc", "aabb", "caacbdbd", "abab", "cdcd"];
    let mut table = Vec::new();
    for row in rows {
        let got = member(&inv, &w(row)).map_err(err)?;
        if got != shuffle_definition(&w(row)) {
            return Err(format!("{row:?}: machine says {got}"));
        }
        table.push(format!("{}={}", if row.is_empty() { "λ" } else { row }, if got { 1 } else { 0 }));
    }
    Ok(table.join(" "))
}

// ---------------------------------------------------------------------------
// Criterion 8

const REPLAY: usize = 10_000;

fn ref_guard(c: &RefConfig) -> Vec<bool> {
    c.counters.iter().map(|&v| v > 0).collect()
}

/// Follows the unique run for up to REPLAY steps.
fn replay(m: &CounterMachine, word: &[char]) -> (Vec<RefConfig>, Option<bool>) {
    let mut run = vec![reference_start(m)];
    while run.len() <= REPLAY {
        let c = run.last().unwrap();
        if c.pos == word.len() && m.is_final(c.state) {
            return (run, Some(true));
        }
        let next = reference_step(m, c, word);
        assert!(next.len() <= 1, "deterministic machine with two successors");
        match next.into_iter().next() {
            None => return (run, Some(false)),
            Some(n) => run.push(n),
        }
    }
    (run, None)
}

fn check_run(m: &CounterMachine, word: &[char]) -> Result<Verdict, String> {
    let trace = run_deterministic(m, word).map_err(err)?;
    let (run, outcome) = replay(m, word);
    let label = || format!("{} on {:?}", m.name(), show(word));
    match trace.verdict {
        Verdict::Accept | Verdict::Reject => {
            let expect = trace.verdict == Verdict::Accept;
            if outcome != Some(expect) || run.len() != trace.steps.len() {
                return Err(format!("{}: {:?} but replay ends with {outcome:?} after {} steps", label(), trace.verdict, run.len()));
            }
        }
        Verdict::Diverge => {
            let cert = trace.certificate.as_ref().ok_or_else(|| format!("{}: divergence without certificate", label()))?;
            if outcome.is_some() {
                return Err(format!("{}: diverge verdict but replay stops with {outcome:?}", label()));
            }
            let (a, b) = (&trace.steps[cert.start].config, &trace.steps[cert.end].config);
            let growth: Vec<i64> = b.counters.iter().zip(&a.counters).map(|(&x, &y)| x as i64 - y as i64).collect();
            if a.state != b.state || a.guard() != b.guard() || a.consumed != b.consumed || growth != cert.growth {
                return Err(format!("{}: certificate endpoints do not match", label()));
            }
            let period = cert.end - cert.start;
            for i in cert.start..run.len() - period {
                let (x, y) = (&run[i], &run[i + period]);
                if x.state != y.state || ref_guard(x) != ref_guard(y) || x.pos != y.pos {
                    return Err(format!("{}: segment does not repeat at step {i}", label()));
                }
            }
        }
    }
    Ok(trace.verdict)
}

type Rule = (usize, Input, u32, usize, Move, i8, i8);

fn small_machine(name: &str, reversals: Option<u32>, k: usize, rules: &[Rule], finals: &[usize]) -> CounterMachine {
    let mut b = MachineBuilder::new(name, k, vec!['a']);
    b.reversals(reversals).marked(true).deterministic(true);
    let n = rules.iter().map(|r| r.0.max(r.3)).max().unwrap() + 1;
    for q in 0..n {
        b.add_state(format!("q{q}"));
    }
    b.set_initial(0);
    for &f in finals {
        b.set_final(f, true);
    }
    for &(from, input, guard, to, mv, d0, d1) in rules {
        b.add_transition(Transition::new(from, input, Guard(guard), to, mv, [d0, d1][..k].to_vec()));
    }
    b.build()
}

fn adversarial() -> Vec<CounterMachine> {
    let (a, end) = (Input::Letter('a'), Input::End);
    let (s, r) = (Move::Stay, Move::Right);
    let count: [Rule; 2] = [(0, a, 0, 0, r, 1, 0), (0, a, 1, 0, r, 1, 0)];
    vec![
        // climbs forever on the first letter
        small_machine("climb", Some(1), 1, &[(0, a, 0, 1, s, 1, 0), (1, a, 1, 1, s, 1, 0)], &[0]),
        // up and down forever with no reversal bound
        small_machine("seesaw", None, 1, &[(0, a, 0, 1, s, 1, 0), (1, a, 1, 0, s, -1, 0)], &[]),
        // the same under a bound of one reversal halts
        small_machine("seesaw1", Some(1), 1, &[(0, a, 0, 1, s, 1, 0), (1, a, 1, 0, s, -1, 0)], &[]),
        // counts letters, then drains the counter on the end marker
        small_machine(
            "drain",
            Some(1),
            1,
            &[count[0], count[1], (0, end, 1, 2, s, -1, 0), (2, end, 1, 2, s, -1, 0), (2, end, 0, 3, s, 0, 0), (0, end, 0, 3, s, 0, 0)],
            &[3],
        ),
        // moves one counter into the other on the end marker
        small_machine(
            "transfer",
            Some(1),
            2,
            &[count[0], count[1], (0, end, 1, 2, s, -1, 1), (2, end, 3, 2, s, -1, 1), (2, end, 2, 3, s, 0, 0), (0, end, 0, 3, s, 0, 0)],
            &[3],
        ),
        // climbs forever on the end marker without reaching a final state
        small_machine("end_climb", Some(1), 1, &[(0, end, 0, 1, s, 1, 0), (1, end, 1, 1, s, 1, 0)], &[]),
        // climbs on the end marker through a final state
        small_machine(
            "end_climb_final",
            Some(1),
            1,
            &[(0, end, 0, 1, s, 1, 0), (1, end, 1, 2, s, 1, 0), (2, end, 1, 1, s, 1, 0)],
            &[2],
        ),
    ]
}

fn criterion_8() -> Result<String, String> {
    let mut r = rng(0xacce_0008);
    let shape = MachineShape { stay_chance: 0.6, density: 0.8, ..MachineShape::default() };
    let mut tally: HashMap<&str, usize> = HashMap::new();
    let mut record = |v: Verdict| {
        *tally
            .entry(match v {
                Verdict::Accept => "accept",
                Verdict::Reject => "reject",
                Verdict::Diverge => "diverge",
            })
            .or_default() += 1;
    };
    for _ in 0..100 {
        let m = random_machine(&mut r, &shape);
        for word in all_words(&['a', 'b'], 3) {
            record(check_run(&m, &word)?);
        }
    }
    let mut adversarial_diverge = 0;
    for m in adversarial() {
        for word in all_words(&['a'], 6) {
            let v = check_run(&m, &word)?;
            adversarial_diverge += usize::from(v == Verdict::Diverge);
            record(v);
        }
    }
    if adversarial_diverge == 0 || tally.get("diverge").copied().unwrap_or(0) == 0 {
        return Err("no divergent runs were exercised".into());
    }
    Ok(format!(
        "{} runs replayed for {REPLAY} steps: {} accept, {} reject, {} diverge",
        tally.values().sum::<usize>(),
        tally.get("accept").unwrap_or(&0),
        tally.get("reject").unwrap_or(&0),
        tally["diverge"]
    ))
}

// ---------------------------------------------------------------------------
// Criterion 9

fn brute_prefix_free(words: &[Word]) -> bool {
    words.iter().all(|u| words.iter().all(|v| v.len() <= u.len() || !v.starts_with(u)))
}

fn criterion_9() -> Result<String, String> {
    let mut machines = corpus::machines();
    machines.extend(random_pool(0xacce_0009, 50));
    let mut free = 0;
    for (i, m) in machines.iter().enumerate() {
        let brute = brute_prefix_free(&enumerate_words(m, 8).map_err(err)?);
        let decided = prefix_free_check_machine(m).map_err(err)?;
        if brute != decided {
            return Err(format!("machine {i} ({}): decided {decided}, enumeration says {brute}", m.name()));
        }
        free += usize::from(decided);
    }
    Ok(format!("{} machines agree ({free} prefix-free)", machines.len()))
}

// ---------------------------------------------------------------------------
// Criterion 10

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn round_trip(text: &str) -> Result<(), String> {
    let a = parse_machine(text).map_err(err)?;
    let s = serialize_artifact(&a);
    let b = parse_machine(&s).map_err(err)?;
    if a != b {
        return Err("parse(serialize(parse(f))) differs".into());
    }
    if serialize_artifact(&b) != s {
        return Err("serialization is not stable".into());
    }
    if s.contains(" * ") || s.contains('*') {
        return Err("serialized guards are not expanded".into());
    }
    Ok(())
}

fn criterion_10() -> Result<String, String> {
    let dir = corpus_dir();
    let mut files = 0;
    for entry in std::fs::read_dir(&dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        round_trip(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        files += 1;
    }
    let m_ab = corpus::machine("M_ab").unwrap();
    let outputs = vec![
        Artifact::Machine(inverse_prefix_dcm1(&m_ab).map_err(err)?),
        Artifact::Machine(concat_ncm(&m_ab, &m_ab).map_err(err)?),
        Artifact::Machine(inverse_insertion_ncm(&m_ab, InsertionOp::Embed, 2).map_err(err)?),
        Artifact::Machine(boolean_dcm(&m_ab, None, BooleanMode::Not).map_err(err)?),
        Artifact::Machine(strip_end_marker_one_counter(&m_ab).map_err(err)?),
        Artifact::Transducer(to_null_transducer(&m_ab).map_err(err)?),
        Artifact::Machine(inverse_apply(&corpus::transducer("T_shuffle").unwrap(), &m_ab).map_err(err)?),
    ];
    for a in &outputs {
        round_trip(&serialize_artifact(a)).map_err(|e| format!("{}: {e}", a.machine().name()))?;
    }

    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| tmp.path().join(name).to_string_lossy().into_owned();
    let file = |name: &str| dir.join(format!("{name}.mach")).to_string_lossy().into_owned();
    std::fs::write(path("broken.mach"), "machine x\nkind dcm\ntrans q0 a -> q1\n").unwrap();
    std::fs::write(
        path("inf.mach"),
        corpus::source_text("M_ab").unwrap().replace("reversals 1", "reversals inf"),
    )
    .unwrap();
    std::fs::write(
        path("nondet.mach"),
        corpus::source_text("M_ab").unwrap().to_string() + "trans s0 a * -> s1 R 0\n",
    )
    .unwrap();
    std::fs::write(
        path("none.mach"),
        corpus::source_text("M_ab").unwrap().replace("final f", "final"),
    )
    .unwrap();
    let (m_ab, m_ab1, m_neq, pf_ab, a_star) = (file("M_ab"), file("M_ab1"), file("M_neq"), file("pf_ab"), file("a_star"));
    let (out, out1) = (path("out.mach"), path("out1.mach"));
    let matrix: Vec<(Vec<String>, i32)> = [
        (vec!["validate", &m_ab], 0),
        (vec!["validate", &path("nondet.mach")], 1),
        (vec!["validate", &path("broken.mach")], 4),
        (vec!["validate", &path("missing.mach")], 2),
        (vec!["run", &m_ab, "--word", "aabb"], 0),
        (vec!["run", &m_ab, "--word", "aab", "--trace"], 1),
        (vec!["run", &path("inf.mach"), "--word", "ab"], 0),
        (vec!["member", &m_ab, "--word", "ab"], 0),
        (vec!["member", &m_ab, "--word", "ba"], 1),
        (vec!["member", &m_neq, "--word", "#ab#"], 1),
        (vec!["member", &m_neq, "--word", "#a#"], 0),
        (vec!["member", &path("broken.mach"), "--word", "a"], 4),
        (vec!["member", &path("inf.mach"), "--word", "ab"], 3),
        (vec!["member", &m_ab], 2),
        (vec!["enum", &m_ab, "--max-len", "4"], 0),
        (vec!["empty", &m_ab, "--witness"], 1),
        (vec!["empty", &path("none.mach")], 0),
        (vec!["empty", &path("inf.mach")], 3),
        (vec!["infinite", &m_ab], 0),
        (vec!["infinite", &pf_ab], 1),
        (vec!["parikh", &m_ab], 0),
        (vec!["parikh", &path("inf.mach")], 3),
        (vec!["compare", &m_ab, &m_ab, "--mode", "equal"], 0),
        (vec!["compare", &m_ab1, &m_ab, "--mode", "subset"], 0),
        (vec!["compare", &m_ab, &m_ab1, "--mode", "subset"], 1),
        (vec!["compare", &m_ab, &m_ab1, "--mode", "sideways"], 2),
        (vec!["op", "inverse_prefix_dcm1", &m_ab, "-o", &out], 0),
        (vec!["member", &out, "--word", "abba"], 0),
        (vec!["op", "inverse_prefix_dcm1", &m_ab1, "-o", &out1], 0),
        (vec!["member", &out1, "--word", "abba"], 0),
        (vec!["member", &out1, "--word", "ba"], 1),
        (vec!["op", "strip_end_marker_one_counter", &m_neq, "-o", &out], 3),
        (vec!["op", "make_non_exiting", &a_star, "-o", &out], 3),
        (vec!["op", "inverse_insertion_ncm", &m_ab, "--insertion", "embed", "--param", "0"], 3),
        (vec!["op", "no_such_op", &m_ab], 2),
        (vec!["op", "concat_ncm", &m_ab], 2),
        (vec!["corpus", "list"], 0),
        (vec!["corpus", "get", "M_ab"], 0),
        (vec!["corpus", "get", "nope"], 2),
        (vec!["frobnicate"], 2),
        (vec![], 2),
    ]
    .into_iter()
    .map(|(args, code)| (args.into_iter().map(String::from).collect(), code))
    .collect();
    let mut deviations = Vec::new();
    for (args, expected) in &matrix {
        let argv = std::iter::once("revbound".to_string()).chain(args.iter().cloned());
        let got = run_cli(argv);
        if got.code != *expected {
            deviations.push(format!("{args:?}: exit {} expected {expected}: {}", got.code, got.output.trim()));
        }
    }

    let witness = run_cli(["revbound", "empty", &m_ab, "--witness"]);
    let word = witness.output.lines().nth(1).ok_or("no witness printed")?;
    if !member(&corpus::machine("M_ab").unwrap(), &w(word)).map_err(err)? {
        deviations.push(format!("witness {word:?} is not accepted"));
    }
    let listed = run_cli(["revbound", "enum", &m_ab, "--max-len", "4"]);
    if listed.output != "\nab\naabb\n" {
        deviations.push(format!("enum printed {:?}", listed.output));
    }
    let got = run_cli(["revbound", "corpus", "get", "M_ab"]);
    if got.output != std::fs::read_to_string(file("M_ab")).unwrap() {
        deviations.push("corpus get does not reproduce the shipped file".into());
    }
    let json = run_cli(["revbound", "--json", "compare", &m_ab, &m_ab1, "--mode", "subset"]);
    match serde_json::from_str::<serde_json::Value>(&json.output) {
        Ok(v) if v["command"] == "compare" && v["verdict"] == false && v["witness"] == "" && v.get("details").is_some() => {}
        _ => deviations.push(format!("unexpected JSON {:?}", json.output)),
    }

    let bin = env!("CARGO_BIN_EXE_revbound");
    for (args, expected) in [
        (vec!["member", m_neq.as_str(), "--word", "#ab#"], 1),
        (vec!["empty", m_ab.as_str(), "--witness"], 1),
        (vec!["validate", path("broken.mach").leak()], 4),
    ] {
        let status = std::process::Command::new(bin).args(&args).output().map_err(|e| e.to_string())?.status;
        if status.code() != Some(expected) {
            deviations.push(format!("binary {args:?}: {status}"));
        }
    }

    if let Some(d) = deviations.first() {
        return Err(format!("{} deviations, first: {d}", deviations.len()));
    }
    Ok(format!("{files} files and {} construction outputs round-trip; {} invocations, 0 deviations", outputs.len(), matrix.len() + 7))
}

// ---------------------------------------------------------------------------

type Criterion = fn() -> Result<String, String>;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("construction oracle", criterion_1),
        ("end-marker removal round trip", criterion_2),
        ("budget contracts", criterion_3),
        ("emptiness vs enumeration", criterion_4),
        ("Parikh image of a^n b^n", criterion_5),
        ("null-transducer characterization", criterion_6),
        ("shuffle transducer table", criterion_7),
        ("divergence certificates", criterion_8),
        ("prefix-freeness vs brute force", criterion_9),
        ("CLI round trip and exit codes", criterion_10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (title, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(f));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(Ok(msg)) => println!("criterion {n:>2} PASS  {title}: {msg} ({secs:.1}s)"),
            Ok(Err(msg)) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {title}: {msg} ({secs:.1}s)");
            }
            Err(_) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {title}: panicked ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
