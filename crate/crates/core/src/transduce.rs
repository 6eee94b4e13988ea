//! Counter transducers: counter machines whose transitions emit output words.

use crate::error::{precondition, Error, Result};
use crate::machine::{
    validate_structure, CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition,
    ValidationReport, ViolationKind,
};
use crate::normalize::enforce_reversal_control;
use crate::sim::{run_deterministic, Verdict};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterTransducer {
    machine: CounterMachine,
    output_alphabet: Vec<char>,
}

impl CounterTransducer {
    pub fn new(machine: CounterMachine, output_alphabet: Vec<char>) -> CounterTransducer {
        CounterTransducer { machine, output_alphabet }
    }

    pub fn machine(&self) -> &CounterMachine {
        &self.machine
    }

    pub fn output_alphabet(&self) -> &[char] {
        &self.output_alphabet
    }

    pub fn is_deterministic(&self) -> bool {
        self.machine.is_deterministic() && self.machine.is_structurally_deterministic()
    }

    /// One more than the longest output word; buffers in [`inverse_apply`] stay below it.
    pub fn buffer_bound(&self) -> usize {
        1 + self.machine.transitions().iter().map(|t| t.output.len()).max().unwrap_or(0)
    }
}

pub fn validate_transducer(a: &CounterTransducer) -> ValidationReport {
    let m = a.machine();
    let mut report = validate_structure(m);
    for (i, t) in m.transitions().iter().enumerate() {
        if let Some(&c) = t.output.iter().find(|c| !a.output_alphabet.contains(c)) {
            report.push(
                ViolationKind::OutputOutsideAlphabet,
                format!("transition {i}: output symbol {c:?} outside the output alphabet"),
            );
        }
        if m.is_deterministic() && t.input.is_end() && m.is_final(t.from) {
            report.push(
                ViolationKind::FinalEotInDeterministicTransducer,
                format!(
                    "transition {i}: deterministic transducer moves on the end marker from final state {}",
                    m.state_name(t.from)
                ),
            );
        }
    }
    report
}

/// Output of the unique accepting run on `w`, or `None` if the run rejects or diverges.
pub fn transduce_det(a: &CounterTransducer, w: &[char]) -> Result<Option<Vec<char>>> {
    if !a.is_deterministic() {
        return Err(Error::NondeterministicInput);
    }
    let trace = run_deterministic(a.machine(), w)?;
    if trace.verdict != Verdict::Accept {
        return Ok(None);
    }
    let out = trace
        .steps
        .iter()
        .filter_map(|s| s.via)
        .flat_map(|ti| a.machine().transition(ti).output.iter().copied())
        .collect();
    Ok(Some(out))
}

/// The same machine emitting λ everywhere; end-marker moves out of final
/// states are dropped first, which does not change the language.
pub fn to_null_transducer(m: &CounterMachine) -> Result<CounterTransducer> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition("to_null_transducer needs a deterministic machine"));
    }
    let mut b = m.to_builder();
    b.transitions.retain(|t| !(t.input.is_end() && m.is_final(t.from)));
    for t in &mut b.transitions {
        t.output.clear();
    }
    b.marked(true);
    b.name = format!("null_{}", m.name());
    Ok(CounterTransducer::new(b.build(), m.alphabet().to_vec()))
}

fn render_buf(buf: &[char]) -> String {
    buf.iter().collect()
}

/// Machine for `{w : A(w) ∈ L(m)}`.
///
/// States pair the transducer and machine states with the pending output
/// chunk. After each transducer step the machine drains the chunk with stay
/// moves on the real input; once the transducer is final at the end marker
/// with nothing pending, the buffer is sealed and the machine finishes on the
/// end marker.
pub fn inverse_apply(a: &CounterTransducer, m: &CounterMachine) -> Result<CounterMachine> {
    if a.output_alphabet.iter().any(|c| !m.has_letter(*c)) {
        return Err(Error::AlphabetMismatch { left: a.output_alphabet.clone(), right: m.alphabet().to_vec() });
    }
    let ta = enforce_reversal_control(a.machine());
    let tm = enforce_reversal_control(m);
    let (ka, km) = (ta.counters(), tm.counters());
    let k = ka + km;
    let l = match (ta.reversals(), tm.reversals()) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    let det = a.is_deterministic() && m.is_deterministic();
    let mut b = MachineBuilder::new(format!("inv_{}_{}", a.machine().name(), m.name()), k, ta.alphabet().to_vec());
    b.reversals(l).marked(true).deterministic(det);
    type Key = (StateId, StateId, Vec<char>, bool);
    let mut states: StateInterner<Key> = StateInterner::new();
    let name = |key: &Key| {
        format!(
            "({},{},{}{})",
            ta.state_name(key.0),
            tm.state_name(key.1),
            render_buf(&key.2),
            if key.3 { ",$" } else { "" }
        )
    };
    let init = states.intern(&mut b, (ta.initial(), tm.initial(), Vec::new(), false), name);
    b.set_initial(init);
    let inputs = ta.inputs();
    let combine = |t_a: Option<&Transition>, t_m: Option<&Transition>| -> Vec<i8> {
        let mut d = t_a.map(|t| t.deltas.clone()).unwrap_or_else(|| vec![0; ka]);
        d.extend(t_m.map(|t| t.deltas.clone()).unwrap_or_else(|| vec![0; km]));
        d
    };
    while let Some((id, (qa, qm, buf, sealed))) = states.next() {
        if sealed && tm.is_final(qm) {
            b.set_final(id, true);
        }
        if let Some(&x) = buf.first() {
            for &inp in &inputs {
                for ga in Guard::all(ka) {
                    for gm in Guard::all(km) {
                        for &ti in tm.lookup(qm, Input::Letter(x), gm) {
                            let t = tm.transition(ti);
                            let rest = if t.mv == Move::Right { buf[1..].to_vec() } else { buf.clone() };
                            let to = states.intern(&mut b, (qa, t.to, rest, false), name);
                            b.add_transition(Transition::new(id, inp, ga.concat(ka, gm), to, Move::Stay, combine(None, Some(t))));
                        }
                    }
                }
            }
        } else if sealed {
            for ga in Guard::all(ka) {
                for gm in Guard::all(km) {
                    for &ti in tm.lookup(qm, Input::End, gm) {
                        let t = tm.transition(ti);
                        let to = states.intern(&mut b, (qa, t.to, Vec::new(), true), name);
                        b.add_transition(Transition::new(id, Input::End, ga.concat(ka, gm), to, Move::Stay, combine(None, Some(t))));
                    }
                }
            }
        } else {
            for &inp in &inputs {
                for ga in Guard::all(ka) {
                    for gm in Guard::all(km) {
                        for &ti in ta.lookup(qa, inp, ga) {
                            let t = ta.transition(ti);
                            let to = states.intern(&mut b, (t.to, qm, t.output.clone(), false), name);
                            b.add_transition(Transition::new(id, inp, ga.concat(ka, gm), to, t.mv, combine(Some(t), None)));
                        }
                        if inp.is_end() && ta.is_final(qa) {
                            let to = states.intern(&mut b, (qa, qm, Vec::new(), true), name);
                            b.add_transition(Transition::new(id, inp, ga.concat(ka, gm), to, Move::Stay, vec![0; k]));
                        }
                    }
                }
            }
        }
    }
    Ok(b.build())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Phase {
    /// Next virtual symbol still to be guessed.
    Guess,
    /// Virtual symbol being read; `a_done` once the transducer moved past it.
    Reading(char, bool),
    /// Transducer at the virtual end marker.
    TransducerEnd,
    /// Transducer accepted; machine runs its end-marker moves.
    MachineEnd,
    Accept,
}

/// Machine over the transducer's output alphabet accepting `A(L(m))`.
///
/// It guesses the transducer's input symbol by symbol, runs the transducer and
/// then `m` on each guessed symbol, and checks the emitted words against the
/// real input with right moves.
pub fn forward_image_ncm(a: &CounterTransducer, m: &CounterMachine) -> Result<CounterMachine> {
    let ta = enforce_reversal_control(a.machine());
    let tm = enforce_reversal_control(m);
    let (ka, km) = (ta.counters(), tm.counters());
    let k = ka + km;
    let l = match (ta.reversals(), tm.reversals()) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    };
    let gamma = a.output_alphabet.clone();
    let mut b = MachineBuilder::new(format!("img_{}_{}", a.machine().name(), m.name()), k, gamma.clone());
    b.reversals(l).marked(true).deterministic(false);
    type Key = (StateId, StateId, Phase, Vec<char>);
    let mut states: StateInterner<Key> = StateInterner::new();
    let name = |key: &Key| {
        let ph = match &key.2 {
            Phase::Guess => "g".to_string(),
            Phase::Reading(c, d) => format!("{c}{}", if *d { "+" } else { "" }),
            Phase::TransducerEnd => "ae".to_string(),
            Phase::MachineEnd => "me".to_string(),
            Phase::Accept => "acc".to_string(),
        };
        format!("({},{},{ph},{})", ta.state_name(key.0), tm.state_name(key.1), render_buf(&key.3))
    };
    let init = states.intern(&mut b, (ta.initial(), tm.initial(), Phase::Guess, Vec::new()), name);
    b.set_initial(init);
    let mut real: Vec<Input> = gamma.iter().map(|&c| Input::Letter(c)).collect();
    real.push(Input::End);
    let all_guards: Vec<Guard> = Guard::all(k).collect();
    let split = |g: Guard| (g.slice(0, ka), g.slice(ka, km));
    let pad_a = |d: &[i8]| {
        let mut v = d.to_vec();
        v.extend(std::iter::repeat(0).take(km));
        v
    };
    let pad_m = |d: &[i8]| {
        let mut v = vec![0; ka];
        v.extend_from_slice(d);
        v
    };
    while let Some((id, (qa, qm, phase, emit))) = states.next() {
        if phase == Phase::Accept {
            b.set_final(id, true);
            continue;
        }
        if let Some(&c) = emit.first() {
            for &g in &all_guards {
                let to = states.intern(&mut b, (qa, qm, phase.clone(), emit[1..].to_vec()), name);
                b.add_transition(Transition::new(id, Input::Letter(c), g, to, Move::Right, vec![0; k]));
            }
            continue;
        }
        // every remaining move is a stay on whatever real symbol is under the head
        let mut moves: Vec<(Guard, Key, Vec<i8>)> = Vec::new();
        for &g in &all_guards {
            let (ga, gm) = split(g);
            match &phase {
                Phase::Guess => {
                    for &x in ta.alphabet() {
                        moves.push((g, (qa, qm, Phase::Reading(x, false), Vec::new()), vec![0; k]));
                    }
                    moves.push((g, (qa, qm, Phase::TransducerEnd, Vec::new()), vec![0; k]));
                }
                Phase::Reading(x, false) => {
                    for &ti in ta.lookup(qa, Input::Letter(*x), ga) {
                        let t = ta.transition(ti);
                        let done = t.mv == Move::Right;
                        moves.push((g, (t.to, qm, Phase::Reading(*x, done), t.output.clone()), pad_a(&t.deltas)));
                    }
                }
                Phase::Reading(x, true) => {
                    for &ti in tm.lookup(qm, Input::Letter(*x), gm) {
                        let t = tm.transition(ti);
                        let next = if t.mv == Move::Right { Phase::Guess } else { Phase::Reading(*x, true) };
                        moves.push((g, (qa, t.to, next, Vec::new()), pad_m(&t.deltas)));
                    }
                }
                Phase::TransducerEnd => {
                    for &ti in ta.lookup(qa, Input::End, ga) {
                        let t = ta.transition(ti);
                        moves.push((g, (t.to, qm, Phase::TransducerEnd, t.output.clone()), pad_a(&t.deltas)));
                    }
                    if ta.is_final(qa) {
                        moves.push((g, (qa, qm, Phase::MachineEnd, Vec::new()), vec![0; k]));
                    }
                }
                Phase::MachineEnd => {
                    for &ti in tm.lookup(qm, Input::End, gm) {
                        let t = tm.transition(ti);
                        moves.push((g, (qa, t.to, Phase::MachineEnd, Vec::new()), pad_m(&t.deltas)));
                    }
                }
                Phase::Accept => unreachable!(),
            }
        }
        for (g, key, deltas) in moves {
            let to = states.intern(&mut b, key, name);
            for &inp in &real {
                b.add_transition(Transition::new(id, inp, g, to, Move::Stay, deltas.clone()));
            }
        }
        if phase == Phase::MachineEnd && tm.is_final(qm) {
            let to = states.intern(&mut b, (qa, qm, Phase::Accept, Vec::new()), name);
            for &g in &all_guards {
                b.add_transition(Transition::new(id, Input::End, g, to, Move::Stay, vec![0; k]));
            }
        }
    }
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn w(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn shuffle_transducer_is_valid() {
        let t = corpus::transducer("T_shuffle").unwrap();
        assert!(validate_transducer(&t).is_ok());
        assert!(t.is_deterministic());
        assert_eq!(t.buffer_bound(), 2);
    }

    #[test]
    fn shuffle_outputs() {
        let t = corpus::transducer("T_shuffle").unwrap();
        assert_eq!(transduce_det(&t, &w("acbd")).unwrap(), Some(w("ab")));
        assert_eq!(transduce_det(&t, &w("ab")).unwrap(), Some(w("ab")));
        assert_eq!(transduce_det(&t, &w("da")).unwrap(), None);
    }

    #[test]
    fn final_eot_move_is_reported() {
        let t = corpus::transducer("T_shuffle").unwrap();
        let mut b = t.machine().to_builder();
        let f = t.machine().state_id("f").unwrap();
        b.add_transition(Transition::new(f, Input::End, Guard::ZERO, f, Move::Stay, vec![0]));
        let bad = CounterTransducer::new(b.build(), vec!['a', 'b']);
        assert!(validate_transducer(&bad).has(ViolationKind::FinalEotInDeterministicTransducer));
    }

    #[test]
    fn output_outside_alphabet_is_reported() {
        let t = corpus::transducer("T_shuffle").unwrap();
        let bad = CounterTransducer::new(t.machine().clone(), vec!['a']);
        assert!(validate_transducer(&bad).has(ViolationKind::OutputOutsideAlphabet));
    }

    #[test]
    fn null_transducer_outputs_nothing() {
        let m = corpus::machine("M_ab").unwrap();
        let t = to_null_transducer(&m).unwrap();
        assert!(t.machine().transitions().iter().all(|t| t.output.is_empty()));
        assert_eq!(transduce_det(&t, &w("aabb")).unwrap(), Some(vec![]));
    }

    #[test]
    fn inverse_counter_count() {
        let t = corpus::transducer("T_shuffle").unwrap();
        let m = corpus::machine("M_ab").unwrap();
        let inv = inverse_apply(&t, &m).unwrap();
        assert_eq!(inv.counters(), 2);
        assert!(inv.is_deterministic() && inv.is_structurally_deterministic());
        for (word, expect) in [("", true), ("acbd", true), ("adbc", false), ("cadb", true), ("aab", false)] {
            let got = run_deterministic(&inv, &w(word)).unwrap().verdict == Verdict::Accept;
            assert_eq!(got, expect, "{word}");
        }
    }
}
