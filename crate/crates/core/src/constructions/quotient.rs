use crate::error::{precondition, Result};
use crate::machine::{CounterMachine, Guard, Move, Transition};
use crate::normalize::enforce_reversal_control;
use crate::sim::{step_with, Configuration, LassoDetector, RunOptions};

/// `w⁻¹ L(m)` for a deterministic machine.
///
/// The machine is run on `w` until the whole of `w` has been consumed. A fresh
/// chain of stay moves then raises the counters one unit at a time to the
/// values reached, and hands over to the state reached. If the run on `w`
/// halts or loops first, the quotient is empty.
pub fn left_quotient_word(m: &CounterMachine, w: &[char]) -> Result<CounterMachine> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition("left quotient needs a deterministic machine"));
    }
    let e = enforce_reversal_control(m);
    let k = e.counters();
    let empty = || CounterMachine::empty(e.alphabet(), k, e.reversals()).renamed(format!("{}_quot", m.name()));
    if w.iter().any(|c| !e.has_letter(*c)) {
        return Ok(empty());
    }
    let opts = RunOptions::default();
    let mut detector = LassoDetector::new(&e, opts);
    let mut current = Configuration::initial(&e);
    while current.consumed < w.len() {
        if detector.observe(&current).is_some() {
            return Ok(empty());
        }
        match step_with(&e, &current, w, opts).pop() {
            Some((c, _)) => current = c,
            None => return Ok(empty()),
        }
    }
    let mut b = e.to_builder();
    b.name = format!("{}_quot", m.name());
    b.marked(true);
    let inputs = e.inputs();
    let mut values = vec![0u64; k];
    let mut prev: Option<(usize, Guard, Vec<i8>)> = None;
    for i in 0..k {
        for _ in 0..current.counters[i] {
            let q = b.add_state(format!("prime{}", b.num_states()));
            match prev {
                None => {
                    b.set_initial(q);
                }
                Some((p, g, deltas)) => {
                    for &x in &inputs {
                        b.add_transition(Transition::new(p, x, g, q, Move::Stay, deltas.clone()));
                    }
                }
            }
            let g = Guard::from_counters(&values);
            let mut deltas = vec![0i8; k];
            deltas[i] = 1;
            values[i] += 1;
            prev = Some((q, g, deltas));
        }
    }
    match prev {
        None => {
            b.set_initial(current.state);
        }
        Some((p, g, deltas)) => {
            for &x in &inputs {
                b.add_transition(Transition::new(p, x, g, current.state, Move::Stay, deltas.clone()));
            }
        }
    }
    Ok(b.build())
}
