use std::collections::BTreeSet;

use crate::constructions::endmarker::strip_end_marker_one_counter;
use crate::constructions::{max_bound, pad_left, pad_right, unify};
use crate::error::{precondition, Error, Result};
use crate::machine::{union_alphabet, CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition};
use crate::normalize::{enforce_reversal_control, no_stay_into_final, stay_runs_terminate, totalize};
use crate::regular::Dfa;

fn require_deterministic(m: &CounterMachine) -> Result<()> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition(format!("{} is not deterministic", m.name())));
    }
    Ok(())
}

/// `L(m1) L(m2)` for a non-exiting unmarked `m1` and a deterministic `m2`.
///
/// Right moves of `m1` into its final states are redirected to the initial
/// state of `m2`; the two machines use disjoint counters.
pub fn concat_pf_dcmne_dcm(m1: &CounterMachine, m2: &CounterMachine) -> Result<CounterMachine> {
    if !m1.is_non_exiting() {
        return Err(precondition(format!("{} is not non-exiting", m1.name())));
    }
    concat_pf_dcmne_dcm_unchecked(m1, m2)
}

/// [`concat_pf_dcmne_dcm`] without the non-exiting check: once the first
/// machine reaches a final state the second one takes over for good.
pub fn concat_pf_dcmne_dcm_unchecked(m1: &CounterMachine, m2: &CounterMachine) -> Result<CounterMachine> {
    require_deterministic(m1)?;
    require_deterministic(m2)?;
    if m1.has_eot_transitions() {
        return Err(precondition(format!("{} has end-marker moves", m1.name())));
    }
    let (m1, m2) = unify(m1, m2);
    let m1 = no_stay_into_final(&enforce_reversal_control(&m1.with_marked(false)))?;
    let m2 = enforce_reversal_control(&m2);
    let (k1, k2) = (m1.counters(), m2.counters());
    let mut b = MachineBuilder::new(format!("{}.{}", m1.name(), m2.name()), k1 + k2, m1.alphabet().to_vec());
    b.reversals(max_bound(m1.reversals(), m2.reversals())).marked(true).deterministic(true);
    let n1 = m1.num_states();
    for q in 0..n1 {
        b.add_state(format!("1:{}", m1.state_name(q)));
    }
    for q in 0..m2.num_states() {
        let id = b.add_state(format!("2:{}", m2.state_name(q)));
        b.set_final(id, m2.is_final(q));
    }
    let start2 = n1 + m2.initial();
    b.set_initial(if m1.is_final(m1.initial()) { start2 } else { m1.initial() });
    for t in m1.transitions() {
        let to = if m1.is_final(t.to) { start2 } else { t.to };
        b.add_transition(Transition::new(t.from, t.input, t.guard, to, t.mv, pad_right(&t.deltas, k2)));
    }
    for t in m2.transitions() {
        for g1 in Guard::all(k1) {
            b.add_transition(Transition::new(
                n1 + t.from,
                t.input,
                g1.concat(k1, t.guard),
                n1 + t.to,
                t.mv,
                pad_left(&t.deltas, k1),
            ));
        }
    }
    Ok(b.build())
}

/// `L(m1) L(d)` for a deterministic machine without end-marker moves.
///
/// The machine is made total and every stay into a final state is redirected,
/// so its run reads every input to the end and finality is observed only after
/// right moves. Alongside it runs the subset of DFA states reached by the
/// suffixes that started where `m1` was final.
pub fn concat_dcmne_regular(m1: &CounterMachine, d: &Dfa) -> Result<CounterMachine> {
    require_deterministic(m1)?;
    if m1.has_eot_transitions() {
        return Err(precondition(format!("{} has end-marker moves", m1.name())));
    }
    let sigma = union_alphabet(m1.alphabet(), d.alphabet());
    let m1 = m1.with_alphabet(&sigma).with_marked(false);
    let d = d.with_alphabet(&sigma);
    let e = enforce_reversal_control(&m1);
    if !stay_runs_terminate(&e) {
        return Err(precondition(format!("{} may loop forever on stay moves", m1.name())));
    }
    let m = no_stay_into_final(&totalize(&e))?;
    let mut b = MachineBuilder::new(format!("{}.dfa", m1.name()), m.counters(), sigma);
    b.reversals(m.reversals()).marked(false).deterministic(true);
    type Key = (StateId, BTreeSet<usize>);
    let mut states: StateInterner<Key> = StateInterner::new();
    let name = |k: &Key| {
        let ys: Vec<String> = k.1.iter().map(|y| y.to_string()).collect();
        format!("({},{{{}}})", m.state_name(k.0), ys.join(","))
    };
    let y0: BTreeSet<usize> = if m.is_final(m.initial()) { [d.initial()].into() } else { BTreeSet::new() };
    let init = states.intern(&mut b, (m.initial(), y0), name);
    b.set_initial(init);
    while let Some((id, (q, ys))) = states.next() {
        b.set_final(id, ys.iter().any(|&y| d.is_final(y)));
        for (_, t) in m.outgoing(q) {
            let zs = match (t.mv, t.input) {
                (Move::Right, Input::Letter(c)) => {
                    let mut z: BTreeSet<usize> = ys.iter().map(|&y| d.next(y, c).unwrap()).collect();
                    if m.is_final(t.to) {
                        z.insert(d.initial());
                    }
                    z
                }
                _ => ys.clone(),
            };
            let to = states.intern(&mut b, (t.to, zs), name);
            let mut nt = t.clone();
            nt.from = id;
            nt.to = to;
            b.add_transition(nt);
        }
    }
    Ok(b.build())
}

/// `L(m) L(d)` for a deterministic one-counter machine: remove end-marker
/// moves, concatenate, and read the result as a marked machine.
pub fn concat_dcm1_regular(m: &CounterMachine, d: &Dfa) -> Result<CounterMachine> {
    if m.counters() != 1 {
        return Err(precondition(format!("{} has {} counters, expected 1", m.name(), m.counters())));
    }
    require_deterministic(m)?;
    let ne = if m.has_eot_transitions() { strip_end_marker_one_counter(m)? } else { m.with_marked(false) };
    Ok(concat_dcmne_regular(&ne, d)?.with_marked(true))
}

/// `L Σ*` for a deterministic one-counter machine.
pub fn inverse_prefix_dcm1(m: &CounterMachine) -> Result<CounterMachine> {
    Ok(concat_dcm1_regular(m, &Dfa::full(m.alphabet()))?.renamed(format!("pref_inv_{}", m.name())))
}

/// `L(d) L(m)` for a prefix-free regular `L(d)`.
pub fn concat_pf_regular_dcm(d: &Dfa, m: &CounterMachine) -> Result<CounterMachine> {
    if !d.is_prefix_free() {
        return Err(Error::NotPrefixFree);
    }
    let sigma = union_alphabet(d.alphabet(), m.alphabet());
    let d = d.with_alphabet(&sigma);
    let m = m.with_alphabet(&sigma);
    if d.is_empty() {
        return Ok(CounterMachine::empty(&sigma, m.counters(), m.reversals()));
    }
    let useful = d.useful();
    let mut b = MachineBuilder::new("pf_dfa", 0, sigma.clone());
    b.reversals(Some(0)).marked(false);
    let mut ids = vec![usize::MAX; d.num_states()];
    for q in (0..d.num_states()).filter(|&q| useful[q]) {
        ids[q] = b.add_state(format!("d{q}"));
        b.set_final(ids[q], d.is_final(q));
    }
    b.set_initial(ids[d.initial()]);
    for q in (0..d.num_states()).filter(|&q| useful[q] && !d.is_final(q)) {
        for &c in &sigma {
            let p = d.next(q, c).unwrap();
            if useful[p] {
                b.add_transition(Transition::new(ids[q], Input::Letter(c), Guard::ZERO, ids[p], Move::Right, vec![]));
            }
        }
    }
    concat_pf_dcmne_dcm(&b.build(), &m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Mode {
    /// Right after a right move (or at the start), before any stay.
    Fresh,
    Mid,
    /// Input of the first machine ended here; it runs its end-marker moves.
    End,
}

/// `L(m1) L(m2)` by guessing the split point. The output is nondeterministic.
///
/// The guess is allowed only right after a right move of `m1`, when the first
/// factor has been read completely and no stay move has looked at the next
/// symbol yet.
pub fn concat_ncm(m1: &CounterMachine, m2: &CounterMachine) -> Result<CounterMachine> {
    let (m1, m2) = unify(&enforce_reversal_control(m1), &enforce_reversal_control(m2));
    let (k1, k2) = (m1.counters(), m2.counters());
    let k = k1 + k2;
    let mut b = MachineBuilder::new(format!("{}.{}", m1.name(), m2.name()), k, m1.alphabet().to_vec());
    b.reversals(max_bound(m1.reversals(), m2.reversals())).marked(true).deterministic(false);
    let n1 = m1.num_states();
    let id1 = |q: StateId, mode: Mode| {
        3 * q
            + match mode {
                Mode::Fresh => 0,
                Mode::Mid => 1,
                Mode::End => 2,
            }
    };
    for q in 0..n1 {
        for tag in ["", "'", "$"] {
            b.add_state(format!("1:{}{tag}", m1.state_name(q)));
        }
    }
    let base2 = 3 * n1;
    for q in 0..m2.num_states() {
        let id = b.add_state(format!("2:{}", m2.state_name(q)));
        b.set_final(id, m2.is_final(q));
    }
    b.set_initial(id1(m1.initial(), Mode::Fresh));
    let mut inputs: Vec<Input> = m1.alphabet().iter().map(|&c| Input::Letter(c)).collect();
    inputs.push(Input::End);
    let zero2 = |g1: Guard| g1.concat(k1, Guard::ZERO);
    for t in m1.transitions() {
        let d = pad_right(&t.deltas, k2);
        match t.input {
            Input::Letter(_) => {
                let mode = if t.mv == Move::Right { Mode::Fresh } else { Mode::Mid };
                for from in [Mode::Fresh, Mode::Mid] {
                    b.add_transition(Transition::new(id1(t.from, from), t.input, zero2(t.guard), id1(t.to, mode), t.mv, d.clone()));
                }
            }
            Input::End => {
                for &x in &inputs {
                    b.add_transition(Transition::new(id1(t.from, Mode::End), x, zero2(t.guard), id1(t.to, Mode::End), Move::Stay, d.clone()));
                }
            }
        }
    }
    for q in 0..n1 {
        for g1 in Guard::all(k1) {
            for &x in &inputs {
                b.add_transition(Transition::new(id1(q, Mode::Fresh), x, zero2(g1), id1(q, Mode::End), Move::Stay, vec![0; k]));
                if m1.is_final(q) {
                    b.add_transition(Transition::new(id1(q, Mode::End), x, zero2(g1), base2 + m2.initial(), Move::Stay, vec![0; k]));
                }
            }
        }
    }
    for t in m2.transitions() {
        for g1 in Guard::all(k1) {
            b.add_transition(Transition::new(
                base2 + t.from,
                t.input,
                g1.concat(k1, t.guard),
                base2 + t.to,
                t.mv,
                pad_left(&t.deltas, k1),
            ));
        }
    }
    Ok(b.build())
}
