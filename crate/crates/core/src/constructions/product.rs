use crate::constructions::{max_bound, pad_left, pad_right, unify};
use crate::error::{precondition, Result};
use crate::machine::{union_alphabet, CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition};
use crate::normalize::{enforce_reversal_control, stay_runs_terminate, totalize};
use crate::regular::Dfa;

/// Product with a DFA that advances on right moves only.
pub fn intersect_regular(m: &CounterMachine, d: &Dfa) -> Result<CounterMachine> {
    let sigma = union_alphabet(m.alphabet(), d.alphabet());
    let m = m.with_alphabet(&sigma);
    let d = d.with_alphabet(&sigma);
    let mut b = MachineBuilder::new(format!("{}_x_dfa", m.name()), m.counters(), sigma);
    b.reversals(m.reversals()).marked(m.is_marked()).deterministic(m.is_deterministic());
    let mut states: StateInterner<(StateId, usize)> = StateInterner::new();
    let name = |k: &(StateId, usize)| format!("({},{})", m.state_name(k.0), k.1);
    let init = states.intern(&mut b, (m.initial(), d.initial()), name);
    b.set_initial(init);
    while let Some((id, (q, s))) = states.next() {
        b.set_final(id, m.is_final(q) && d.is_final(s));
        for (_, t) in m.outgoing(q) {
            let s2 = match (t.mv, t.input) {
                (Move::Right, Input::Letter(c)) => d.next(s, c).unwrap(),
                _ => s,
            };
            let to = states.intern(&mut b, (t.to, s2), name);
            let mut nt = t.clone();
            nt.from = id;
            nt.to = to;
            b.add_transition(nt);
        }
    }
    Ok(b.build())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    /// First machine's stays; a right move hands over to the second.
    First,
    /// Second machine's stays; its right move is taken jointly with the first's.
    Second,
    /// First machine accepted at the end marker; second runs its end moves.
    SecondEnd,
}

/// Product of two machines over their common input: the first machine runs its
/// stay moves, then the second, then both move right together.
///
/// Works for nondeterministic inputs; deterministic inputs give a
/// deterministic product. Counters are kept disjoint.
pub fn intersect_machines(m1: &CounterMachine, m2: &CounterMachine) -> Result<CounterMachine> {
    let (m1, m2) = unify(&enforce_reversal_control(m1), &enforce_reversal_control(m2));
    let (k1, k2) = (m1.counters(), m2.counters());
    let k = k1 + k2;
    let unmarked = !m1.is_marked() && !m2.is_marked();
    let mut b = MachineBuilder::new(format!("{}_and_{}", m1.name(), m2.name()), k, m1.alphabet().to_vec());
    b.reversals(max_bound(m1.reversals(), m2.reversals()))
        .marked(!unmarked)
        .deterministic(m1.is_deterministic() && m2.is_deterministic());
    type Key = (StateId, StateId, Phase);
    let mut states: StateInterner<Key> = StateInterner::new();
    let name = |key: &Key| {
        let ph = match key.2 {
            Phase::First => "1",
            Phase::Second => "2",
            Phase::SecondEnd => "e",
        };
        format!("({},{},{ph})", m1.state_name(key.0), m2.state_name(key.1))
    };
    let init = states.intern(&mut b, (m1.initial(), m2.initial(), Phase::First), name);
    b.set_initial(init);
    let letters: Vec<Input> = m1.alphabet().iter().map(|&c| Input::Letter(c)).collect();
    while let Some((id, (q1, q2, phase))) = states.next() {
        let fin = match phase {
            Phase::First => unmarked && m1.is_final(q1) && m2.is_final(q2),
            Phase::SecondEnd => m2.is_final(q2),
            Phase::Second => false,
        };
        b.set_final(id, fin);
        for g1 in Guard::all(k1) {
            for g2 in Guard::all(k2) {
                let g = g1.concat(k1, g2);
                match phase {
                    Phase::First => {
                        for &x in &letters {
                            let ts = m1.lookup(q1, x, g1);
                            for &ti in ts {
                                let t = m1.transition(ti);
                                if t.mv == Move::Stay {
                                    let to = states.intern(&mut b, (t.to, q2, Phase::First), name);
                                    b.add_transition(Transition::new(id, x, g, to, Move::Stay, pad_right(&t.deltas, k2)));
                                }
                            }
                            if ts.iter().any(|&ti| m1.transition(ti).mv == Move::Right) {
                                let to = states.intern(&mut b, (q1, q2, Phase::Second), name);
                                b.add_transition(Transition::new(id, x, g, to, Move::Stay, vec![0; k]));
                            }
                        }
                        if !unmarked {
                            if m1.is_final(q1) {
                                let to = states.intern(&mut b, (q1, q2, Phase::SecondEnd), name);
                                b.add_transition(Transition::new(id, Input::End, g, to, Move::Stay, vec![0; k]));
                            } else {
                                for &ti in m1.lookup(q1, Input::End, g1) {
                                    let t = m1.transition(ti);
                                    let to = states.intern(&mut b, (t.to, q2, Phase::First), name);
                                    b.add_transition(Transition::new(id, Input::End, g, to, Move::Stay, pad_right(&t.deltas, k2)));
                                }
                            }
                        }
                    }
                    Phase::Second => {
                        for &x in &letters {
                            for &tj in m2.lookup(q2, x, g2) {
                                let t2 = m2.transition(tj);
                                if t2.mv == Move::Stay {
                                    let to = states.intern(&mut b, (q1, t2.to, Phase::Second), name);
                                    b.add_transition(Transition::new(id, x, g, to, Move::Stay, pad_left(&t2.deltas, k1)));
                                    continue;
                                }
                                for &ti in m1.lookup(q1, x, g1) {
                                    let t1 = m1.transition(ti);
                                    if t1.mv != Move::Right {
                                        continue;
                                    }
                                    let to = states.intern(&mut b, (t1.to, t2.to, Phase::First), name);
                                    let mut d = t1.deltas.clone();
                                    d.extend_from_slice(&t2.deltas);
                                    b.add_transition(Transition::new(id, x, g, to, Move::Right, d));
                                }
                            }
                        }
                    }
                    Phase::SecondEnd => {
                        if m2.is_final(q2) {
                            continue;
                        }
                        for &tj in m2.lookup(q2, Input::End, g2) {
                            let t = m2.transition(tj);
                            let to = states.intern(&mut b, (q1, t.to, Phase::SecondEnd), name);
                            b.add_transition(Transition::new(id, Input::End, g, to, Move::Stay, pad_left(&t.deltas, k1)));
                        }
                    }
                }
            }
        }
    }
    Ok(b.build())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BooleanMode {
    Not,
    And,
    Or,
}

fn require_deterministic(m: &CounterMachine) -> Result<()> {
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition(format!("{} is not deterministic", m.name())));
    }
    Ok(())
}

/// Complement of a deterministic machine whose stay runs always terminate.
///
/// The machine is put under reversal control and totalized, so every run reads
/// to the end marker. The end-marker run is followed while it avoids final
/// states; if it halts without visiting one, a fresh accepting state is entered.
fn complement(m: &CounterMachine) -> Result<CounterMachine> {
    require_deterministic(m)?;
    if !stay_runs_terminate(m) {
        return Err(precondition(format!("{} may loop forever on stay moves", m.name())));
    }
    let t = totalize(&enforce_reversal_control(m));
    let k = t.counters();
    let mut b = t.to_builder();
    b.name = format!("not_{}", m.name());
    b.transitions.retain(|tr| !tr.input.is_end());
    b.finals.iter_mut().for_each(|f| *f = false);
    let acc = b.add_state("accept");
    b.set_final(acc, true);
    for q in (0..t.num_states()).filter(|&q| !t.is_final(q)) {
        for g in Guard::all(k) {
            match t.lookup(q, Input::End, g).first() {
                Some(&ti) => {
                    let tr = t.transition(ti);
                    if !t.is_final(tr.to) {
                        b.add_transition(tr.clone());
                    }
                }
                None => {
                    b.add_transition(Transition::new(q, Input::End, g, acc, Move::Stay, vec![0; k]));
                }
            }
        }
    }
    b.marked(true);
    Ok(b.build())
}

/// Boolean combinations of deterministic machines.
pub fn boolean_dcm(m1: &CounterMachine, m2: Option<&CounterMachine>, mode: BooleanMode) -> Result<CounterMachine> {
    require_deterministic(m1)?;
    if let Some(m2) = m2 {
        require_deterministic(m2)?;
    }
    let other = || m2.ok_or_else(|| precondition("binary boolean operation needs two machines"));
    match mode {
        BooleanMode::Not => complement(m1),
        BooleanMode::And => intersect_machines(m1, other()?),
        BooleanMode::Or => {
            let (a, b) = unify(m1, other()?);
            let both = intersect_machines(&complement(&a)?, &complement(&b)?)?;
            Ok(complement(&both)?.renamed(format!("{}_or_{}", m1.name(), other()?.name())))
        }
    }
}
