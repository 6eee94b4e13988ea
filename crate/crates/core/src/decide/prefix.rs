use crate::constructions::pad_left;
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Stage {
    /// Both counter copies follow `m` in lockstep; `bool` marks a fresh cell.
    Together(StateId, bool),
    /// The first copy runs the end-marker moves of `m` from the split
    /// configuration, whose state is kept as the second component.
    Ending(StateId, StateId),
    /// The first copy accepted; the second continues on the rest of the input.
    Rest(StateId),
}

/// For a deterministic `m`, a machine accepting the words `uv` with `u` and
/// `uv` both in `L(m)` and `v` non-empty.
///
/// The run of `m` on `uv` passes through the configuration reached on `u`, so
/// one run suffices until the split. There the counters are duplicated: the
/// first copy checks that `u` is accepted by replaying the end-marker moves as
/// stay moves on the first letter of `v`, then the second copy resumes.
pub(crate) fn prefix_extension_machine(m: &CounterMachine) -> CounterMachine {
    let k = m.counters();
    let mut b = MachineBuilder::new(format!("{}_ext", m.name()), 2 * k, m.alphabet().to_vec());
    b.reversals(m.reversals()).marked(true).deterministic(false);
    let mut states: StateInterner<Stage> = StateInterner::new();
    let name = |s: &Stage| match *s {
        Stage::Together(q, f) => format!("{}{}", m.state_name(q), if f { "" } else { "'" }),
        Stage::Ending(q, c) => format!("end:{}@{}", m.state_name(q), m.state_name(c)),
        Stage::Rest(q) => format!("rest:{}", m.state_name(q)),
    };
    let init = states.intern(&mut b, Stage::Together(m.initial(), true), name);
    b.set_initial(init);
    let letters: Vec<Input> = m.alphabet().iter().map(|&c| Input::Letter(c)).collect();
    let zero = vec![0i8; 2 * k];
    while let Some((id, stage)) = states.next() {
        match stage {
            Stage::Together(q, fresh) => {
                for (_, t) in m.outgoing(q).filter(|(_, t)| !t.input.is_end()) {
                    let to = states.intern(&mut b, Stage::Together(t.to, t.mv == Move::Right), name);
                    let mut d = t.deltas.clone();
                    d.extend_from_slice(&t.deltas);
                    b.add_transition(Transition::new(id, t.input, t.guard.concat(k, t.guard), to, t.mv, d));
                }
                if fresh {
                    let to = states.intern(&mut b, Stage::Ending(q, q), name);
                    for g in Guard::all(k) {
                        for &x in &letters {
                            b.add_transition(Transition::new(id, x, g.concat(k, g), to, Move::Stay, zero.clone()));
                        }
                    }
                }
            }
            Stage::Ending(q, split) => {
                if m.is_final(q) {
                    let to = states.intern(&mut b, Stage::Rest(split), name);
                    for g in Guard::all(2 * k) {
                        for &x in &letters {
                            b.add_transition(Transition::new(id, x, g, to, Move::Stay, zero.clone()));
                        }
                    }
                    continue;
                }
                for g1 in Guard::all(k) {
                    for &ti in m.lookup(q, Input::End, g1) {
                        let t = m.transition(ti);
                        let to = states.intern(&mut b, Stage::Ending(t.to, split), name);
                        let mut d = t.deltas.clone();
                        d.resize(2 * k, 0);
                        for g2 in Guard::all(k) {
                            for &x in &letters {
                                b.add_transition(Transition::new(id, x, g1.concat(k, g2), to, Move::Stay, d.clone()));
                            }
                        }
                    }
                }
            }
            Stage::Rest(q) => {
                b.set_final(id, m.is_final(q));
                for (_, t) in m.outgoing(q) {
                    let to = states.intern(&mut b, Stage::Rest(t.to), name);
                    for g1 in Guard::all(k) {
                        b.add_transition(Transition::new(id, t.input, g1.concat(k, t.guard), to, t.mv, pad_left(&t.deltas, k)));
                    }
                }
            }
        }
    }
    b.build()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Pair {
    /// Two independent runs on the same input; `bool` records whether the
    /// first one has read the current cell with a stay move.
    Both(StateId, StateId, bool),
    /// The first run performs its end-marker moves on the first cell of the rest.
    Ending(StateId, StateId),
    Second(StateId),
}

/// Nondeterministic counterpart of [`prefix_extension_machine`]: the two runs
/// may differ, so they keep separate counters and take their stay moves
/// independently, joining on every right move.
pub(crate) fn prefix_extension_machine_nondet(m: &CounterMachine) -> CounterMachine {
    let k = m.counters();
    let mut b = MachineBuilder::new(format!("{}_ext", m.name()), 2 * k, m.alphabet().to_vec());
    b.reversals(m.reversals()).marked(true).deterministic(false);
    let mut states: StateInterner<Pair> = StateInterner::new();
    let name = |s: &Pair| match *s {
        Pair::Both(p, q, t) => format!("({},{}){}", m.state_name(p), m.state_name(q), if t { "'" } else { "" }),
        Pair::Ending(p, q) => format!("end:{}@{}", m.state_name(p), m.state_name(q)),
        Pair::Second(q) => format!("rest:{}", m.state_name(q)),
    };
    let init = states.intern(&mut b, Pair::Both(m.initial(), m.initial(), false), name);
    b.set_initial(init);
    let letters: Vec<Input> = m.alphabet().iter().map(|&c| Input::Letter(c)).collect();
    let zero = vec![0i8; 2 * k];
    let first = |d: &[i8]| {
        let mut v = d.to_vec();
        v.resize(2 * k, 0);
        v
    };
    while let Some((id, pair)) = states.next() {
        match pair {
            Pair::Both(p, q, touched) => {
                for (_, t) in m.outgoing(p).filter(|(_, t)| !t.input.is_end() && t.mv == Move::Stay) {
                    let to = states.intern(&mut b, Pair::Both(t.to, q, true), name);
                    for g in Guard::all(k) {
                        b.add_transition(Transition::new(id, t.input, t.guard.concat(k, g), to, Move::Stay, first(&t.deltas)));
                    }
                }
                for (_, t) in m.outgoing(q).filter(|(_, t)| !t.input.is_end() && t.mv == Move::Stay) {
                    let to = states.intern(&mut b, Pair::Both(p, t.to, touched), name);
                    for g in Guard::all(k) {
                        b.add_transition(Transition::new(id, t.input, g.concat(k, t.guard), to, Move::Stay, pad_left(&t.deltas, k)));
                    }
                }
                for (_, t1) in m.outgoing(p).filter(|(_, t)| t.mv == Move::Right) {
                    for (_, t2) in m.outgoing(q).filter(|(_, t)| t.mv == Move::Right && t.input == t1.input) {
                        let to = states.intern(&mut b, Pair::Both(t1.to, t2.to, false), name);
                        let mut d = t1.deltas.clone();
                        d.extend_from_slice(&t2.deltas);
                        b.add_transition(Transition::new(id, t1.input, t1.guard.concat(k, t2.guard), to, Move::Right, d));
                    }
                }
                if !touched {
                    let to = states.intern(&mut b, Pair::Ending(p, q), name);
                    for g in Guard::all(2 * k) {
                        for &x in &letters {
                            b.add_transition(Transition::new(id, x, g, to, Move::Stay, zero.clone()));
                        }
                    }
                }
            }
            Pair::Ending(p, q) => {
                if m.is_final(p) {
                    let to = states.intern(&mut b, Pair::Second(q), name);
                    for g in Guard::all(2 * k) {
                        for &x in &letters {
                            b.add_transition(Transition::new(id, x, g, to, Move::Stay, zero.clone()));
                        }
                    }
                    continue;
                }
                for (_, t) in m.outgoing(p).filter(|(_, t)| t.input.is_end()) {
                    let to = states.intern(&mut b, Pair::Ending(t.to, q), name);
                    for g in Guard::all(k) {
                        for &x in &letters {
                            b.add_transition(Transition::new(id, x, t.guard.concat(k, g), to, Move::Stay, first(&t.deltas)));
                        }
                    }
                }
            }
            Pair::Second(q) => {
                b.set_final(id, m.is_final(q));
                for (_, t) in m.outgoing(q) {
                    let to = states.intern(&mut b, Pair::Second(t.to), name);
                    for g in Guard::all(k) {
                        b.add_transition(Transition::new(id, t.input, g.concat(k, t.guard), to, t.mv, pad_left(&t.deltas, k)));
                    }
                }
            }
        }
    }
    b.build()
}
