use crate::decide::{end_marker_behavior, prefix_free_check_machine};
use crate::error::{precondition, Error, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, StateId, StateInterner, Transition};
use crate::normalize::{enforce_reversal_control, no_stay_into_final};
use crate::regular::align_unary_family;

/// State of the end-marker-free machine: base state `q`, small counter part
/// `d` and loop position `j`. The simulated counter is `e + d` where `e` is the
/// real counter; `j` is nonzero only when `d` equals the tail length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Lemma1State {
    pub base: StateId,
    pub d: usize,
    pub j: usize,
}

/// Result of [`strip_end_marker_traced`]: the new machine plus what is needed
/// to relate its runs to the runs of the source.
#[derive(Clone, Debug)]
pub struct Lemma1Machine {
    pub machine: CounterMachine,
    /// Source machine under reversal control; `Lemma1State::base` indexes its states.
    pub source: CounterMachine,
    pub states: Vec<Lemma1State>,
    pub tail: usize,
    pub loop_len: usize,
}

impl Lemma1Machine {
    /// Position of counter value `x` in the aligned unary automata.
    pub fn delta_d(&self, x: usize) -> usize {
        if x < self.tail {
            x
        } else {
            self.tail + (x - self.tail) % self.loop_len
        }
    }
}

/// Equivalent unmarked one-counter machine.
pub fn strip_end_marker_one_counter(m: &CounterMachine) -> Result<CounterMachine> {
    Ok(strip_end_marker_traced(m)?.machine)
}

/// Removes end-marker moves from a deterministic one-counter machine.
///
/// For every state `q` the set of counter values from which the end-marker
/// run accepts is a unary regular language `L(q)`. All of them are aligned to
/// a common tail `t >= 1` and loop `λ`. Counter values below `t` are kept in
/// the finite state; above it the state remembers the value modulo `λ` and the
/// real counter holds the excess over `t`. A state is final when its counter
/// value lies in `L(q)`.
pub fn strip_end_marker_traced(m: &CounterMachine) -> Result<Lemma1Machine> {
    if m.counters() != 1 {
        return Err(precondition(format!("end-marker removal needs exactly one counter, {} has {}", m.name(), m.counters())));
    }
    if !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition("end-marker removal needs a deterministic machine"));
    }
    let src = enforce_reversal_control(&m.with_marked(true));
    let family = (0..src.num_states()).map(|q| end_marker_behavior(&src, q)).collect::<Result<Vec<_>>>()?;
    let aligned = align_unary_family(&family)?;
    let (t, lam) = (aligned.tail, aligned.loop_len);
    let accepts = |q: StateId, x: usize| aligned.members[q].contains(x);

    let mut b = MachineBuilder::new(format!("{}_ne", m.name()), 1, src.alphabet().to_vec());
    b.reversals(src.reversals()).marked(false).deterministic(true);
    let mut states: StateInterner<Lemma1State> = StateInterner::new();
    let name = |s: &Lemma1State| format!("({},{},{})", src.state_name(s.base), s.d, s.j);
    let init = states.intern(&mut b, Lemma1State { base: src.initial(), d: 0, j: 0 }, name);
    b.set_initial(init);
    let (z, p) = (Guard(0), Guard(1));
    while let Some((id, s)) = states.next() {
        let fin = if s.d < t { accepts(s.base, s.d) } else { accepts(s.base, t + s.j) };
        b.set_final(id, fin);
        for (_, tr) in src.outgoing(s.base) {
            let Input::Letter(_) = tr.input else { continue };
            let alpha = tr.deltas[0];
            let mut add = |b: &mut MachineBuilder, guard: Guard, to: Lemma1State, delta: i8| {
                let to = states.intern(b, to, name);
                b.add_transition(Transition::new(id, tr.input, guard, to, tr.mv, vec![delta]));
            };
            if s.d < t {
                // simulated counter equals d; the real counter is zero
                if tr.guard.is_positive(0) != (s.d > 0) {
                    continue;
                }
                let nd = (s.d as i64 + alpha as i64) as usize;
                add(&mut b, z, Lemma1State { base: tr.to, d: nd, j: 0 }, 0);
            } else {
                // simulated counter t + e is positive
                if !tr.guard.is_positive(0) {
                    continue;
                }
                match alpha {
                    0 | 1 => {
                        let to = Lemma1State { base: tr.to, d: t, j: (s.j + alpha as usize) % lam };
                        if s.j == 0 {
                            add(&mut b, z, to, alpha);
                        }
                        add(&mut b, p, to, alpha);
                    }
                    _ => {
                        add(&mut b, p, Lemma1State { base: tr.to, d: t, j: (s.j + lam - 1) % lam }, -1);
                        if s.j == 0 {
                            add(&mut b, z, Lemma1State { base: tr.to, d: t - 1, j: 0 }, 0);
                        }
                    }
                }
            }
        }
    }
    let keys = states.keys().to_vec();
    Ok(Lemma1Machine { machine: b.build(), source: src, states: keys, tail: t, loop_len: lam })
}

/// Removes every transition leaving a final state of a prefix-free unmarked
/// deterministic machine. Stays into final states are redirected first, so
/// finality is only ever observed right after a right move.
pub fn make_non_exiting(m: &CounterMachine) -> Result<CounterMachine> {
    if m.is_marked() && m.has_eot_transitions() {
        return Err(precondition("make_non_exiting needs a machine without end-marker moves"));
    }
    if !m.is_deterministic() {
        return Err(precondition("make_non_exiting needs a deterministic machine"));
    }
    if !prefix_free_check_machine(m)? {
        return Err(Error::NotPrefixFree);
    }
    let n = no_stay_into_final(&m.with_marked(false))?;
    let mut b = n.to_builder();
    b.transitions.retain(|t| !n.is_final(t.from));
    Ok(b.build())
}
