//! Normalization passes: reversal control in the finite state, end-marker
//! stripping, stay retargeting, totalization and stay-loop analysis.

use std::collections::HashMap;

use crate::error::{precondition, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition};
use crate::sim::CounterBudget;

/// A machine whose states carry per-counter reversal bookkeeping, together with
/// the original state and annotation of every new state.
#[derive(Clone, Debug)]
pub struct Annotated {
    pub machine: CounterMachine,
    pub origin: Vec<StateId>,
    pub budgets: Vec<Vec<CounterBudget>>,
}

fn budget_name(bs: &[CounterBudget]) -> String {
    bs.iter().map(|b| b.code()).collect::<Vec<_>>().join(",")
}

/// Moves reversal accounting into the finite control; transitions that would
/// exceed the bound are dropped. Machines with an unbounded budget are returned
/// unchanged (apart from the trivial annotation).
pub fn enforce_reversal_control(m: &CounterMachine) -> CounterMachine {
    enforce_annotated(m).machine
}

pub fn enforce_annotated(m: &CounterMachine) -> Annotated {
    let k = m.counters();
    let Some(l) = m.reversals() else {
        return Annotated {
            machine: m.clone(),
            origin: (0..m.num_states()).collect(),
            budgets: vec![vec![CounterBudget::default(); k]; m.num_states()],
        };
    };
    let mut b = MachineBuilder::new(m.name(), k, m.alphabet().to_vec());
    b.reversals(Some(l)).marked(m.is_marked()).deterministic(m.is_deterministic());
    let mut interner: StateInterner<(StateId, Vec<CounterBudget>)> = StateInterner::new();
    let name = |key: &(StateId, Vec<CounterBudget>)| {
        if k == 0 {
            m.state_name(key.0).to_string()
        } else {
            format!("{}[{}]", m.state_name(key.0), budget_name(&key.1))
        }
    };
    let init = interner.intern(&mut b, (m.initial(), vec![CounterBudget::default(); k]), name);
    b.set_initial(init);
    while let Some((id, (q, budgets))) = interner.next() {
        b.set_final(id, m.is_final(q));
        for (_, t) in m.outgoing(q) {
            let next: Vec<CounterBudget> = budgets.iter().zip(&t.deltas).map(|(b, &d)| b.after(d)).collect();
            if next.iter().any(|b| b.reversals > l) {
                continue;
            }
            let to = interner.intern(&mut b, (t.to, next), name);
            let mut nt = t.clone();
            nt.from = id;
            nt.to = to;
            b.add_transition(nt);
        }
    }
    let (origin, budgets) = interner.keys().iter().cloned().unzip();
    Annotated { machine: b.build(), origin, budgets }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormalizeMode {
    StripEot,
    NoStayIntoFinal,
    TotalizeDeadState,
}

/// Applies the given passes in the order strip, retarget, totalize.
pub fn normalize(m: &CounterMachine, modes: &[NormalizeMode]) -> Result<CounterMachine> {
    let mut out = m.clone();
    if modes.contains(&NormalizeMode::StripEot) {
        out = strip_eot(&out);
    }
    if modes.contains(&NormalizeMode::NoStayIntoFinal) {
        out = no_stay_into_final(&out)?;
    }
    if modes.contains(&NormalizeMode::TotalizeDeadState) {
        out = totalize(&out);
    }
    Ok(out)
}

pub fn strip_eot(m: &CounterMachine) -> CounterMachine {
    let mut b = m.to_builder();
    b.transitions.retain(|t| !t.input.is_end());
    b.marked(false);
    b.build()
}

/// Redirects stay transitions that enter a final state to a non-final twin with
/// the same outgoing behavior. Only stays on letters exist in unmarked machines,
/// and finality matters only once the input is consumed, so unmarked languages
/// are unchanged.
pub fn no_stay_into_final(m: &CounterMachine) -> Result<CounterMachine> {
    if !m.is_deterministic() {
        return Err(precondition("no_stay_into_final needs a deterministic machine"));
    }
    let needs = m.transitions().iter().any(|t| t.mv == Move::Stay && m.is_final(t.to));
    if !needs {
        return Ok(m.clone());
    }
    let mut b = m.to_builder();
    let mut twin: HashMap<StateId, StateId> = HashMap::new();
    for f in m.finals().collect::<Vec<_>>() {
        let id = b.add_state(format!("{}~", m.state_name(f)));
        twin.insert(f, id);
    }
    let retarget = |t: &Transition| -> Transition {
        let mut t = t.clone();
        if t.mv == Move::Stay {
            if let Some(&tw) = twin.get(&t.to) {
                t.to = tw;
            }
        }
        t
    };
    let mut ts: Vec<Transition> = m.transitions().iter().map(retarget).collect();
    for (&f, &tw) in &twin {
        for (_, t) in m.outgoing(f) {
            let mut c = retarget(t);
            c.from = tw;
            ts.push(c);
        }
    }
    b.transitions = ts;
    Ok(b.build())
}

/// Adds a non-final sink with right-moving loops so that every
/// `(state, letter, guard)` has a transition. End-marker keys are left alone.
pub fn totalize(m: &CounterMachine) -> CounterMachine {
    let k = m.counters();
    let mut b = m.to_builder();
    let mut missing = Vec::new();
    for q in 0..m.num_states() {
        for &c in m.alphabet() {
            for g in Guard::all(k) {
                if m.lookup(q, Input::Letter(c), g).is_empty() {
                    missing.push((q, c, g));
                }
            }
        }
    }
    if missing.is_empty() {
        return m.clone();
    }
    let sink = b.add_state("dead");
    for (q, c, g) in missing {
        b.add_transition(Transition::new(q, Input::Letter(c), g, sink, Move::Right, vec![0; k]));
    }
    for &c in m.alphabet() {
        for g in Guard::all(k) {
            b.add_transition(Transition::new(sink, Input::Letter(c), g, sink, Move::Right, vec![0; k]));
        }
    }
    b.build()
}

pub fn is_total(m: &CounterMachine) -> bool {
    (0..m.num_states()).all(|q| {
        m.alphabet()
            .iter()
            .all(|&c| Guard::all(m.counters()).all(|g| !m.lookup(q, Input::Letter(c), g).is_empty()))
    })
}

/// Guards a counter vector can have after applying `deltas` under `guard`.
pub(crate) fn successor_guards(guard: Guard, deltas: &[i8]) -> Vec<Guard> {
    let mut out = vec![guard];
    for (i, &d) in deltas.iter().enumerate() {
        match (guard.is_positive(i), d) {
            (false, 1) => out.iter_mut().for_each(|g| *g = g.with(i, true)),
            (true, -1) => {
                let zeros: Vec<Guard> = out.iter().map(|g| g.with(i, false)).collect();
                out.extend(zeros);
            }
            _ => {}
        }
    }
    out
}

fn stay_graph_acyclic(m: &CounterMachine, keep: impl Fn(&Transition) -> bool) -> bool {
    let k = m.counters();
    let width = 1usize << k;
    let node = |q: StateId, g: Guard| q * width + g.0 as usize;
    let n = m.num_states() * width;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in m.transitions() {
        if t.mv != Move::Stay || !keep(t) {
            continue;
        }
        for g in successor_guards(t.guard, &t.deltas) {
            adj[node(t.from, t.guard)].push(node(t.to, g));
        }
    }
    // iterative three-colour DFS
    let mut colour = vec![0u8; n];
    for s in 0..n {
        if colour[s] != 0 {
            continue;
        }
        let mut stack = vec![(s, 0usize)];
        colour[s] = 1;
        while let Some((v, i)) = stack.pop() {
            if i < adj[v].len() {
                stack.push((v, i + 1));
                let w = adj[v][i];
                match colour[w] {
                    0 => {
                        colour[w] = 1;
                        stack.push((w, 0));
                    }
                    1 => return false,
                    _ => {}
                }
            } else {
                colour[v] = 2;
            }
        }
    }
    true
}

/// True iff the graph over `(state, guard)` nodes with an edge for every stay
/// transition (end-marker stays included) has no cycle.
pub fn stay_acyclic_check(m: &CounterMachine) -> bool {
    stay_graph_acyclic(m, |_| true)
}

/// True iff no run of `m` makes infinitely many consecutive stay moves.
///
/// With a finite reversal bound the machine is first put under reversal
/// control. A counter can then only be decremented finitely often, so an
/// infinite stay run would eventually cycle through non-decrementing stays;
/// it suffices that those form an acyclic graph. Without a bound the plain
/// [`stay_acyclic_check`] is used.
pub fn stay_runs_terminate(m: &CounterMachine) -> bool {
    if m.reversals().is_none() {
        return stay_acyclic_check(m);
    }
    let e = enforce_reversal_control(m);
    stay_graph_acyclic(&e, |t| t.deltas.iter().all(|&d| d >= 0))
}

/// Keeps only states reachable from the initial state in the transition graph.
pub fn restrict_reachable(m: &CounterMachine) -> CounterMachine {
    let n = m.num_states();
    let mut seen = vec![false; n];
    let mut stack = vec![m.initial()];
    seen[m.initial()] = true;
    let mut adj: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for t in m.transitions() {
        adj[t.from].push(t.to);
    }
    while let Some(q) = stack.pop() {
        for &p in &adj[q] {
            if !seen[p] {
                seen[p] = true;
                stack.push(p);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        return m.clone();
    }
    let mut map = vec![usize::MAX; n];
    let mut b = MachineBuilder::new(m.name(), m.counters(), m.alphabet().to_vec());
    b.reversals(m.reversals()).marked(m.is_marked()).deterministic(m.is_deterministic());
    for q in (0..n).filter(|&q| seen[q]) {
        map[q] = b.add_state(m.state_name(q));
        b.set_final(map[q], m.is_final(q));
    }
    b.set_initial(map[m.initial()]);
    for t in m.transitions().iter().filter(|t| seen[t.from]) {
        let mut nt = t.clone();
        nt.from = map[t.from];
        nt.to = map[t.to];
        b.add_transition(nt);
    }
    b.build()
}
