//! One-reversal normal form and the finite phase abstraction of a
//! one-reversal machine.

use std::collections::{HashMap, VecDeque};

use crate::decide::kleene::eliminate;
use crate::decide::semilinear::SemilinearSet;
use crate::error::{precondition, Error, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, StateId, Transition};
use crate::normalize::enforce_annotated;

/// Splits every counter into one sub-counter per increasing phase, so that each
/// sub-counter reverses at most once.
///
/// Increments go to the sub-counter of the current phase, decrements take from
/// the newest non-empty one, and the original counter is zero exactly when all
/// its sub-counters are.
pub fn to_one_reversal(m: &CounterMachine) -> Result<CounterMachine> {
    let k = m.counters();
    let l = match m.reversals() {
        Some(l) => l,
        None if k == 0 => 0,
        None => return Err(Error::InfiniteBudget),
    };
    if l <= 1 {
        // the phase automaton's modes already rule out a second reversal
        return Ok(m.clone());
    }
    let a = enforce_annotated(m);
    let e = &a.machine;
    let parts = (l / 2 + 1) as usize;
    let mut b = MachineBuilder::new(format!("{}_1rev", m.name()), k * parts, e.alphabet().to_vec());
    b.reversals(Some(1)).marked(e.is_marked()).deterministic(e.is_deterministic());
    for q in 0..e.num_states() {
        b.add_state(e.state_name(q));
        b.set_final(q, e.is_final(q));
    }
    b.set_initial(e.initial());
    for t in e.transitions() {
        let before = &a.budgets[t.from];
        let after = &a.budgets[t.to];
        'guards: for g in Guard::all(k * parts) {
            let mut deltas = vec![0i8; k * parts];
            for i in 0..k {
                let phase = (before[i].reversals / 2) as usize;
                let positive: Vec<usize> = (0..parts).filter(|&j| g.is_positive(i * parts + j)).collect();
                if positive.iter().any(|&j| j > phase) || positive.is_empty() == t.guard.is_positive(i) {
                    continue 'guards;
                }
                match t.deltas[i] {
                    1 => deltas[i * parts + (after[i].reversals / 2) as usize] = 1,
                    -1 => deltas[i * parts + positive[positive.len() - 1]] = -1,
                    _ => {}
                }
            }
            b.add_transition(Transition::new(t.from, t.input, g, t.to, t.mv, deltas));
        }
    }
    Ok(b.build())
}

/// Per-counter mode in a one-reversal run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Never left zero.
    Z0,
    Pup,
    Pdown,
    /// Back at zero after the reversal.
    Z1,
}

impl Mode {
    fn is_zero(self) -> bool {
        matches!(self, Mode::Z0 | Mode::Z1)
    }

    fn successors(self, delta: i8, may_reverse: bool) -> &'static [Mode] {
        match (self, delta) {
            (Mode::Z0, 0) => &[Mode::Z0],
            (Mode::Z0, 1) | (Mode::Pup, 0) | (Mode::Pup, 1) => &[Mode::Pup],
            (Mode::Pup, -1) | (Mode::Pdown, -1) if may_reverse => &[Mode::Pdown, Mode::Z1],
            (Mode::Pdown, 0) => &[Mode::Pdown],
            (Mode::Z1, 0) => &[Mode::Z1],
            _ => &[],
        }
    }
}

/// Where the input head is relative to the letters read so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Head {
    /// On a cell no move has read yet.
    Fresh,
    /// On a cell that stay moves have read as this letter.
    On(char),
    AtEnd,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseNode {
    pub state: StateId,
    pub modes: Vec<Mode>,
    pub head: Head,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseEdge {
    pub from: usize,
    pub to: usize,
    /// Letter consumed by a right move.
    pub letter: Option<char>,
    pub deltas: Vec<i8>,
    /// Index of the machine transition taken.
    pub transition: usize,
}

/// Finite abstraction of a one-reversal machine: paths from the initial node
/// to an accepting node are exactly the runs that respect guards and modes,
/// with counter values forgotten.
#[derive(Clone, Debug)]
pub struct PhaseAutomaton {
    pub counters: usize,
    pub alphabet: Vec<char>,
    pub nodes: Vec<PhaseNode>,
    pub edges: Vec<PhaseEdge>,
    pub initial: usize,
    pub accepting: Vec<usize>,
}

pub fn build_phase_automaton(m: &CounterMachine) -> Result<PhaseAutomaton> {
    let k = m.counters();
    let may_reverse = match m.reversals() {
        Some(0) => false,
        Some(1) => true,
        None if k == 0 => true,
        _ => return Err(precondition(format!("{} has counters with more than one reversal", m.name()))),
    };
    let mut nodes: Vec<PhaseNode> = Vec::new();
    let mut index: HashMap<PhaseNode, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |n: PhaseNode, nodes: &mut Vec<PhaseNode>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(n.clone()).or_insert_with(|| {
            nodes.push(n);
            queue.push_back(nodes.len() - 1);
            nodes.len() - 1
        })
    };
    let initial = intern(PhaseNode { state: m.initial(), modes: vec![Mode::Z0; k], head: Head::Fresh }, &mut nodes, &mut queue);
    let mut edges = Vec::new();
    while let Some(id) = queue.pop_front() {
        let node = nodes[id].clone();
        let guard = Guard::from_bits(&node.modes.iter().map(|md| !md.is_zero()).collect::<Vec<_>>());
        for (ti, t) in m.outgoing(node.state) {
            if t.guard != guard {
                continue;
            }
            let (head, letter) = match (t.input, node.head, t.mv) {
                (Input::Letter(c), Head::Fresh, Move::Stay) => (Head::On(c), None),
                (Input::Letter(c), Head::On(d), Move::Stay) if c == d => (Head::On(c), None),
                (Input::Letter(c), Head::Fresh, Move::Right) => (Head::Fresh, Some(c)),
                (Input::Letter(c), Head::On(d), Move::Right) if c == d => (Head::Fresh, Some(c)),
                (Input::End, Head::Fresh | Head::AtEnd, Move::Stay) => (Head::AtEnd, None),
                _ => continue,
            };
            let mut choices: Vec<Vec<Mode>> = vec![Vec::new()];
            for (i, &md) in node.modes.iter().enumerate() {
                let next = md.successors(t.deltas[i], may_reverse);
                choices = choices
                    .into_iter()
                    .flat_map(|c| {
                        next.iter().map(move |&n| {
                            let mut c = c.clone();
                            c.push(n);
                            c
                        })
                    })
                    .collect();
            }
            for modes in choices {
                let to = intern(PhaseNode { state: t.to, modes, head }, &mut nodes, &mut queue);
                edges.push(PhaseEdge { from: id, to, letter, deltas: t.deltas.clone(), transition: ti });
            }
        }
    }
    let accepting = (0..nodes.len())
        .filter(|&i| m.is_final(nodes[i].state) && !matches!(nodes[i].head, Head::On(_)))
        .collect();
    Ok(PhaseAutomaton { counters: k, alphabet: m.alphabet().to_vec(), nodes, edges, initial, accepting })
}

/// What the final mode of a counter demands of its increment and decrement totals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndDemand {
    Free,
    /// Still positive: more increments than decrements.
    Positive,
    /// Returned to zero: as many decrements as increments.
    Balanced,
}

impl From<Mode> for EndDemand {
    fn from(m: Mode) -> EndDemand {
        match m {
            Mode::Z0 | Mode::Pup => EndDemand::Free,
            Mode::Pdown => EndDemand::Positive,
            Mode::Z1 => EndDemand::Balanced,
        }
    }
}

impl PhaseAutomaton {
    pub fn demands(&self, node: usize) -> Vec<EndDemand> {
        self.nodes[node].modes.iter().map(|&m| m.into()).collect()
    }

    /// Image of the paths from the initial node to any of `targets` under the
    /// additive labelling `label`.
    pub fn path_image(&self, targets: &[usize], dim: usize, label: impl Fn(usize, &PhaseEdge) -> Vec<u64>) -> SemilinearSet {
        let n = self.nodes.len();
        let mut useful = vec![false; n];
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            rev[e.to].push(e.from);
        }
        let mut stack: Vec<usize> = targets.to_vec();
        for &t in targets {
            useful[t] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &rev[v] {
                if !useful[u] {
                    useful[u] = true;
                    stack.push(u);
                }
            }
        }
        if !useful[self.initial] {
            return SemilinearSet::empty(dim);
        }
        let (source, sink) = (n, n + 1);
        let mut edges = vec![(source, self.initial, SemilinearSet::zero(dim))];
        for &t in targets {
            edges.push((t, sink, SemilinearSet::zero(dim)));
        }
        for (i, e) in self.edges.iter().enumerate().filter(|(_, e)| useful[e.from] && useful[e.to]) {
            edges.push((e.from, e.to, SemilinearSet::point(label(i, e))));
        }
        eliminate(n + 2, edges, source, sink).unwrap_or_else(|| SemilinearSet::empty(dim))
    }
}

/// Parikh image of the paths from the initial node to `target`, one
/// coordinate per edge.
pub fn parikh_edges(p: &PhaseAutomaton, target: usize) -> SemilinearSet {
    let dim = p.edges.len();
    p.path_image(&[target], dim, |i, _| {
        let mut v = vec![0; dim];
        v[i] = 1;
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn m_ab_accepting_modes() {
        let m = corpus::machine("M_ab").unwrap();
        let p = build_phase_automaton(&crate::normalize::enforce_reversal_control(&m)).unwrap();
        assert!(!p.accepting.is_empty());
        for &a in &p.accepting {
            assert!(matches!(p.nodes[a].modes[0], Mode::Z0 | Mode::Z1));
        }
    }

    #[test]
    fn increments_only_never_fall() {
        let m = corpus::machine("mod_counter").unwrap().to_builder();
        let mut b = m;
        b.transitions.retain(|t| t.deltas.iter().all(|&d| d >= 0));
        let p = build_phase_automaton(&b.build()).unwrap();
        assert!(p.nodes.iter().all(|n| matches!(n.modes[0], Mode::Z0 | Mode::Pup)));
    }

    #[test]
    fn zero_counter_copy() {
        let m = corpus::machine("astar_bstar").unwrap();
        let p = build_phase_automaton(&m).unwrap();
        assert_eq!(p.nodes.len(), m.num_states());
        assert_eq!(p.edges.len(), m.transitions().len());
    }

    #[test]
    fn self_loop_image() {
        let m = corpus::machine("a_star").unwrap();
        let p = build_phase_automaton(&m).unwrap();
        let s = parikh_edges(&p, p.initial);
        assert_eq!(s.components.len(), 1);
        assert_eq!(s.components[0].base, vec![0; p.edges.len()]);
        assert_eq!(s.components[0].periods.len(), 1);
    }

    #[test]
    fn three_reversals_split() {
        let mut b = MachineBuilder::new("zigzag", 1, vec!['a', 'b']);
        b.reversals(Some(3));
        let q = b.add_state("q");
        b.set_initial(q).set_final(q, true);
        b.add_transition(Transition::new(q, Input::Letter('a'), Guard(0), q, Move::Right, vec![1]));
        b.add_transition(Transition::new(q, Input::Letter('a'), Guard(1), q, Move::Right, vec![1]));
        b.add_transition(Transition::new(q, Input::Letter('b'), Guard(1), q, Move::Right, vec![-1]));
        let m = b.build();
        let o = to_one_reversal(&m).unwrap();
        assert_eq!(o.counters(), 2);
        assert_eq!(o.reversals(), Some(1));
        for w in ["", "ab", "abab", "ababab", "aabbaabb", "abb", "aabab"] {
            let w: Vec<char> = w.chars().collect();
            assert_eq!(
                crate::sim::verdict_deterministic(&o, &w).unwrap(),
                crate::sim::verdict_deterministic(&m, &w).unwrap(),
                "{w:?}"
            );
        }
    }
}
