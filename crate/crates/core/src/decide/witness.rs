use std::collections::{HashSet, VecDeque};

use crate::decide::phase::Head;
use crate::machine::{CounterMachine, Input, Move, StateId};
use crate::sim::CounterBudget;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    state: StateId,
    head: Head,
    counters: Vec<u64>,
    budgets: Vec<CounterBudget>,
}

/// Breadth-first search over configurations paired with the word read so far.
/// Returns an accepted word, or `None` when the search space is exhausted or
/// more than `limit` configurations were visited.
pub(crate) fn find_witness(m: &CounterMachine, limit: Option<usize>) -> Option<Vec<char>> {
    let k = m.counters();
    let start = Node { state: m.initial(), head: Head::Fresh, counters: vec![0; k], budgets: vec![CounterBudget::default(); k] };
    // (node, parent, letter read on the way in)
    let mut arena: Vec<(Node, usize, Option<char>)> = vec![(start.clone(), usize::MAX, None)];
    let mut seen: HashSet<Node> = HashSet::from([start]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let node = arena[i].0.clone();
        if m.is_final(node.state) && !matches!(node.head, Head::On(_)) {
            let mut word = Vec::new();
            let mut j = i;
            while j != usize::MAX {
                if let Some(c) = arena[j].2 {
                    word.push(c);
                }
                j = arena[j].1;
            }
            word.reverse();
            return Some(word);
        }
        let guard = crate::machine::Guard::from_counters(&node.counters);
        'next: for (_, t) in m.outgoing(node.state) {
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
            let mut counters = node.counters.clone();
            let mut budgets = node.budgets.clone();
            for (c, &d) in t.deltas.iter().enumerate() {
                if d < 0 && counters[c] == 0 {
                    continue 'next;
                }
                counters[c] = (counters[c] as i64 + d as i64) as u64;
                budgets[c] = budgets[c].after(d);
                if m.reversals().is_some_and(|l| budgets[c].reversals > l) {
                    continue 'next;
                }
            }
            let next = Node { state: t.to, head, counters, budgets };
            if seen.insert(next.clone()) {
                if limit.is_some_and(|l| seen.len() > l) {
                    return None;
                }
                arena.push((next, i, letter));
                queue.push_back(arena.len() - 1);
            }
        }
    }
    None
}
