use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, Transition};

/// Complete deterministic finite automaton over an explicit alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    alphabet: Vec<char>,
    initial: usize,
    finals: Vec<bool>,
    /// `delta[q][i]` is the successor of `q` on `alphabet[i]`.
    delta: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
    Diff,
}

impl Dfa {
    pub fn new(alphabet: Vec<char>, initial: usize, finals: Vec<bool>, delta: Vec<Vec<usize>>) -> Result<Dfa> {
        let n = delta.len();
        if finals.len() != n || initial >= n.max(1) || n == 0 {
            return Err(Error::InvalidParameter("DFA state tables disagree".into()));
        }
        for row in &delta {
            if row.len() != alphabet.len() || row.iter().any(|&p| p >= n) {
                return Err(Error::InvalidParameter("DFA transition table is not total".into()));
            }
        }
        Ok(Dfa { alphabet, initial, finals, delta })
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn letter_index(&self, c: char) -> Option<usize> {
        self.alphabet.iter().position(|&a| a == c)
    }

    pub fn next(&self, q: usize, c: char) -> Option<usize> {
        self.letter_index(c).map(|i| self.delta[q][i])
    }

    pub fn run(&self, word: &[char]) -> Option<usize> {
        word.iter().try_fold(self.initial, |q, &c| self.next(q, c))
    }

    pub fn accepts(&self, word: &[char]) -> bool {
        self.run(word).is_some_and(|q| self.finals[q])
    }

    /// Accepts exactly `{w}`: a chain of `|w|+1` states plus a sink.
    pub fn word(w: &[char], alphabet: &[char]) -> Result<Dfa> {
        if let Some(&c) = w.iter().find(|c| !alphabet.contains(c)) {
            return Err(Error::SymbolOutsideAlphabet(c));
        }
        let n = w.len();
        let sink = n + 1;
        let mut delta = vec![vec![sink; alphabet.len()]; n + 2];
        for (i, &c) in w.iter().enumerate() {
            let a = alphabet.iter().position(|&x| x == c).unwrap();
            delta[i][a] = i + 1;
        }
        let mut finals = vec![false; n + 2];
        finals[n] = true;
        Dfa::new(alphabet.to_vec(), 0, finals, delta)
    }

    /// Accepts `Σ*`.
    pub fn full(alphabet: &[char]) -> Dfa {
        Dfa { alphabet: alphabet.to_vec(), initial: 0, finals: vec![true], delta: vec![vec![0; alphabet.len()]] }
    }

    pub fn empty(alphabet: &[char]) -> Dfa {
        Dfa { alphabet: alphabet.to_vec(), initial: 0, finals: vec![false], delta: vec![vec![0; alphabet.len()]] }
    }

    /// Accepts `c*` for a single letter `c` of the alphabet.
    pub fn letter_star(c: char, alphabet: &[char]) -> Result<Dfa> {
        let a = alphabet.iter().position(|&x| x == c).ok_or(Error::SymbolOutsideAlphabet(c))?;
        let mut delta = vec![vec![1; alphabet.len()]; 2];
        delta[0][a] = 0;
        Dfa::new(alphabet.to_vec(), 0, vec![true, false], delta)
    }

    /// The same language over a larger alphabet; new letters lead to a fresh sink.
    pub fn with_alphabet(&self, alphabet: &[char]) -> Dfa {
        let extra: Vec<char> = alphabet.iter().copied().filter(|c| !self.alphabet.contains(c)).collect();
        if extra.is_empty() {
            return self.clone();
        }
        let sink = self.num_states();
        let mut d = self.clone();
        d.alphabet.extend(&extra);
        for row in &mut d.delta {
            row.extend(std::iter::repeat(sink).take(extra.len()));
        }
        d.delta.push(vec![sink; d.alphabet.len()]);
        d.finals.push(false);
        d
    }

    fn check_alphabet(&self, other: &Dfa) -> Result<()> {
        if self.alphabet != other.alphabet {
            return Err(Error::AlphabetMismatch { left: self.alphabet.clone(), right: other.alphabet.clone() });
        }
        Ok(())
    }

    /// Reachable product automaton.
    pub fn combine(&self, other: &Dfa, op: BoolOp) -> Result<Dfa> {
        self.check_alphabet(other)?;
        let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut order = vec![(self.initial, other.initial)];
        ids.insert(order[0], 0);
        let mut delta = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (p, q) = order[i];
            let mut row = Vec::with_capacity(self.alphabet.len());
            for a in 0..self.alphabet.len() {
                let key = (self.delta[p][a], other.delta[q][a]);
                let id = *ids.entry(key).or_insert_with(|| {
                    order.push(key);
                    order.len() - 1
                });
                row.push(id);
            }
            delta.push(row);
            i += 1;
        }
        let finals = order
            .iter()
            .map(|&(p, q)| {
                let (x, y) = (self.finals[p], other.finals[q]);
                match op {
                    BoolOp::And => x && y,
                    BoolOp::Or => x || y,
                    BoolOp::Diff => x && !y,
                }
            })
            .collect();
        Ok(Dfa { alphabet: self.alphabet.clone(), initial: 0, finals, delta })
    }

    pub fn complement(&self) -> Dfa {
        let mut d = self.clone();
        d.finals.iter_mut().for_each(|f| *f = !*f);
        d
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(q) = queue.pop_front() {
            for &p in &self.delta[q] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for q in 0..n {
            for &p in &self.delta[q] {
                rev[p].push(q);
            }
        }
        let mut live = self.finals.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&q| live[q]).collect();
        while let Some(p) = stack.pop() {
            for &q in &rev[p] {
                if !live[q] {
                    live[q] = true;
                    stack.push(q);
                }
            }
        }
        live
    }

    /// States that are both reachable and co-reachable.
    pub fn useful(&self) -> Vec<bool> {
        let r = self.reachable();
        let c = self.coreachable();
        r.iter().zip(&c).map(|(&a, &b)| a && b).collect()
    }

    pub fn is_empty(&self) -> bool {
        !self.useful()[self.initial]
    }

    /// True iff no accepted word is a proper prefix of another accepted word:
    /// in the trimmed automaton no final state reaches a final state by a
    /// non-empty path.
    pub fn is_prefix_free(&self) -> bool {
        let useful = self.useful();
        let n = self.num_states();
        for f in (0..n).filter(|&f| useful[f] && self.finals[f]) {
            let mut seen = vec![false; n];
            let mut stack: Vec<usize> = self.delta[f].iter().copied().filter(|&p| useful[p]).collect();
            while let Some(q) = stack.pop() {
                if seen[q] {
                    continue;
                }
                seen[q] = true;
                if self.finals[q] {
                    return false;
                }
                stack.extend(self.delta[q].iter().copied().filter(|&p| useful[p] && !seen[p]));
            }
        }
        true
    }

    /// Minimal equivalent DFA by table filling over the reachable part.
    pub fn minimize(&self) -> Dfa {
        let reach = self.reachable();
        let states: Vec<usize> = (0..self.num_states()).filter(|&q| reach[q]).collect();
        let pos: HashMap<usize, usize> = states.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let n = states.len();
        let mut distinct = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..i {
                if self.finals[states[i]] != self.finals[states[j]] {
                    distinct[i][j] = true;
                    distinct[j][i] = true;
                }
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for i in 0..n {
                for j in 0..i {
                    if distinct[i][j] {
                        continue;
                    }
                    let split = (0..self.alphabet.len()).any(|a| {
                        let x = pos[&self.delta[states[i]][a]];
                        let y = pos[&self.delta[states[j]][a]];
                        distinct[x][y]
                    });
                    if split {
                        distinct[i][j] = true;
                        distinct[j][i] = true;
                        changed = true;
                    }
                }
            }
        }
        // class representatives, numbered in BFS order from the initial state
        let mut class = vec![usize::MAX; n];
        let mut reps = Vec::new();
        for i in 0..n {
            if class[i] == usize::MAX {
                let c = reps.len();
                reps.push(i);
                for j in i..n {
                    if !distinct[i][j] {
                        class[j] = c;
                    }
                }
            }
        }
        let m = reps.len();
        let raw_delta: Vec<Vec<usize>> = reps
            .iter()
            .map(|&r| (0..self.alphabet.len()).map(|a| class[pos[&self.delta[states[r]][a]]]).collect())
            .collect();
        let raw_init = class[pos[&self.initial]];
        let mut order = vec![usize::MAX; m];
        let mut seq = vec![raw_init];
        order[raw_init] = 0;
        let mut i = 0;
        while i < seq.len() {
            for &p in &raw_delta[seq[i]] {
                if order[p] == usize::MAX {
                    order[p] = seq.len();
                    seq.push(p);
                }
            }
            i += 1;
        }
        let delta = seq.iter().map(|&c| raw_delta[c].iter().map(|&p| order[p]).collect()).collect();
        let finals = seq.iter().map(|&c| self.finals[states[reps[c]]]).collect();
        Dfa { alphabet: self.alphabet.clone(), initial: 0, finals, delta }
    }

    /// Accepted words of length at most `max_len`, in length-lexicographic order.
    pub fn words_up_to(&self, max_len: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut layer = vec![(self.initial, String::new())];
        for len in 0..=max_len {
            for (q, w) in &layer {
                if self.finals[*q] {
                    out.push(w.clone());
                }
            }
            if len == max_len {
                break;
            }
            let mut next = Vec::new();
            for (q, w) in &layer {
                for (a, &c) in self.alphabet.iter().enumerate() {
                    let mut w2 = w.clone();
                    w2.push(c);
                    next.push((self.delta[*q][a], w2));
                }
            }
            layer = next;
        }
        out
    }

    /// The DFA as an unmarked deterministic 0-counter machine that moves right on every letter.
    pub fn to_machine(&self, name: &str) -> CounterMachine {
        let mut b = MachineBuilder::new(name, 0, self.alphabet.clone());
        b.reversals(Some(0)).marked(false);
        for q in 0..self.num_states() {
            b.add_state(format!("d{q}"));
            b.set_final(q, self.finals[q]);
        }
        b.set_initial(self.initial);
        for q in 0..self.num_states() {
            for (a, &c) in self.alphabet.iter().enumerate() {
                b.add_transition(Transition::new(q, Input::Letter(c), Guard::ZERO, self.delta[q][a], Move::Right, vec![]));
            }
        }
        b.build()
    }

    /// Reads back a 0-counter unmarked machine whose transitions all move right
    /// and are deterministic; missing transitions go to a fresh sink.
    pub fn from_machine(m: &CounterMachine) -> Result<Dfa> {
        let ok = m.counters() == 0
            && !m.is_marked()
            && m.is_structurally_deterministic()
            && m.transitions().iter().all(|t| t.mv == Move::Right && !t.input.is_end());
        if !ok {
            return Err(Error::PreconditionViolated(format!(
                "{} is not a deterministic right-moving 0-counter unmarked machine",
                m.name()
            )));
        }
        let n = m.num_states();
        let sink = n;
        let mut delta = vec![vec![sink; m.alphabet().len()]; n + 1];
        for t in m.transitions() {
            let a = m.alphabet().iter().position(|&c| Input::Letter(c) == t.input).unwrap();
            delta[t.from][a] = t.to;
        }
        let mut finals: Vec<bool> = (0..n).map(|q| m.is_final(q)).collect();
        finals.push(false);
        Dfa::new(m.alphabet().to_vec(), m.initial(), finals, delta)
    }
}
