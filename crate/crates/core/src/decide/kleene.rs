//! State elimination over an arbitrary Kleene algebra.

use std::collections::{HashMap, HashSet};

use crate::decide::semilinear::SemilinearSet;

pub trait Kleene: Clone {
    fn union(&self, other: &Self) -> Self;
    fn concat(&self, other: &Self) -> Self;
    fn star(&self) -> Self;
}

impl Kleene for SemilinearSet {
    fn union(&self, other: &Self) -> Self {
        SemilinearSet::union(self, other)
    }

    fn concat(&self, other: &Self) -> Self {
        self.sum(other)
    }

    fn star(&self) -> Self {
        SemilinearSet::star(self)
    }
}

/// Regular expressions, mostly for inspecting what elimination produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regex {
    Empty,
    Epsilon,
    Symbol(usize),
    Union(Box<Regex>, Box<Regex>),
    Concat(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
}

impl Regex {
    /// Structural evaluation in another Kleene algebra.
    pub fn evaluate<K: Kleene>(&self, empty: &K, epsilon: &K, symbol: &impl Fn(usize) -> K) -> K {
        match self {
            Regex::Empty => empty.clone(),
            Regex::Epsilon => epsilon.clone(),
            Regex::Symbol(s) => symbol(*s),
            Regex::Union(a, b) => a.evaluate(empty, epsilon, symbol).union(&b.evaluate(empty, epsilon, symbol)),
            Regex::Concat(a, b) => a.evaluate(empty, epsilon, symbol).concat(&b.evaluate(empty, epsilon, symbol)),
            Regex::Star(a) => a.evaluate(empty, epsilon, symbol).star(),
        }
    }
}

impl Kleene for Regex {
    fn union(&self, other: &Self) -> Self {
        match (self, other) {
            (Regex::Empty, x) | (x, Regex::Empty) => x.clone(),
            _ if self == other => self.clone(),
            _ => Regex::Union(Box::new(self.clone()), Box::new(other.clone())),
        }
    }

    fn concat(&self, other: &Self) -> Self {
        match (self, other) {
            (Regex::Empty, _) | (_, Regex::Empty) => Regex::Empty,
            (Regex::Epsilon, x) | (x, Regex::Epsilon) => x.clone(),
            _ => Regex::Concat(Box::new(self.clone()), Box::new(other.clone())),
        }
    }

    fn star(&self) -> Self {
        match self {
            Regex::Empty | Regex::Epsilon => Regex::Epsilon,
            Regex::Star(_) => self.clone(),
            _ => Regex::Star(Box::new(self.clone())),
        }
    }
}

/// Label of all paths from `source` to `target` in a graph on `n` nodes, or
/// `None` when there is no path. `source` and `target` must differ and have no
/// incoming, respectively outgoing, edges. Nodes are removed cheapest first.
pub fn eliminate<K: Kleene>(n: usize, edges: Vec<(usize, usize, K)>, source: usize, target: usize) -> Option<K> {
    let mut out: Vec<HashMap<usize, K>> = vec![HashMap::new(); n];
    let mut inc: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let put = |out: &mut Vec<HashMap<usize, K>>, inc: &mut Vec<HashSet<usize>>, u: usize, v: usize, k: K| {
        let merged = match out[u].remove(&v) {
            Some(old) => old.union(&k),
            None => k,
        };
        out[u].insert(v, merged);
        inc[v].insert(u);
    };
    for (u, v, k) in edges {
        put(&mut out, &mut inc, u, v, k);
    }
    let mut alive: Vec<bool> = vec![true; n];
    loop {
        let pick = (0..n)
            .filter(|&v| alive[v] && v != source && v != target)
            .min_by_key(|&v| (inc[v].len() * out[v].len(), v));
        let Some(v) = pick else { break };
        alive[v] = false;
        let looped = out[v].remove(&v).map(|l| l.star());
        inc[v].remove(&v);
        let outs: Vec<(usize, K)> = out[v].drain().collect();
        let ins: Vec<usize> = inc[v].drain().collect();
        for &(w, _) in &outs {
            inc[w].remove(&v);
        }
        for u in ins {
            let Some(into) = out[u].remove(&v) else { continue };
            let into = match &looped {
                Some(l) => into.concat(l),
                None => into,
            };
            for (w, k) in &outs {
                put(&mut out, &mut inc, u, *w, into.concat(k));
            }
        }
    }
    out[source].remove(&target)
}
