//! Shipped example machines with expected membership tables.

use crate::error::{Error, Result};
use crate::format::{parse_machine, Artifact};
use crate::machine::CounterMachine;
use crate::transduce::CounterTransducer;

pub struct CorpusEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub artifact: Artifact,
    /// Expected membership, for transducers of `inverse_apply(T, M_ab)`.
    pub table: Vec<(&'static str, bool)>,
    /// Declared `(k, l)` budget.
    pub budget: (usize, u32),
}

struct Source {
    name: &'static str,
    description: &'static str,
    text: &'static str,
    table: &'static [(&'static str, bool)],
    budget: (usize, u32),
}

const SOURCES: &[Source] = &[
    Source {
        name: "M_ab",
        description: "{a^n b^n : n >= 0}, one counter, one reversal",
        text: include_str!("../../../corpus/M_ab.mach"),
        table: &[("", true), ("ab", true), ("aabb", true), ("aab", false), ("abb", false), ("ba", false), ("abab", false)],
        budget: (1, 1),
    },
    Source {
        name: "M_ab1",
        description: "{a^n b^n : n >= 1}",
        text: include_str!("../../../corpus/M_ab1.mach"),
        table: &[("", false), ("ab", true), ("aaabbb", true), ("a", false), ("abb", false)],
        budget: (1, 1),
    },
    Source {
        name: "M_neq",
        description: "{#w# : |w|_a != |w|_b}, two counters compared in parallel at the end marker",
        text: include_str!("../../../corpus/M_neq.mach"),
        table: &[("#a#", true), ("#ab#", false), ("##", false), ("#", false), ("#a#b#", false), ("#aab#", true), ("#b##", true), ("a#", false)],
        budget: (2, 1),
    },
    Source {
        name: "mod_counter",
        description: "even-length words over {a}; end-marker behavior of q0 is the even counter values",
        text: include_str!("../../../corpus/mod_counter.mach"),
        table: &[("", true), ("a", false), ("aa", true), ("aaa", false), ("aaaa", true)],
        budget: (1, 1),
    },
    Source {
        name: "T_shuffle",
        description: "transducer whose inverse image of {a^n b^n} is a^n b^n shuffled with c^m d^m",
        text: include_str!("../../../corpus/T_shuffle.mach"),
        table: &[("", true), ("acbd", true), ("cadb", true), ("adbc", false), ("ab", true), ("cd", true), ("ba", false), ("dc", false)],
        budget: (1, 1),
    },
    Source {
        name: "pf_hash",
        description: "prefix-free DFA for {#}",
        text: include_str!("../../../corpus/pf_hash.mach"),
        table: &[("#", true), ("", false), ("##", false), ("a", false)],
        budget: (0, 0),
    },
    Source {
        name: "pf_ab",
        description: "prefix-free DFA for {ab}",
        text: include_str!("../../../corpus/pf_ab.mach"),
        table: &[("ab", true), ("a", false), ("abab", false), ("", false)],
        budget: (0, 0),
    },
    Source {
        name: "astar_bstar",
        description: "DFA for a*b*",
        text: include_str!("../../../corpus/astar_bstar.mach"),
        table: &[("", true), ("aab", true), ("ba", false), ("bbb", true)],
        budget: (0, 0),
    },
    Source {
        name: "a_star",
        description: "DFA for a* over {a, b}",
        text: include_str!("../../../corpus/a_star.mach"),
        table: &[("", true), ("aaa", true), ("ab", false)],
        budget: (0, 0),
    },
];

pub fn names() -> Vec<&'static str> {
    SOURCES.iter().map(|s| s.name).collect()
}

/// Raw file text of an entry.
pub fn source_text(name: &str) -> Result<&'static str> {
    SOURCES.iter().find(|s| s.name == name).map(|s| s.text).ok_or_else(|| Error::UnknownEntry(name.to_string()))
}

pub fn load_corpus(name: &str) -> Result<CorpusEntry> {
    let s = SOURCES.iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
    Ok(CorpusEntry {
        name: s.name,
        description: s.description,
        artifact: parse_machine(s.text)?,
        table: s.table.to_vec(),
        budget: s.budget,
    })
}

pub fn machine(name: &str) -> Result<CounterMachine> {
    match load_corpus(name)?.artifact {
        Artifact::Machine(m) => Ok(m),
        Artifact::Transducer(_) => Err(Error::PreconditionViolated(format!("{name} is a transducer"))),
    }
}

pub fn transducer(name: &str) -> Result<CounterTransducer> {
    match load_corpus(name)?.artifact {
        Artifact::Transducer(t) => Ok(t),
        Artifact::Machine(_) => Err(Error::PreconditionViolated(format!("{name} is not a transducer"))),
    }
}

/// All acceptor entries.
pub fn machines() -> Vec<CounterMachine> {
    SOURCES.iter().filter_map(|s| machine(s.name).ok()).collect()
}
