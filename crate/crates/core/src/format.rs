//! Line-oriented text format for machines, DFAs and transducers.
//!
//! ```text
//! machine M_ab
//! kind dcm                 # dcm | ncm | transducer
//! acceptance marked        # marked | unmarked
//! counters 1
//! reversals 1              # or inf
//! alphabet a b
//! states s0 s1 f
//! initial s0
//! final f
//! trans s0 a * -> s0 R +1
//! trans s0 $ z -> f S 0
//! ```
//!
//! A guard is one character per counter from `z`, `p` and `*` (both); it is
//! omitted together with the deltas when there are no counters. Transducers add
//! an `outalphabet` line and an `output "<word>"` suffix on transitions. Lines
//! whose first non-blank character is `#` are comments; `#` elsewhere is an
//! ordinary symbol.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, Transition};
use crate::transduce::CounterTransducer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Artifact {
    Machine(CounterMachine),
    Transducer(CounterTransducer),
}

impl Artifact {
    /// The underlying machine (for transducers, with outputs attached to transitions).
    pub fn machine(&self) -> &CounterMachine {
        match self {
            Artifact::Machine(m) => m,
            Artifact::Transducer(t) => t.machine(),
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn single_char(tok: &str, line: usize) -> Result<char> {
    let mut it = tok.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(err(line, format!("symbol {tok:?} is not a single character"))),
    }
}

fn parse_delta(tok: &str, line: usize) -> Result<i8> {
    match tok {
        "+1" | "1" => Ok(1),
        "0" => Ok(0),
        "-1" => Ok(-1),
        _ => Err(err(line, format!("bad delta {tok:?}"))),
    }
}

fn expand_guard(tok: &str, k: usize, line: usize) -> Result<Vec<Guard>> {
    if tok.chars().count() != k {
        return Err(err(line, format!("guard {tok:?} needs {k} characters")));
    }
    let mut out = vec![Guard::ZERO];
    for (i, c) in tok.chars().enumerate() {
        out = match c {
            'z' => out,
            'p' => out.into_iter().map(|g| g.with(i, true)).collect(),
            '*' => out.into_iter().flat_map(|g| [g, g.with(i, true)]).collect(),
            _ => return Err(err(line, format!("bad guard character {c:?}"))),
        };
    }
    Ok(out)
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    kind: Option<String>,
    marked: Option<bool>,
    counters: Option<usize>,
    reversals: Option<Option<u32>>,
    alphabet: Option<Vec<char>>,
    outalphabet: Option<Vec<char>>,
    states: Option<Vec<String>>,
    initial: Option<String>,
    finals: Vec<String>,
}

struct RawTrans {
    line: usize,
    tokens: Vec<String>,
    output: Option<Vec<char>>,
}

fn split_output(rest: &str, line: usize) -> Result<(String, Option<Vec<char>>)> {
    match rest.find(" output ") {
        None => Ok((rest.to_string(), None)),
        Some(pos) => {
            let tail = rest[pos + " output ".len()..].trim();
            let inner = tail
                .strip_prefix('"')
                .and_then(|t| t.strip_suffix('"'))
                .ok_or_else(|| err(line, "output word must be quoted"))?;
            Ok((rest[..pos].to_string(), Some(inner.chars().collect())))
        }
    }
}

pub fn parse_machine(text: &str) -> Result<Artifact> {
    let mut h = Header::default();
    let mut raw = Vec::new();
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = full.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest = rest.trim();
        let words: Vec<&str> = rest.split_whitespace().collect();
        let one = || -> Result<&str> {
            match words.as_slice() {
                [w] => Ok(w),
                _ => Err(err(line, format!("`{kw}` takes exactly one value"))),
            }
        };
        match kw {
            "machine" => h.name = Some(one()?.to_string()),
            "kind" => {
                let k = one()?;
                if !matches!(k, "dcm" | "ncm" | "transducer") {
                    return Err(err(line, format!("unknown kind {k:?}")));
                }
                h.kind = Some(k.to_string());
            }
            "acceptance" => {
                h.marked = Some(match one()? {
                    "marked" => true,
                    "unmarked" => false,
                    other => return Err(err(line, format!("unknown acceptance {other:?}"))),
                })
            }
            "counters" => {
                h.counters = Some(one()?.parse().map_err(|_| err(line, "counter count must be a number"))?)
            }
            "reversals" => {
                let v = one()?;
                h.reversals = Some(if v == "inf" {
                    None
                } else {
                    Some(v.parse().map_err(|_| err(line, "reversal bound must be a number or inf"))?)
                });
            }
            "alphabet" | "outalphabet" => {
                let syms = words.iter().map(|w| single_char(w, line)).collect::<Result<Vec<_>>>()?;
                if syms.contains(&'$') {
                    return Err(err(line, "`$` is reserved for the end marker"));
                }
                if syms.iter().collect::<HashSet<_>>().len() != syms.len() {
                    return Err(err(line, "repeated symbol"));
                }
                if kw == "alphabet" {
                    h.alphabet = Some(syms);
                } else {
                    h.outalphabet = Some(syms);
                }
            }
            "states" => {
                if words.is_empty() {
                    return Err(err(line, "at least one state is required"));
                }
                h.states = Some(words.iter().map(|s| s.to_string()).collect());
            }
            "initial" => h.initial = Some(one()?.to_string()),
            "final" => h.finals.extend(words.iter().map(|s| s.to_string())),
            "trans" => {
                let (body, output) = split_output(rest, line)?;
                raw.push(RawTrans { line, tokens: body.split_whitespace().map(String::from).collect(), output });
            }
            _ => return Err(err(line, format!("unknown keyword {kw:?}"))),
        }
    }
    let missing = |what: &str| err(0, format!("missing `{what}` line"));
    let name = h.name.ok_or_else(|| missing("machine"))?;
    let kind = h.kind.ok_or_else(|| missing("kind"))?;
    let marked = h.marked.ok_or_else(|| missing("acceptance"))?;
    let k = h.counters.ok_or_else(|| missing("counters"))?;
    if k > 20 {
        return Err(err(0, format!("{k} counters are more than the format supports")));
    }
    let l = h.reversals.ok_or_else(|| missing("reversals"))?;
    let alphabet = h.alphabet.ok_or_else(|| missing("alphabet"))?;
    let states = h.states.ok_or_else(|| missing("states"))?;
    let initial = h.initial.ok_or_else(|| missing("initial"))?;
    let transducer = kind == "transducer";
    if transducer != h.outalphabet.is_some() {
        return Err(err(0, "`outalphabet` is required for transducers and only for them"));
    }
    let ids: HashMap<&str, usize> = states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    if ids.len() != states.len() {
        return Err(err(0, "repeated state name"));
    }
    let state = |s: &str, line: usize| ids.get(s).copied().ok_or_else(|| err(line, format!("unknown state {s:?}")));
    let mut b = MachineBuilder::new(name, k, alphabet.clone());
    b.reversals(l).marked(marked).deterministic(kind == "dcm");
    for s in &states {
        b.add_state(s.clone());
    }
    b.set_initial(state(&initial, 0)?);
    for f in &h.finals {
        b.set_final(state(f, 0)?, true);
    }
    for r in raw {
        let line = r.line;
        let t = &r.tokens;
        let head = if k == 0 { 2 } else { 3 };
        let expected = head + 3 + k;
        if t.len() != expected || t[head] != "->" {
            return Err(err(line, format!("expected `trans <q> <sym> {}-> <p> <S|R>{}`", if k == 0 { "" } else { "<guard> " }, if k == 0 { "" } else { " <deltas>" })));
        }
        let from = state(&t[0], line)?;
        let input = if t[1] == "$" { Input::End } else { Input::Letter(single_char(&t[1], line)?) };
        let guards = if k == 0 { vec![Guard::ZERO] } else { expand_guard(&t[2], k, line)? };
        let to = state(&t[head + 1], line)?;
        let mv = match t[head + 2].as_str() {
            "S" => Move::Stay,
            "R" => Move::Right,
            other => return Err(err(line, format!("bad move {other:?}"))),
        };
        let deltas = t[head + 3..].iter().map(|d| parse_delta(d, line)).collect::<Result<Vec<_>>>()?;
        if r.output.is_some() && !transducer {
            return Err(err(line, "output on a non-transducer"));
        }
        for g in guards {
            let tr = Transition::new(from, input, g, to, mv, deltas.clone());
            b.add_transition(tr.with_output(r.output.clone().unwrap_or_default()));
        }
    }
    if transducer {
        let mut m = b.build();
        let det = m.is_structurally_deterministic();
        let mut b = m.to_builder();
        b.deterministic(det);
        m = b.build();
        Ok(Artifact::Transducer(CounterTransducer::new(m, h.outalphabet.unwrap())))
    } else {
        Ok(Artifact::Machine(b.build()))
    }
}

/// Parses a file that must describe an acceptor.
pub fn parse_acceptor(text: &str) -> Result<CounterMachine> {
    match parse_machine(text)? {
        Artifact::Machine(m) => Ok(m),
        Artifact::Transducer(_) => Err(err(0, "expected a machine, found a transducer")),
    }
}

/// State names made whitespace-free and unique, so the text parses back.
fn printable_names(m: &CounterMachine) -> Vec<String> {
    let mut used = HashSet::new();
    m.state_names()
        .iter()
        .map(|s| {
            let base: String = s.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
            let base = if base.is_empty() { "q".to_string() } else { base };
            let mut name = base.clone();
            let mut n = 1;
            while !used.insert(name.clone()) {
                name = format!("{base}_{n}");
                n += 1;
            }
            name
        })
        .collect()
}

fn write_machine(m: &CounterMachine, kind: &str, outalphabet: Option<&[char]>) -> String {
    let k = m.counters();
    let names = printable_names(m);
    let mut s = String::new();
    let _ = writeln!(s, "machine {}", m.name().replace(char::is_whitespace, "_"));
    let _ = writeln!(s, "kind {kind}");
    let _ = writeln!(s, "acceptance {}", if m.is_marked() { "marked" } else { "unmarked" });
    let _ = writeln!(s, "counters {k}");
    match m.reversals() {
        Some(l) => {
            let _ = writeln!(s, "reversals {l}");
        }
        None => s.push_str("reversals inf\n"),
    }
    let join = |cs: &[char]| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "alphabet {}", join(m.alphabet()));
    if let Some(out) = outalphabet {
        let _ = writeln!(s, "outalphabet {}", join(out));
    }
    let _ = writeln!(s, "states {}", names.join(" "));
    let _ = writeln!(s, "initial {}", names[m.initial()]);
    let finals: Vec<&str> = m.finals().map(|q| names[q].as_str()).collect();
    if finals.is_empty() {
        s.push_str("final\n");
    } else {
        let _ = writeln!(s, "final {}", finals.join(" "));
    }
    for t in m.sorted_transitions() {
        let _ = write!(s, "trans {} {}", names[t.from], t.input);
        if k > 0 {
            let _ = write!(s, " {}", t.guard.render(k));
        }
        let _ = write!(s, " -> {} {}", names[t.to], t.mv);
        for d in &t.deltas {
            let _ = write!(s, " {}", if *d > 0 { "+1".to_string() } else { d.to_string() });
        }
        if outalphabet.is_some() {
            let _ = write!(s, " output \"{}\"", t.output.iter().collect::<String>());
        }
        s.push('\n');
    }
    s
}

/// Canonical text: header, states in id order, transitions sorted with guards expanded.
pub fn serialize_machine(m: &CounterMachine) -> String {
    write_machine(m, if m.is_deterministic() { "dcm" } else { "ncm" }, None)
}

pub fn serialize_transducer(t: &CounterTransducer) -> String {
    write_machine(t.machine(), "transducer", Some(t.output_alphabet()))
}

pub fn serialize_artifact(a: &Artifact) -> String {
    match a {
        Artifact::Machine(m) => serialize_machine(m),
        Artifact::Transducer(t) => serialize_transducer(t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "machine t\nkind dcm\nacceptance marked\ncounters 1\nreversals 1\nalphabet a\nstates q f\ninitial q\nfinal f\ntrans q a * -> q R +1\ntrans q $ z -> f S 0\n";

    #[test]
    fn star_guard_expands() {
        let m = parse_acceptor(SMALL).unwrap();
        assert_eq!(m.transitions().len(), 3);
        assert!(m.is_marked() && m.is_deterministic());
    }

    #[test]
    fn unknown_state_has_line_number() {
        let text = SMALL.replace("-> f S 0", "-> g S 0");
        match parse_machine(&text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 11);
                assert!(message.contains("unknown state"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn round_trip_is_stable() {
        let m = parse_acceptor(SMALL).unwrap();
        let text = serialize_machine(&m);
        assert!(!text.contains('*'));
        let again = parse_acceptor(&text).unwrap();
        assert_eq!(m, again);
        assert_eq!(text, serialize_machine(&again));
    }

    #[test]
    fn hash_is_a_symbol_inside_lines() {
        let text = "machine h\nkind dcm\nacceptance unmarked\ncounters 0\nreversals 0\nalphabet #\nstates a b\ninitial a\nfinal b\n# comment\ntrans a # -> b R\n";
        let m = parse_acceptor(text).unwrap();
        assert_eq!(m.transitions().len(), 1);
        assert_eq!(m.transitions()[0].input, Input::Letter('#'));
    }

    #[test]
    fn transducer_outputs_are_quoted() {
        let text = "machine t\nkind transducer\nacceptance marked\ncounters 0\nreversals 0\nalphabet a\noutalphabet x\nstates q\ninitial q\nfinal q\ntrans q a -> q R output \"xx\"\n";
        let a = parse_machine(text).unwrap();
        let s = serialize_artifact(&a);
        assert!(s.contains("output \"xx\""));
        assert_eq!(parse_machine(&s).unwrap(), a);
    }
}
