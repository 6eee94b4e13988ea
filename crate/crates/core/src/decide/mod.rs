//! Decision procedures: emptiness, membership, infiniteness, inclusion,
//! prefix-freeness and Parikh images.
//!
//! Emptiness goes through a finite abstraction. Counters are first split so
//! that each reverses at most once; the phase automaton then tracks, per
//! counter, whether it is still at zero, rising, falling or back at zero.
//! Which modes a run ends in fixes linear conditions on the numbers of
//! increments and decrements, so the language is non-empty iff the Parikh image
//! of some accepting path set meets those conditions.

mod endmarker;
mod kleene;
mod phase;
mod prefix;
mod semilinear;
mod witness;

use std::collections::BTreeMap;

pub use endmarker::end_marker_behavior;
pub use kleene::{eliminate, Kleene, Regex};
pub use phase::{build_phase_automaton, parikh_edges, to_one_reversal, EndDemand, Head, Mode, PhaseAutomaton, PhaseEdge, PhaseNode};
pub use semilinear::{linear_feasible, restrict, solution_basis, Constraint, LinearSet, Relation, SemilinearSet, SolutionBasis};

use crate::constructions::{boolean_dcm, intersect_machines, intersect_regular, BooleanMode};
use crate::error::{Error, Result};
use crate::machine::{union_alphabet, CounterMachine};
use crate::regular::Dfa;
use crate::sim::{accepts_bounded, verdict_deterministic, Verdict};

/// Configurations explored by the cheap searches before the exact procedures take over.
const SEARCH_LIMIT: usize = 2_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    Nonempty(Vec<char>),
}

impl Emptiness {
    pub fn is_empty(&self) -> bool {
        matches!(self, Emptiness::Empty)
    }
}

fn require_finite(m: &CounterMachine) -> Result<()> {
    if m.counters() > 0 && m.reversals().is_none() {
        return Err(Error::InfiniteBudget);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LetterView {
    Ignore,
    Total,
    PerLetter,
}

/// Accepting path sets of the phase automaton, grouped by the conditions their
/// end modes impose. Vectors hold the letter coordinates first, then one
/// increment and one decrement total per constrained counter.
struct Image {
    set: SemilinearSet,
    constraints: Vec<Constraint>,
}

fn images(m: &CounterMachine, view: LetterView) -> Result<Vec<Image>> {
    require_finite(m)?;
    let p = build_phase_automaton(&to_one_reversal(m)?)?;
    let mut groups: BTreeMap<Vec<EndDemand>, Vec<usize>> = BTreeMap::new();
    for &a in &p.accepting {
        groups.entry(p.demands(a)).or_default().push(a);
    }
    let letters = match view {
        LetterView::Ignore => 0,
        LetterView::Total => 1,
        LetterView::PerLetter => p.alphabet.len(),
    };
    let mut out = Vec::new();
    for (demands, targets) in groups {
        let constrained: Vec<usize> = (0..p.counters).filter(|&i| demands[i] != EndDemand::Free).collect();
        let dim = letters + 2 * constrained.len();
        let set = p.path_image(&targets, dim, |_, e| {
            let mut v = vec![0u64; dim];
            if let Some(c) = e.letter {
                match view {
                    LetterView::Ignore => {}
                    LetterView::Total => v[0] = 1,
                    LetterView::PerLetter => v[p.alphabet.iter().position(|&x| x == c).unwrap()] = 1,
                }
            }
            for (j, &i) in constrained.iter().enumerate() {
                match e.deltas[i] {
                    1 => v[letters + 2 * j] = 1,
                    -1 => v[letters + 2 * j + 1] = 1,
                    _ => {}
                }
            }
            v
        });
        let constraints = constrained
            .iter()
            .enumerate()
            .map(|(j, &i)| {
                let mut coeffs = vec![0i64; dim];
                coeffs[letters + 2 * j] = 1;
                coeffs[letters + 2 * j + 1] = -1;
                match demands[i] {
                    EndDemand::Positive => Constraint::new(coeffs, Relation::Ge, 1),
                    _ => Constraint::new(coeffs, Relation::Eq, 0),
                }
            })
            .collect();
        out.push(Image { set, constraints });
    }
    Ok(out)
}

/// Non-emptiness decided purely through the phase automaton and integer
/// feasibility, without searching for a word.
pub fn nonempty_by_phases(m: &CounterMachine) -> Result<bool> {
    for image in images(m, LetterView::Ignore)? {
        for c in &image.set.components {
            if linear_feasible(c, &image.constraints)?.is_some() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Emptiness with a witness word when the language is non-empty.
///
/// A bounded breadth-first search over configurations runs first; when it
/// finds nothing, the phase-automaton procedure decides, and a non-empty
/// verdict is followed by an unbounded search, which must then succeed.
pub fn is_empty(m: &CounterMachine) -> Result<Emptiness> {
    require_finite(m)?;
    if let Some(w) = witness::find_witness(m, Some(SEARCH_LIMIT)) {
        return Ok(Emptiness::Nonempty(w));
    }
    if !nonempty_by_phases(m)? {
        return Ok(Emptiness::Empty);
    }
    let w = witness::find_witness(m, None).expect("a non-empty language has an accepted word");
    Ok(Emptiness::Nonempty(w))
}

fn is_deterministic(m: &CounterMachine) -> bool {
    m.is_deterministic() && m.is_structurally_deterministic()
}

pub fn member(m: &CounterMachine, w: &[char]) -> Result<bool> {
    if w.iter().any(|&c| !m.has_letter(c)) {
        return Ok(false);
    }
    if is_deterministic(m) {
        return Ok(verdict_deterministic(m, w)? == Verdict::Accept);
    }
    if let Some(b) = accepts_bounded(m, w, SEARCH_LIMIT) {
        return Ok(b);
    }
    nonempty_by_phases(&intersect_regular(m, &Dfa::word(w, m.alphabet())?)?)
}

/// All words up to `max_len`, shortest first and in alphabet order within a length.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for w in &layer {
            for &c in alphabet {
                let mut v: Vec<char> = w.clone();
                v.push(c);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Accepted words of length at most `max_len`, in the order of [`all_words`].
pub fn enumerate_words(m: &CounterMachine, max_len: usize) -> Result<Vec<Vec<char>>> {
    let mut out = Vec::new();
    for w in all_words(m.alphabet(), max_len) {
        if member(m, &w)? {
            out.push(w);
        }
    }
    Ok(out)
}

/// Whether the language is infinite: some accepting path set has a feasible
/// point and a feasible direction that reads at least one letter.
pub fn is_infinite(m: &CounterMachine) -> Result<bool> {
    for image in images(m, LetterView::Total)? {
        let dim = image.set.dim;
        let mut homogeneous: Vec<Constraint> = image
            .constraints
            .iter()
            .map(|k| Constraint::new(k.coeffs.clone(), k.relation, 0))
            .collect();
        let mut reads = vec![0i64; dim];
        reads[0] = 1;
        homogeneous.push(Constraint::new(reads, Relation::Ge, 1));
        for c in &image.set.components {
            if linear_feasible(c, &image.constraints)?.is_none() {
                continue;
            }
            let cone = LinearSet::new(vec![0; dim], c.periods.clone())?;
            if linear_feasible(&cone, &homogeneous)?.is_some() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompareMode {
    Subset,
    Equal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub holds: bool,
    /// A word in one language but not the other.
    pub counterexample: Option<Vec<char>>,
}

fn subset(m1: &CounterMachine, m2: &CounterMachine) -> Result<Comparison> {
    let sigma = union_alphabet(m1.alphabet(), m2.alphabet());
    let not2 = boolean_dcm(&m2.with_alphabet(&sigma), None, BooleanMode::Not)?;
    let diff = intersect_machines(m1, &not2)?;
    Ok(match is_empty(&diff)? {
        Emptiness::Empty => Comparison { holds: true, counterexample: None },
        Emptiness::Nonempty(w) => Comparison { holds: false, counterexample: Some(w) },
    })
}

/// `L(m1) ⊆ L(m2)` or `L(m1) = L(m2)`. The right-hand machine is complemented,
/// so it must be deterministic with terminating stay runs; for equality both must.
pub fn compare(m1: &CounterMachine, m2: &CounterMachine, mode: CompareMode) -> Result<Comparison> {
    let forward = subset(m1, m2)?;
    if mode == CompareMode::Subset || !forward.holds {
        return Ok(forward);
    }
    subset(m2, m1)
}

/// No accepted word is a proper prefix of another: `L ∩ LΣ⁺ = ∅`.
///
/// Two runs share the input until the shorter word ends, where the first one
/// checks acceptance on the end marker. For deterministic machines the runs
/// coincide up to that point, so one run with its counters copied at the split
/// suffices.
pub fn prefix_free_check_machine(m: &CounterMachine) -> Result<bool> {
    require_finite(m)?;
    if is_deterministic(m) {
        return Ok(is_empty(&prefix::prefix_extension_machine(m))?.is_empty());
    }
    Ok(is_empty(&prefix::prefix_extension_machine_nondet(m))?.is_empty())
}

/// Letter-count vectors of the accepted words.
///
/// Each accepting path set is cut down to the vectors meeting its end-mode
/// conditions, using the minimal solutions and the Hilbert basis of the
/// multiplier system, and then projected onto the letters.
pub fn parikh_image(m: &CounterMachine) -> Result<SemilinearSet> {
    let letters = m.alphabet().len();
    let mut out = SemilinearSet::empty(letters);
    for image in images(m, LetterView::PerLetter)? {
        for c in &image.set.components {
            let kept = restrict(c, &image.constraints)?;
            out = out.union(&kept.map(letters, |v| v[..letters].to_vec()));
        }
    }
    Ok(out)
}
