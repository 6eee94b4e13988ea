//! Finite automata: complete DFAs and unary tail/loop languages.

mod dfa;
mod unary;

pub use dfa::{BoolOp, Dfa};
pub use unary::{align_unary_family, periodic_to_unary, AlignedFamily, UnaryDfa};

pub fn word_dfa(w: &[char], alphabet: &[char]) -> crate::Result<Dfa> {
    Dfa::word(w, alphabet)
}

pub fn dfa_combine(d1: &Dfa, d2: &Dfa, op: BoolOp) -> crate::Result<Dfa> {
    d1.combine(d2, op)
}

pub fn dfa_complement(d: &Dfa) -> Dfa {
    d.complement()
}

pub fn prefix_free_check_dfa(d: &Dfa) -> bool {
    d.is_prefix_free()
}

pub fn unary_canonicalize(d: &Dfa) -> crate::Result<UnaryDfa> {
    UnaryDfa::from_dfa(d)
}
