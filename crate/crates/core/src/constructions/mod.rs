//! Closure constructions producing new counter machines from old ones.

mod concat;
mod endmarker;
mod insertion;
mod product;
mod quotient;

pub use concat::{
    concat_dcm1_regular, concat_dcmne_regular, concat_ncm, concat_pf_dcmne_dcm, concat_pf_dcmne_dcm_unchecked,
    concat_pf_regular_dcm, inverse_prefix_dcm1,
};
pub use endmarker::{make_non_exiting, strip_end_marker_one_counter, strip_end_marker_traced, Lemma1Machine, Lemma1State};
pub use insertion::{inverse_insertion_ncm, InsertionOp};
pub use product::{boolean_dcm, intersect_machines, intersect_regular, BooleanMode};
pub use quotient::left_quotient_word;

use crate::machine::{union_alphabet, CounterMachine};

pub(crate) fn max_bound(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        _ => None,
    }
}

/// Both machines over the union of their alphabets.
pub(crate) fn unify(m1: &CounterMachine, m2: &CounterMachine) -> (CounterMachine, CounterMachine) {
    let sigma = union_alphabet(m1.alphabet(), m2.alphabet());
    (m1.with_alphabet(&sigma), m2.with_alphabet(&sigma))
}

/// `d` followed by `k` zeros.
pub(crate) fn pad_right(d: &[i8], k: usize) -> Vec<i8> {
    let mut v = d.to_vec();
    v.resize(d.len() + k, 0);
    v
}

/// `k` zeros followed by `d`.
pub(crate) fn pad_left(d: &[i8], k: usize) -> Vec<i8> {
    let mut v = vec![0; k];
    v.extend_from_slice(d);
    v
}
