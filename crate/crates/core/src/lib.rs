//! Reversal-bounded counter machines.
//!
//! Deterministic and nondeterministic one-way machines with guarded counters,
//! closure constructions between them (end-marker elimination, concatenation
//! with prefix-free and regular languages, inverse insertions, inverse
//! counter transductions) and decision procedures (emptiness, membership,
//! infiniteness, inclusion) built on Parikh images.

pub mod constructions;
pub mod corpus;
pub mod decide;
pub mod error;
pub mod format;
pub mod machine;
pub mod normalize;
pub mod random;
pub mod regular;
pub mod sim;
pub mod transduce;

pub use error::{Error, Result};
pub use format::{parse_machine, serialize_machine, Artifact};
pub use machine::{
    validate_machine, CounterMachine, Guard, Input, MachineBuilder, Move, StateId, Transition, ValidationReport,
    Violation, ViolationKind,
};
pub use regular::{Dfa, UnaryDfa};
pub use sim::{run_deterministic, step, Configuration, CounterBudget, Direction, RunTrace, Verdict};
pub use transduce::CounterTransducer;
