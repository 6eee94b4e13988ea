//! Seeded generators of small machines and automata for testing.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, Transition};
use crate::regular::Dfa;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug)]
pub struct MachineShape {
    pub max_states: usize,
    pub max_counters: usize,
    pub reversals: u32,
    pub alphabet: Vec<char>,
    pub deterministic: bool,
    /// `None` picks marked or unmarked at random.
    pub marked: Option<bool>,
    /// Chance that a (state, symbol, guard) slot gets a transition.
    pub density: f64,
    /// Chance that a letter transition is a stay move.
    pub stay_chance: f64,
}

impl Default for MachineShape {
    fn default() -> Self {
        MachineShape {
            max_states: 4,
            max_counters: 2,
            reversals: 1,
            alphabet: vec!['a', 'b'],
            deterministic: true,
            marked: None,
            density: 0.6,
            stay_chance: 0.2,
        }
    }
}

fn random_deltas<R: Rng>(rng: &mut R, guard: Guard, k: usize) -> Vec<i8> {
    (0..k)
        .map(|c| {
            let choices: &[i8] = if guard.is_positive(c) { &[-1, 0, 1] } else { &[0, 1] };
            *choices.choose(rng).unwrap()
        })
        .collect()
}

/// A well-formed machine of the given shape.
pub fn random_machine<R: Rng>(rng: &mut R, shape: &MachineShape) -> CounterMachine {
    let n = rng.gen_range(1..=shape.max_states);
    let k = rng.gen_range(0..=shape.max_counters);
    let marked = shape.marked.unwrap_or_else(|| rng.gen_bool(0.5));
    let mut b = MachineBuilder::new("random", k, shape.alphabet.clone());
    b.reversals(Some(shape.reversals)).marked(marked).deterministic(shape.deterministic);
    for q in 0..n {
        b.add_state(format!("q{q}"));
    }
    b.set_initial(0);
    for q in 0..n {
        b.set_final(q, rng.gen_bool(0.35));
    }
    let mut inputs: Vec<Input> = shape.alphabet.iter().map(|&c| Input::Letter(c)).collect();
    if marked {
        inputs.push(Input::End);
    }
    for q in 0..n {
        for &x in &inputs {
            for g in Guard::all(k) {
                let count = if shape.deterministic { 1 } else { rng.gen_range(1..=2) };
                for _ in 0..count {
                    if !rng.gen_bool(shape.density) {
                        continue;
                    }
                    let mv = if x.is_end() || rng.gen_bool(shape.stay_chance) { Move::Stay } else { Move::Right };
                    let to = rng.gen_range(0..n);
                    let deltas = random_deltas(rng, g, k);
                    b.add_transition(Transition::new(q, x, g, to, mv, deltas));
                }
            }
        }
    }
    b.build()
}

/// A complete DFA with up to `max_states` states.
pub fn random_dfa<R: Rng>(rng: &mut R, max_states: usize, alphabet: &[char]) -> Dfa {
    let n = rng.gen_range(1..=max_states);
    let finals = (0..n).map(|_| rng.gen_bool(0.4)).collect();
    let delta = (0..n).map(|_| alphabet.iter().map(|_| rng.gen_range(0..n)).collect()).collect();
    Dfa::new(alphabet.to_vec(), 0, finals, delta).expect("generated DFA is well formed")
}
