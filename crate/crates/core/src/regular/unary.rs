use crate::error::{Error, Result};
use crate::regular::Dfa;

/// Unary regular language in tail/loop form: `a^i` is accepted iff
/// `accept[pos(i)]`, where `pos(i) = i` for `i < tail` and
/// `tail + (i - tail) mod loop_len` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnaryDfa {
    tail: usize,
    loop_len: usize,
    accept: Vec<bool>,
}

impl UnaryDfa {
    pub fn new(tail: usize, loop_len: usize, accept: Vec<bool>) -> Result<UnaryDfa> {
        if loop_len == 0 || accept.len() != tail + loop_len {
            return Err(Error::InvalidParameter(format!(
                "tail {tail} and loop {loop_len} need {} accept bits, got {}",
                tail + loop_len,
                accept.len()
            )));
        }
        Ok(UnaryDfa { tail, loop_len, accept })
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn loop_len(&self) -> usize {
        self.loop_len
    }

    pub fn position(&self, i: usize) -> usize {
        if i < self.tail {
            i
        } else {
            self.tail + (i - self.tail) % self.loop_len
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.accept[self.position(i)]
    }

    /// Accepting positions, each in `0..tail + loop_len`.
    pub fn accept_positions(&self) -> Vec<usize> {
        (0..self.accept.len()).filter(|&p| self.accept[p]).collect()
    }

    /// Smallest equivalent tail/loop shape.
    pub fn canonical(&self) -> UnaryDfa {
        let loop_bits = &self.accept[self.tail..];
        let period = (1..=self.loop_len)
            .filter(|p| self.loop_len % p == 0)
            .find(|&p| (0..self.loop_len).all(|i| loop_bits[i] == loop_bits[i % p]))
            .unwrap();
        let mut tail = self.tail;
        // rotate the loop backwards while the tail's last bit matches
        let mut loop_v: Vec<bool> = loop_bits[..period].to_vec();
        while tail > 0 && self.accept[tail - 1] == loop_v[period - 1] {
            tail -= 1;
            loop_v.rotate_right(1);
        }
        let mut accept = self.accept[..tail].to_vec();
        accept.extend(loop_v);
        UnaryDfa { tail, loop_len: period, accept }
    }

    /// Re-expresses the language over a longer tail and a multiple of the loop.
    pub fn reshaped(&self, tail: usize, loop_len: usize) -> Result<UnaryDfa> {
        if tail < self.tail || loop_len == 0 || loop_len % self.loop_len != 0 {
            return Err(Error::InvalidParameter(format!(
                "cannot reshape ({}, {}) to ({tail}, {loop_len})",
                self.tail, self.loop_len
            )));
        }
        let accept = (0..tail + loop_len).map(|i| self.contains(i)).collect();
        Ok(UnaryDfa { tail, loop_len, accept })
    }

    pub fn to_dfa(&self, letter: char) -> Dfa {
        let n = self.tail + self.loop_len;
        let delta = (0..n).map(|p| vec![if p + 1 < n { p + 1 } else { self.tail }]).collect();
        Dfa::new(vec![letter], 0, self.accept.clone(), delta).unwrap()
    }

    /// Canonical tail/loop form of a one-letter DFA.
    pub fn from_dfa(d: &Dfa) -> Result<UnaryDfa> {
        if d.alphabet().len() != 1 {
            return Err(Error::InvalidParameter(format!(
                "unary canonicalization needs a one-letter alphabet, got {:?}",
                d.alphabet()
            )));
        }
        let c = d.alphabet()[0];
        let m = d.minimize();
        let mut seen = vec![usize::MAX; m.num_states()];
        let mut q = m.initial();
        let mut accept = Vec::new();
        let mut i = 0;
        while seen[q] == usize::MAX {
            seen[q] = i;
            accept.push(m.is_final(q));
            q = m.next(q, c).unwrap();
            i += 1;
        }
        let tail = seen[q];
        Ok(UnaryDfa { tail, loop_len: i - tail, accept })
    }
}

/// Family of unary languages brought to a common tail and loop length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlignedFamily {
    pub tail: usize,
    pub loop_len: usize,
    pub members: Vec<UnaryDfa>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Common shape with tail `max(1, max tails)` and loop `lcm` of loops.
pub fn align_unary_family(family: &[UnaryDfa]) -> Result<AlignedFamily> {
    if family.is_empty() {
        return Err(Error::InvalidParameter("empty unary family".into()));
    }
    let tail = family.iter().map(UnaryDfa::tail).max().unwrap().max(1);
    let loop_len = family.iter().map(UnaryDfa::loop_len).fold(1, |a, b| a / gcd(a, b) * b);
    let members = family.iter().map(|u| u.reshaped(tail, loop_len)).collect::<Result<_>>()?;
    Ok(AlignedFamily { tail, loop_len, members })
}

/// Eventually periodic set: the given tail positions (each `< tail`) plus
/// `tail + o + n * loop_len` for each loop offset `o` and every `n >= 0`.
pub fn periodic_to_unary(
    tail_accepts: &[usize],
    loop_accepts: &[usize],
    tail: usize,
    loop_len: usize,
) -> Result<UnaryDfa> {
    if loop_len == 0 {
        return Err(Error::InvalidParameter("loop length must be positive".into()));
    }
    let mut accept = vec![false; tail + loop_len];
    for &p in tail_accepts {
        if p >= tail {
            return Err(Error::InvalidParameter(format!("tail position {p} outside tail {tail}")));
        }
        accept[p] = true;
    }
    for &o in loop_accepts {
        if o >= loop_len {
            return Err(Error::InvalidParameter(format!("loop offset {o} outside loop {loop_len}")));
        }
        accept[tail + o] = true;
    }
    Ok(UnaryDfa { tail, loop_len, accept })
}
