use crate::constructions::concat_ncm;
use crate::error::{Error, Result};
use crate::machine::{CounterMachine, Guard, Input, MachineBuilder, Move, StateId, StateInterner, Transition};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertionOp {
    Prefix,
    Suffix,
    Infix,
    Outfix,
    Embed,
}

/// Inverse of an insertion operation as a nondeterministic machine.
///
/// `param` is the number of gaps for [`InsertionOp::Embed`] and ignored otherwise.
pub fn inverse_insertion_ncm(m: &CounterMachine, op: InsertionOp, param: usize) -> Result<CounterMachine> {
    let all = CounterMachine::universal(m.alphabet());
    let out = match op {
        InsertionOp::Prefix => concat_ncm(m, &all)?,
        InsertionOp::Suffix => concat_ncm(&all, m)?,
        InsertionOp::Infix => concat_ncm(&concat_ncm(&all, m)?, &all)?,
        InsertionOp::Outfix => gapped(m, 1),
        InsertionOp::Embed => {
            if param < 1 {
                return Err(Error::InvalidParameter(format!("embedding needs at least one gap, got {param}")));
            }
            gapped(m, param)
        }
    };
    let name = match op {
        InsertionOp::Prefix => "pref",
        InsertionOp::Suffix => "suff",
        InsertionOp::Infix => "inf",
        InsertionOp::Outfix => "outf",
        InsertionOp::Embed => "emb",
    };
    Ok(out.renamed(format!("{name}_inv_{}", m.name())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Point {
    /// Head just arrived on a cell; no stay move has read it yet.
    Fresh(StateId, usize),
    Mid(StateId, usize),
    Gap(StateId, usize),
}

/// Runs `m` while up to `gaps` stretches of input are skipped with the counters
/// frozen. A gap may only open on a cell `m` has not looked at yet, so stay
/// moves never see two different symbols.
fn gapped(m: &CounterMachine, gaps: usize) -> CounterMachine {
    let k = m.counters();
    let mut b = MachineBuilder::new(m.name(), k, m.alphabet().to_vec());
    b.reversals(m.reversals()).marked(true).deterministic(false);
    let mut states: StateInterner<Point> = StateInterner::new();
    let name = |p: &Point| match *p {
        Point::Fresh(q, u) => format!("{}^{u}", m.state_name(q)),
        Point::Mid(q, u) => format!("{}'^{u}", m.state_name(q)),
        Point::Gap(q, u) => format!("gap:{}^{u}", m.state_name(q)),
    };
    let init = states.intern(&mut b, Point::Fresh(m.initial(), 0), name);
    b.set_initial(init);
    let letters: Vec<Input> = m.alphabet().iter().map(|&c| Input::Letter(c)).collect();
    let zero = vec![0i8; k];
    while let Some((id, p)) = states.next() {
        match p {
            Point::Fresh(q, u) | Point::Mid(q, u) => {
                b.set_final(id, m.is_final(q));
                for (_, t) in m.outgoing(q) {
                    let to = match t.mv {
                        Move::Right => Point::Fresh(t.to, u),
                        Move::Stay => Point::Mid(t.to, u),
                    };
                    let to = states.intern(&mut b, to, name);
                    let mut nt = t.clone();
                    nt.from = id;
                    nt.to = to;
                    b.add_transition(nt);
                }
                if matches!(p, Point::Fresh(..)) && u < gaps {
                    let to = states.intern(&mut b, Point::Gap(q, u + 1), name);
                    for &x in &letters {
                        for g in Guard::all(k) {
                            b.add_transition(Transition::new(id, x, g, to, Move::Right, zero.clone()));
                        }
                    }
                }
            }
            Point::Gap(q, u) => {
                let back = states.intern(&mut b, Point::Fresh(q, u), name);
                for g in Guard::all(k) {
                    for &x in &letters {
                        b.add_transition(Transition::new(id, x, g, id, Move::Right, zero.clone()));
                        b.add_transition(Transition::new(id, x, g, back, Move::Stay, zero.clone()));
                    }
                    b.add_transition(Transition::new(id, Input::End, g, back, Move::Stay, zero.clone()));
                }
            }
        }
    }
    b.build()
}
