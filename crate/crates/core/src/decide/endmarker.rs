use crate::error::{precondition, Result};
use crate::machine::{CounterMachine, Guard, Input, StateId};
use crate::regular::{periodic_to_unary, UnaryDfa};
use crate::sim::{run_from, Configuration, CounterBudget, RunOptions, Verdict};

/// Counter values `i` from which the end-marker run of `m` started in `(q, i)`
/// reaches a final state.
///
/// While the counter is positive the run follows a fixed state sequence, the
/// positive walk of `q`. Once the value exceeds twice the number of states the
/// outcome either no longer depends on it (the walk halts or never returns to
/// zero) or repeats with period `|D|`, where `D < 0` is the net change of one
/// turn of the walk's cycle. Values below that bound plus one period are
/// simulated directly.
pub fn end_marker_behavior(m: &CounterMachine, q: StateId) -> Result<UnaryDfa> {
    if m.counters() != 1 || !m.is_deterministic() || !m.is_structurally_deterministic() {
        return Err(precondition("end-marker analysis needs a deterministic one-counter machine"));
    }
    if q >= m.num_states() {
        return Err(precondition(format!("no state {q}")));
    }
    let n = m.num_states();
    let tail = 2 * n + 1;
    let period = positive_walk_period(m, q);
    let opts = RunOptions { enforce_budget: false };
    let outcome = |i: usize| {
        let start = Configuration { state: q, consumed: 0, counters: vec![i as u64], budgets: vec![CounterBudget::default()] };
        run_from(m, start, &[], opts) == Verdict::Accept
    };
    let tail_accepts: Vec<usize> = (0..tail).filter(|&i| outcome(i)).collect();
    let loop_accepts: Vec<usize> = (0..period).filter(|&o| outcome(tail + o)).collect();
    Ok(periodic_to_unary(&tail_accepts, &loop_accepts, tail, period)?.canonical())
}

/// Period after which the outcome of large counter values repeats.
fn positive_walk_period(m: &CounterMachine, q: StateId) -> usize {
    let mut seen: Vec<Option<usize>> = vec![None; m.num_states()];
    let mut net = vec![0i64];
    let mut cur = q;
    loop {
        let step = net.len() - 1;
        if let Some(first) = seen[cur] {
            let d = net[step] - net[first];
            return if d >= 0 { 1 } else { d.unsigned_abs() as usize };
        }
        seen[cur] = Some(step);
        let Some(&ti) = m.lookup(cur, Input::End, Guard(1)).first() else {
            return 1;
        };
        let t = m.transition(ti);
        net.push(net[step] + t.deltas[0] as i64);
        cur = t.to;
    }
}
