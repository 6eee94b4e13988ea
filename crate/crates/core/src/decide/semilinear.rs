//! Linear and semilinear sets of non-negative integer vectors, and integer
//! feasibility of linear constraints over them.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

pub type Vector = Vec<u64>;

/// `{ base + Σ λⱼ periods[j] : λ ∈ ℕⁿ }`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearSet {
    pub base: Vector,
    pub periods: Vec<Vector>,
}

fn add(a: &[u64], b: &[u64]) -> Vector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn scale_add(acc: &mut [u64], v: &[u64], t: u64) {
    acc.iter_mut().zip(v).for_each(|(a, x)| *a += t * x);
}

fn render(v: &[u64]) -> String {
    let parts: Vec<String> = v.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Search budget for the redundancy checks used during simplification.
const SPAN_BUDGET: usize = 20_000;

/// Is `target` a non-negative integer combination of `gens`? `None` when the
/// search budget ran out.
fn in_span(target: &[u64], gens: &[Vector], budget: &mut usize) -> Option<bool> {
    fn go(r: &mut Vec<u64>, gens: &[Vector], j: usize, failed: &mut HashSet<(usize, Vec<u64>)>, budget: &mut usize) -> Option<bool> {
        if r.iter().all(|&x| x == 0) {
            return Some(true);
        }
        if j == gens.len() || failed.contains(&(j, r.clone())) {
            return Some(false);
        }
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let g = &gens[j];
        let max = g
            .iter()
            .zip(r.iter())
            .filter(|(&x, _)| x > 0)
            .map(|(&x, &y)| y / x)
            .min()
            .unwrap_or(0);
        for t in (0..=max).rev() {
            let mut next = r.clone();
            next.iter_mut().zip(g).for_each(|(a, x)| *a -= t * x);
            if go(&mut next, gens, j + 1, failed, budget)? {
                return Some(true);
            }
        }
        failed.insert((j, r.clone()));
        Some(false)
    }
    let gens: Vec<Vector> = gens.iter().filter(|g| g.iter().any(|&x| x > 0)).cloned().collect();
    go(&mut target.to_vec(), &gens, 0, &mut HashSet::new(), budget)
}

impl LinearSet {
    pub fn new(base: Vector, periods: Vec<Vector>) -> Result<LinearSet> {
        for p in &periods {
            if p.len() != base.len() {
                return Err(Error::DimensionMismatch { expected: base.len(), found: p.len() });
            }
        }
        Ok(LinearSet { base, periods }.normalized())
    }

    pub fn point(v: Vector) -> LinearSet {
        LinearSet { base: v, periods: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// The member selected by multipliers `lambda`.
    pub fn evaluate(&self, lambda: &[u64]) -> Vector {
        let mut v = self.base.clone();
        for (p, &t) in self.periods.iter().zip(lambda) {
            scale_add(&mut v, p, t);
        }
        v
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        if v.len() != self.dim() || v.iter().zip(&self.base).any(|(a, b)| a < b) {
            return false;
        }
        let r: Vector = v.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut budget = usize::MAX;
        in_span(&r, &self.periods, &mut budget).unwrap_or(false)
    }

    /// Zero periods dropped, periods sorted and deduplicated, and periods that
    /// are combinations of the others removed.
    fn normalized(mut self) -> LinearSet {
        self.periods.retain(|p| p.iter().any(|&x| x > 0));
        self.periods.sort();
        self.periods.dedup();
        let mut i = 0;
        while i < self.periods.len() {
            let others: Vec<Vector> =
                self.periods.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| p.clone()).collect();
            if in_span(&self.periods[i], &others, &mut SPAN_BUDGET.clone()) == Some(true) {
                self.periods.remove(i);
            } else {
                i += 1;
            }
        }
        self
    }

    /// Sufficient test for `self ⊆ other`.
    fn covered_by(&self, other: &LinearSet) -> bool {
        if self.base.iter().zip(&other.base).any(|(a, b)| a < b) {
            return false;
        }
        let r: Vector = self.base.iter().zip(&other.base).map(|(a, b)| a - b).collect();
        let mut budget = SPAN_BUDGET;
        in_span(&r, &other.periods, &mut budget) == Some(true)
            && self.periods.iter().all(|p| in_span(p, &other.periods, &mut budget) == Some(true))
    }

    fn sum(&self, other: &LinearSet) -> LinearSet {
        let mut periods = self.periods.clone();
        periods.extend(other.periods.iter().cloned());
        LinearSet { base: add(&self.base, &other.base), periods }.normalized()
    }

    /// Image under the linear map `f` applied to every generator.
    pub fn map(&self, f: impl Fn(&[u64]) -> Vector) -> LinearSet {
        LinearSet { base: f(&self.base), periods: self.periods.iter().map(|p| f(p)).collect() }.normalized()
    }
}

impl fmt::Display for LinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let periods: Vec<String> = self.periods.iter().map(|p| render(p)).collect();
        write!(f, "linear base={} periods=[{}]", render(&self.base), periods.join(","))
    }
}

/// Finite union of linear sets of one dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemilinearSet {
    pub dim: usize,
    pub components: Vec<LinearSet>,
}

impl SemilinearSet {
    pub fn empty(dim: usize) -> SemilinearSet {
        SemilinearSet { dim, components: Vec::new() }
    }

    pub fn point(v: Vector) -> SemilinearSet {
        SemilinearSet { dim: v.len(), components: vec![LinearSet::point(v)] }
    }

    pub fn zero(dim: usize) -> SemilinearSet {
        SemilinearSet::point(vec![0; dim])
    }

    pub fn from_components(dim: usize, components: Vec<LinearSet>) -> Result<SemilinearSet> {
        for c in &components {
            if c.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: c.dim() });
            }
        }
        Ok(SemilinearSet { dim, components }.simplified())
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.components.iter().any(|c| c.contains(v))
    }

    pub fn union(&self, other: &SemilinearSet) -> SemilinearSet {
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        SemilinearSet { dim: self.dim, components }.simplified()
    }

    /// Minkowski sum.
    pub fn sum(&self, other: &SemilinearSet) -> SemilinearSet {
        let mut components = Vec::new();
        for a in &self.components {
            for b in &other.components {
                components.push(a.sum(b));
            }
        }
        SemilinearSet { dim: self.dim, components }.simplified()
    }

    /// Kleene star under addition. For components `(bᵢ; Pᵢ)` this is `{0}` plus,
    /// for every non-empty subset `T`, the set `(Σ_T bᵢ; ∪_T Pᵢ ∪ {bᵢ})`; it is
    /// built as the sum over components of `{0} ∪ (bᵢ; Pᵢ ∪ {bᵢ})` so that
    /// redundant pieces are pruned early.
    pub fn star(&self) -> SemilinearSet {
        let mut acc = SemilinearSet::zero(self.dim);
        for c in &self.components {
            let mut periods = c.periods.clone();
            periods.push(c.base.clone());
            let own = if c.base.iter().all(|&x| x == 0) {
                SemilinearSet { dim: self.dim, components: vec![LinearSet { base: c.base.clone(), periods }.normalized()] }
            } else {
                SemilinearSet {
                    dim: self.dim,
                    components: vec![LinearSet::point(vec![0; self.dim]), LinearSet { base: c.base.clone(), periods }.normalized()],
                }
                .simplified()
            };
            acc = acc.sum(&own);
        }
        acc
    }

    pub fn map(&self, dim: usize, f: impl Fn(&[u64]) -> Vector) -> SemilinearSet {
        SemilinearSet { dim, components: self.components.iter().map(|c| c.map(&f)).collect() }.simplified()
    }

    /// Removes duplicate and covered components and merges `(b; P)` with
    /// `(b + p; P ∪ {p})` into `(b; P ∪ {p})`.
    pub fn simplified(mut self) -> SemilinearSet {
        self.components.sort();
        self.components.dedup();
        loop {
            let mut merged = false;
            'outer: for i in 0..self.components.len() {
                for j in 0..self.components.len() {
                    if i == j {
                        continue;
                    }
                    if let Some(u) = merge(&self.components[i], &self.components[j]) {
                        let (hi, lo) = (i.max(j), i.min(j));
                        self.components.remove(hi);
                        self.components.remove(lo);
                        self.components.push(u);
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        let mut kept: Vec<LinearSet> = Vec::new();
        // larger period sets first, so that small pieces are tested against them
        self.components.sort_by_key(|c| std::cmp::Reverse(c.periods.len()));
        for c in self.components {
            if kept.iter().any(|k| c.covered_by(k)) {
                continue;
            }
            kept.retain(|k| !k.covered_by(&c));
            kept.push(c);
        }
        kept.sort();
        SemilinearSet { dim: self.dim, components: kept }
    }
}

/// `a ∪ b` as a single linear set when `b = (a.base + p; a.periods ∪ {p})`.
fn merge(a: &LinearSet, b: &LinearSet) -> Option<LinearSet> {
    if b.base.iter().zip(&a.base).any(|(x, y)| x < y) {
        return None;
    }
    let p: Vector = b.base.iter().zip(&a.base).map(|(x, y)| x - y).collect();
    if !b.periods.contains(&p) || !a.periods.iter().all(|q| b.periods.contains(q)) {
        return None;
    }
    if b.periods.iter().any(|q| q != &p && !a.periods.contains(q)) {
        return None;
    }
    Some(LinearSet { base: a.base.clone(), periods: b.periods.clone() })
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Eq,
    Ge,
    Le,
}

/// `coeffs · x (relation) rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<i64>,
    pub relation: Relation,
    pub rhs: i64,
}

impl Constraint {
    pub fn new(coeffs: Vec<i64>, relation: Relation, rhs: i64) -> Constraint {
        Constraint { coeffs, relation, rhs }
    }

    pub fn holds(&self, v: &[u64]) -> bool {
        let lhs: i64 = self.coeffs.iter().zip(v).map(|(a, &x)| a * x as i64).sum();
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
            Relation::Le => lhs <= self.rhs,
        }
    }

    fn dot(&self, v: &[u64]) -> i64 {
        self.coeffs.iter().zip(v).map(|(a, &x)| a * x as i64).sum()
    }
}

/// Solutions of a constraint system over the members of a linear set,
/// expressed through its multipliers: every solution is one of `minimal` plus
/// a non-negative combination of `directions`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolutionBasis {
    pub minimal: Vec<Vec<u64>>,
    pub directions: Vec<Vec<u64>>,
}

fn check_dims(c: &LinearSet, constraints: &[Constraint]) -> Result<()> {
    for k in constraints {
        if k.coeffs.len() != c.dim() {
            return Err(Error::DimensionMismatch { expected: c.dim(), found: k.coeffs.len() });
        }
    }
    Ok(())
}

/// Homogeneous system over `(x0, λ, slacks)` whose solutions with `x0 = 1`
/// are exactly the multipliers satisfying the constraints.
fn homogenize(c: &LinearSet, constraints: &[Constraint]) -> (Vec<Vec<i64>>, usize) {
    let n = c.periods.len();
    let slacks = constraints.iter().filter(|k| k.relation != Relation::Eq).count();
    let width = 1 + n + slacks;
    let mut rows = Vec::new();
    let mut s = 0;
    for k in constraints {
        let mut row = vec![0i64; width];
        row[0] = k.dot(&c.base) - k.rhs;
        for (j, p) in c.periods.iter().enumerate() {
            row[1 + j] = k.dot(p);
        }
        match k.relation {
            Relation::Eq => {}
            Relation::Ge => {
                row[1 + n + s] = -1;
                s += 1;
            }
            Relation::Le => {
                row[1 + n + s] = 1;
                s += 1;
            }
        }
        rows.push(row);
    }
    (rows, width)
}

/// Minimal non-zero non-negative solutions of `A x = 0` with `x[0] <= 1`,
/// by the Contejean–Devie completion procedure. With `first_inhomogeneous`
/// the search stops at the first solution having `x[0] = 1`.
fn contejean_devie(rows: &[Vec<i64>], width: usize, first_inhomogeneous: bool) -> Vec<Vec<u64>> {
    let image = |x: &[u64]| -> Vec<i64> { rows.iter().map(|r| r.iter().zip(x).map(|(a, &b)| a * b as i64).sum()).collect() };
    let columns: Vec<Vec<i64>> = (0..width).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let mut found: Vec<Vec<u64>> = Vec::new();
    let dominated = |x: &[u64], found: &[Vec<u64>]| found.iter().any(|m| m.iter().zip(x).all(|(a, b)| a <= b));
    let mut frontier: Vec<Vec<u64>> = (0..width)
        .map(|j| {
            let mut e = vec![0u64; width];
            e[j] = 1;
            e
        })
        .collect();
    while !frontier.is_empty() {
        let mut open = Vec::new();
        for x in frontier {
            if image(&x).iter().all(|&v| v == 0) {
                if !dominated(&x, &found) {
                    let inhomogeneous = x[0] == 1;
                    found.push(x);
                    if inhomogeneous && first_inhomogeneous {
                        return found;
                    }
                }
            } else {
                open.push(x);
            }
        }
        let mut next: HashSet<Vec<u64>> = HashSet::new();
        for x in open {
            let ax = image(&x);
            for j in 0..width {
                if j == 0 && x[0] >= 1 {
                    continue;
                }
                let dot: i64 = ax.iter().zip(&columns[j]).map(|(a, b)| a * b).sum();
                if dot < 0 {
                    let mut y = x.clone();
                    y[j] += 1;
                    if !dominated(&y, &found) {
                        next.insert(y);
                    }
                }
            }
        }
        let mut next: Vec<Vec<u64>> = next.into_iter().collect();
        next.sort();
        frontier = next;
    }
    found
}

/// Multipliers `λ` such that `base + Σ λⱼ periodⱼ` satisfies every constraint,
/// if any exist.
///
/// The constraints are turned into a homogeneous system by slack variables
/// and a variable `x0` standing for the constant column; a solution with
/// `x0 = 1` exists iff one is minimal, and minimal solutions are found by the
/// Contejean–Devie procedure, which terminates on every system.
pub fn linear_feasible(c: &LinearSet, constraints: &[Constraint]) -> Result<Option<Vec<u64>>> {
    check_dims(c, constraints)?;
    if constraints.iter().all(|k| k.holds(&c.base)) {
        return Ok(Some(vec![0; c.periods.len()]));
    }
    let (rows, width) = homogenize(c, constraints);
    let n = c.periods.len();
    Ok(contejean_devie(&rows, width, true).into_iter().find(|x| x[0] == 1).map(|x| x[1..1 + n].to_vec()))
}

/// Complete description of the multipliers satisfying the constraints.
pub fn solution_basis(c: &LinearSet, constraints: &[Constraint]) -> Result<SolutionBasis> {
    check_dims(c, constraints)?;
    let (rows, width) = homogenize(c, constraints);
    let n = c.periods.len();
    let mut basis = SolutionBasis { minimal: Vec::new(), directions: Vec::new() };
    for x in contejean_devie(&rows, width, false) {
        let lambda = x[1..1 + n].to_vec();
        if x[0] == 1 {
            basis.minimal.push(lambda);
        } else if lambda.iter().any(|&t| t > 0) {
            basis.directions.push(lambda);
        }
    }
    basis.directions.sort();
    basis.directions.dedup();
    Ok(basis)
}

/// The members of `c` that satisfy the constraints, as a semilinear set.
pub fn restrict(c: &LinearSet, constraints: &[Constraint]) -> Result<SemilinearSet> {
    let basis = solution_basis(c, constraints)?;
    let periods: Vec<Vector> = basis.directions.iter().map(|d| c.evaluate(d).iter().zip(&c.base).map(|(a, b)| a - b).collect()).collect();
    let components = basis
        .minimal
        .iter()
        .map(|m| LinearSet { base: c.evaluate(m), periods: periods.clone() }.normalized())
        .collect();
    SemilinearSet::from_components(c.dim(), components)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(base: Vec<u64>, periods: Vec<Vec<u64>>) -> LinearSet {
        LinearSet::new(base, periods).unwrap()
    }

    #[test]
    fn diagonal_with_lower_bound() {
        let c = ls(vec![0, 0], vec![vec![1, 1]]);
        let k = [Constraint::new(vec![1, -1], Relation::Eq, 0), Constraint::new(vec![1, 0], Relation::Ge, 1)];
        assert_eq!(linear_feasible(&c, &k).unwrap(), Some(vec![1]));
    }

    #[test]
    fn point_off_the_diagonal() {
        let c = ls(vec![1, 0], vec![]);
        let k = [Constraint::new(vec![1, -1], Relation::Eq, 0)];
        assert_eq!(linear_feasible(&c, &k).unwrap(), None);
        let bad = [Constraint::new(vec![1], Relation::Eq, 0)];
        assert!(matches!(linear_feasible(&c, &bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn feasibility_needs_combination() {
        // 3x = 2y with x, y from separate periods
        let c = ls(vec![0, 0], vec![vec![1, 0], vec![0, 1]]);
        let k = [Constraint::new(vec![3, -2], Relation::Eq, 0), Constraint::new(vec![1, 1], Relation::Ge, 1)];
        let l = linear_feasible(&c, &k).unwrap().unwrap();
        let v = c.evaluate(&l);
        assert!(k.iter().all(|x| x.holds(&v)));
        assert_eq!(v, vec![2, 3]);
    }

    #[test]
    fn restriction_to_equal_counts() {
        let c = ls(vec![0, 0], vec![vec![1, 0], vec![0, 1]]);
        let s = restrict(&c, &[Constraint::new(vec![1, -1], Relation::Eq, 0)]).unwrap();
        assert_eq!(s.components, vec![ls(vec![0, 0], vec![vec![1, 1]])]);
    }

    #[test]
    fn star_of_point_and_chain() {
        let e = SemilinearSet::point(vec![1, 0]);
        let s = e.star();
        assert_eq!(s.components, vec![ls(vec![0, 0], vec![vec![1, 0]])]);
        let chain = SemilinearSet::point(vec![1, 0]).sum(&SemilinearSet::point(vec![0, 1]));
        assert_eq!(chain.components, vec![LinearSet::point(vec![1, 1])]);
    }

    #[test]
    fn star_membership() {
        let s = SemilinearSet::point(vec![2]).union(&SemilinearSet::point(vec![3])).star();
        for n in 0..20u64 {
            assert_eq!(s.contains(&[n]), n != 1, "{n}");
        }
    }

    #[test]
    fn rendering() {
        let c = ls(vec![0, 0], vec![vec![1, 1]]);
        assert_eq!(c.to_string(), "linear base=(0,0) periods=[(1,1)]");
    }
}
