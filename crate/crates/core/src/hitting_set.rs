//! Exact minimum-cost hitting sets under a meta-constraint.
//!
//! The solver runs in two phases. A branch-and-bound finds the optimal cost,
//! branching on the exactly-one domain while none of it is chosen and on the
//! most constrained unhit set otherwise, bounded by a greedy dual solution.
//! The lexicographically smallest optimal set is then fixed element by
//! element in ascending order, each choice checked by a bounded search.
//!
//! With strictly positive weights the result is the lexicographically
//! smallest (as a sorted index sequence) among all optimal hitting sets.
//! Elements contained in no stored set are never selected.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::formula::IndexSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetaConstraint {
    TriviallyTrue,
    /// The hitting set must contain exactly one active element of the domain.
    ExactlyOne(IndexSet),
}

impl MetaConstraint {
    pub fn holds(&self, set: &IndexSet) -> bool {
        match self {
            MetaConstraint::TriviallyTrue => true,
            MetaConstraint::ExactlyOne(d) => set.iter().filter(|&i| d.contains(i)).count() == 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HittingSetSolution {
    Optimal {
        set: IndexSet,
        cost: u64,
    },
    Infeasible,
    /// Only from [`HittingSetInstance::solve_within`]: no hitting set costs at most the limit.
    ExceedsLimit,
}

#[derive(Clone, Debug)]
struct WarmStart {
    set: IndexSet,
    cost: u64,
    checked_sets: usize,
}

/// A persistent collection of sets to hit, with costs and an activation mask.
#[derive(Clone, Debug)]
pub struct HittingSetInstance {
    universe: IndexSet,
    weights: Vec<u64>,
    sets: Vec<IndexSet>,
    constraint: MetaConstraint,
    active: IndexSet,
    has_empty: bool,
    warm: Option<WarmStart>,
    /// Optimal cost is monotone in the stored sets while the mask is unchanged.
    cost_floor: u64,
    nodes: u64,
    lexicographic: bool,
}

impl HittingSetInstance {
    /// `weights[i]` is the cost of element `i`; it must cover the universe.
    pub fn new(universe: IndexSet, weights: &[u64], constraint: MetaConstraint) -> Result<Self> {
        if let Some(m) = universe.max_index() {
            if m >= weights.len() {
                return Err(Error::IndexOutOfRange { index: m, len: weights.len() });
            }
        }
        if let MetaConstraint::ExactlyOne(d) = &constraint {
            if d.is_empty() {
                return Err(Error::Precondition("exactly-one domain is empty".into()));
            }
            if !d.is_subset(&universe) {
                return Err(Error::Precondition("exactly-one domain outside the universe".into()));
            }
        }
        Ok(HittingSetInstance {
            active: universe.clone(),
            universe,
            weights: weights.to_vec(),
            sets: Vec::new(),
            constraint,
            has_empty: false,
            warm: None,
            cost_floor: 0,
            nodes: 0,
            lexicographic: true,
        })
    }

    /// With the tie-break off, any optimal set may be returned. On by default.
    pub fn set_lexicographic(&mut self, on: bool) {
        self.lexicographic = on;
        self.warm = None;
    }

    pub fn universe(&self) -> &IndexSet {
        &self.universe
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn constraint(&self) -> &MetaConstraint {
        &self.constraint
    }

    pub fn active(&self) -> &IndexSet {
        &self.active
    }

    pub fn weight(&self, element: usize) -> u64 {
        self.weights[element]
    }

    /// Search nodes expanded over the lifetime of the instance.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// Appends a set to hit. An empty set makes the instance permanently infeasible.
    pub fn add_set(&mut self, set: IndexSet) -> Result<()> {
        if !set.is_subset(&self.universe) {
            let bad = set.iter().find(|&i| !self.universe.contains(i)).unwrap();
            return Err(Error::Precondition(format!("element {bad} is outside the universe")));
        }
        if set.is_empty() {
            self.has_empty = true;
        }
        self.sets.push(set);
        Ok(())
    }

    /// Restricts future solutions to `active`. Stored sets are kept.
    pub fn set_active(&mut self, active: IndexSet) -> Result<()> {
        if !active.is_subset(&self.universe) {
            return Err(Error::Precondition("active set outside the universe".into()));
        }
        if active != self.active {
            self.active = active;
            self.warm = None;
            self.cost_floor = 0;
        }
        Ok(())
    }

    /// One line per stored set, indices ascending.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in &self.sets {
            let line: Vec<String> = s.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn solve(&mut self) -> HittingSetSolution {
        self.solve_within(u64::MAX)
    }

    /// As [`HittingSetInstance::solve`], but stops with `ExceedsLimit` once
    /// every hitting set is known to cost more than `limit`. An optimum that
    /// is still valid from an earlier call is returned whatever its cost.
    pub fn solve_within(&mut self, limit: u64) -> HittingSetSolution {
        if self.has_empty {
            return HittingSetSolution::Infeasible;
        }
        if let Some(w) = &mut self.warm {
            if self.sets[w.checked_sets..].iter().all(|s| s.intersects(&w.set)) {
                w.checked_sets = self.sets.len();
                return HittingSetSolution::Optimal { set: w.set.clone(), cost: w.cost };
            }
        }
        let Some(mut problem) = Compact::build(self) else {
            self.warm = None;
            return HittingSetSolution::Infeasible;
        };
        let result = problem.optimize(self.cost_floor, self.lexicographic, limit);
        self.nodes += problem.nodes;
        match result {
            Some((set, cost)) => {
                self.cost_floor = cost;
                self.warm = Some(WarmStart { set: set.clone(), cost, checked_sets: self.sets.len() });
                HittingSetSolution::Optimal { set, cost }
            }
            None if limit < u64::MAX => {
                self.cost_floor = self.cost_floor.max(limit + 1);
                HittingSetSolution::ExceedsLimit
            }
            None => {
                self.warm = None;
                HittingSetSolution::Infeasible
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Bits {
        Bits(vec![0; n.div_ceil(64)])
    }
    #[inline]
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    #[inline]
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }
    /// Bits of `self` not in `mask`.
    fn count_minus(&self, mask: &Bits) -> u32 {
        self.0.iter().zip(&mask.0).map(|(a, b)| (a & !b).count_ones()).sum()
    }
    fn iter_minus<'a>(&'a self, mask: &'a Bits) -> impl Iterator<Item = usize> + 'a {
        self.0.iter().zip(&mask.0).enumerate().flat_map(|(wi, (a, b))| {
            let mut w = a & !b;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }
    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
    fn or_assign(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a |= b;
        }
    }
}

/// The instance restricted to active elements that occur in some set,
/// renumbered densely in ascending original order.
struct Compact {
    elements: Vec<usize>,
    weights: Vec<u64>,
    sets: Vec<Bits>,
    exactly_one: Option<Bits>,
    nodes: u64,
    best_cost: u64,
    best: Option<Bits>,
    floor: u64,
}

impl Compact {
    fn build(inst: &HittingSetInstance) -> Option<Compact> {
        let active = &inst.active;
        let mut effective: Vec<Vec<usize>> = Vec::with_capacity(inst.sets.len() + 1);
        for s in &inst.sets {
            let e: Vec<usize> = s.iter().filter(|&i| active.contains(i)).collect();
            if e.is_empty() {
                return None;
            }
            effective.push(e);
        }
        let domain = match &inst.constraint {
            MetaConstraint::TriviallyTrue => None,
            MetaConstraint::ExactlyOne(d) => {
                let e: Vec<usize> = d.iter().filter(|&i| active.contains(i)).collect();
                if e.is_empty() {
                    return None;
                }
                effective.push(e.clone());
                Some(e)
            }
        };
        let elements: Vec<usize> = effective.iter().flatten().copied().collect::<IndexSet>().into();
        let pos = |x: usize| elements.binary_search(&x).unwrap();
        let n = elements.len();
        let to_bits = |v: &[usize]| {
            let mut b = Bits::new(n);
            for &x in v {
                b.set(pos(x));
            }
            b
        };
        let mut sets: Vec<Bits> = effective.iter().map(|v| to_bits(v)).collect();
        // Drop duplicates and supersets of other sets.
        sets.sort_by_key(|b| b.count());
        let mut kept: Vec<Bits> = Vec::with_capacity(sets.len());
        for s in sets {
            if !kept.iter().any(|k| k.is_subset_of(&s)) {
                kept.push(s);
            }
        }
        let exactly_one = domain.map(|d| to_bits(&d));
        let weights = elements.iter().map(|&e| inst.weights[e]).collect();
        Some(Compact {
            weights,
            elements,
            sets: kept,
            exactly_one,
            nodes: 0,
            best_cost: u64::MAX,
            best: None,
            floor: 0,
        })
    }

    fn n(&self) -> usize {
        self.elements.len()
    }

    /// Greedy dual bound: each unhit set in turn claims the least residual
    /// weight among its available elements, which is then charged to all of
    /// them. Sets whose cheapest element is dearest go first. `None` if some
    /// unhit set has no available element.
    fn lower_bound(&self, excluded: &Bits, unhit: &[usize]) -> Option<u64> {
        let mut order: Vec<(u64, usize)> = Vec::with_capacity(unhit.len());
        for &s in unhit {
            let min_w = self.sets[s].iter_minus(excluded).map(|e| self.weights[e]).min()?;
            order.push((min_w, s));
        }
        order.sort_by(|a, b| b.0.cmp(&a.0).then(self.sets[a.1].count().cmp(&self.sets[b.1].count())));
        let mut residual = self.weights.clone();
        let mut lb = 0;
        for (_, s) in order {
            let set = &self.sets[s];
            let min_w = set.iter_minus(excluded).map(|e| residual[e]).min().expect("available element");
            if min_w > 0 {
                lb += min_w;
                for e in set.iter_minus(excluded) {
                    residual[e] -= min_w;
                }
            }
        }
        Some(lb)
    }

    fn include(&self, e: usize, excluded: &Bits, unhit: &[usize]) -> (Bits, Vec<usize>) {
        let mut excl = excluded.clone();
        if let Some(d) = &self.exactly_one {
            if d.get(e) {
                excl.or_assign(d);
            }
        }
        let rest = unhit.iter().copied().filter(|&s| !self.sets[s].get(e)).collect();
        (excl, rest)
    }

    fn optimize(&mut self, floor: u64, lexicographic: bool, limit: u64) -> Option<(IndexSet, u64)> {
        self.floor = floor;
        self.best_cost = limit.saturating_add(1);
        let unhit: Vec<usize> = (0..self.sets.len()).collect();
        // Phase 1: optimal cost.
        self.branch_and_bound(Bits::new(self.n()), Bits::new(self.n()), 0, unhit.clone());
        let witness = self.best.clone()?;
        let optimum = self.best_cost;
        let chosen = if lexicographic {
            // Phase 2: lexicographically smallest set at that cost.
            self.lexicographic(witness, &unhit, optimum)
        } else {
            witness
        };
        let set: IndexSet = chosen.iter_minus(&Bits::new(self.n())).map(|e| self.elements[e]).collect();
        Some((set, optimum))
    }

    fn branch_and_bound(&mut self, chosen: Bits, excluded: Bits, cost: u64, unhit: Vec<usize>) {
        self.nodes += 1;
        if unhit.is_empty() {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = Some(chosen);
            }
            return;
        }
        let Some(lb) = self.lower_bound(&excluded, &unhit) else { return };
        if cost + lb >= self.best_cost {
            return;
        }
        // The exactly-one domain first, then the most constrained unhit set.
        let domain = self.exactly_one.as_ref().filter(|d| !d.intersects(&chosen));
        let mut candidates: Vec<usize> = match domain {
            Some(d) => d.iter_minus(&excluded).collect(),
            None => {
                let s = *unhit.iter().min_by_key(|&&s| self.sets[s].count_minus(&excluded)).unwrap();
                self.sets[s].iter_minus(&excluded).collect()
            }
        };
        candidates.sort_by_key(|&e| (self.weights[e], e));
        let mut excl = excluded;
        for e in candidates {
            if cost + self.weights[e] < self.best_cost {
                let (child_excl, rest) = self.include(e, &excl, &unhit);
                let mut child = chosen.clone();
                child.set(e);
                self.branch_and_bound(child, child_excl, cost + self.weights[e], rest);
                if self.best.is_some() && self.best_cost <= self.floor {
                    return;
                }
            }
            excl.set(e);
        }
    }

    /// A hitting set extending `chosen` within `excluded` of cost at most `limit`.
    fn completion(&mut self, chosen: &Bits, excluded: &Bits, cost: u64, unhit: Vec<usize>, limit: u64) -> Option<Bits> {
        let saved = (self.best.take(), self.best_cost, self.floor);
        self.best_cost = limit + 1;
        self.floor = limit;
        self.branch_and_bound(chosen.clone(), excluded.clone(), cost, unhit);
        let found = self.best.take();
        (self.best, self.best_cost, self.floor) = saved;
        found
    }

    /// Decides elements in ascending order, taking each one that still admits
    /// a completion of cost `limit`. `witness` is any set of that cost.
    fn lexicographic(&mut self, mut witness: Bits, unhit: &[usize], limit: u64) -> Bits {
        let mut chosen = Bits::new(self.n());
        let mut excluded = Bits::new(self.n());
        let mut unhit = unhit.to_vec();
        let mut cost = 0;
        for e in 0..self.n() {
            if unhit.is_empty() {
                break;
            }
            if excluded.get(e) || !unhit.iter().any(|&s| self.sets[s].get(e)) {
                excluded.set(e);
                continue;
            }
            let (child_excl, rest) = self.include(e, &excluded, &unhit);
            let mut child = chosen.clone();
            child.set(e);
            let w = cost + self.weights[e];
            let take = if witness.get(e) {
                true
            } else if w <= limit {
                match self.completion(&child, &child_excl, w, rest.clone(), limit) {
                    Some(found) => {
                        witness = found;
                        true
                    }
                    None => false,
                }
            } else {
                false
            };
            if take {
                chosen = child;
                excluded = child_excl;
                unhit = rest;
                cost = w;
            } else {
                excluded.set(e);
            }
        }
        debug_assert!(unhit.is_empty() && cost == limit);
        chosen
    }
}
