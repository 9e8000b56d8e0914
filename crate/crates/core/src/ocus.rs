//! The implicit hitting-set loop for optimal (constrained) unsatisfiable
//! subsets, bounded OUS, and the grow strategies.
//!
//! The loop alternates an optimal constrained hitting set over the collected
//! correction subsets with a satisfiability check. A satisfiable hitting set
//! is grown into a larger satisfiable subset whose complement becomes a new
//! set to hit; the first unsatisfiable hitting set is optimal.
//!
//! Sets are stored in the hitting-set instance as complements with respect to
//! the instance's whole universe. Only the active part counts when solving,
//! so an instance shared between calls over different active subformulas
//! stays sound.

use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{ClauseGroup, CnfFormula, IndexSet, Interpretation, Model, PolarityHint};
use crate::hitting_set::{HittingSetInstance, HittingSetSolution, MetaConstraint};
use crate::maxsat::{maximize, MaxSatInstance};
use crate::sat::{SatResult, SubsetSolver};

/// Which clauses a MaxSAT grow tries to satisfy.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GrowDomain {
    /// Every clause of the active formula.
    Full,
    /// Only constraints and known facts; the negated-target units are left out.
    Actual,
}

/// Soft-clause weighting for MaxSAT grows.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GrowWeights {
    Unif,
    Pos,
    Inv,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum GrowStrategy {
    NoGrow,
    ModelExtension,
    SatLoopGreedy,
    MaxSat { domain: GrowDomain, weights: GrowWeights },
}

impl GrowStrategy {
    pub const MAX_ACTUAL_UNIF: GrowStrategy =
        GrowStrategy::MaxSat { domain: GrowDomain::Actual, weights: GrowWeights::Unif };

    /// Parses `none|model|greedy|max:full|max:actual` plus a weighting for the MaxSAT forms.
    pub fn parse(grow: &str, weights: &str) -> Option<GrowStrategy> {
        let weights = match weights {
            "unif" => GrowWeights::Unif,
            "pos" => GrowWeights::Pos,
            "inv" => GrowWeights::Inv,
            _ => return None,
        };
        Some(match grow {
            "none" => GrowStrategy::NoGrow,
            "model" => GrowStrategy::ModelExtension,
            "greedy" => GrowStrategy::SatLoopGreedy,
            "max:full" => GrowStrategy::MaxSat { domain: GrowDomain::Full, weights },
            "max:actual" => GrowStrategy::MaxSat { domain: GrowDomain::Actual, weights },
            _ => return None,
        })
    }

    pub fn label(&self) -> String {
        match self {
            GrowStrategy::NoGrow => "none".into(),
            GrowStrategy::ModelExtension => "model".into(),
            GrowStrategy::SatLoopGreedy => "greedy".into(),
            GrowStrategy::MaxSat { domain, weights } => {
                let d = match domain {
                    GrowDomain::Full => "full",
                    GrowDomain::Actual => "actual",
                };
                let w = match weights {
                    GrowWeights::Unif => "unif",
                    GrowWeights::Pos => "pos",
                    GrowWeights::Inv => "inv",
                };
                format!("max:{d}:{w}")
            }
        }
    }
}

/// Satisfiable subsets discovered so far, reusable across calls over the same universe.
#[derive(Clone, Debug, Default)]
pub struct SatSubsetCache {
    subsets: Vec<IndexSet>,
    /// Complements of `subsets[..complements.len()]` within `universe`.
    complements: Vec<IndexSet>,
    universe: IndexSet,
}

impl SatSubsetCache {
    pub fn new() -> SatSubsetCache {
        SatSubsetCache::default()
    }

    pub fn push(&mut self, subset: IndexSet) {
        self.subsets.push(subset);
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &IndexSet> {
        self.subsets.iter()
    }

    /// `universe \ s` for every cached `s`, in insertion order.
    pub fn complements(&mut self, universe: &IndexSet) -> &[IndexSet] {
        if &self.universe != universe {
            self.universe = universe.clone();
            self.complements.clear();
        }
        for s in &self.subsets[self.complements.len()..] {
            self.complements.push(universe.difference(s));
        }
        &self.complements
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OcusResult {
    Found { subset: IndexSet, cost: u64 },
    NoneExists,
    ExceedsBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Sat,
    Unsat,
    ExceedsBound,
    Infeasible,
}

/// One loop iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub hitting_set: Option<IndexSet>,
    pub cost: Option<u64>,
    pub verdict: Verdict,
    pub grown: Option<IndexSet>,
    /// The new set to hit, restricted to the active formula.
    pub new_set: Option<IndexSet>,
}

/// One OCUS (or bounded OUS) query over a universe formula.
#[derive(Clone, Debug)]
pub struct OcusQuery<'a> {
    /// Clauses that make up the formula for this call.
    pub active: &'a IndexSet,
    pub grow: GrowStrategy,
    /// Candidates for [`GrowDomain::Actual`].
    pub actual_domain: &'a IndexSet,
    pub hint: &'a PolarityHint,
    /// Stop with [`OcusResult::ExceedsBound`] once a hitting set costs more than this.
    pub bound: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub iterations: u64,
    pub sat_calls: u64,
    pub grow_calls: u64,
    pub exceeds_bound: u64,
}

/// Runs OCUS queries over subsets of one universe formula, keeping a
/// persistent incremental SAT solver.
pub struct OcusEngine<'f> {
    formula: &'f CnfFormula,
    solver: SubsetSolver,
    deadline: Option<Instant>,
    stats: EngineStats,
    trace: Option<Vec<TraceRecord>>,
}

impl<'f> OcusEngine<'f> {
    pub fn new(formula: &'f CnfFormula) -> OcusEngine<'f> {
        OcusEngine {
            formula,
            solver: SubsetSolver::new(formula),
            deadline: None,
            stats: EngineStats::default(),
            trace: None,
        }
    }

    pub fn formula(&self) -> &'f CnfFormula {
        self.formula
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn stats(&self) -> EngineStats {
        self.stats
    }

    /// Starts recording per-iteration trace records.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    fn record(&mut self, rec: TraceRecord) {
        if let Some(t) = &mut self.trace {
            t.push(rec);
        }
    }

    /// Satisfiability of a subset of the universe formula.
    pub fn check(&mut self, subset: &IndexSet, hint: &PolarityHint) -> Result<SatResult> {
        self.stats.sat_calls += 1;
        self.solver.solve(subset, &Interpretation::new(), hint)
    }

    /// Runs the hitting-set loop. `hs` and `cache` keep what is learned.
    pub fn solve(
        &mut self,
        query: &OcusQuery<'_>,
        hs: &mut HittingSetInstance,
        cache: &mut SatSubsetCache,
    ) -> Result<OcusResult> {
        self.formula.check_subset(query.active)?;
        if self.formula.len() > 0 && hs.universe().max_index().is_some_and(|m| m >= self.formula.len()) {
            return Err(Error::Precondition("hitting-set universe exceeds the formula".into()));
        }
        if !query.active.is_subset(hs.universe()) {
            return Err(Error::Precondition("active clauses outside the hitting-set universe".into()));
        }
        hs.set_active(query.active.clone())?;
        let universe = hs.universe().clone();

        for c in cache.complements(&universe) {
            if !c.intersects(query.active) {
                return Ok(OcusResult::NoneExists);
            }
            hs.add_set(c.clone())?;
        }

        let mut iteration = 0;
        loop {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    return Err(Error::Timeout);
                }
            }
            iteration += 1;
            self.stats.iterations += 1;
            let hsr = hs.solve_within(query.bound.unwrap_or(u64::MAX));
            let (subset, cost) = match hsr {
                HittingSetSolution::Infeasible => {
                    self.record(TraceRecord {
                        iteration,
                        hitting_set: None,
                        cost: None,
                        verdict: Verdict::Infeasible,
                        grown: None,
                        new_set: None,
                    });
                    return Ok(OcusResult::NoneExists);
                }
                HittingSetSolution::ExceedsLimit => {
                    self.stats.exceeds_bound += 1;
                    self.record(TraceRecord {
                        iteration,
                        hitting_set: None,
                        cost: None,
                        verdict: Verdict::ExceedsBound,
                        grown: None,
                        new_set: None,
                    });
                    return Ok(OcusResult::ExceedsBound);
                }
                HittingSetSolution::Optimal { set, cost } => (set, cost),
            };
            debug_assert!(hs.constraint().holds(&subset));
            if query.bound.is_some_and(|ub| cost > ub) {
                self.stats.exceeds_bound += 1;
                self.record(TraceRecord {
                    iteration,
                    hitting_set: Some(subset),
                    cost: Some(cost),
                    verdict: Verdict::ExceedsBound,
                    grown: None,
                    new_set: None,
                });
                return Ok(OcusResult::ExceedsBound);
            }
            let model = match self.check(&subset, query.hint)? {
                SatResult::Unsat => {
                    self.record(TraceRecord {
                        iteration,
                        hitting_set: Some(subset.clone()),
                        cost: Some(cost),
                        verdict: Verdict::Unsat,
                        grown: None,
                        new_set: None,
                    });
                    return Ok(OcusResult::Found { subset, cost });
                }
                SatResult::Sat(m) => m,
            };
            let grown = self.grow(&subset, &model, query)?;
            let complement = query.active.difference(&grown);
            self.record(TraceRecord {
                iteration,
                hitting_set: Some(subset),
                cost: Some(cost),
                verdict: Verdict::Sat,
                grown: Some(grown.clone()),
                new_set: Some(complement.clone()),
            });
            if complement.is_empty() {
                cache.push(grown);
                return Ok(OcusResult::NoneExists);
            }
            hs.add_set(universe.difference(&grown))?;
            cache.push(grown);
        }
    }

    /// Extends the satisfiable `subset` (witnessed by `model`) within the active formula.
    pub fn grow(&mut self, subset: &IndexSet, model: &Model, query: &OcusQuery<'_>) -> Result<IndexSet> {
        let f = self.formula;
        match query.grow {
            GrowStrategy::NoGrow => Ok(subset.clone()),
            GrowStrategy::ModelExtension => {
                self.stats.grow_calls += 1;
                Ok(f.satisfied_by(model).union(subset))
            }
            GrowStrategy::SatLoopGreedy => {
                self.stats.grow_calls += 1;
                let mut current = subset.clone();
                let mut witness = model.clone();
                for i in query.active.difference(subset).iter() {
                    if f.clause(i).is_satisfied_by(&witness) {
                        current.insert(i);
                        continue;
                    }
                    current.insert(i);
                    match self.check(&current, query.hint)? {
                        SatResult::Sat(m) => witness = m,
                        SatResult::Unsat => {
                            current.remove(i);
                        }
                    }
                }
                Ok(f.satisfied_by(&witness).union(&current))
            }
            GrowStrategy::MaxSat { domain, weights } => {
                self.stats.grow_calls += 1;
                let candidates = match domain {
                    GrowDomain::Full => query.active.difference(subset),
                    GrowDomain::Actual => query.actual_domain.intersection(query.active).difference(subset),
                };
                let soft = soft_weights(f, &candidates, weights);
                let sol =
                    maximize(&MaxSatInstance { formula: f, hard: subset.clone(), soft, hint: query.hint.clone() })?;
                // Everything else the optimal model happens to satisfy is
                // satisfiable together with it.
                Ok(f.satisfied_by(&sol.model).union(&sol.satisfied))
            }
        }
    }
}

/// Soft weights for a MaxSAT grow over `candidates`.
pub fn soft_weights(f: &CnfFormula, candidates: &IndexSet, scheme: GrowWeights) -> Vec<(usize, u64)> {
    match scheme {
        GrowWeights::Unif => candidates.iter().map(|i| (i, 1)).collect(),
        // A zero-cost clause still deserves to be kept if possible.
        GrowWeights::Pos => candidates.iter().map(|i| (i, f.weight(i).max(1))).collect(),
        GrowWeights::Inv => {
            let max = candidates.iter().map(|i| f.weight(i)).max().unwrap_or(0);
            candidates.iter().map(|i| (i, max + 1 - f.weight(i))).collect()
        }
    }
}

/// Clauses in the "actual" grow domain: constraints and (derived) facts.
pub fn default_actual_domain(f: &CnfFormula) -> IndexSet {
    f.indices_in_groups(&[
        ClauseGroup::PuzzleAgnostic,
        ClauseGroup::PuzzleSpecific,
        ClauseGroup::Fact,
        ClauseGroup::DerivedFact,
    ])
}

fn standalone(
    formula: &CnfFormula,
    constraint: &MetaConstraint,
    strategy: GrowStrategy,
    hs: &mut HittingSetInstance,
    cache: &mut SatSubsetCache,
    hint: &PolarityHint,
    bound: Option<u64>,
) -> Result<OcusResult> {
    if hs.constraint() != constraint {
        return Err(Error::Precondition("hitting-set instance carries a different constraint".into()));
    }
    let active = formula.all_indices();
    let actual = default_actual_domain(formula);
    let query = OcusQuery { active: &active, grow: strategy, actual_domain: &actual, hint, bound };
    OcusEngine::new(formula).solve(&query, hs, cache)
}

/// A cost-optimal unsatisfiable subset of `formula` satisfying `constraint`.
///
/// `hs` must range over the formula's clause indices and carry the same
/// constraint; `cache` may hold satisfiable subsets from earlier calls.
pub fn ocus(
    formula: &CnfFormula,
    constraint: &MetaConstraint,
    strategy: GrowStrategy,
    hs: &mut HittingSetInstance,
    cache: &mut SatSubsetCache,
    hint: &PolarityHint,
) -> Result<OcusResult> {
    standalone(formula, constraint, strategy, hs, cache, hint, None)
}

/// Like [`ocus`] with a trivially true constraint, but gives up as soon as a
/// hitting set costs more than `ub`.
pub fn ous_bounded(
    formula: &CnfFormula,
    strategy: GrowStrategy,
    hs: &mut HittingSetInstance,
    cache: &mut SatSubsetCache,
    hint: &PolarityHint,
    ub: u64,
) -> Result<OcusResult> {
    if *hs.constraint() != MetaConstraint::TriviallyTrue {
        return Err(Error::Precondition("bounded OUS requires a trivially true constraint".into()));
    }
    standalone(formula, &MetaConstraint::TriviallyTrue, strategy, hs, cache, hint, Some(ub))
}

/// A fresh hitting-set instance over every clause of `formula`, weighted by its costs.
pub fn hitting_set_for(formula: &CnfFormula, constraint: MetaConstraint) -> Result<HittingSetInstance> {
    HittingSetInstance::new(formula.all_indices(), formula.weights(), constraint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, Literal};

    fn lit(v: i32) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    /// The seven-clause running example: c1..c4 constraints, c5 the fact x1,
    /// c6 and c7 the negated targets.
    fn example() -> CnfFormula {
        let mut f = CnfFormula::new(3);
        let rows: [(&[i32], u64, ClauseGroup); 7] = [
            (&[-1, -2, 3], 60, ClauseGroup::PuzzleAgnostic),
            (&[-1, 2, 3], 60, ClauseGroup::PuzzleAgnostic),
            (&[1], 100, ClauseGroup::PuzzleSpecific),
            (&[-2, -3], 100, ClauseGroup::PuzzleSpecific),
            (&[1], 1, ClauseGroup::DerivedFact),
            (&[2], 1, ClauseGroup::NegatedTarget),
            (&[-3], 1, ClauseGroup::NegatedTarget),
        ];
        for (c, w, g) in rows {
            f.push(Clause::new(c.iter().map(|&v| lit(v))).unwrap(), w, g);
        }
        f
    }

    fn end_hint() -> PolarityHint {
        PolarityHint::from(&Interpretation::from_literals([lit(1), lit(-2), lit(3)]).unwrap())
    }

    #[test]
    fn example_grows() {
        let f = example();
        let mut engine = OcusEngine::new(&f);
        let active = f.all_indices();
        let actual = default_actual_domain(&f);
        let hint = end_hint();
        let query = OcusQuery {
            active: &active,
            grow: GrowStrategy::MAX_ACTUAL_UNIF,
            actual_domain: &actual,
            hint: &hint,
            bound: None,
        };
        let SatResult::Sat(m) = engine.check(&IndexSet::new(), &hint).unwrap() else { panic!() };
        assert_eq!(engine.grow(&IndexSet::new(), &m, &query).unwrap(), IndexSet::from([0, 1, 2, 3, 4]));
        let s = IndexSet::from([6]);
        let SatResult::Sat(m) = engine.check(&s, &hint).unwrap() else { panic!() };
        assert_eq!(engine.grow(&s, &m, &query).unwrap(), IndexSet::from([0, 2, 3, 4, 6]));
    }

    #[test]
    fn example_ocus_every_strategy() {
        let f = example();
        let p = MetaConstraint::ExactlyOne(IndexSet::from([5, 6]));
        let strategies = [
            GrowStrategy::NoGrow,
            GrowStrategy::ModelExtension,
            GrowStrategy::SatLoopGreedy,
            GrowStrategy::MAX_ACTUAL_UNIF,
            GrowStrategy::MaxSat { domain: GrowDomain::Full, weights: GrowWeights::Pos },
            GrowStrategy::MaxSat { domain: GrowDomain::Actual, weights: GrowWeights::Inv },
        ];
        for g in strategies {
            let mut hs = hitting_set_for(&f, p.clone()).unwrap();
            let r = ocus(&f, &p, g, &mut hs, &mut SatSubsetCache::new(), &end_hint()).unwrap();
            assert_eq!(r, OcusResult::Found { subset: IndexSet::from([0, 1, 4, 6]), cost: 122 }, "{g:?}");
        }
    }

    #[test]
    fn example_trace_prefix() {
        let f = example();
        let p = MetaConstraint::ExactlyOne(IndexSet::from([5, 6]));
        let mut hs = hitting_set_for(&f, p.clone()).unwrap();
        let mut engine = OcusEngine::new(&f);
        engine.enable_trace();
        let active = f.all_indices();
        let actual = default_actual_domain(&f);
        let hint = end_hint();
        let query = OcusQuery {
            active: &active,
            grow: GrowStrategy::MAX_ACTUAL_UNIF,
            actual_domain: &actual,
            hint: &hint,
            bound: None,
        };
        engine.solve(&query, &mut hs, &mut SatSubsetCache::new()).unwrap();
        let trace = engine.take_trace();
        let sets: Vec<_> = trace.iter().map(|r| r.hitting_set.clone().unwrap()).collect();
        assert_eq!(sets[0], IndexSet::from([5]));
        assert_eq!(sets[1], IndexSet::from([6]));
        assert_eq!(sets[2], IndexSet::from([1, 6]));
        assert_eq!(trace.last().unwrap().verdict, Verdict::Unsat);
        assert_eq!(trace.last().unwrap().cost, Some(122));
    }

    #[test]
    fn satisfiable_formula_has_none() {
        let f = example();
        let mut sub = CnfFormula::new(3);
        for i in 0..4 {
            sub.push(f.clause(i).clone(), f.weight(i), f.group(i));
        }
        let mut hs = hitting_set_for(&sub, MetaConstraint::TriviallyTrue).unwrap();
        let r = ocus(
            &sub,
            &MetaConstraint::TriviallyTrue,
            GrowStrategy::NoGrow,
            &mut hs,
            &mut SatSubsetCache::new(),
            &PolarityHint::none(),
        );
        assert_eq!(r.unwrap(), OcusResult::NoneExists);
    }

    #[test]
    fn bounded_ous() {
        let f = example();
        let mut only7 = CnfFormula::new(3);
        for i in [0, 1, 2, 3, 4, 6] {
            only7.push(f.clause(i).clone(), f.weight(i), f.group(i));
        }
        for (ub, want) in [
            (1000, OcusResult::Found { subset: IndexSet::from([0, 1, 4, 5]), cost: 122 }),
            (u64::MAX, OcusResult::Found { subset: IndexSet::from([0, 1, 4, 5]), cost: 122 }),
            (100, OcusResult::ExceedsBound),
        ] {
            let mut hs = hitting_set_for(&only7, MetaConstraint::TriviallyTrue).unwrap();
            let r = ous_bounded(
                &only7,
                GrowStrategy::MAX_ACTUAL_UNIF,
                &mut hs,
                &mut SatSubsetCache::new(),
                &end_hint(),
                ub,
            );
            assert_eq!(r.unwrap(), want);
        }
    }

    #[test]
    fn cache_prefilled_by_unrelated_call() {
        let f = example();
        let p = MetaConstraint::ExactlyOne(IndexSet::from([5, 6]));
        let mut cache = SatSubsetCache::new();
        let mut hs = hitting_set_for(&f, MetaConstraint::TriviallyTrue).unwrap();
        ocus(&f, &MetaConstraint::TriviallyTrue, GrowStrategy::SatLoopGreedy, &mut hs, &mut cache, &end_hint())
            .unwrap();
        assert!(!cache.is_empty());
        let mut hs = hitting_set_for(&f, p.clone()).unwrap();
        let r = ocus(&f, &p, GrowStrategy::NoGrow, &mut hs, &mut cache, &end_hint()).unwrap();
        assert_eq!(r, OcusResult::Found { subset: IndexSet::from([0, 1, 4, 6]), cost: 122 });
    }

    #[test]
    fn parse_and_label() {
        assert_eq!(GrowStrategy::parse("max:actual", "unif"), Some(GrowStrategy::MAX_ACTUAL_UNIF));
        assert_eq!(GrowStrategy::MAX_ACTUAL_UNIF.label(), "max:actual:unif");
        assert_eq!(GrowStrategy::parse("bogus", "unif"), None);
        assert_eq!(GrowStrategy::parse("none", "weird"), None);
    }
}
