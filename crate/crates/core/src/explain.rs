//! Explanation sequences: repeatedly find the cheapest step `I′ ∧ F′ ⇒ N`
//! and add `N` to the known facts until the target is reached.
//!
//! All per-step searches range over one universe formula holding the
//! constraints, a fact unit for every target literal and a negated unit for
//! every literal still to explain. A step at interpretation `I` activates the
//! constraints, the facts of `I` and the negations of `target \ I`, so solver
//! state and learned sets carry over between steps.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Clause, ClauseGroup, CnfFormula, IndexSet, Interpretation, Literal, PolarityHint};
use crate::hitting_set::{HittingSetInstance, MetaConstraint};
use crate::ocus::{EngineStats, GrowStrategy, OcusEngine, OcusQuery, OcusResult, SatSubsetCache};
use crate::oracles::mus_deletion_with;
use crate::problem::ExplanationProblem;
use crate::sat::{solve_subset, SatResult};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum StepAlgorithm {
    MusBaseline,
    OcusStep,
    OusBoundedPerLiteral,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Incrementality {
    NoneMode,
    SsCaching,
    SharedIncrementalHs,
    PerLiteralIncrementalHs,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SequenceConfig {
    pub step_algorithm: StepAlgorithm,
    pub grow: GrowStrategy,
    pub incrementality: Incrementality,
}

impl SequenceConfig {
    pub fn new(step_algorithm: StepAlgorithm, grow: GrowStrategy, incrementality: Incrementality) -> SequenceConfig {
        SequenceConfig { step_algorithm, grow, incrementality }
    }

    pub fn validate(&self) -> Result<()> {
        use Incrementality::*;
        use StepAlgorithm::*;
        let ok = match (self.step_algorithm, self.incrementality) {
            (MusBaseline, NoneMode) => true,
            (MusBaseline, _) => false,
            (OcusStep, PerLiteralIncrementalHs) => false,
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Precondition(format!("invalid configuration {}", self.label())))
        }
    }

    /// Every valid combination of search algorithm and incrementality, for one grow.
    pub fn all_incremental(grow: GrowStrategy) -> Vec<SequenceConfig> {
        use Incrementality::*;
        use StepAlgorithm::*;
        let mut out = Vec::new();
        for algo in [OcusStep, OusBoundedPerLiteral] {
            for incr in [NoneMode, SsCaching, SharedIncrementalHs, PerLiteralIncrementalHs] {
                let c = SequenceConfig::new(algo, grow, incr);
                if c.validate().is_ok() {
                    out.push(c);
                }
            }
        }
        out
    }

    /// `algo[+incr]@grow`, or `mus` for the baseline.
    pub fn label(&self) -> String {
        let algo = match self.step_algorithm {
            StepAlgorithm::MusBaseline => return "mus".into(),
            StepAlgorithm::OcusStep => "ocus",
            StepAlgorithm::OusBoundedPerLiteral => "ousb",
        };
        let incr = match self.incrementality {
            Incrementality::NoneMode => "",
            Incrementality::SsCaching => "+ss",
            Incrementality::SharedIncrementalHs => "+shared",
            Incrementality::PerLiteralIncrementalHs => "+perlit",
        };
        format!("{algo}{incr}@{}", self.grow.label())
    }
}

impl fmt::Display for SequenceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for StepAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mus" => Ok(StepAlgorithm::MusBaseline),
            "ocus" => Ok(StepAlgorithm::OcusStep),
            "ousb" => Ok(StepAlgorithm::OusBoundedPerLiteral),
            _ => Err(Error::Schema(format!("unknown algorithm '{s}' (expected mus, ocus or ousb)"))),
        }
    }
}

impl FromStr for Incrementality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Incrementality::NoneMode),
            "ss" => Ok(Incrementality::SsCaching),
            "shared" => Ok(Incrementality::SharedIncrementalHs),
            "perlit" => Ok(Incrementality::PerLiteralIncrementalHs),
            _ => Err(Error::Schema(format!("unknown incrementality '{s}' (expected none, ss, shared or perlit)"))),
        }
    }
}

/// Parses a grow label as produced by [`GrowStrategy::label`].
pub fn parse_grow_label(s: &str) -> Result<GrowStrategy> {
    let bad = || Error::Schema(format!("unknown grow strategy '{s}'"));
    match s.rsplit_once(':') {
        Some((g, w)) if g.starts_with("max:") => GrowStrategy::parse(g, w).ok_or_else(bad),
        _ => GrowStrategy::parse(s, "unif").filter(|g| !matches!(g, GrowStrategy::MaxSat { .. })).ok_or_else(bad),
    }
}

impl FromStr for SequenceConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let config = if s == "mus" {
            SequenceConfig::new(StepAlgorithm::MusBaseline, GrowStrategy::NoGrow, Incrementality::NoneMode)
        } else {
            let (head, grow) = match s.split_once('@') {
                Some((h, g)) => (h, parse_grow_label(g)?),
                None => ("ocus", parse_grow_label(s)?),
            };
            let (algo, incr) = match head.split_once('+') {
                Some((a, i)) => (a.parse()?, i.parse()?),
                None => (head.parse()?, Incrementality::NoneMode),
            };
            SequenceConfig::new(algo, grow, incr)
        };
        config.validate()?;
        Ok(config)
    }
}

/// One implication `facts_used ∧ constraints_used ⇒ derived`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplanationStep {
    pub derived: Vec<Literal>,
    pub facts_used: Vec<Literal>,
    /// Indices into the problem's constraints.
    pub constraints_used: IndexSet,
    pub cost: u64,
}

/// Search effort behind one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepStats {
    /// Literals that were still to be explained.
    pub candidates: usize,
    pub searches: u64,
    pub exceeds_bound: u64,
    pub iterations: u64,
    pub sat_calls: u64,
    pub millis: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExplanationSequence {
    pub steps: Vec<ExplanationStep>,
    pub stats: Vec<StepStats>,
}

impl ExplanationSequence {
    pub fn total_cost(&self) -> u64 {
        self.steps.iter().map(|s| s.cost).sum()
    }

    pub fn total_millis(&self) -> f64 {
        self.stats.iter().map(|s| s.millis).sum()
    }

    pub fn costs(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.cost).collect()
    }

    /// The known facts before each step, then the final interpretation.
    pub fn interpretations(&self, initial: &Interpretation) -> Result<Vec<Interpretation>> {
        let mut out = vec![initial.clone()];
        let mut current = initial.clone();
        for s in &self.steps {
            for &l in &s.derived {
                current.insert(l)?;
            }
            out.push(current.clone());
        }
        Ok(out)
    }
}

/// A failed sequence, with the steps completed before the failure.
#[derive(Debug)]
pub struct SequenceError {
    pub error: Error,
    pub partial: ExplanationSequence,
}

impl fmt::Display for SequenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} steps)", self.error, self.partial.steps.len())
    }
}

impl std::error::Error for SequenceError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// The constraints, then one fact unit per target literal, then one negated
/// unit per target literal outside the initial facts.
pub struct Universe<'p> {
    problem: &'p ExplanationProblem,
    formula: CnfFormula,
    fact_index: BTreeMap<Literal, usize>,
    neg_index: BTreeMap<Literal, usize>,
    /// Target literal behind each unit clause.
    unit_literal: Vec<Option<Literal>>,
    neg_domain: IndexSet,
}

impl<'p> Universe<'p> {
    pub fn new(problem: &'p ExplanationProblem) -> Universe<'p> {
        let mut formula = problem.constraints().clone();
        let fact = problem.weights().fact;
        let mut unit_literal = vec![None; formula.len()];
        let mut fact_index = BTreeMap::new();
        for l in problem.target().iter() {
            fact_index.insert(l, formula.push(Clause::unit(l), fact, ClauseGroup::DerivedFact));
            unit_literal.push(Some(l));
        }
        let mut neg_index = BTreeMap::new();
        let mut neg_domain = IndexSet::new();
        for l in problem.target().difference(problem.initial()).iter() {
            let i = formula.push(Clause::unit(l.negate()), fact, ClauseGroup::NegatedTarget);
            neg_index.insert(l, i);
            neg_domain.insert(i);
            unit_literal.push(Some(l));
        }
        Universe { problem, formula, fact_index, neg_index, unit_literal, neg_domain }
    }

    pub fn problem(&self) -> &'p ExplanationProblem {
        self.problem
    }

    pub fn formula(&self) -> &CnfFormula {
        &self.formula
    }

    fn constraint_count(&self) -> usize {
        self.problem.constraints().len()
    }

    fn check_interpretation(&self, interp: &Interpretation) -> Result<Interpretation> {
        let target = self.problem.target();
        if !self.problem.initial().is_subset(interp) || !interp.is_subset(target) {
            return Err(Error::Precondition("interpretation must lie between the initial facts and the target".into()));
        }
        let remaining = target.difference(interp);
        if remaining.is_empty() {
            return Err(Error::Precondition("nothing left to explain".into()));
        }
        Ok(remaining)
    }

    /// Constraints plus the facts of `interp`.
    pub fn base(&self, interp: &Interpretation) -> IndexSet {
        let mut s = IndexSet::range(self.constraint_count());
        for l in interp.iter() {
            s.insert(self.fact_index[&l]);
        }
        s
    }

    pub fn neg(&self, lit: Literal) -> usize {
        self.neg_index[&lit]
    }

    fn step_from(&self, subset: &IndexSet, derived: Vec<Literal>, cost: u64) -> ExplanationStep {
        let nc = self.constraint_count();
        let mut facts_used = Vec::new();
        let mut constraints_used = IndexSet::new();
        for i in subset.iter() {
            if i < nc {
                constraints_used.insert(i);
            } else if self.formula.group(i) == ClauseGroup::DerivedFact {
                facts_used.push(self.unit_literal[i].expect("unit clause"));
            }
        }
        ExplanationStep { derived, facts_used, constraints_used, cost }
    }
}

#[derive(Clone, Debug)]
struct LiteralState {
    upper_bound: u64,
    /// An unsatisfiable subset of cost `upper_bound` containing the literal's negation.
    witness: Option<IndexSet>,
    hs: Option<HittingSetInstance>,
}

/// Runs the configured per-step search over a [`Universe`].
pub struct Explainer<'u> {
    universe: &'u Universe<'u>,
    config: SequenceConfig,
    engine: OcusEngine<'u>,
    hint: PolarityHint,
    cache: SatSubsetCache,
    shared_hs: Option<HittingSetInstance>,
    literals: BTreeMap<Literal, LiteralState>,
    deadline: Option<Instant>,
}

impl<'u> Explainer<'u> {
    pub fn new(universe: &'u Universe<'u>, config: SequenceConfig) -> Result<Explainer<'u>> {
        config.validate()?;
        let problem = universe.problem;
        let initial_bound = problem.constraints().weights().iter().sum::<u64>()
            + problem.weights().fact * (problem.target().len() as u64);
        let literals = universe
            .neg_index
            .keys()
            .map(|&l| (l, LiteralState { upper_bound: initial_bound, witness: None, hs: None }))
            .collect();
        Ok(Explainer {
            universe,
            config,
            engine: OcusEngine::new(&universe.formula),
            hint: PolarityHint::from(problem.target()),
            cache: SatSubsetCache::new(),
            shared_hs: None,
            literals,
            deadline: None,
        })
    }

    pub fn config(&self) -> SequenceConfig {
        self.config
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
        self.engine.set_deadline(deadline);
    }

    pub fn engine_stats(&self) -> EngineStats {
        self.engine.stats()
    }

    /// Stored upper bound and its witness subset (universe indices) for a literal still to explain.
    pub fn upper_bound(&self, lit: Literal) -> Option<(u64, Option<&IndexSet>)> {
        self.literals.get(&lit).map(|s| (s.upper_bound, s.witness.as_ref()))
    }

    fn check_deadline(&self) -> Result<()> {
        match self.deadline {
            Some(d) if Instant::now() >= d => Err(Error::Timeout),
            _ => Ok(()),
        }
    }

    /// The cheapest step at `interp` under the configured algorithm.
    pub fn step(&mut self, interp: &Interpretation) -> Result<(ExplanationStep, StepStats)> {
        let remaining = self.universe.check_interpretation(interp)?;
        let before = self.engine.stats();
        let started = Instant::now();
        let mut stats = StepStats { candidates: remaining.len(), ..Default::default() };
        let (subset, cost, lit) = match self.config.step_algorithm {
            StepAlgorithm::MusBaseline => self.step_mus(interp, &remaining, &mut stats)?,
            StepAlgorithm::OcusStep => self.step_ocus(interp, &mut stats)?,
            StepAlgorithm::OusBoundedPerLiteral => self.step_ous(interp, &remaining, &mut stats)?,
        };
        let derived = self.widen(&subset, lit, &remaining)?;
        for l in &derived {
            self.literals.remove(l);
        }
        let step = self.universe.step_from(&subset, derived, cost);
        let after = self.engine.stats();
        stats.iterations = after.iterations - before.iterations;
        stats.sat_calls = after.sat_calls - before.sat_calls;
        stats.millis = started.elapsed().as_secs_f64() * 1000.0;
        Ok((step, stats))
    }

    /// `lit` plus every other remaining literal entailed by the same facts and constraints.
    fn widen(&mut self, subset: &IndexSet, lit: Literal, remaining: &Interpretation) -> Result<Vec<Literal>> {
        let mut core = subset.clone();
        core.remove(self.universe.neg(lit));
        let mut derived = vec![lit];
        for other in remaining.iter().filter(|&l| l != lit) {
            let mut probe = core.clone();
            probe.insert(self.universe.neg(other));
            if !self.engine.check(&probe, &self.hint)?.is_sat() {
                derived.push(other);
            }
        }
        derived.sort();
        Ok(derived)
    }

    fn step_mus(
        &mut self,
        interp: &Interpretation,
        remaining: &Interpretation,
        stats: &mut StepStats,
    ) -> Result<(IndexSet, u64, Literal)> {
        let base = self.universe.base(interp);
        let f = &self.universe.formula;
        let mut best: Option<(IndexSet, u64, Literal)> = None;
        let mut solver = crate::sat::SubsetSolver::new(f);
        for l in remaining.iter() {
            self.check_deadline()?;
            stats.searches += 1;
            let mut start = base.clone();
            start.insert(self.universe.neg(l));
            let mus = mus_deletion_with(&mut solver, &start)?;
            let cost = f.cost(&mus)?;
            if best.as_ref().map_or(true, |b| cost < b.1) {
                best = Some((mus, cost, l));
            }
        }
        best.ok_or_else(|| Error::Internal("no literal left to explain".into()))
    }

    fn step_ocus(&mut self, interp: &Interpretation, stats: &mut StepStats) -> Result<(IndexSet, u64, Literal)> {
        let u = self.universe;
        let base = u.base(interp);
        let mut active = base.clone();
        for l in u.problem.target().difference(interp).iter() {
            active.insert(u.neg(l));
        }
        let constraint = MetaConstraint::ExactlyOne(u.neg_domain.clone());
        let query =
            OcusQuery { active: &active, grow: self.config.grow, actual_domain: &base, hint: &self.hint, bound: None };
        stats.searches += 1;
        let result = match self.config.incrementality {
            Incrementality::SharedIncrementalHs => {
                let hs = match &mut self.shared_hs {
                    Some(hs) => hs,
                    None => self.shared_hs.insert(self.fresh_hs(constraint)?),
                };
                self.engine.solve(&query, hs, &mut SatSubsetCache::new())?
            }
            Incrementality::SsCaching => {
                let mut hs = self.fresh_hs(constraint)?;
                self.engine.solve(&query, &mut hs, &mut self.cache)?
            }
            _ => {
                let mut hs = self.fresh_hs(constraint)?;
                self.engine.solve(&query, &mut hs, &mut SatSubsetCache::new())?
            }
        };
        let OcusResult::Found { subset, cost } = result else {
            return Err(Error::Internal("no explanation exists for the remaining target literals".into()));
        };
        let lit = subset
            .iter()
            .find(|i| u.neg_domain.contains(*i))
            .and_then(|i| u.unit_literal[i])
            .ok_or_else(|| Error::Internal("explanation selects no target literal".into()))?;
        Ok((subset, cost, lit))
    }

    fn fresh_hs(&self, constraint: MetaConstraint) -> Result<HittingSetInstance> {
        let f = &self.universe.formula;
        HittingSetInstance::new(f.all_indices(), f.weights(), constraint)
    }

    fn step_ous(
        &mut self,
        interp: &Interpretation,
        remaining: &Interpretation,
        stats: &mut StepStats,
    ) -> Result<(IndexSet, u64, Literal)> {
        let u = self.universe;
        let base = u.base(interp);
        let mut order: Vec<(u64, Literal)> = remaining.iter().map(|l| (self.literals[&l].upper_bound, l)).collect();
        order.sort();
        let mut best: Option<(IndexSet, u64, Literal)> = None;
        for (_, lit) in order {
            self.check_deadline()?;
            let mut active = base.clone();
            active.insert(u.neg(lit));
            let query = OcusQuery {
                active: &active,
                grow: self.config.grow,
                actual_domain: &base,
                hint: &self.hint,
                bound: Some(best.as_ref().map_or(u64::MAX, |b| b.1)),
            };
            stats.searches += 1;
            let result = match self.config.incrementality {
                Incrementality::SharedIncrementalHs => {
                    let hs = match &mut self.shared_hs {
                        Some(hs) => hs,
                        None => self.shared_hs.insert(self.fresh_hs(MetaConstraint::TriviallyTrue)?),
                    };
                    self.engine.solve(&query, hs, &mut SatSubsetCache::new())?
                }
                Incrementality::PerLiteralIncrementalHs => {
                    let mut hs = match self.literals.get_mut(&lit).and_then(|s| s.hs.take()) {
                        Some(hs) => hs,
                        None => self.fresh_hs(MetaConstraint::TriviallyTrue)?,
                    };
                    let r = self.engine.solve(&query, &mut hs, &mut SatSubsetCache::new());
                    self.literals.get_mut(&lit).expect("remaining literal").hs = Some(hs);
                    r?
                }
                Incrementality::SsCaching => {
                    let mut hs = self.fresh_hs(MetaConstraint::TriviallyTrue)?;
                    self.engine.solve(&query, &mut hs, &mut self.cache)?
                }
                Incrementality::NoneMode => {
                    let mut hs = self.fresh_hs(MetaConstraint::TriviallyTrue)?;
                    self.engine.solve(&query, &mut hs, &mut SatSubsetCache::new())?
                }
            };
            match result {
                OcusResult::Found { subset, cost } => {
                    let state = self.literals.get_mut(&lit).expect("remaining literal");
                    state.upper_bound = cost;
                    state.witness = Some(subset.clone());
                    // Equal costs resolve to the lexicographically smaller subset.
                    if best.as_ref().map_or(true, |b| (cost, &subset) < (b.1, &b.0)) {
                        best = Some((subset, cost, lit));
                    }
                }
                OcusResult::ExceedsBound => stats.exceeds_bound += 1,
                OcusResult::NoneExists => {
                    return Err(Error::Internal(format!("target literal {lit} has no explanation")));
                }
            }
        }
        best.ok_or_else(|| Error::Internal("no literal left to explain".into()))
    }
}

/// Options for [`explain_full_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExplainOptions {
    pub deadline: Option<Instant>,
}

pub fn explain_full(
    problem: &ExplanationProblem,
    config: SequenceConfig,
) -> Result<ExplanationSequence, SequenceError> {
    explain_full_with(problem, config, ExplainOptions::default())
}

/// Greedily explains the whole target, one cheapest step at a time.
pub fn explain_full_with(
    problem: &ExplanationProblem,
    config: SequenceConfig,
    options: ExplainOptions,
) -> Result<ExplanationSequence, SequenceError> {
    let mut seq = ExplanationSequence::default();
    let universe = Universe::new(problem);
    let mut explainer = match Explainer::new(&universe, config) {
        Ok(e) => e,
        Err(error) => return Err(SequenceError { error, partial: seq }),
    };
    explainer.set_deadline(options.deadline);
    let mut interp = problem.initial().clone();
    while interp != *problem.target() {
        let (step, stats) = match explainer.step(&interp) {
            Ok(s) => s,
            Err(error) => return Err(SequenceError { error, partial: seq }),
        };
        for &l in &step.derived {
            if let Err(error) = interp.insert(l) {
                return Err(SequenceError { error, partial: seq });
            }
        }
        seq.steps.push(step);
        seq.stats.push(stats);
    }
    Ok(seq)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    FactNotKnown { step: usize, literal: Literal },
    AlreadyKnown { step: usize, literal: Literal },
    NotInTarget { step: usize, literal: Literal },
    UnknownConstraint { step: usize, index: usize },
    NotEntailed { step: usize, literal: Literal },
    CostMismatch { step: usize, stated: u64, actual: u64 },
    EmptyStep { step: usize },
    Incomplete { missing: Vec<Literal> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::FactNotKnown { step, literal } => write!(f, "step {step}: fact {literal} is not known yet"),
            Violation::AlreadyKnown { step, literal } => write!(f, "step {step}: literal {literal} is already known"),
            Violation::NotInTarget { step, literal } => {
                write!(f, "step {step}: literal {literal} is not in the target")
            }
            Violation::UnknownConstraint { step, index } => write!(f, "step {step}: no constraint {index}"),
            Violation::NotEntailed { step, literal } => write!(f, "step {step}: literal {literal} is not entailed"),
            Violation::CostMismatch { step, stated, actual } => {
                write!(f, "step {step}: stated cost {stated} but the step costs {actual}")
            }
            Violation::EmptyStep { step } => write!(f, "step {step}: derives nothing"),
            Violation::Incomplete { missing } => {
                let m: Vec<String> = missing.iter().map(|l| l.to_string()).collect();
                write!(f, "sequence ends before deriving {}", m.join(", "))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub violation: Option<Violation>,
    pub total_cost: u64,
}

impl VerificationReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }
}

/// Independently re-checks every step of a sequence.
pub fn verify_sequence(problem: &ExplanationProblem, steps: &[ExplanationStep]) -> VerificationReport {
    let constraints = problem.constraints();
    let fact = problem.weights().fact;
    let mut known = problem.initial().clone();
    let mut total = 0;
    let fail = |v: Violation, total: u64| VerificationReport { violation: Some(v), total_cost: total };
    for (k, s) in steps.iter().enumerate() {
        if s.derived.is_empty() {
            return fail(Violation::EmptyStep { step: k }, total);
        }
        if let Some(&l) = s.facts_used.iter().find(|&&l| !known.contains(l)) {
            return fail(Violation::FactNotKnown { step: k, literal: l }, total);
        }
        if let Some(i) = s.constraints_used.iter().find(|&i| i >= constraints.len()) {
            return fail(Violation::UnknownConstraint { step: k, index: i }, total);
        }
        for &n in &s.derived {
            if known.contains(n) || known.contains(n.negate()) {
                return fail(Violation::AlreadyKnown { step: k, literal: n }, total);
            }
            if !problem.target().contains(n) {
                return fail(Violation::NotInTarget { step: k, literal: n }, total);
            }
            let mut f = CnfFormula::new(problem.atom_count());
            for i in s.constraints_used.iter() {
                f.push(constraints.clause(i).clone(), 0, ClauseGroup::PuzzleSpecific);
            }
            for &l in &s.facts_used {
                f.push(Clause::unit(l), 0, ClauseGroup::DerivedFact);
            }
            f.push(Clause::unit(n.negate()), 0, ClauseGroup::NegatedTarget);
            match solve_subset(&f, &f.all_indices(), &Interpretation::new(), &PolarityHint::none()) {
                Ok(SatResult::Unsat) => {}
                _ => return fail(Violation::NotEntailed { step: k, literal: n }, total),
            }
        }
        let actual = s.constraints_used.iter().map(|i| constraints.weight(i)).sum::<u64>()
            + fact * (s.facts_used.len() as u64 + 1);
        if actual != s.cost {
            return fail(Violation::CostMismatch { step: k, stated: s.cost, actual }, total);
        }
        total += s.cost;
        for &n in &s.derived {
            known.insert(n).expect("checked consistent above");
        }
    }
    let missing: Vec<Literal> = problem.target().difference(&known).iter().collect();
    if !missing.is_empty() {
        return fail(Violation::Incomplete { missing }, total);
    }
    VerificationReport { violation: None, total_cost: total }
}

/// One step of the sequence document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocumentStep {
    pub index: usize,
    pub derived: Vec<Literal>,
    pub facts_used: Vec<Literal>,
    pub constraints_used: Vec<usize>,
    #[serde(default)]
    pub derived_text: Vec<String>,
    #[serde(default)]
    pub facts_text: Vec<String>,
    #[serde(default)]
    pub constraints_text: Vec<String>,
    pub cost: u64,
    #[serde(default)]
    pub millis: f64,
}

/// The machine-readable sequence output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDocument {
    #[serde(default)]
    pub config: String,
    pub steps: Vec<DocumentStep>,
    pub total_cost: u64,
    #[serde(default)]
    pub total_millis: f64,
}

impl SequenceDocument {
    pub fn new(problem: &ExplanationProblem, config: &SequenceConfig, seq: &ExplanationSequence) -> SequenceDocument {
        let steps = seq
            .steps
            .iter()
            .enumerate()
            .map(|(k, s)| DocumentStep {
                index: k,
                derived: s.derived.clone(),
                facts_used: s.facts_used.clone(),
                constraints_used: s.constraints_used.iter().collect(),
                derived_text: s.derived.iter().map(|&l| problem.literal_name(l)).collect(),
                facts_text: s.facts_used.iter().map(|&l| problem.literal_name(l)).collect(),
                constraints_text: s
                    .constraints_used
                    .iter()
                    .map(|i| problem.clause_text(problem.constraints().clause(i)))
                    .collect(),
                cost: s.cost,
                millis: seq.stats.get(k).map_or(0.0, |st| st.millis),
            })
            .collect();
        SequenceDocument {
            config: config.label(),
            steps,
            total_cost: seq.total_cost(),
            total_millis: seq.total_millis(),
        }
    }

    pub fn explanation_steps(&self) -> Vec<ExplanationStep> {
        self.steps
            .iter()
            .map(|s| ExplanationStep {
                derived: s.derived.clone(),
                facts_used: s.facts_used.clone(),
                constraints_used: s.constraints_used.iter().copied().collect(),
                cost: s.cost,
            })
            .collect()
    }
}
