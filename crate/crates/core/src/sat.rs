//! Satisfiability of clause subsets.
//!
//! [`SubsetSolver`] loads a formula once, guarding clause `i` with a selector
//! variable, and answers repeated queries "is the subset `S` satisfiable?"
//! by assuming the selectors of `S`. Learned clauses carry over between
//! queries.

use crate::cdcl::{Lit, Solver};
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, IndexSet, Interpretation, Literal, Model, PolarityHint};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    Unsat,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatResult::Sat(_))
    }

    pub fn model(&self) -> Option<&Model> {
        match self {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat => None,
        }
    }
}

pub(crate) fn atom_lit(l: Literal) -> Lit {
    Lit::new(l.atom() as usize - 1, l.is_positive())
}

/// Incremental oracle answering satisfiability of subsets of one formula.
pub struct SubsetSolver {
    pub(crate) solver: Solver,
    pub(crate) atom_count: usize,
    pub(crate) selectors: Vec<Lit>,
    pub(crate) calls: u64,
}

impl SubsetSolver {
    pub fn new(formula: &CnfFormula) -> SubsetSolver {
        let atom_count = formula.atom_count() as usize;
        let mut solver = Solver::new();
        solver.ensure_vars(atom_count + formula.len());
        let mut selectors = Vec::with_capacity(formula.len());
        let mut lits = Vec::new();
        for (i, clause) in formula.clauses().iter().enumerate() {
            let sel = Lit::new(atom_count + i, true);
            selectors.push(sel);
            lits.clear();
            lits.extend(clause.literals().iter().map(|&l| atom_lit(l)));
            lits.push(!sel);
            solver.add_clause(&lits);
        }
        SubsetSolver { solver, atom_count, selectors, calls: 0 }
    }

    /// Number of satisfiability queries answered so far.
    pub fn calls(&self) -> u64 {
        self.calls
    }

    /// Is `{F[i] | i ∈ subset}` plus the unit `assumptions` satisfiable?
    ///
    /// Branching follows ascending atom ids with the hinted value first (false
    /// when no hint is given), so identical queries give identical models.
    pub fn solve(&mut self, subset: &IndexSet, assumptions: &Interpretation, hint: &PolarityHint) -> Result<SatResult> {
        if let Some(m) = subset.max_index() {
            if m >= self.selectors.len() {
                return Err(Error::IndexOutOfRange { index: m, len: self.selectors.len() });
            }
        }
        self.calls += 1;
        // Assumed atoms beyond the formula still need variables.
        let extra = assumptions.max_atom() as usize;
        if extra > self.atom_count {
            return Err(Error::Precondition(format!(
                "assumption over atom {extra} outside the formula's {} atoms",
                self.atom_count
            )));
        }
        self.set_hint(hint);
        let mut assume: Vec<Lit> = assumptions.iter().map(atom_lit).collect();
        assume.extend(subset.iter().map(|i| self.selectors[i]));
        if self.solver.solve(&assume) {
            let model = Model::new(self.solver.model()[..self.atom_count].to_vec());
            Ok(SatResult::Sat(model))
        } else {
            Ok(SatResult::Unsat)
        }
    }
}

impl SubsetSolver {
    pub(crate) fn set_hint(&mut self, hint: &PolarityHint) {
        for a in 0..self.atom_count {
            self.solver.set_polarity(a, hint.get(a as u32 + 1).unwrap_or(false));
        }
    }

    /// After an unsatisfiable answer, the clause indices among the queried
    /// subset that are already unsatisfiable together with the assumptions.
    pub fn core(&self) -> IndexSet {
        self.solver
            .failed_assumptions()
            .iter()
            .filter(|l| l.var() >= self.atom_count)
            .map(|l| l.var() - self.atom_count)
            .collect()
    }
}

/// One-shot subset satisfiability check.
pub fn solve_subset(
    formula: &CnfFormula,
    subset: &IndexSet,
    assumptions: &Interpretation,
    hint: &PolarityHint,
) -> Result<SatResult> {
    formula.check_subset(subset)?;
    let mut sub = CnfFormula::new(formula.atom_count().max(assumptions.max_atom()));
    for i in subset.iter() {
        sub.push(formula.clause(i).clone(), formula.weight(i), formula.group(i));
    }
    let mut solver = SubsetSolver::new(&sub);
    solver.solve(&sub.all_indices(), assumptions, hint)
}

/// Indices of the clauses of `formula` satisfied by a total `model`.
pub fn model_satisfied_clauses(formula: &CnfFormula, model: &Interpretation) -> Result<IndexSet> {
    let total = Model::from_interpretation(model, formula.atom_count())
        .ok_or_else(|| Error::Precondition("model does not assign every atom of the formula".into()))?;
    Ok(formula.satisfied_by(&total))
}
