//! Weighted partial MaxSAT by core-guided search with totalizers.
//!
//! Soft clause `C_i` is guarded by a selector, `C_i ∨ ¬s_i`, assumed true with
//! weight `w_i`. Each core found under the weighted assumptions raises the
//! lower bound by its least weight; that weight is moved from the core's
//! assumptions to "fewer than two of them are violated", expressed through a
//! totalizer over the core. Heavier assumptions are enforced first; a model
//! under all remaining assumptions is optimal.

use std::collections::BTreeMap;

use crate::cdcl::{Lit, Solver};
use crate::error::{Error, Result};
use crate::formula::{CnfFormula, IndexSet, Model, PolarityHint};
use crate::sat::SubsetSolver;

/// Hard clauses plus weighted soft clauses, all drawn from one formula.
#[derive(Clone, Debug)]
pub struct MaxSatInstance<'a> {
    pub formula: &'a CnfFormula,
    pub hard: IndexSet,
    /// `(clause index, positive weight)`; indices must not be hard.
    pub soft: Vec<(usize, u64)>,
    pub hint: PolarityHint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxSatSolution {
    pub model: Model,
    /// Hard indices plus every soft index the model satisfies.
    pub satisfied: IndexSet,
    /// Total weight of satisfied soft clauses.
    pub satisfied_weight: u64,
    /// Total weight of falsified soft clauses.
    pub cost: u64,
}

/// Finds a model of the hard clauses maximizing satisfied soft weight.
pub fn maximize(inst: &MaxSatInstance<'_>) -> Result<MaxSatSolution> {
    let mut solver = SubsetSolver::new(inst.formula);
    maximize_with(&mut solver, inst)
}

fn maximize_with(sub: &mut SubsetSolver, inst: &MaxSatInstance<'_>) -> Result<MaxSatSolution> {
    let f = inst.formula;
    f.check_subset(&inst.hard)?;
    let mut seen = IndexSet::new();
    for &(i, w) in &inst.soft {
        if i >= f.len() {
            return Err(Error::IndexOutOfRange { index: i, len: f.len() });
        }
        if inst.hard.contains(i) {
            return Err(Error::Precondition(format!("clause {i} is both hard and soft")));
        }
        if w == 0 {
            return Err(Error::Precondition(format!("soft clause {i} has zero weight")));
        }
        if !seen.insert(i) {
            return Err(Error::Precondition(format!("clause {i} is soft twice")));
        }
    }
    sub.set_hint(&inst.hint);
    sub.calls += 1;
    let atoms = sub.atom_count;
    let hard: Vec<Lit> = inst.hard.iter().map(|i| sub.selectors[i]).collect();
    let solver = &mut sub.solver;
    let mut weight: BTreeMap<Lit, u64> = inst.soft.iter().map(|&(i, w)| (sub.selectors[i], w)).collect();
    // Assumption `¬o_j` of a totalizer, by literal: all outputs and `j`.
    let mut outputs_of: BTreeMap<Lit, (usize, usize)> = BTreeMap::new();
    let mut totalizers: Vec<Vec<Lit>> = Vec::new();
    let mut lower = 0;
    // Only assumptions at least this heavy are enforced; it drops to the next
    // weight present whenever the enforced ones are satisfiable.
    let mut stratum = weight.values().copied().max().unwrap_or(0);
    let mut assume = Vec::new();
    loop {
        assume.clear();
        assume.extend_from_slice(&hard);
        assume.extend(weight.iter().filter(|&(_, &w)| w >= stratum).map(|(&a, _)| a));
        if solver.solve(&assume) {
            match weight.values().copied().filter(|&w| w < stratum).max() {
                Some(next) => {
                    stratum = next;
                    continue;
                }
                None => {
                    let sol = evaluate(inst, Model::new(solver.model()[..atoms].to_vec()));
                    debug_assert_eq!(sol.cost, lower);
                    return Ok(sol);
                }
            }
        }
        let core = trim_core(solver, &hard, &weight);
        if core.is_empty() {
            return Err(Error::HardUnsatisfiable);
        }
        let m = core.iter().map(|a| weight[a]).min().expect("non-empty core");
        lower += m;
        for a in &core {
            let w = weight.get_mut(a).expect("core of assumptions");
            *w -= m;
            if *w == 0 {
                weight.remove(a);
            }
            if let Some(&(t, j)) = outputs_of.get(a) {
                if let Some(&next) = totalizers[t].get(j + 1) {
                    *weight.entry(!next).or_insert(0) += m;
                    outputs_of.insert(!next, (t, j + 1));
                }
            }
        }
        if core.len() > 1 {
            let inputs: Vec<Lit> = core.iter().map(|&a| !a).collect();
            let outputs = totalizer(solver, &inputs);
            *weight.entry(!outputs[1]).or_insert(0) += m;
            outputs_of.insert(!outputs[1], (totalizers.len(), 1));
            totalizers.push(outputs);
        }
    }
}

/// Unary counter over `inputs`: output `k` is implied by at least `k + 1` true inputs.
fn totalizer(solver: &mut Solver, inputs: &[Lit]) -> Vec<Lit> {
    if inputs.len() == 1 {
        return inputs.to_vec();
    }
    let (l, r) = inputs.split_at(inputs.len() / 2);
    let a = totalizer(solver, l);
    let b = totalizer(solver, r);
    let out: Vec<Lit> = (0..inputs.len()).map(|_| Lit::new(solver.new_var(), true)).collect();
    let mut clause = Vec::with_capacity(3);
    for i in 0..=a.len() {
        for j in 0..=b.len() {
            if i + j == 0 {
                continue;
            }
            clause.clear();
            if i > 0 {
                clause.push(!a[i - 1]);
            }
            if j > 0 {
                clause.push(!b[j - 1]);
            }
            clause.push(out[i + j - 1]);
            solver.add_clause(&clause);
        }
    }
    out
}

/// The soft assumptions among the last failed set, shrunk by re-solving on
/// them (with the hard ones) a few times.
fn trim_core(solver: &mut Solver, hard: &[Lit], weight: &BTreeMap<Lit, u64>) -> Vec<Lit> {
    let soft_part = |failed: &[Lit]| {
        let mut c: Vec<Lit> = failed.iter().copied().filter(|a| weight.contains_key(a)).collect();
        c.sort();
        c.dedup();
        c
    };
    let mut core = soft_part(solver.failed_assumptions());
    let mut assume = Vec::new();
    for _ in 0..3 {
        assume.clear();
        assume.extend_from_slice(hard);
        assume.extend_from_slice(&core);
        if core.is_empty() || solver.solve(&assume) {
            break;
        }
        let next = soft_part(solver.failed_assumptions());
        if next.len() >= core.len() {
            break;
        }
        core = next;
    }
    core
}

fn evaluate(inst: &MaxSatInstance<'_>, model: Model) -> MaxSatSolution {
    let mut satisfied = inst.hard.clone();
    let mut satisfied_weight = 0;
    let mut cost = 0;
    for &(i, w) in &inst.soft {
        if inst.formula.clause(i).is_satisfied_by(&model) {
            satisfied.insert(i);
            satisfied_weight += w;
        } else {
            cost += w;
        }
    }
    MaxSatSolution { model, satisfied, satisfied_weight, cost }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, ClauseGroup, Interpretation, Literal};

    fn lit(v: i32) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    fn formula(atoms: u32, clauses: &[&[i32]]) -> CnfFormula {
        let mut f = CnfFormula::new(atoms);
        for c in clauses {
            f.push(Clause::new(c.iter().map(|&v| lit(v))).unwrap(), 1, ClauseGroup::PuzzleSpecific);
        }
        f
    }

    #[test]
    fn hard_clause_forces_model() {
        let f = formula(2, &[&[1], &[-1], &[1, 2]]);
        let sol = maximize(&MaxSatInstance {
            formula: &f,
            hard: IndexSet::from([0]),
            soft: vec![(1, 5), (2, 1)],
            hint: PolarityHint::none(),
        })
        .unwrap();
        assert_eq!(sol.satisfied_weight, 1);
        assert_eq!(sol.satisfied, IndexSet::from([0, 2]));
        assert!(sol.model.value(1));
        // x2 is free once (x1 ∨ x2) holds; the default polarity is false.
        let with_hint = maximize(&MaxSatInstance {
            formula: &f,
            hard: IndexSet::from([0]),
            soft: vec![(1, 5), (2, 1)],
            hint: PolarityHint::from(&Interpretation::from_literals([lit(2)]).unwrap()),
        })
        .unwrap();
        assert_eq!(with_hint.model.to_interpretation(), Interpretation::from_literals([lit(1), lit(2)]).unwrap());
    }

    #[test]
    fn unsat_hard_is_an_error() {
        let f = formula(1, &[&[1], &[-1]]);
        let r = maximize(&MaxSatInstance {
            formula: &f,
            hard: IndexSet::from([0, 1]),
            soft: vec![],
            hint: PolarityHint::none(),
        });
        assert!(matches!(r, Err(Error::HardUnsatisfiable)));
    }

    #[test]
    fn trades_weight_correctly() {
        // x1 wanted by two weight-2 softs, ¬x1 by one weight-3 soft.
        let f = formula(1, &[&[1], &[1], &[-1]]);
        let sol = maximize(&MaxSatInstance {
            formula: &f,
            hard: IndexSet::new(),
            soft: vec![(0, 2), (1, 2), (2, 3)],
            hint: PolarityHint::none(),
        })
        .unwrap();
        assert_eq!(sol.cost, 3);
        assert!(sol.model.value(1));
    }
}
