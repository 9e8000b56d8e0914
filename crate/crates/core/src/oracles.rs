//! Deletion-based MUS extraction, exhaustive MUS/MCS enumeration and
//! backbone computation.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::formula::{CnfFormula, IndexSet, Interpretation, PolarityHint};
use crate::sat::{SatResult, SubsetSolver};

/// Default size limit for the exhaustive enumerators.
pub const BRUTE_FORCE_LIMIT: usize = 14;

/// Shrinks the unsatisfiable `start` to a subset-minimal unsatisfiable subset,
/// trying to drop clauses in descending index order. Clauses outside the
/// solver's core of an unsatisfiable answer are dropped at once.
pub fn mus_deletion(formula: &CnfFormula, start: &IndexSet) -> Result<IndexSet> {
    let mut solver = SubsetSolver::new(formula);
    mus_deletion_with(&mut solver, start)
}

pub(crate) fn mus_deletion_with(solver: &mut SubsetSolver, start: &IndexSet) -> Result<IndexSet> {
    let none = Interpretation::new();
    let hint = PolarityHint::none();
    if solver.solve(start, &none, &hint)?.is_sat() {
        return Err(Error::Precondition("MUS extraction needs an unsatisfiable start set".into()));
    }
    let mut current = solver.core();
    for i in start.iter().rev() {
        if !current.remove(i) {
            continue;
        }
        if solver.solve(&current, &none, &hint)?.is_sat() {
            current.insert(i);
        } else {
            current = solver.core();
        }
    }
    Ok(current)
}

/// Satisfiability of every subset of `formula`, as a table indexed by bitmask.
fn satisfiability_table(formula: &CnfFormula, limit: usize) -> Result<Vec<bool>> {
    let n = formula.len();
    if n > limit {
        return Err(Error::BruteForceLimit { size: n, limit });
    }
    let mut solver = SubsetSolver::new(formula);
    let none = Interpretation::new();
    let hint = PolarityHint::none();
    let mut sat = vec![false; 1 << n];
    for mask in 0..(1usize << n) {
        // A superset of an unsatisfiable subset is unsatisfiable.
        let dominated = (0..n).any(|b| mask >> b & 1 == 1 && !sat[mask & !(1 << b)]);
        sat[mask] = !dominated && solver.solve(&mask_to_set(mask, n), &none, &hint)?.is_sat();
    }
    Ok(sat)
}

fn mask_to_set(mask: usize, n: usize) -> IndexSet {
    (0..n).filter(|b| mask >> b & 1 == 1).collect()
}

/// All minimal unsatisfiable subsets, by exhaustive subset checking.
pub fn enumerate_mus(formula: &CnfFormula) -> Result<BTreeSet<IndexSet>> {
    enumerate_mus_limited(formula, BRUTE_FORCE_LIMIT)
}

pub fn enumerate_mus_limited(formula: &CnfFormula, limit: usize) -> Result<BTreeSet<IndexSet>> {
    let n = formula.len();
    let sat = satisfiability_table(formula, limit)?;
    Ok((0..(1usize << n))
        .filter(|&m| !sat[m] && (0..n).all(|b| m >> b & 1 == 0 || sat[m & !(1 << b)]))
        .map(|m| mask_to_set(m, n))
        .collect())
}

/// All minimal correction subsets. For a satisfiable formula this is `{∅}`.
pub fn enumerate_mcs(formula: &CnfFormula) -> Result<BTreeSet<IndexSet>> {
    enumerate_mcs_limited(formula, BRUTE_FORCE_LIMIT)
}

pub fn enumerate_mcs_limited(formula: &CnfFormula, limit: usize) -> Result<BTreeSet<IndexSet>> {
    let n = formula.len();
    let full = (1usize << n) - 1;
    let sat = satisfiability_table(formula, limit)?;
    // C is a correction subset iff its complement is satisfiable; minimal iff
    // putting back any single clause breaks that.
    Ok((0..(1usize << n))
        .filter(|&c| sat[full & !c] && (0..n).all(|b| c >> b & 1 == 0 || !sat[(full & !c) | 1 << b]))
        .map(|c| mask_to_set(c, n))
        .collect())
}

/// Literals true in every model of `constraints ∧ initial`.
pub fn consequences(constraints: &CnfFormula, initial: &Interpretation) -> Result<Interpretation> {
    let atoms = constraints.atom_count().max(initial.max_atom());
    let mut f = CnfFormula::new(atoms);
    for c in constraints.clauses() {
        f.push(c.clone(), 1, crate::formula::ClauseGroup::PuzzleSpecific);
    }
    let mut solver = SubsetSolver::new(&f);
    let all = f.all_indices();
    let hint = PolarityHint::from(initial);
    let SatResult::Sat(model) = solver.solve(&all, initial, &hint)? else {
        return Err(Error::UnsatisfiableBase);
    };
    let mut out = initial.clone();
    let mut probe = initial.clone();
    for l in model.literals() {
        if out.contains(l) {
            continue;
        }
        probe.insert(l.negate())?;
        if !solver.solve(&all, &probe, &hint)?.is_sat() {
            out.insert(l)?;
        }
        probe.remove(l.negate());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, ClauseGroup, Literal};

    fn lit(v: i32) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    fn formula(clauses: &[&[i32]]) -> CnfFormula {
        let mut f = CnfFormula::new(0);
        for c in clauses {
            f.push(Clause::new(c.iter().map(|&v| lit(v))).unwrap(), 1, ClauseGroup::PuzzleSpecific);
        }
        f
    }

    #[test]
    fn mus_of_contradiction() {
        let f = formula(&[&[1], &[-1]]);
        assert_eq!(mus_deletion(&f, &IndexSet::from([0, 1])).unwrap(), IndexSet::from([0, 1]));
        let g = formula(&[&[1], &[-1], &[2]]);
        assert_eq!(mus_deletion(&g, &IndexSet::from([0, 1, 2])).unwrap(), IndexSet::from([0, 1]));
        assert!(mus_deletion(&g, &IndexSet::from([0, 2])).is_err());
    }

    #[test]
    fn enumeration_edge_cases() {
        let f = formula(&[&[1], &[-1]]);
        assert_eq!(enumerate_mus(&f).unwrap(), BTreeSet::from([IndexSet::from([0, 1])]));
        assert_eq!(enumerate_mcs(&f).unwrap(), BTreeSet::from([IndexSet::from([0]), IndexSet::from([1])]));
        let sat = formula(&[&[1, 2], &[-1]]);
        assert!(enumerate_mus(&sat).unwrap().is_empty());
        assert_eq!(enumerate_mcs(&sat).unwrap(), BTreeSet::from([IndexSet::new()]));
        let big = formula(&[&[1i32] as &[i32]; 15]);
        assert!(matches!(enumerate_mus(&big), Err(Error::BruteForceLimit { .. })));
    }

    #[test]
    fn consequences_examples() {
        let i0 = Interpretation::from_literals([lit(1)]).unwrap();
        assert_eq!(consequences(&CnfFormula::new(1), &i0).unwrap(), i0);
        // Two models differing in x2.
        let f = formula(&[&[-1, 3], &[2, 3]]);
        let c = consequences(&f, &i0).unwrap();
        assert_eq!(c, Interpretation::from_literals([lit(1), lit(3)]).unwrap());
        let bad = formula(&[&[-1]]);
        assert!(matches!(consequences(&bad, &i0), Err(Error::UnsatisfiableBase)));
    }
}
