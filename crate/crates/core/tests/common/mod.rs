//! Independent reference implementations for the integration tests. Nothing
//! here calls the library's solvers.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use ocus::{Clause, ClauseGroup, CnfFormula, ExplanationProblem, IndexSet, Literal, PuzzleSpec};
use proptest::prelude::*;

pub fn lit(v: i32) -> Literal {
    Literal::from_dimacs(v).unwrap()
}

pub fn sample(name: &str) -> ExplanationProblem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("puzzles").join(name);
    PuzzleSpec::from_json(&std::fs::read(path).unwrap()).unwrap().encode().unwrap()
}

pub const SAMPLES: [&str; 3] = ["pets-2x2.json", "pets-3x3.json", "houses-4x4.json"];

pub fn mask_set(mask: u64) -> IndexSet {
    (0..64).filter(|b| mask >> b & 1 == 1).collect()
}

pub fn set_mask(s: &IndexSet) -> u64 {
    s.iter().fold(0, |m, i| m | 1 << i)
}

fn clause_holds(c: &Clause, assignment: u32) -> bool {
    c.literals().iter().any(|l| (assignment >> (l.atom() - 1) & 1 == 1) == l.is_positive())
}

/// For each assignment of the atoms (bit `a-1` is atom `a`), the mask of clauses it satisfies.
pub fn satisfied_masks(f: &CnfFormula) -> Vec<u64> {
    assert!(f.atom_count() <= 16 && f.len() <= 64);
    (0..1u32 << f.atom_count())
        .map(|a| f.clauses().iter().enumerate().fold(0, |m, (i, c)| if clause_holds(c, a) { m | 1 << i } else { m }))
        .collect()
}

/// Satisfiability of every clause subset, indexed by mask.
pub fn sat_table(f: &CnfFormula) -> Vec<bool> {
    let n = f.len();
    assert!(n <= 20);
    let mut sat = vec![false; 1 << n];
    for m in satisfied_masks(f) {
        sat[m as usize] = true;
    }
    // Subsets of satisfiable sets are satisfiable.
    for mask in (0..1usize << n).rev() {
        if !sat[mask] {
            sat[mask] = (0..n).any(|b| mask >> b & 1 == 0 && sat[mask | 1 << b]);
        }
    }
    sat
}

pub fn subset_sat(f: &CnfFormula, s: &IndexSet) -> bool {
    let want = set_mask(s);
    satisfied_masks(f).iter().any(|&m| m & want == want)
}

pub fn mus_family(f: &CnfFormula) -> BTreeSet<IndexSet> {
    let n = f.len();
    let sat = sat_table(f);
    (0..1usize << n)
        .filter(|&m| !sat[m] && (0..n).all(|b| m >> b & 1 == 0 || sat[m & !(1 << b)]))
        .map(|m| mask_set(m as u64))
        .collect()
}

pub fn mcs_family(f: &CnfFormula) -> BTreeSet<IndexSet> {
    let n = f.len();
    let full = (1usize << n) - 1;
    let sat = sat_table(f);
    (0..1usize << n)
        .filter(|&c| sat[full & !c] && (0..n).all(|b| c >> b & 1 == 0 || !sat[(full & !c) | 1 << b]))
        .map(|m| mask_set(m as u64))
        .collect()
}

/// Inclusion-minimal hitting sets of `family` over `0..n`.
pub fn minimal_hitting_sets(family: &BTreeSet<IndexSet>, n: usize) -> BTreeSet<IndexSet> {
    let masks: Vec<u64> = family.iter().map(set_mask).collect();
    let hits = |h: u64| masks.iter().all(|&s| s & h != 0);
    (0..1u64 << n)
        .filter(|&h| hits(h) && (0..n).all(|b| h >> b & 1 == 0 || !hits(h & !(1 << b))))
        .map(mask_set)
        .collect()
}

/// Cheapest, then lexicographically smallest, unsatisfiable subset holding
/// exactly one element of `domain` (any subset if `domain` is `None`).
pub fn brute_ocus(f: &CnfFormula, domain: Option<&IndexSet>) -> Option<(IndexSet, u64)> {
    let n = f.len();
    let sat = sat_table(f);
    let dmask = domain.map(set_mask);
    let mut best: Option<(u64, IndexSet)> = None;
    for m in 0..1usize << n {
        if sat[m] || dmask.is_some_and(|d| (m as u64 & d).count_ones() != 1) {
            continue;
        }
        let s = mask_set(m as u64);
        let cost = f.cost(&s).unwrap();
        if best.as_ref().map_or(true, |(c, b)| (cost, &s) < (*c, b)) {
            best = Some((cost, s));
        }
    }
    best.map(|(c, s)| (s, c))
}

/// Cheapest, then lexicographically smallest, set within `active` hitting every
/// set and meeting the optional exactly-one domain.
pub fn brute_hitting_set(
    n: usize,
    weights: &[u64],
    sets: &[IndexSet],
    domain: Option<&IndexSet>,
    active: &IndexSet,
) -> Option<(IndexSet, u64)> {
    let amask = set_mask(active);
    let smasks: Vec<u64> = sets.iter().map(set_mask).collect();
    let dmask = domain.map(|d| set_mask(d) & amask);
    let mut cost = vec![0u64; 1 << n];
    let mut best: Option<(u64, IndexSet)> = None;
    for m in 1..1usize << n {
        cost[m] = cost[m & (m - 1)] + weights[m.trailing_zeros() as usize];
    }
    for m in 0..1u64 << n {
        if m & !amask != 0 || !smasks.iter().all(|&s| s & m != 0) {
            continue;
        }
        if dmask.is_some_and(|d| (m & d).count_ones() != 1) {
            continue;
        }
        let c = cost[m as usize];
        if best.as_ref().map_or(true, |(bc, _)| c <= *bc) {
            let s = mask_set(m);
            if best.as_ref().map_or(true, |(bc, b)| (c, &s) < (*bc, b)) {
                best = Some((c, s));
            }
        }
    }
    best.map(|(c, s)| (s, c))
}

/// Largest satisfied soft weight over models of the hard clauses.
pub fn brute_maxsat(f: &CnfFormula, hard: &IndexSet, soft: &[(usize, u64)]) -> Option<u64> {
    let hmask = set_mask(hard);
    satisfied_masks(f)
        .into_iter()
        .filter(|m| m & hmask == hmask)
        .map(|m| soft.iter().filter(|(i, _)| m >> i & 1 == 1).map(|(_, w)| w).sum())
        .max()
}

/// Plain DPLL with unit propagation over DIMACS clauses.
pub fn dpll(clauses: &[Vec<i32>], atoms: usize) -> bool {
    fn go(clauses: &[Vec<i32>], assign: &mut Vec<i8>) -> bool {
        loop {
            let mut unit = None;
            for c in clauses {
                let mut free = None;
                let mut n_free = 0;
                let mut satisfied = false;
                for &l in c {
                    let v = assign[l.unsigned_abs() as usize];
                    if v == 0 {
                        n_free += 1;
                        free = Some(l);
                    } else if (v > 0) == (l > 0) {
                        satisfied = true;
                        break;
                    }
                }
                if satisfied {
                    continue;
                }
                match n_free {
                    0 => return false,
                    1 => {
                        unit = free;
                        break;
                    }
                    _ => {}
                }
            }
            match unit {
                Some(l) => assign[l.unsigned_abs() as usize] = if l > 0 { 1 } else { -1 },
                None => break,
            }
        }
        let Some(v) = (1..assign.len()).find(|&v| assign[v] == 0) else {
            return true;
        };
        for val in [1i8, -1] {
            let mut next = assign.clone();
            next[v] = val;
            if go(clauses, &mut next) {
                return true;
            }
        }
        false
    }
    go(clauses, &mut vec![0; atoms + 1])
}

pub fn dimacs_clauses(f: &CnfFormula, subset: impl Iterator<Item = usize>) -> Vec<Vec<i32>> {
    subset.map(|i| f.clause(i).literals().iter().map(|l| l.to_dimacs()).collect()).collect()
}

/// Builds a formula from DIMACS clauses and weights.
pub fn formula(atoms: u32, clauses: &[(Vec<i32>, u64)]) -> CnfFormula {
    let mut f = CnfFormula::new(atoms);
    for (c, w) in clauses {
        f.push(Clause::new(c.iter().map(|&v| lit(v))).unwrap(), *w, ClauseGroup::PuzzleSpecific);
    }
    f
}

/// A non-tautological clause of 1..=3 distinct atoms over `1..=atoms`.
pub fn arb_clause(atoms: u32) -> impl Strategy<Value = Vec<i32>> {
    proptest::sample::subsequence((1..=atoms as i32).collect::<Vec<_>>(), 1..=3.min(atoms as usize))
        .prop_flat_map(|vars| {
            let n = vars.len();
            (Just(vars), proptest::collection::vec(any::<bool>(), n))
        })
        .prop_map(|(vars, signs)| vars.into_iter().zip(signs).map(|(v, s)| if s { v } else { -v }).collect())
        .prop_shuffle()
}

/// Random weighted formulas with up to `max_atoms` atoms and `max_clauses` clauses.
pub fn arb_formula(max_atoms: u32, max_clauses: usize, max_weight: u64) -> impl Strategy<Value = CnfFormula> {
    (1..=max_atoms)
        .prop_flat_map(move |atoms| {
            (Just(atoms), proptest::collection::vec((arb_clause(atoms), 1..=max_weight), 1..=max_clauses))
        })
        .prop_map(|(atoms, clauses)| formula(atoms, &clauses))
}
