//! Explanation problems: constraints, known facts and the facts to explain.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Clause, ClauseGroup, CnfFormula, IndexSet, Interpretation, Literal};
use crate::oracles::consequences;

/// Costs per clause origin.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightScheme {
    pub agnostic: u64,
    pub specific: u64,
    pub fact: u64,
}

impl Default for WeightScheme {
    fn default() -> WeightScheme {
        WeightScheme { agnostic: 60, specific: 100, fact: 1 }
    }
}

impl WeightScheme {
    pub fn weight_of(&self, group: ClauseGroup) -> u64 {
        match group {
            ClauseGroup::PuzzleAgnostic => self.agnostic,
            ClauseGroup::PuzzleSpecific => self.specific,
            ClauseGroup::Fact | ClauseGroup::DerivedFact | ClauseGroup::NegatedTarget => self.fact,
        }
    }
}

/// A satisfiable constraint set `F_C`, initial facts `I0` and the target
/// interpretation to derive from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationProblem {
    constraints: CnfFormula,
    atom_names: Vec<String>,
    initial: Interpretation,
    target: Interpretation,
    weights: WeightScheme,
}

impl ExplanationProblem {
    /// Validates and builds a problem. Constraint weights are reset from
    /// `weights` by group; a missing `target` is computed as the consequences
    /// of `constraints ∧ initial`.
    pub fn new(
        mut constraints: CnfFormula,
        atom_names: Vec<String>,
        initial: Interpretation,
        target: Option<Interpretation>,
        weights: WeightScheme,
    ) -> Result<ExplanationProblem> {
        for i in 0..constraints.len() {
            let g = constraints.group(i);
            if !matches!(g, ClauseGroup::PuzzleAgnostic | ClauseGroup::PuzzleSpecific) {
                return Err(Error::Schema(format!("constraint {i} has non-constraint group {g:?}")));
            }
            constraints.set_weight(i, weights.weight_of(g));
        }
        let backbone = consequences(&constraints, &initial)?;
        let target = match target {
            None => backbone,
            Some(t) => {
                if !initial.is_subset(&t) {
                    return Err(Error::Schema("initial facts are not contained in the target".into()));
                }
                if let Some(l) = t.iter().find(|&l| !backbone.contains(l)) {
                    return Err(Error::Schema(format!("target literal {l} is not a consequence")));
                }
                t
            }
        };
        let atoms = constraints.atom_count().max(target.max_atom()) as usize;
        let mut names = atom_names;
        let atoms = atoms.max(names.len());
        for a in names.len()..atoms {
            names.push(format!("x{}", a + 1));
        }
        Ok(ExplanationProblem { constraints, atom_names: names, initial, target, weights })
    }

    pub fn constraints(&self) -> &CnfFormula {
        &self.constraints
    }

    pub fn atom_names(&self) -> &[String] {
        &self.atom_names
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_names.len() as u32
    }

    pub fn initial(&self) -> &Interpretation {
        &self.initial
    }

    pub fn target(&self) -> &Interpretation {
        &self.target
    }

    pub fn weights(&self) -> WeightScheme {
        self.weights
    }

    /// Human-readable literal, e.g. `¬name`.
    pub fn literal_name(&self, lit: Literal) -> String {
        let name = self.atom_names.get(lit.atom() as usize - 1).cloned().unwrap_or_else(|| format!("x{}", lit.atom()));
        if lit.is_positive() {
            name
        } else {
            format!("¬{name}")
        }
    }

    pub fn clause_text(&self, clause: &Clause) -> String {
        if clause.is_empty() {
            return "⊥".into();
        }
        clause.literals().iter().map(|&l| self.literal_name(l)).collect::<Vec<_>>().join(" ∨ ")
    }

    pub fn from_json(text: &[u8]) -> Result<ExplanationProblem> {
        let doc: ProblemDocument = serde_json::from_slice(text).map_err(|e| Error::Schema(e.to_string()))?;
        doc.into_problem()
    }

    pub fn to_document(&self) -> ProblemDocument {
        ProblemDocument {
            atoms: self.atom_names.clone(),
            clauses: (0..self.constraints.len())
                .map(|i| ClauseEntry {
                    lits: self.constraints.clause(i).literals().iter().map(|l| l.to_dimacs()).collect(),
                    group: match self.constraints.group(i) {
                        ClauseGroup::PuzzleAgnostic => GroupTag::Agnostic,
                        _ => GroupTag::Specific,
                    },
                })
                .collect(),
            initial: self.initial.iter().map(|l| l.to_dimacs()).collect(),
            target: Some(self.target.iter().map(|l| l.to_dimacs()).collect()),
            weights: self.weights,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("problem documents always serialize")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupTag {
    Agnostic,
    Specific,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseEntry {
    pub lits: Vec<i32>,
    pub group: GroupTag,
}

/// The JSON problem format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    #[serde(default)]
    pub atoms: Vec<String>,
    pub clauses: Vec<ClauseEntry>,
    #[serde(default)]
    pub initial: Vec<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<i32>>,
    #[serde(default)]
    pub weights: WeightScheme,
}

fn literals(values: &[i32], what: &str) -> Result<Vec<Literal>> {
    values
        .iter()
        .map(|&v| Literal::from_dimacs(v).ok_or_else(|| Error::Schema(format!("invalid literal {v} in {what}"))))
        .collect()
}

impl ProblemDocument {
    pub fn into_problem(self) -> Result<ExplanationProblem> {
        let declared = self.atoms.len() as u32;
        let check_range = |lits: &[Literal], what: &str| -> Result<()> {
            if declared > 0 {
                if let Some(l) = lits.iter().find(|l| l.atom() > declared) {
                    return Err(Error::Schema(format!("literal {l} in {what} exceeds the {declared} declared atoms")));
                }
            }
            Ok(())
        };
        let mut f = CnfFormula::new(declared);
        for (k, c) in self.clauses.iter().enumerate() {
            let what = format!("clause {k}");
            let lits = literals(&c.lits, &what)?;
            check_range(&lits, &what)?;
            let clause = Clause::new(lits)
                .map_err(|l| Error::Schema(format!("clause {k} is a tautology on atom {}", l.atom())))?;
            let group = match c.group {
                GroupTag::Agnostic => ClauseGroup::PuzzleAgnostic,
                GroupTag::Specific => ClauseGroup::PuzzleSpecific,
            };
            f.push(clause, self.weights.weight_of(group), group);
        }
        let init_lits = literals(&self.initial, "initial")?;
        check_range(&init_lits, "initial")?;
        let initial = Interpretation::from_literals(init_lits)?;
        let target = match &self.target {
            None => None,
            Some(t) => {
                let lits = literals(t, "target")?;
                check_range(&lits, "target")?;
                Some(Interpretation::from_literals(lits)?)
            }
        };
        ExplanationProblem::new(f, self.atoms, initial, target, self.weights)
    }
}

/// `F_C ∧ I ∧ ¬(target \ I)` together with the indices of the negated-target units.
pub fn assemble_ocus_formula(problem: &ExplanationProblem, interp: &Interpretation) -> Result<(CnfFormula, IndexSet)> {
    if !problem.initial().is_subset(interp) || !interp.is_subset(problem.target()) {
        return Err(Error::Precondition("interpretation must lie between the initial facts and the target".into()));
    }
    let remaining = problem.target().difference(interp);
    if remaining.is_empty() {
        return Err(Error::Precondition("nothing left to explain".into()));
    }
    let mut f = problem.constraints().clone();
    let fact = problem.weights().fact;
    for l in interp.iter() {
        f.push(Clause::unit(l), fact, ClauseGroup::DerivedFact);
    }
    let mut domain = IndexSet::new();
    for l in remaining.iter() {
        domain.insert(f.push(Clause::unit(l.negate()), fact, ClauseGroup::NegatedTarget));
    }
    Ok((f, domain))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const EXAMPLE1: &str = r#"{
        "atoms": ["x1", "x2", "x3"],
        "clauses": [
            {"lits": [-1, -2, 3], "group": "agnostic"},
            {"lits": [-1, 2, 3], "group": "agnostic"},
            {"lits": [1], "group": "specific"},
            {"lits": [-2, -3], "group": "specific"}
        ],
        "initial": [1]
    }"#;

    fn lit(v: i32) -> Literal {
        Literal::from_dimacs(v).unwrap()
    }

    #[test]
    fn parses_example_one() {
        let p = ExplanationProblem::from_json(EXAMPLE1.as_bytes()).unwrap();
        assert_eq!(p.constraints().weights(), &[60, 60, 100, 100]);
        assert_eq!(p.target(), &Interpretation::from_literals([lit(1), lit(-2), lit(3)]).unwrap());
        let (f, d) = assemble_ocus_formula(&p, p.initial()).unwrap();
        assert_eq!(f.len(), 7);
        assert_eq!(f.clause(4), &Clause::unit(lit(1)));
        assert_eq!(f.clause(5), &Clause::unit(lit(2)));
        assert_eq!(f.clause(6), &Clause::unit(lit(-3)));
        assert_eq!(f.group(4), ClauseGroup::DerivedFact);
        assert_eq!(d, IndexSet::from([5, 6]));
        assert_eq!(f.cost(&IndexSet::from([0, 1, 4, 6])).unwrap(), 122);
        assert!(assemble_ocus_formula(&p, p.target()).is_err());
    }

    #[test]
    fn rejects_bad_documents() {
        let inconsistent = r#"{"clauses": [], "initial": [1, -1]}"#;
        assert!(matches!(ExplanationProblem::from_json(inconsistent.as_bytes()), Err(Error::Inconsistent(_))));
        let unsat = r#"{"clauses": [{"lits": [1], "group": "specific"}], "initial": [-1]}"#;
        assert!(matches!(ExplanationProblem::from_json(unsat.as_bytes()), Err(Error::UnsatisfiableBase)));
        let bad_group = r#"{"clauses": [{"lits": [1], "group": "other"}]}"#;
        assert!(matches!(ExplanationProblem::from_json(bad_group.as_bytes()), Err(Error::Schema(_))));
        let range = r#"{"atoms": ["a"], "clauses": [{"lits": [2], "group": "specific"}]}"#;
        assert!(matches!(ExplanationProblem::from_json(range.as_bytes()), Err(Error::Schema(_))));
        let not_entailed = r#"{"clauses": [{"lits": [1, 2], "group": "specific"}], "target": [1]}"#;
        assert!(matches!(ExplanationProblem::from_json(not_entailed.as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn single_remaining_literal() {
        let doc = r#"{"clauses": [{"lits": [-1, 2], "group": "specific"}], "initial": [1]}"#;
        let p = ExplanationProblem::from_json(doc.as_bytes()).unwrap();
        let (_, d) = assemble_ocus_formula(&p, p.initial()).unwrap();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn json_round_trip() {
        let p = ExplanationProblem::from_json(EXAMPLE1.as_bytes()).unwrap();
        let q = ExplanationProblem::from_json(p.to_json().as_bytes()).unwrap();
        assert_eq!(p, q);
    }
}
