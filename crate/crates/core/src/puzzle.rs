//! Logic-grid puzzles encoded as explanation problems.
//!
//! Every unordered pair of categories gets an `n × n` block of relation atoms
//! `a.i=b.j`. The puzzle-agnostic axioms say each block is a bijection and
//! that the blocks agree transitively; clues become puzzle-specific clauses.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{Clause, ClauseGroup, CnfFormula, Interpretation, Literal};
use crate::problem::{ExplanationProblem, WeightScheme};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Category {
    pub name: String,
    pub entities: Vec<String>,
}

/// A literal in a clue: `"cat.ent=cat.ent"` (optionally prefixed by `-` or
/// `¬`) or a signed atom id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LiteralRef {
    Id(i32),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PuzzleSpec {
    pub categories: Vec<Category>,
    #[serde(default)]
    pub clues: Vec<Vec<LiteralRef>>,
    #[serde(default)]
    pub given_facts: Vec<LiteralRef>,
    #[serde(default)]
    pub weights: WeightScheme,
}

/// Atom numbering for a puzzle's categories.
#[derive(Clone, Debug)]
pub struct RelationAtoms {
    categories: Vec<Category>,
    n: usize,
    /// First atom id of each category pair block, by `(a, b)` with `a < b`.
    block: HashMap<(usize, usize), u32>,
    names: Vec<String>,
    by_name: HashMap<String, u32>,
}

impl RelationAtoms {
    pub fn new(categories: &[Category]) -> Result<RelationAtoms> {
        if categories.len() < 2 {
            return Err(Error::Schema("a puzzle needs at least two categories".into()));
        }
        let n = categories[0].entities.len();
        if n < 2 {
            return Err(Error::Schema("categories need at least two entities".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for c in categories {
            if c.entities.len() != n {
                return Err(Error::Schema(format!(
                    "category '{}' has {} entities, expected {n}",
                    c.name,
                    c.entities.len()
                )));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate category '{}'", c.name)));
            }
            let mut ents = std::collections::HashSet::new();
            for e in &c.entities {
                if !ents.insert(e.as_str()) {
                    return Err(Error::Schema(format!("duplicate entity '{e}' in category '{}'", c.name)));
                }
            }
        }
        let mut block = HashMap::new();
        let mut names = Vec::new();
        let mut by_name = HashMap::new();
        let m = categories.len();
        for a in 0..m {
            for b in a + 1..m {
                block.insert((a, b), names.len() as u32 + 1);
                for i in 0..n {
                    for j in 0..n {
                        let id = names.len() as u32 + 1;
                        let ca = &categories[a];
                        let cb = &categories[b];
                        let name = format!("{}.{}={}.{}", ca.name, ca.entities[i], cb.name, cb.entities[j]);
                        by_name.insert(format!("{}.{}={}.{}", cb.name, cb.entities[j], ca.name, ca.entities[i]), id);
                        by_name.insert(name.clone(), id);
                        names.push(name);
                    }
                }
            }
        }
        Ok(RelationAtoms { categories: categories.to_vec(), n, block, names, by_name })
    }

    pub fn entity_count(&self) -> usize {
        self.n
    }

    pub fn atom_count(&self) -> u32 {
        self.names.len() as u32
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Atom for "entity `i` of category `a` matches entity `j` of category `b`".
    pub fn atom(&self, a: usize, i: usize, b: usize, j: usize) -> u32 {
        assert!(a != b && i < self.n && j < self.n);
        if a < b {
            self.block[&(a, b)] + (i * self.n + j) as u32
        } else {
            self.block[&(b, a)] + (j * self.n + i) as u32
        }
    }

    fn lit(&self, a: usize, i: usize, b: usize, j: usize, positive: bool) -> Literal {
        Literal::new(self.atom(a, i, b, j), positive)
    }

    pub fn resolve(&self, r: &LiteralRef) -> Result<Literal> {
        match r {
            LiteralRef::Id(v) => {
                let l = Literal::from_dimacs(*v).ok_or_else(|| Error::Schema(format!("invalid literal {v}")))?;
                if l.atom() > self.atom_count() {
                    return Err(Error::Schema(format!("literal {v} exceeds the {} relation atoms", self.atom_count())));
                }
                Ok(l)
            }
            LiteralRef::Name(s) => {
                let (positive, body) = match s.strip_prefix('-').or_else(|| s.strip_prefix('¬')) {
                    Some(rest) => (false, rest),
                    None => (true, s.as_str()),
                };
                let body: String = body.chars().filter(|c| !c.is_whitespace()).collect();
                let atom = self.by_name.get(&body).ok_or_else(|| Error::Schema(format!("unknown relation '{s}'")))?;
                Ok(Literal::new(*atom, positive))
            }
        }
    }

    /// The bijectivity and transitivity axioms.
    pub fn axioms(&self) -> Vec<Clause> {
        let n = self.n;
        let m = self.categories.len();
        let mut out = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                for (x, y) in [(a, b), (b, a)] {
                    for i in 0..n {
                        out.push(Clause::new((0..n).map(|j| self.lit(x, i, y, j, true))).expect("no tautology"));
                        for j in 0..n {
                            for k in j + 1..n {
                                out.push(
                                    Clause::new([self.lit(x, i, y, j, false), self.lit(x, i, y, k, false)])
                                        .expect("no tautology"),
                                );
                            }
                        }
                    }
                }
            }
        }
        for a in 0..m {
            for b in a + 1..m {
                for c in b + 1..m {
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let ab = |p| self.lit(a, i, b, j, p);
                                let bc = |p| self.lit(b, j, c, k, p);
                                let ac = |p| self.lit(a, i, c, k, p);
                                for clause in [
                                    [ab(false), bc(false), ac(true)],
                                    [ab(false), ac(false), bc(true)],
                                    [ac(false), bc(false), ab(true)],
                                ] {
                                    out.push(Clause::new(clause).expect("no tautology"));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Closed-form sizes `(atoms, bijectivity clauses, transitivity clauses)` for `m` categories of `n` entities.
pub fn encoding_size(m: usize, n: usize) -> (usize, usize, usize) {
    let pairs = m * (m - 1) / 2;
    let triples = if m >= 3 { m * (m - 1) * (m - 2) / 6 } else { 0 };
    (pairs * n * n, pairs * 2 * n * (1 + n * (n - 1) / 2), triples * 3 * n * n * n)
}

impl PuzzleSpec {
    pub fn from_json(text: &[u8]) -> Result<PuzzleSpec> {
        serde_json::from_slice(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn encode(&self) -> Result<ExplanationProblem> {
        let atoms = RelationAtoms::new(&self.categories)?;
        let mut f = CnfFormula::new(atoms.atom_count());
        for c in atoms.axioms() {
            f.push(c, self.weights.agnostic, ClauseGroup::PuzzleAgnostic);
        }
        for (k, clue) in self.clues.iter().enumerate() {
            let lits = clue.iter().map(|r| atoms.resolve(r)).collect::<Result<Vec<_>>>()?;
            if lits.is_empty() {
                return Err(Error::Schema(format!("clue {k} is empty")));
            }
            let c = Clause::new(lits).map_err(|l| {
                Error::Schema(format!("clue {k} is a tautology on {}", atoms.names[l.atom() as usize - 1]))
            })?;
            f.push(c, self.weights.specific, ClauseGroup::PuzzleSpecific);
        }
        let given = self.given_facts.iter().map(|r| atoms.resolve(r)).collect::<Result<Vec<_>>>()?;
        let initial = Interpretation::from_literals(given)?;
        ExplanationProblem::new(f, atoms.names().to_vec(), initial, None, self.weights)
    }
}

pub fn encode(spec: &PuzzleSpec) -> Result<ExplanationProblem> {
    spec.encode()
}

/// Reads either a puzzle (an object with `categories`) or a problem document.
pub fn read_problem(text: &[u8]) -> Result<ExplanationProblem> {
    let value: serde_json::Value = serde_json::from_slice(text).map_err(|e| Error::Schema(e.to_string()))?;
    if value.get("categories").is_some() {
        PuzzleSpec::from_json(text)?.encode()
    } else {
        ExplanationProblem::from_json(text)
    }
}
