//! Weighted, group-tagged CNF formulas and the set types that range over them.
//!
//! Subset reasoning throughout the crate identifies clauses by their index in
//! a [`CnfFormula`]; indices are dense and never reused.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A propositional literal in signed-integer form: `3` is `x3`, `-3` is `¬x3`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub struct Literal(i32);

impl Literal {
    /// Builds a literal over `atom` (which must be ≥ 1).
    pub fn new(atom: u32, positive: bool) -> Literal {
        assert!(atom >= 1 && atom <= i32::MAX as u32, "atom ids start at 1");
        let a = atom as i32;
        Literal(if positive { a } else { -a })
    }

    pub fn from_dimacs(value: i32) -> Option<Literal> {
        (value != 0 && value != i32::MIN).then_some(Literal(value))
    }

    pub fn atom(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn negate(self) -> Literal {
        Literal(-self.0)
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    /// Truth value of this literal under a total assignment.
    pub fn eval(self, model: &Model) -> bool {
        model.value(self.atom()) == self.is_positive()
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;
    fn not(self) -> Literal {
        self.negate()
    }
}

impl TryFrom<i32> for Literal {
    type Error = String;
    fn try_from(value: i32) -> std::result::Result<Self, String> {
        Literal::from_dimacs(value).ok_or_else(|| format!("invalid literal {value}"))
    }
}

impl From<Literal> for i32 {
    fn from(l: Literal) -> i32 {
        l.0
    }
}

// Ordered by atom first so that interpretations list atoms ascending.
impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.atom(), self.is_positive()).cmp(&(other.atom(), other.is_positive()))
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals without duplicates or complementary pairs.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Clause {
    lits: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, dropping repeated literals. Fails on tautologies.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Result<Clause, Literal> {
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if out.contains(&l.negate()) {
                return Err(l);
            }
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Ok(Clause { lits: out })
    }

    pub fn unit(lit: Literal) -> Clause {
        Clause { lits: vec![lit] }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.lits
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn max_atom(&self) -> u32 {
        self.lits.iter().map(|l| l.atom()).max().unwrap_or(0)
    }

    pub fn is_satisfied_by(&self, model: &Model) -> bool {
        self.lits.iter().any(|l| l.eval(model))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lits.is_empty() {
            return write!(f, "⊥");
        }
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, " ∨ ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Origin of a clause in an explanation problem; drives its cost.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClauseGroup {
    PuzzleAgnostic,
    PuzzleSpecific,
    Fact,
    DerivedFact,
    NegatedTarget,
}

/// An ordered collection of weighted clauses.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CnfFormula {
    clauses: Vec<Clause>,
    weights: Vec<u64>,
    groups: Vec<ClauseGroup>,
    atom_count: u32,
}

impl CnfFormula {
    pub fn new(atom_count: u32) -> CnfFormula {
        CnfFormula { atom_count, ..Default::default() }
    }

    /// Appends a clause and returns its index. Grows `atom_count` if needed.
    pub fn push(&mut self, clause: Clause, weight: u64, group: ClauseGroup) -> usize {
        self.atom_count = self.atom_count.max(clause.max_atom());
        self.clauses.push(clause);
        self.weights.push(weight);
        self.groups.push(group);
        self.clauses.len() - 1
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn atom_count(&self) -> u32 {
        self.atom_count
    }

    pub fn clause(&self, index: usize) -> &Clause {
        &self.clauses[index]
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn weight(&self, index: usize) -> u64 {
        self.weights[index]
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn set_weight(&mut self, index: usize, weight: u64) {
        self.weights[index] = weight;
    }

    pub fn group(&self, index: usize) -> ClauseGroup {
        self.groups[index]
    }

    /// The set of every clause index.
    pub fn all_indices(&self) -> IndexSet {
        IndexSet::range(self.len())
    }

    /// Indices whose group is one of `groups`.
    pub fn indices_in_groups(&self, groups: &[ClauseGroup]) -> IndexSet {
        IndexSet::from_sorted_unchecked((0..self.len()).filter(|&i| groups.contains(&self.groups[i])).collect())
    }

    pub fn check_subset(&self, subset: &IndexSet) -> Result<()> {
        match subset.max_index() {
            Some(m) if m >= self.len() => Err(Error::IndexOutOfRange { index: m, len: self.len() }),
            _ => Ok(()),
        }
    }

    /// Summed weight of the clauses in `subset`.
    pub fn cost(&self, subset: &IndexSet) -> Result<u64> {
        self.check_subset(subset)?;
        Ok(subset.iter().map(|i| self.weights[i]).sum())
    }

    /// Indices of the clauses satisfied by a total model.
    pub fn satisfied_by(&self, model: &Model) -> IndexSet {
        IndexSet::from_sorted_unchecked((0..self.len()).filter(|&i| self.clauses[i].is_satisfied_by(model)).collect())
    }

    /// Renders the formula as DIMACS CNF.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.atom_count, self.len());
        for c in &self.clauses {
            for l in c.literals() {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// A sorted set of clause indices.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn new() -> IndexSet {
        IndexSet(Vec::new())
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> IndexSet {
        IndexSet((0..n).collect())
    }

    pub(crate) fn from_sorted_unchecked(v: Vec<usize>) -> IndexSet {
        debug_assert!(v.windows(2).all(|w| w[0] < w[1]));
        IndexSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn insert(&mut self, index: usize) -> bool {
        match self.0.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, index);
                true
            }
        }
    }

    pub fn remove(&mut self, index: usize) -> bool {
        match self.0.binary_search(&index) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = usize> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        IndexSet(out)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.iter().copied().filter(|&x| other.contains(x)).collect())
    }

    pub fn intersects(&self, other: &IndexSet) -> bool {
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.iter().any(|x| large.contains(x))
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.iter().all(|x| other.contains(x))
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        IndexSet(v)
    }
}

impl From<Vec<usize>> for IndexSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<IndexSet> for Vec<usize> {
    fn from(s: IndexSet) -> Self {
        s.0
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(v: [usize; N]) -> Self {
        v.into_iter().collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.0.iter()).finish()
    }
}

/// A consistent set of literals.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Interpretation {
    lits: BTreeSet<Literal>,
}

impl Interpretation {
    pub fn new() -> Interpretation {
        Interpretation::default()
    }

    pub fn from_literals(lits: impl IntoIterator<Item = Literal>) -> Result<Interpretation> {
        let mut out = Interpretation::new();
        for l in lits {
            out.insert(l)?;
        }
        Ok(out)
    }

    /// Adds a literal; fails if its negation is already present.
    pub fn insert(&mut self, lit: Literal) -> Result<bool> {
        if self.lits.contains(&lit.negate()) {
            return Err(Error::Inconsistent(lit));
        }
        Ok(self.lits.insert(lit))
    }

    pub fn remove(&mut self, lit: Literal) -> bool {
        self.lits.remove(&lit)
    }

    pub fn contains(&self, lit: Literal) -> bool {
        self.lits.contains(&lit)
    }

    /// Value assigned to `atom`, if any.
    pub fn value(&self, atom: u32) -> Option<bool> {
        let pos = Literal::new(atom, true);
        if self.lits.contains(&pos) {
            Some(true)
        } else if self.lits.contains(&pos.negate()) {
            Some(false)
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Literal> + '_ {
        self.lits.iter().copied()
    }

    /// `{¬l | l ∈ self}`.
    pub fn negate_set(&self) -> Interpretation {
        Interpretation { lits: self.lits.iter().map(|l| l.negate()).collect() }
    }

    pub fn difference(&self, other: &Interpretation) -> Interpretation {
        Interpretation { lits: self.lits.difference(&other.lits).copied().collect() }
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.lits.is_subset(&other.lits)
    }

    pub fn max_atom(&self) -> u32 {
        self.lits.iter().map(|l| l.atom()).max().unwrap_or(0)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.lits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// `{¬l | l ∈ interpretation}`.
pub fn negate_set(interpretation: &Interpretation) -> Interpretation {
    interpretation.negate_set()
}

/// A total assignment over atoms `1..=atom_count`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Model {
        Model { values }
    }

    pub fn atom_count(&self) -> u32 {
        self.values.len() as u32
    }

    /// Value of `atom`. Atoms beyond the model read as false.
    pub fn value(&self, atom: u32) -> bool {
        self.values.get(atom as usize - 1).copied().unwrap_or(false)
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| Literal::new(i as u32 + 1, v))
    }

    pub fn to_interpretation(&self) -> Interpretation {
        Interpretation { lits: self.literals().collect() }
    }

    /// Total model from an interpretation that assigns every atom up to `atom_count`.
    pub fn from_interpretation(interp: &Interpretation, atom_count: u32) -> Option<Model> {
        (1..=atom_count).map(|a| interp.value(a)).collect::<Option<Vec<_>>>().map(Model::new)
    }
}

/// Preferred branching value per atom.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PolarityHint {
    values: Vec<Option<bool>>,
}

impl PolarityHint {
    pub fn none() -> PolarityHint {
        PolarityHint::default()
    }

    pub fn set(&mut self, atom: u32, value: bool) {
        let i = atom as usize;
        if self.values.len() <= i {
            self.values.resize(i + 1, None);
        }
        self.values[i] = Some(value);
    }

    pub fn get(&self, atom: u32) -> Option<bool> {
        self.values.get(atom as usize).copied().flatten()
    }
}

impl From<&Interpretation> for PolarityHint {
    fn from(interp: &Interpretation) -> Self {
        let mut hint = PolarityHint::none();
        for l in interp.iter() {
            hint.set(l.atom(), l.is_positive());
        }
        hint
    }
}
