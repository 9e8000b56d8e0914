//! Cost-optimal constrained unsatisfiable subsets via implicit hitting sets,
//! and step-wise explanations of constraint propagation built on them.

pub mod bench;
pub mod dimacs;
pub mod error;
pub mod explain;
pub mod formula;
pub mod hitting_set;
pub mod maxsat;
pub mod ocus;
pub mod oracles;
pub mod problem;
pub mod puzzle;
pub mod sat;

mod cdcl;

pub use error::{Error, Result};
pub use explain::{
    explain_full, verify_sequence, ExplanationSequence, ExplanationStep, Incrementality, SequenceConfig, StepAlgorithm,
};
pub use formula::{Clause, ClauseGroup, CnfFormula, IndexSet, Interpretation, Literal, Model, PolarityHint};
pub use hitting_set::{HittingSetInstance, HittingSetSolution, MetaConstraint};
pub use ocus::{GrowDomain, GrowStrategy, GrowWeights, OcusEngine, OcusQuery, OcusResult, SatSubsetCache};
pub use problem::{assemble_ocus_formula, ExplanationProblem, WeightScheme};
pub use puzzle::PuzzleSpec;
