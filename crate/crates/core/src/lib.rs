//! Relational rule induction for progressive-matrix puzzles.
//!
//! Problems are 3x3 grids of cells holding objects with categorical traits.
//! The [`reasoner`] induces which set operator (or linear progression)
//! links the third cell of each complete line to the first two, and keeps
//! only the candidate answers that violate none of those rules.

pub mod algebra;
pub mod atoms;
pub mod corpus;
pub mod eval;
pub mod fixtures;
pub mod generator;
pub mod model;
pub mod observe;
pub mod par;
pub mod reasoner;
pub mod render;
pub mod vocab;

pub use algebra::{apply_operator, progression_value, AlgebraError, Operator, OperatorKind, ValueSet};
pub use atoms::{decode_atoms, encode_atoms, export_asp, AtomsError, AtomsErrorKind};
pub use eval::{evaluate, scaling_experiment, AccuracyReport, EvalOptions, Pipeline, ScalingReport};
pub use generator::{Generator, GeneratorSpec};
pub use model::{
    category_members, project_argument, Category, Cell, Grid, Identity, IdentityKey, Membership,
    ModelError, ObjectSpec, Problem, Provenance, Rule, Scope, State,
};
pub use reasoner::{
    check_answer, classify, induce_rules, solve, ErrorClass, Mode, Outcome, RuleSet,
    SatisfactionReport, Solver, SolverConfig, Verdict,
};
pub use vocab::{TraitDef, TraitId, TraitKind, Value, Vocabulary};
