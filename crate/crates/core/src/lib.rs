//! Explicit-state CTL model checking with evidence.
//!
//! [`checker::check`] labels a Kripke model with the truth of every
//! subformula. For each labelled pair, [`evidence`] builds a submodel that
//! forces that truth value in every sound extension, and [`proof`] bundles
//! the labelled model with its evidence for export and validation.

pub mod checker;
pub mod evidence;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod proof;

pub use formula::{parse_formula, Formula, FormulaSet, Operator};
pub use model::{Assertion, Model, Path, StateId};
