//! Evidence: submodels that force a truth value in every sound extension.
//!
//! [`witness_cond`] and [`counter_cond`] decide whether a model is
//! evidence for a core assertion; [`is_min_witness`] and
//! [`is_min_counter`] recognize the smallest such models. Construction
//! goes through [`build_combined_evidence`], which covers every state of a
//! sound model in one submodel, and [`view`], which cuts out the part for
//! one state.

mod build;
mod closure;
mod conditions;
mod minimal;

use thiserror::Error;

use crate::formula::{Formula, Operator};
use crate::model::{Model, ModelError, StateId};

pub use build::{build_combined_evidence, build_min_evidence, view};
pub use closure::{locally_close, naturalize};
pub use conditions::{assertion_cond, counter_cond, witness_cond};
pub use minimal::{is_min_counter, is_min_counter_transposed, is_min_witness, is_natural};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Flavor {
    #[default]
    Minimal,
    /// Also label every child of an `E[.. U ..]` or `EG` formula at every
    /// state with a successor.
    Natural,
}

/// What evidence to build.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceRequest {
    pub state: StateId,
    pub formula: Formula,
    pub flavor: Flavor,
    pub locally_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvidenceError {
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("`{0}` is a proposition; there is nothing to give evidence for")]
    NotCompound(Formula),
    #[error("`{0}` is not in the core fragment; desugar it first")]
    NotCore(Formula),
    #[error("({state}, {formula}) is not labelled")]
    Unlabelled { state: StateId, formula: Formula },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Evidence for the request, cut out of combined evidence over `full`.
/// `full` must be sound; sugared formulas are replaced by their images.
pub fn evidence_for(full: &Model, req: &EvidenceRequest) -> Result<Model, EvidenceError> {
    let f = req.formula.desugar();
    let e = build_combined_evidence(full, &f, req.flavor)?;
    let v = view(&e, &req.state, &f)?;
    if req.locally_closed {
        locally_close(&v, full, &f)
    } else {
        Ok(v)
    }
}

pub(crate) fn core_compound(f: &Formula) -> Result<(Operator, &[Formula]), EvidenceError> {
    match f.operator() {
        None => Err(EvidenceError::NotCompound(f.clone())),
        Some(op) if !op.is_core() => Err(EvidenceError::NotCore(f.clone())),
        Some(op) => Ok((op, f.children())),
    }
}
