//! Enrichments of evidence: natural evidence and local closure.

use crate::formula::{Formula, Operator};
use crate::model::{Assertion, Model};

use super::EvidenceError;

/// Adds, at every state of `e` with an outgoing transition, the labels of
/// all children of `f` from `full`. Only `E[.. U ..]` and `EG` formulas are
/// affected; others are returned unchanged.
pub fn naturalize(e: &Model, full: &Model, f: &Formula) -> Result<Model, EvidenceError> {
    if !matches!(f.operator(), Some(Operator::EU | Operator::EG)) {
        return Ok(e.clone());
    }
    let mut extra = Vec::new();
    for s in e.states() {
        if e.successors(s)?.is_empty() {
            continue;
        }
        for c in f.children() {
            extra.push(full_label(full, s.as_str(), c)?);
        }
    }
    Ok(e.join(extra)?)
}

/// Adds the labels of non-temporal structure below the labels of `e`:
/// for every labelled `(s, g)` with `g` built by `true`, `false`, `!`, `&&`
/// or `||`, the children of `g` at `s`, recursively. Temporal children get
/// their label but are not descended into. `f` is the formula `e` is
/// evidence for; the labels considered are those on its children.
pub fn locally_close(e: &Model, full: &Model, f: &Formula) -> Result<Model, EvidenceError> {
    let mut stack: Vec<Assertion> = e
        .labels()
        .filter(|a| f.children().contains(&a.formula))
        .collect();
    let mut extra = Vec::new();
    while let Some(a) = stack.pop() {
        if a.formula.is_temporal() {
            continue;
        }
        for c in a.formula.children() {
            let label = full_label(full, a.state.as_str(), c)?;
            extra.push(label.clone());
            stack.push(label);
        }
    }
    Ok(e.join(extra)?)
}

fn full_label(full: &Model, s: &str, f: &Formula) -> Result<Assertion, EvidenceError> {
    let state = full
        .state(s)
        .ok_or_else(|| EvidenceError::UnknownState(s.into()))?;
    let value = full.label(s, f).ok_or_else(|| EvidenceError::Unlabelled {
        state: state.clone(),
        formula: f.clone(),
    })?;
    Ok(Assertion::new(state.clone(), f.clone(), value))
}
