//! Models with open and closed states, partial labellings over arbitrary
//! formulas, and the submodel order.
//!
//! A closed state has all of its outgoing transitions; an open one may
//! gain more in a supermodel. Checked systems and evidence are both
//! [`Model`]s.

mod json;
mod path;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, FormulaSet};

pub(crate) use json::to_canonical_json;
pub use json::{load_model, load_model_with, LoadError, LoadOptions, ModelFile, MODEL_VERSION};
pub use path::Path;

/// Identifier of a state. Ordered lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(Arc<str>);

impl StateId {
    pub fn new(id: impl AsRef<str>) -> StateId {
        StateId(Arc::from(id.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for StateId {
    fn from(s: &str) -> Self {
        StateId::new(s)
    }
}

impl From<String> for StateId {
    fn from(s: String) -> Self {
        StateId::new(s)
    }
}

impl std::ops::Deref for StateId {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for StateId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A claim that `formula` has truth value `value` in `state`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assertion {
    pub state: StateId,
    pub formula: Formula,
    pub value: bool,
}

impl Assertion {
    pub fn new(state: impl Into<StateId>, formula: Formula, value: bool) -> Assertion {
        Assertion {
            state: state.into(),
            formula,
            value,
        }
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = if self.value { "tt" } else { "ff" };
        write!(f, "({}, {}, {v})", self.state, self.formula)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("duplicate state `{0}`")]
    DuplicateState(StateId),
    #[error("formula `{0}` is outside the model's formula context")]
    OutsideContext(Formula),
    #[error("conflicting label for ({state}, {formula}): already {existing}")]
    ConflictingLabel {
        state: StateId,
        formula: Formula,
        existing: bool,
    },
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
}

/// A model `<S, C, R, L>` over a subformula-closed context `F`.
///
/// States with no entry in the labelling for a formula are undefined for
/// it; there is no explicit third truth value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    // every state has an entry, possibly empty
    succ: BTreeMap<StateId, BTreeSet<StateId>>,
    closed: BTreeSet<StateId>,
    // no empty inner maps
    labels: BTreeMap<Formula, BTreeMap<StateId, bool>>,
    context: FormulaSet,
}

impl Model {
    /// An empty model over `context`.
    pub fn new(context: FormulaSet) -> Model {
        Model {
            succ: BTreeMap::new(),
            closed: BTreeSet::new(),
            labels: BTreeMap::new(),
            context,
        }
    }

    /// Adds a state, or updates its closed flag if it exists.
    pub fn insert_state(&mut self, id: impl Into<StateId>, closed: bool) {
        let id = id.into();
        self.succ.entry(id.clone()).or_default();
        self.set_closed_unchecked(id, closed);
    }

    fn set_closed_unchecked(&mut self, id: StateId, closed: bool) {
        if closed {
            self.closed.insert(id);
        } else {
            self.closed.remove(&id);
        }
    }

    pub fn set_closed(&mut self, id: &StateId, closed: bool) -> Result<(), ModelError> {
        self.require_state(id)?;
        self.set_closed_unchecked(id.clone(), closed);
        Ok(())
    }

    pub fn insert_transition(&mut self, from: &StateId, to: &StateId) -> Result<(), ModelError> {
        self.require_state(to)?;
        self.succ
            .get_mut(from)
            .ok_or_else(|| ModelError::UnknownState(from.clone()))?
            .insert(to.clone());
        Ok(())
    }

    pub fn remove_transition(&mut self, from: &StateId, to: &StateId) -> bool {
        self.succ.get_mut(from).is_some_and(|s| s.remove(to))
    }

    /// Removes a state together with its transitions and labels.
    pub fn remove_state(&mut self, id: &StateId) -> bool {
        if self.succ.remove(id).is_none() {
            return false;
        }
        self.closed.remove(id);
        for targets in self.succ.values_mut() {
            targets.remove(id);
        }
        self.labels.retain(|_, per_state| {
            per_state.remove(id);
            !per_state.is_empty()
        });
        true
    }

    /// Adds `(state, formula) -> value`. Re-adding the same value is a no-op.
    pub fn insert_label(
        &mut self,
        state: &StateId,
        formula: &Formula,
        value: bool,
    ) -> Result<(), ModelError> {
        self.require_state(state)?;
        if !self.context.contains(formula) {
            return Err(ModelError::OutsideContext(formula.clone()));
        }
        let per_state = self.labels.entry(formula.clone()).or_default();
        match per_state.get(state) {
            Some(&existing) if existing != value => Err(ModelError::ConflictingLabel {
                state: state.clone(),
                formula: formula.clone(),
                existing,
            }),
            _ => {
                per_state.insert(state.clone(), value);
                Ok(())
            }
        }
    }

    pub fn remove_label(&mut self, state: &StateId, formula: &Formula) -> Option<bool> {
        let per_state = self.labels.get_mut(formula)?;
        let old = per_state.remove(state);
        if per_state.is_empty() {
            self.labels.remove(formula);
        }
        old
    }

    fn require_state(&self, id: &StateId) -> Result<(), ModelError> {
        if self.succ.contains_key(id) {
            Ok(())
        } else {
            Err(ModelError::UnknownState(id.clone()))
        }
    }

    pub fn context(&self) -> &FormulaSet {
        &self.context
    }

    /// Replaces the context; every labelled formula must stay inside it.
    pub fn with_context(mut self, context: FormulaSet) -> Result<Model, ModelError> {
        if let Some(f) = self.labels.keys().find(|f| !context.contains(f)) {
            return Err(ModelError::OutsideContext(f.clone()));
        }
        self.context = context;
        Ok(self)
    }

    pub fn states(&self) -> impl Iterator<Item = &StateId> {
        self.succ.keys()
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    pub fn contains_state(&self, id: &str) -> bool {
        self.succ.contains_key(id)
    }

    /// The stored id equal to `id`, if present.
    pub fn state(&self, id: &str) -> Option<&StateId> {
        self.succ.get_key_value(id).map(|(k, _)| k)
    }

    pub fn is_closed(&self, id: &str) -> bool {
        self.closed.contains(id)
    }

    pub fn closed_states(&self) -> &BTreeSet<StateId> {
        &self.closed
    }

    pub fn open_states(&self) -> impl Iterator<Item = &StateId> {
        self.succ.keys().filter(|s| !self.closed.contains(*s))
    }

    /// All transitions in lexicographic order.
    pub fn transitions(&self) -> impl Iterator<Item = (&StateId, &StateId)> {
        self.succ
            .iter()
            .flat_map(|(from, targets)| targets.iter().map(move |to| (from, to)))
    }

    pub fn transition_count(&self) -> usize {
        self.succ.values().map(BTreeSet::len).sum()
    }

    pub fn has_transition(&self, from: &str, to: &str) -> bool {
        self.succ.get(from).is_some_and(|t| t.contains(to))
    }

    pub fn successors(&self, id: &str) -> Result<&BTreeSet<StateId>, ModelError> {
        self.succ
            .get(id)
            .ok_or_else(|| ModelError::UnknownState(StateId::new(id)))
    }

    /// States without outgoing transitions.
    pub fn deadlocks(&self) -> impl Iterator<Item = &StateId> {
        self.succ
            .iter()
            .filter(|(_, t)| t.is_empty())
            .map(|(s, _)| s)
    }

    pub fn label(&self, state: &str, formula: &Formula) -> Option<bool> {
        self.labels.get(formula)?.get(state).copied()
    }

    /// All labels as assertions, grouped by formula.
    pub fn labels(&self) -> impl Iterator<Item = Assertion> + '_ {
        self.labels.iter().flat_map(|(f, per_state)| {
            per_state
                .iter()
                .map(move |(s, v)| Assertion::new(s.clone(), f.clone(), *v))
        })
    }

    pub fn label_count(&self) -> usize {
        self.labels.values().map(BTreeMap::len).sum()
    }

    /// The formulas that carry at least one label.
    pub fn labelled_formulas(&self) -> impl Iterator<Item = &Formula> {
        self.labels.keys()
    }

    /// The labels of `formula`, keyed by state.
    pub fn labels_of(&self, formula: &Formula) -> Option<&BTreeMap<StateId, bool>> {
        self.labels.get(formula)
    }

    /// `S|φ,v`: the states where `formula` is labelled `value`.
    pub fn states_with(&self, formula: &Formula, value: bool) -> BTreeSet<StateId> {
        self.labels
            .get(formula)
            .map(|per_state| {
                per_state
                    .iter()
                    .filter(|(_, v)| **v == value)
                    .map(|(s, _)| s.clone())
                    .collect()
            })
            .unwrap_or_default()
    }

    /// All states closed and only propositions labelled.
    pub fn is_kripke(&self) -> bool {
        self.closed.len() == self.succ.len() && self.labels.keys().all(Formula::is_prop)
    }

    /// All states closed and the labelling total on `states x context`.
    pub fn is_full(&self) -> bool {
        self.closed.len() == self.succ.len()
            && self.context.iter().all(|f| {
                self.labels
                    .get(f)
                    .is_some_and(|per_state| per_state.len() == self.succ.len())
            })
    }

    /// True if `self ⊑ other`.
    pub fn is_submodel_of(&self, other: &Model) -> bool {
        is_submodel(self, other)
    }

    /// Restriction to the states reachable from `root` (including it).
    pub fn restrict_reachable(&self, root: &str) -> Result<Model, ModelError> {
        let root = self
            .state(root)
            .ok_or_else(|| ModelError::UnknownState(StateId::new(root)))?;
        let mut seen = BTreeSet::from([root.clone()]);
        let mut queue = VecDeque::from([root]);
        while let Some(s) = queue.pop_front() {
            for t in &self.succ[s] {
                if seen.insert(t.clone()) {
                    queue.push_back(t);
                }
            }
        }
        Ok(self.restrict_to(&seen))
    }

    /// Restriction to a set of states; transitions leaving the set are dropped.
    pub fn restrict_to(&self, keep: &BTreeSet<StateId>) -> Model {
        let succ = self
            .succ
            .iter()
            .filter(|(s, _)| keep.contains(*s))
            .map(|(s, t)| (s.clone(), t.intersection(keep).cloned().collect()))
            .collect();
        let closed = self.closed.intersection(keep).cloned().collect();
        let labels = self
            .labels
            .iter()
            .filter_map(|(f, per_state)| {
                let kept: BTreeMap<_, _> = per_state
                    .iter()
                    .filter(|(s, _)| keep.contains(*s))
                    .map(|(s, v)| (s.clone(), *v))
                    .collect();
                (!kept.is_empty()).then(|| (f.clone(), kept))
            })
            .collect();
        Model {
            succ,
            closed,
            labels,
            context: self.context.clone(),
        }
    }

    /// Same structure, labelling restricted to the given formulas.
    pub fn restrict_labels<'a>(&self, keep: impl IntoIterator<Item = &'a Formula>) -> Model {
        let keep: BTreeSet<&Formula> = keep.into_iter().collect();
        let mut out = self.clone();
        out.labels.retain(|f, _| keep.contains(f));
        out
    }

    /// `M ⊔ <extra>`: the same model with the labelling extended by `extra`.
    pub fn join(&self, extra: impl IntoIterator<Item = Assertion>) -> Result<Model, ModelError> {
        let mut out = self.clone();
        for a in extra {
            out.insert_label(&a.state, &a.formula, a.value)?;
        }
        Ok(out)
    }

    /// Copy with labels only on core formulas and the context cut down to
    /// its core part.
    pub fn core_projection(&self) -> Model {
        let context = self.context.core_part();
        let mut out = self.restrict_labels(context.iter());
        out.context = context;
        out
    }
}

/// Submodel order: `m1 ⊑ m2` iff every component of `m1` is contained in
/// the corresponding one of `m2`, and every transition of `m2` missing
/// from `m1` starts at a state that is open in `m1`.
pub fn is_submodel(m1: &Model, m2: &Model) -> bool {
    if !m1.closed.is_subset(&m2.closed) {
        return false;
    }
    for (s, targets1) in &m1.succ {
        let Some(targets2) = m2.succ.get(s) else {
            return false;
        };
        if !targets1.is_subset(targets2) {
            return false;
        }
        if m1.closed.contains(s) && targets1.len() != targets2.len() {
            return false;
        }
    }
    m1.labels.iter().all(|(f, per_state)| {
        m2.labels
            .get(f)
            .is_some_and(|other| per_state.iter().all(|(s, v)| other.get(s) == Some(v)))
    })
}
