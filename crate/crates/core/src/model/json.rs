//! The `ctl-model/1` JSON format.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Model, ModelError, StateId};
use crate::formula::{parse_formula, Formula, FormulaSet, ParseError};

pub const MODEL_VERSION: &str = "ctl-model/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateEntry {
    pub id: String,
    #[serde(default = "closed_default")]
    pub closed: bool,
}

fn closed_default() -> bool {
    true
}

/// Wire form of a model. Label keys are formula texts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: String,
    pub states: Vec<StateEntry>,
    #[serde(default)]
    pub transitions: Vec<(String, String)>,
    #[serde(default)]
    pub labels: BTreeMap<String, BTreeMap<String, bool>>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported version `{0}`, expected `{MODEL_VERSION}`")]
    Version(String),
    #[error("duplicate state id `{0}`")]
    DuplicateState(String),
    #[error("{context} refers to undeclared state `{state}`")]
    Dangling { context: String, state: String },
    #[error("bad label key `{key}`: {source}")]
    LabelKey { key: String, source: ParseError },
    #[error("proposition `{prop}` is not labelled at state `{state}`")]
    NotTotal { state: String, prop: String },
    #[error("not a Kripke model: {0}")]
    NotKripke(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Require all states closed and only propositional labels, total over
    /// the labelled propositions and `required_props`.
    pub kripke: bool,
    /// With `kripke`, fill missing proposition labels with ff instead of
    /// failing; each fill is reported as a warning.
    pub permissive: bool,
    pub required_props: BTreeSet<String>,
}

impl ModelFile {
    pub fn from_model(m: &Model) -> ModelFile {
        let mut labels: BTreeMap<String, BTreeMap<String, bool>> = BTreeMap::new();
        for a in m.labels() {
            labels
                .entry(a.formula.to_string())
                .or_default()
                .insert(a.state.to_string(), a.value);
        }
        ModelFile {
            version: MODEL_VERSION.into(),
            states: m
                .states()
                .map(|s| StateEntry {
                    id: s.to_string(),
                    closed: m.is_closed(s),
                })
                .collect(),
            transitions: m
                .transitions()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            labels,
        }
    }

    /// Builds the model. The context is the closure of the labelled formulas
    /// together with `extra_context`.
    pub fn to_model(&self, extra_context: &FormulaSet) -> Result<Model, LoadError> {
        if self.version != MODEL_VERSION {
            return Err(LoadError::Version(self.version.clone()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.states {
            if !seen.insert(s.id.as_str()) {
                return Err(LoadError::DuplicateState(s.id.clone()));
            }
        }
        let mut formulas = Vec::with_capacity(self.labels.len());
        for key in self.labels.keys() {
            let f = parse_formula(key).map_err(|source| LoadError::LabelKey {
                key: key.clone(),
                source,
            })?;
            formulas.push(f);
        }
        let context = FormulaSet::closure_of(formulas.iter()).union(extra_context);
        let mut m = Model::new(context);
        for s in &self.states {
            m.insert_state(s.id.as_str(), s.closed);
        }
        for (from, to) in &self.transitions {
            for end in [from, to] {
                if !seen.contains(end.as_str()) {
                    return Err(LoadError::Dangling {
                        context: format!("transition ({from}, {to})"),
                        state: end.clone(),
                    });
                }
            }
            m.insert_transition(&StateId::new(from), &StateId::new(to))?;
        }
        for (f, (key, per_state)) in formulas.iter().zip(&self.labels) {
            for (s, v) in per_state {
                if !seen.contains(s.as_str()) {
                    return Err(LoadError::Dangling {
                        context: format!("label `{key}`"),
                        state: s.clone(),
                    });
                }
                m.insert_label(&StateId::new(s), f, *v)?;
            }
        }
        Ok(m)
    }
}

impl Model {
    /// Canonical JSON: sorted states, transitions and keys.
    pub fn to_json(&self) -> String {
        to_canonical_json(&ModelFile::from_model(self))
    }
}

/// Pretty JSON with object keys sorted.
pub(crate) fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("serializable");
    s.push('\n');
    s
}

/// Parses a model with no structural requirements beyond the schema.
pub fn load_model(text: &str) -> Result<Model, LoadError> {
    load_model_with(text, &LoadOptions::default()).map(|(m, _)| m)
}

/// Parses a model; returns it together with any warnings.
pub fn load_model_with(text: &str, opts: &LoadOptions) -> Result<(Model, Vec<String>), LoadError> {
    let file: ModelFile = serde_json::from_str(text)?;
    let mut m = file.to_model(&FormulaSet::empty())?;
    let mut warnings = Vec::new();
    if opts.kripke {
        if let Some(s) = m.open_states().next() {
            return Err(LoadError::NotKripke(format!("state `{s}` is open")));
        }
        if let Some(f) = m.labelled_formulas().find(|f| !f.is_prop()) {
            return Err(LoadError::NotKripke(format!("compound label `{f}`")));
        }
        let mut props: BTreeSet<Formula> = m.labelled_formulas().cloned().collect();
        props.extend(opts.required_props.iter().map(Formula::prop));
        m = m.with_context(FormulaSet::closure_of(props.iter()))?;
        let states: Vec<StateId> = m.states().cloned().collect();
        for p in &props {
            for s in &states {
                if m.label(s, p).is_some() {
                    continue;
                }
                if !opts.permissive {
                    return Err(LoadError::NotTotal {
                        state: s.to_string(),
                        prop: p.to_string(),
                    });
                }
                warnings.push(format!("`{p}` unlabelled at `{s}`; assuming ff"));
                m.insert_label(s, p, false)?;
            }
        }
    }
    Ok((m, warnings))
}
