//! Proofs: a labelled model together with evidence for every compound
//! label, plus their exchange formats.

mod bundle;
mod dot;

use std::collections::BTreeMap;
use std::fmt;

use crate::evidence::{assertion_cond, build_combined_evidence, view, EvidenceError, Flavor};
use crate::model::{is_submodel, Assertion, Model};

pub use bundle::{
    export_bundle, import_bundle, validate_bundle, AstNode, BundleError, CombinedBlock,
    EvidenceBundle, Provenance, BUNDLE_VERSION,
};
pub use dot::{export_dot, DotError};

/// A model and evidence for each of its compound assertions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub model: Model,
    pub evidence: BTreeMap<Assertion, Model>,
}

/// Builds a proof from a sound model. The proof's model is the core
/// projection of `full`; sugared labels carry no evidence of their own.
pub fn build_proof(full: &Model) -> Result<Proof, EvidenceError> {
    let model = full.core_projection();
    let mut evidence = BTreeMap::new();
    for f in model.context().compounds() {
        let combined = build_combined_evidence(&model, f, Flavor::Minimal)?;
        for s in model.states() {
            let Some(value) = model.label(s, f) else {
                continue;
            };
            let e = view(&combined, s, f)?;
            evidence.insert(Assertion::new(s.clone(), f.clone(), value), e);
        }
    }
    Ok(Proof { model, evidence })
}

/// Which requirement on a proof an entry violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Clause {
    /// The assertion is not a label of the proof's model.
    LabelMismatch,
    /// The assertion is about a proposition.
    NotCompound,
    /// A compound label has no evidence.
    MissingEvidence,
    NotSubmodel,
    /// The evidence labels something other than children of the formula.
    WrongLabelDomain,
    ConditionFails,
    /// A natural evidence block misses a required label.
    NotNatural,
    /// Stored data differs from what the rest of the bundle determines.
    Inconsistent,
}

impl Clause {
    pub fn name(self) -> &'static str {
        match self {
            Clause::LabelMismatch => "label-mismatch",
            Clause::NotCompound => "not-compound",
            Clause::MissingEvidence => "missing-evidence",
            Clause::NotSubmodel => "not-submodel",
            Clause::WrongLabelDomain => "wrong-label-domain",
            Clause::ConditionFails => "table1-condition-fails",
            Clause::NotNatural => "not-natural",
            Clause::Inconsistent => "inconsistent",
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Failure {
    /// What failed: an assertion or a part of a bundle.
    pub subject: String,
    pub clause: Clause,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, subject: impl fmt::Display, clause: Clause) {
        self.failures.push(Failure {
            subject: subject.to_string(),
            clause,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "checked {} assertions, {} failures",
            self.checked,
            self.failures.len()
        )?;
        for x in &self.failures {
            writeln!(f, "  {}: {}", x.clause, x.subject)?;
        }
        Ok(())
    }
}

/// Checks every entry of `p` and that every compound label has an entry.
pub fn validate_proof(p: &Proof) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (a, e) in &p.evidence {
        report.checked += 1;
        if p.model.label(&a.state, &a.formula) != Some(a.value) {
            report.fail(a, Clause::LabelMismatch);
        }
        if !a.formula.is_compound() {
            report.fail(a, Clause::NotCompound);
            continue;
        }
        if !is_submodel(e, &p.model) {
            report.fail(a, Clause::NotSubmodel);
        }
        let children = a.formula.children();
        if e.labelled_formulas().any(|g| !children.contains(g)) {
            report.fail(a, Clause::WrongLabelDomain);
        }
        if !matches!(assertion_cond(e, a), Ok(true)) {
            report.fail(a, Clause::ConditionFails);
        }
    }
    for a in p.model.labels() {
        if a.formula.is_compound() && !p.evidence.contains_key(&a) {
            report.fail(&a, Clause::MissingEvidence);
        }
    }
    report
}
