//! Brute-force semantics for cross-checking the checker and the evidence
//! conditions. Everything here enumerates; nothing is meant to scale.
//!
//! [`naive_sat`] reads satisfaction off explicitly enumerated maximal
//! paths, for every operator including the sugared ones, and shares no
//! code with the fixpoint algorithms.

mod constrained;
mod supermodels;

use std::collections::HashMap;

use thiserror::Error;

use crate::formula::{Formula, FormulaSet, Operator};
use crate::model::{Assertion, Model, Path, StateId};

pub use constrained::{is_constrained_closed_bounded, syntactically_unconstrained};
pub use supermodels::{
    enumerate_supermodels, is_evidence_semantic, semantic_verdict, Budget, SemanticVerdict,
};

/// Largest model [`naive_sat`] accepts.
pub const NAIVE_MAX_STATES: usize = 12;
/// Largest `states + fresh` for supermodel enumeration.
pub const SUPERMODEL_MAX_STATES: usize = 8;
/// Most propositions supermodel enumeration ranges over.
pub const SUPERMODEL_MAX_PROPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("guard exceeded: {0}")]
    Guard(String),
    #[error("unknown state `{0}`")]
    UnknownState(StateId),
    #[error("proposition `{prop}` is not labelled at state `{state}`")]
    MissingLabel { state: StateId, prop: String },
    #[error("label ({state}, {formula}) is outside the children of the asserted formula")]
    LabelDomain { state: StateId, formula: Formula },
}

/// Satisfaction of `f` at `s`, quantifying over maximal paths.
pub fn naive_sat(m: &Model, s: &str, f: &Formula) -> Result<bool, OracleError> {
    if m.state_count() > NAIVE_MAX_STATES {
        return Err(OracleError::Guard(format!(
            "{} states, at most {NAIVE_MAX_STATES}",
            m.state_count()
        )));
    }
    let s = m
        .state(s)
        .ok_or_else(|| OracleError::UnknownState(StateId::new(s)))?;
    let mut naive = Naive {
        m,
        paths: HashMap::new(),
        memo: HashMap::new(),
    };
    naive.sat(s, f)
}

/// Every subformula of every formula in `fs` at every state, sharing path
/// enumeration between them.
pub fn naive_labelling(m: &Model, fs: &[Formula]) -> Result<Vec<Assertion>, OracleError> {
    if m.state_count() > NAIVE_MAX_STATES {
        return Err(OracleError::Guard(format!(
            "{} states, at most {NAIVE_MAX_STATES}",
            m.state_count()
        )));
    }
    let mut naive = Naive {
        m,
        paths: HashMap::new(),
        memo: HashMap::new(),
    };
    let mut out = Vec::new();
    for g in &FormulaSet::closure_of(fs) {
        for s in m.states() {
            out.push(Assertion::new(s.clone(), g.clone(), naive.sat(s, g)?));
        }
    }
    Ok(out)
}

struct Naive<'a> {
    m: &'a Model,
    paths: HashMap<StateId, Vec<Path>>,
    memo: HashMap<(StateId, Formula), bool>,
}

impl Naive<'_> {
    fn paths(&mut self, s: &StateId) -> Vec<Path> {
        let bound = 2 * self.m.state_count();
        self.paths
            .entry(s.clone())
            .or_insert_with(|| self.m.maximal_lassos(s, bound).expect("known state"))
            .clone()
    }

    fn sat(&mut self, s: &StateId, f: &Formula) -> Result<bool, OracleError> {
        if let Some(v) = self.memo.get(&(s.clone(), f.clone())) {
            return Ok(*v);
        }
        let c = f.children();
        let v = match f.operator() {
            None => self
                .m
                .label(s, f)
                .ok_or_else(|| OracleError::MissingLabel {
                    state: s.clone(),
                    prop: f.to_string(),
                })?,
            Some(Operator::True) => true,
            Some(Operator::False) => false,
            Some(Operator::Not) => !self.sat(s, &c[0])?,
            Some(Operator::And) => self.sat(s, &c[0])? && self.sat(s, &c[1])?,
            Some(Operator::Or) => self.sat(s, &c[0])? || self.sat(s, &c[1])?,
            Some(Operator::EX) => self.some_path(s, |n, rho| n.next(rho, &c[0], false))?,
            Some(Operator::AX) => self.all_paths(s, |n, rho| n.next(rho, &c[0], true))?,
            Some(Operator::EF) => {
                self.some_path(s, |n, rho| n.until(rho, &Formula::tt(), &c[0]))?
            }
            Some(Operator::AF) => {
                self.all_paths(s, |n, rho| n.until(rho, &Formula::tt(), &c[0]))?
            }
            Some(Operator::EG) => self.some_path(s, |n, rho| n.globally(rho, &c[0]))?,
            Some(Operator::AG) => self.all_paths(s, |n, rho| n.globally(rho, &c[0]))?,
            Some(Operator::EU) => self.some_path(s, |n, rho| n.until(rho, &c[0], &c[1]))?,
            Some(Operator::AU) => self.all_paths(s, |n, rho| n.until(rho, &c[0], &c[1]))?,
        };
        self.memo.insert((s.clone(), f.clone()), v);
        Ok(v)
    }

    fn some_path(
        &mut self,
        s: &StateId,
        mut holds: impl FnMut(&mut Self, &Path) -> Result<bool, OracleError>,
    ) -> Result<bool, OracleError> {
        for rho in self.paths(s) {
            if holds(self, &rho)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn all_paths(
        &mut self,
        s: &StateId,
        mut holds: impl FnMut(&mut Self, &Path) -> Result<bool, OracleError>,
    ) -> Result<bool, OracleError> {
        for rho in self.paths(s) {
            if !holds(self, &rho)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `rho` has a second position satisfying `f`; `vacuous` decides
    /// paths of length one.
    fn next(&mut self, rho: &Path, f: &Formula, vacuous: bool) -> Result<bool, OracleError> {
        match rho.at(1) {
            Some(x) => self.sat(x, f),
            None => Ok(vacuous),
        }
    }

    // every state of a lasso already occurs in its stem, so scanning the
    // stem visits each distinct state at its first position

    fn until(&mut self, rho: &Path, a: &Formula, b: &Formula) -> Result<bool, OracleError> {
        for x in &rho.stem {
            if self.sat(x, b)? {
                return Ok(true);
            }
            if !self.sat(x, a)? {
                return Ok(false);
            }
        }
        Ok(false)
    }

    fn globally(&mut self, rho: &Path, a: &Formula) -> Result<bool, OracleError> {
        for x in &rho.stem {
            if !self.sat(x, a)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::checker::check;
    use crate::formula::{parse_formula, strategies};
    use crate::model::fixtures::*;
    use proptest::prelude::*;

    fn sat(m: &Model, s: &str, f: &str) -> bool {
        naive_sat(m, s, &parse_formula(f).unwrap()).unwrap()
    }

    #[test]
    fn examples() {
        assert!(sat(&self_loop(), "s", "EG p"));
        assert!(sat(&chain(), "a", "E[p U q]"));
        assert!(!sat(&dead(), "t", "EX p"));
        assert!(sat(&dead(), "t", "EG p"));
        assert!(!sat(&chain(), "a", "EG p"));
        assert!(sat(&chain(), "b", "EX q"));
        assert!(!sat(&chain(), "a", "EX q"));
        assert!(!sat(&chain(), "c", "EX q"));
    }

    #[test]
    fn guard() {
        let names: Vec<String> = (0..13).map(|i| format!("s{i:02}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let m = kripke(&refs, &[], &[]);
        assert!(matches!(
            naive_sat(&m, "s00", &Formula::tt()),
            Err(OracleError::Guard(_))
        ));
    }

    /// Random closed models over `s0..s{n-1}` with total labels on p, q, r.
    pub(crate) fn arb_kripke(max_states: usize) -> impl Strategy<Value = Model> {
        (1..=max_states)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    prop::collection::vec(any::<bool>(), n * n),
                    prop::collection::vec(any::<bool>(), n * 3),
                )
            })
            .prop_map(|(n, edges, labels)| {
                let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                let e: Vec<(&str, &str)> = edges
                    .iter()
                    .enumerate()
                    .filter(|(_, b)| **b)
                    .map(|(k, _)| (refs[k / n], refs[k % n]))
                    .collect();
                let l: Vec<(&str, &str, bool)> = labels
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (refs[k / 3], ["p", "q", "r"][k % 3], *v))
                    .collect();
                kripke(&refs, &e, &l)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn checker_agrees_with_oracle(m in arb_kripke(4), f in strategies::formula(3)) {
            let full = check(&m, &f).unwrap();
            for g in full.context().iter() {
                for s in m.states() {
                    prop_assert_eq!(full.label(s, g).unwrap(), naive_sat(&m, s, g).unwrap(), "{} at {}", g, s);
                }
            }
        }

        #[test]
        fn desugaring_preserves_truth(m in arb_kripke(5), f in strategies::formula(3)) {
            for s in m.states() {
                prop_assert_eq!(naive_sat(&m, s, &f).unwrap(), naive_sat(&m, s, &f.desugar()).unwrap());
            }
        }
    }
}
