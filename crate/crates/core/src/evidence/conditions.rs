//! Witness and counterexample conditions, read off the structure and
//! partial labelling of a model.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::{core_compound, EvidenceError};
use crate::formula::{Formula, Operator};
use crate::model::{Assertion, Model, StateId};

/// The witness condition for `(s, f)`; `f` must be a core compound.
pub fn witness_cond(m: &Model, s: &str, f: &Formula) -> Result<bool, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let s = known(m, s)?;
    Ok(match op {
        Operator::True => true,
        Operator::Not => m.label(s, &c[0]) == Some(false),
        Operator::Or => m.label(s, &c[0]) == Some(true) || m.label(s, &c[1]) == Some(true),
        Operator::EX => succ(m, s).iter().any(|t| m.label(t, &c[0]) == Some(true)),
        Operator::EU => eu_witness(m, s, &c[0], &c[1]),
        Operator::EG => eg_witness(m, s, &c[0]),
        _ => unreachable!("core operator"),
    })
}

/// The counterexample condition for `(s, f)`; `f` must be a core compound.
pub fn counter_cond(m: &Model, s: &str, f: &Formula) -> Result<bool, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let s = known(m, s)?;
    Ok(match op {
        Operator::True => false,
        Operator::Not => m.label(s, &c[0]) == Some(true),
        Operator::Or => m.label(s, &c[0]) == Some(false) && m.label(s, &c[1]) == Some(false),
        Operator::EX => {
            m.is_closed(s) && succ(m, s).iter().all(|t| m.label(t, &c[0]) == Some(false))
        }
        Operator::EU => eu_counter(m, &c[0], &c[1]).contains(s),
        Operator::EG => eg_counter(m, &c[0]).contains(s),
        _ => unreachable!("core operator"),
    })
}

/// The condition matching `a.value`.
pub fn assertion_cond(m: &Model, a: &Assertion) -> Result<bool, EvidenceError> {
    if a.value {
        witness_cond(m, &a.state, &a.formula)
    } else {
        counter_cond(m, &a.state, &a.formula)
    }
}

fn known<'a>(m: &'a Model, s: &str) -> Result<&'a StateId, EvidenceError> {
    m.state(s)
        .ok_or_else(|| EvidenceError::UnknownState(StateId::new(s)))
}

fn succ<'a>(m: &'a Model, s: &StateId) -> &'a BTreeSet<StateId> {
    m.successors(s).expect("known state")
}

/// A state labelled `b` tt is reachable through states labelled `a` tt.
fn eu_witness(m: &Model, s: &StateId, a: &Formula, b: &Formula) -> bool {
    let mut seen = BTreeSet::from([s]);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        if m.label(x, b) == Some(true) {
            return true;
        }
        if m.label(x, a) != Some(true) {
            continue;
        }
        for t in succ(m, x) {
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    false
}

/// Within the states labelled `a` tt and reachable from `s` through them,
/// there is a closed state without successors or a cycle.
fn eg_witness(m: &Model, s: &StateId, a: &Formula) -> bool {
    if m.label(s, a) != Some(true) {
        return false;
    }
    let mut region = BTreeSet::from([s]);
    let mut queue = VecDeque::from([s]);
    while let Some(x) = queue.pop_front() {
        let targets = succ(m, x);
        if targets.is_empty() && m.is_closed(x) {
            return true;
        }
        for t in targets {
            if m.label(t, a) == Some(true) && region.insert(t) {
                queue.push_back(t);
            }
        }
    }
    // cycle check: peel off states with no remaining predecessors
    let mut indegree: BTreeMap<&StateId, usize> = region.iter().map(|x| (*x, 0)).collect();
    for x in &region {
        for t in succ(m, x) {
            if let Some(d) = indegree.get_mut(t) {
                *d += 1;
            }
        }
    }
    let mut free: Vec<&StateId> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(x, _)| *x)
        .collect();
    let mut peeled = 0;
    while let Some(x) = free.pop() {
        peeled += 1;
        for t in succ(m, x) {
            if let Some(d) = indegree.get_mut(t) {
                *d -= 1;
                if *d == 0 {
                    free.push(t);
                }
            }
        }
    }
    peeled < region.len()
}

/// States from which every maximal path stays among closed `b`-ff states,
/// forever or until it reaches a state labelled ff for both `a` and `b`.
/// This is a greatest fixpoint: cycles through closed `b`-ff states count.
pub(crate) fn eu_counter<'a>(m: &'a Model, a: &Formula, b: &Formula) -> BTreeSet<&'a StateId> {
    let stop = |x: &StateId| m.label(x, a) == Some(false) && m.label(x, b) == Some(false);
    let stay = |x: &StateId| m.is_closed(x) && m.label(x, b) == Some(false);
    let mut good: BTreeSet<&StateId> = m.states().filter(|x| stop(x) || stay(x)).collect();
    loop {
        let bad: Vec<&StateId> = good
            .iter()
            .filter(|x| !stop(x) && !succ(m, x).iter().all(|t| good.contains(t)))
            .copied()
            .collect();
        if bad.is_empty() {
            return good;
        }
        for x in bad {
            good.remove(x);
        }
    }
}

/// States from which every maximal path reaches an `a`-ff state through
/// closed states only. A least fixpoint: cycles and deadlocks fail.
pub(crate) fn eg_counter<'a>(m: &'a Model, a: &Formula) -> BTreeSet<&'a StateId> {
    let mut ok: BTreeSet<&StateId> = m
        .states()
        .filter(|x| m.label(x, a) == Some(false))
        .collect();
    loop {
        let new: Vec<&StateId> = m
            .states()
            .filter(|x| {
                !ok.contains(x) && m.is_closed(x) && {
                    let t = succ(m, x);
                    !t.is_empty() && t.iter().all(|y| ok.contains(y))
                }
            })
            .collect();
        if new.is_empty() {
            return ok;
        }
        ok.extend(new);
    }
}
