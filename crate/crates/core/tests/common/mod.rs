//! Random models and formulas shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use ctl_evidence::formula::{Formula, FormulaSet, Operator};
use ctl_evidence::model::{is_submodel, Model, StateId};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn props(names: &[&str]) -> Vec<Formula> {
    names.iter().map(Formula::prop).collect()
}

pub fn state_name(i: usize) -> String {
    format!("s{i}")
}

/// A closed Kripke model with total labels for `names`.
pub fn random_kripke(
    rng: &mut StdRng,
    max_states: usize,
    max_transitions: usize,
    names: &[&str],
) -> Model {
    let ps = props(names);
    let mut m = Model::new(FormulaSet::closure_of(ps.iter()));
    let n = rng.gen_range(1..=max_states);
    let ids: Vec<StateId> = (0..n).map(|i| StateId::new(state_name(i))).collect();
    for s in &ids {
        m.insert_state(s.clone(), true);
    }
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
    pairs.shuffle(rng);
    let k = rng.gen_range(0..=max_transitions.min(pairs.len()));
    for (a, b) in &pairs[..k] {
        m.insert_transition(&ids[*a], &ids[*b]).unwrap();
    }
    for s in &ids {
        for p in &ps {
            m.insert_label(s, p, rng.gen_bool(0.5)).unwrap();
        }
    }
    m
}

/// A formula over the full operator set.
pub fn random_formula(rng: &mut StdRng, depth: usize, names: &[&str]) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..12) {
            0 => Formula::tt(),
            1 => Formula::ff(),
            _ => Formula::prop(names.choose(rng).unwrap()),
        };
    }
    let ops: Vec<Operator> = Operator::ALL
        .into_iter()
        .filter(|op| op.arity() > 0)
        .collect();
    let op = *ops.choose(rng).unwrap();
    let children = (0..op.arity())
        .map(|_| random_formula(rng, depth - 1, names))
        .collect();
    Formula::compound(op, children)
}

/// A core compound whose children are drawn from `pool`.
pub fn random_core_compound(rng: &mut StdRng, pool: &[Formula]) -> Formula {
    let mut pick = || pool.choose(rng).unwrap().clone();
    let (a, b) = (pick(), pick());
    match rng.gen_range(0..6) {
        0 => Formula::tt(),
        1 => Formula::not(a),
        2 => Formula::or(a, b),
        3 => Formula::ex(a),
        4 => Formula::eu(a, b),
        _ => Formula::eg(a),
    }
}

/// A model over states `s0..` with random closed flags, transitions and
/// labels on `labels`.
pub fn random_partial(
    rng: &mut StdRng,
    max_states: usize,
    labels: &[Formula],
    context: &FormulaSet,
) -> Model {
    let mut m = Model::new(context.clone());
    let n = rng.gen_range(1..=max_states);
    let ids: Vec<StateId> = (0..n).map(|i| StateId::new(state_name(i))).collect();
    for s in &ids {
        m.insert_state(s.clone(), rng.gen_bool(0.5));
    }
    for a in &ids {
        for b in &ids {
            if rng.gen_bool(0.3) {
                m.insert_transition(a, b).unwrap();
            }
        }
    }
    let labels: BTreeSet<&Formula> = labels.iter().collect();
    for s in &ids {
        for g in &labels {
            if rng.gen_bool(0.5) {
                m.insert_label(s, g, rng.gen_bool(0.5)).unwrap();
            }
        }
    }
    m
}

pub struct Corpus {
    pub entries: Vec<(Model, Vec<Formula>)>,
}

/// Kripke models with at most 6 states, 10 transitions and 3
/// propositions, each with formulas of depth at most 4.
pub fn corpus(models: usize, formulas: usize, seed: u64) -> Corpus {
    let mut r = rng(seed);
    let names = ["p", "q", "r"];
    let entries = (0..models)
        .map(|_| {
            let k = r.gen_range(1..=3);
            let m = random_kripke(&mut r, 6, 10, &names[..k]);
            let fs = (0..formulas)
                .map(|_| random_formula(&mut r, 4, &names[..k]))
                .collect();
            (m, fs)
        })
        .collect();
    Corpus { entries }
}

/// Models one element smaller than `m` in the submodel order: one label,
/// one transition from an open state, one closed flag, or one isolated,
/// open, unlabelled state removed.
pub fn direct_predecessors(m: &Model) -> Vec<Model> {
    let mut out = Vec::new();
    for a in m.labels() {
        let mut n = m.clone();
        n.remove_label(&a.state, &a.formula);
        out.push(n);
    }
    let transitions: Vec<(StateId, StateId)> = m
        .transitions()
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect();
    for (a, b) in &transitions {
        if !m.is_closed(a) {
            let mut n = m.clone();
            n.remove_transition(a, b);
            out.push(n);
        }
    }
    for s in m.closed_states().clone() {
        let mut n = m.clone();
        n.set_closed(&s, false).unwrap();
        out.push(n);
    }
    let touched: BTreeSet<&StateId> = m.transitions().flat_map(|(a, b)| [a, b]).collect();
    let labelled: BTreeSet<StateId> = m.labels().map(|a| a.state).collect();
    for s in m.states() {
        if !m.is_closed(s) && !touched.contains(s) && !labelled.contains(s) {
            let mut n = m.clone();
            n.remove_state(s);
            out.push(n);
        }
    }
    debug_assert!(out.iter().all(|n| is_submodel(n, m) && n != m));
    out
}
