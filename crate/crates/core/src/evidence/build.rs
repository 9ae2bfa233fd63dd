//! Construction of combined evidence from a sound model, and per-state
//! views of it.
//!
//! Witness parts keep one outgoing transition per state that needs one;
//! counterexample parts close states and keep all their transitions. The
//! two parts never share a state, and transitions never lead from one to
//! the other, so restricting to what is reachable from a state picks out
//! evidence for that state alone.

use std::collections::{BTreeSet, VecDeque};

use super::{core_compound, naturalize, EvidenceError, Flavor};
use crate::checker::Graph;
use crate::formula::{Formula, Operator};
use crate::model::{Model, StateId};

/// One model that is evidence for `f` at every state at once.
pub fn build_combined_evidence(
    full: &Model,
    f: &Formula,
    flavor: Flavor,
) -> Result<Model, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let states: Vec<StateId> = full.states().cloned().collect();
    let value = |g: &Formula| -> Result<Vec<bool>, EvidenceError> {
        states
            .iter()
            .map(|s| {
                full.label(s, g).ok_or_else(|| EvidenceError::Unlabelled {
                    state: s.clone(),
                    formula: g.clone(),
                })
            })
            .collect()
    };
    let sat = value(f)?;
    let children: Vec<Vec<bool>> = c.iter().map(value).collect::<Result<_, _>>()?;
    let graph = Graph::from_model(full, &states);

    let mut e = Model::new(full.context().clone());
    for s in &states {
        e.insert_state(s.clone(), false);
    }
    let mut out = Builder {
        e: &mut e,
        states: &states,
    };
    match op {
        Operator::True => {}
        Operator::Not => {
            for (i, &v) in sat.iter().enumerate() {
                out.label(i, &c[0], !v);
            }
        }
        Operator::Or => {
            for i in 0..states.len() {
                if !sat[i] {
                    out.label(i, &c[0], false);
                    out.label(i, &c[1], false);
                } else if children[0][i] {
                    out.label(i, &c[0], true);
                } else {
                    out.label(i, &c[1], true);
                }
            }
        }
        Operator::EX => {
            let hold = &children[0];
            for (i, &v) in sat.iter().enumerate() {
                if v {
                    // prefer a successor other than the state itself
                    let t = graph.succ[i]
                        .iter()
                        .copied()
                        .filter(|&t| hold[t])
                        .min_by_key(|&t| (t == i, t))
                        .expect("EX holds");
                    out.edge(i, t);
                    out.label(t, &c[0], true);
                } else {
                    out.close(i);
                    for &t in &graph.succ[i] {
                        out.edge(i, t);
                        out.label(t, &c[0], false);
                    }
                }
            }
        }
        Operator::EU => {
            let (hold, goal) = (&children[0], &children[1]);
            let parent = bfs_parents(&graph, (0..states.len()).filter(|&i| goal[i]), |i| hold[i]);
            for i in 0..states.len() {
                if sat[i] {
                    match parent[i] {
                        Some(p) => {
                            out.edge(i, p);
                            out.label(i, &c[0], true);
                        }
                        None => out.label(i, &c[1], true),
                    }
                } else if hold[i] {
                    out.close(i);
                    for &t in &graph.succ[i] {
                        out.edge(i, t);
                    }
                    out.label(i, &c[1], false);
                } else {
                    out.label(i, &c[0], false);
                    out.label(i, &c[1], false);
                }
            }
        }
        Operator::EG => {
            let hold = &children[0];
            let deadlocks = (0..states.len()).filter(|&i| sat[i] && graph.succ[i].is_empty());
            let parent = bfs_parents(&graph, deadlocks, |i| sat[i]);
            for i in 0..states.len() {
                if sat[i] {
                    out.label(i, &c[0], true);
                    if graph.succ[i].is_empty() {
                        out.close(i);
                    } else {
                        let next = parent[i].unwrap_or_else(|| {
                            *graph.succ[i].iter().find(|&&t| sat[t]).expect("EG holds")
                        });
                        out.edge(i, next);
                    }
                } else if hold[i] {
                    out.close(i);
                    for &t in &graph.succ[i] {
                        out.edge(i, t);
                    }
                } else {
                    out.label(i, &c[0], false);
                }
            }
        }
        _ => unreachable!("core operator"),
    }
    if flavor == Flavor::Natural && matches!(op, Operator::EU | Operator::EG) {
        e = naturalize(&e, full, f)?;
    }
    Ok(e)
}

/// Breadth-first search backwards from `seeds` through states passing
/// `through`. Each discovered state points at the state it was found
/// from; seeds and undiscovered states have no parent. Predecessors are
/// visited in state order, so the result is deterministic.
fn bfs_parents(
    g: &Graph,
    seeds: impl Iterator<Item = usize>,
    through: impl Fn(usize) -> bool,
) -> Vec<Option<usize>> {
    let mut parent = vec![None; g.len()];
    let mut seen = vec![false; g.len()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for s in seeds {
        seen[s] = true;
        queue.push_back(s);
    }
    while let Some(j) = queue.pop_front() {
        let mut preds = g.pred[j].clone();
        preds.sort_unstable();
        for i in preds {
            if !seen[i] && through(i) {
                seen[i] = true;
                parent[i] = Some(j);
                queue.push_back(i);
            }
        }
    }
    parent
}

struct Builder<'a> {
    e: &'a mut Model,
    states: &'a [StateId],
}

impl Builder<'_> {
    fn label(&mut self, i: usize, f: &Formula, v: bool) {
        self.e
            .insert_label(&self.states[i], f, v)
            .expect("labels agree with a sound model");
    }

    fn edge(&mut self, i: usize, j: usize) {
        self.e
            .insert_transition(&self.states[i], &self.states[j])
            .expect("known states");
    }

    fn close(&mut self, i: usize) {
        self.e
            .set_closed(&self.states[i], true)
            .expect("known state");
    }
}

/// The part of combined evidence `e` for `f` that concerns state `s`.
///
/// For `E[.. U ..]` and `EG` this is everything reachable from `s`. For
/// `EX` it is `s` with its own transitions and the labels of its
/// successors; going further would pull in transitions that the one-step
/// shape does not have. For local operators it is `s` alone.
pub fn view(e: &Model, s: &str, f: &Formula) -> Result<Model, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let s = e
        .state(s)
        .ok_or_else(|| EvidenceError::UnknownState(StateId::new(s)))?
        .clone();
    match op {
        Operator::EU | Operator::EG => Ok(e.restrict_reachable(&s)?),
        Operator::EX => {
            let targets = e.successors(&s)?.clone();
            let mut keep = targets.clone();
            keep.insert(s.clone());
            let mut v = e.restrict_to(&keep);
            for x in &keep {
                v.set_closed(x, false)?;
                if *x != s {
                    for t in e.successors(x)? {
                        v.remove_transition(x, t);
                    }
                }
                if !targets.contains(x) {
                    v.remove_label(x, &c[0]);
                }
            }
            v.set_closed(&s, e.is_closed(&s))?;
            Ok(v)
        }
        _ => Ok(e.restrict_to(&BTreeSet::from([s]))),
    }
}

/// Minimal evidence for `(s, f)` taken from combined evidence.
pub fn build_min_evidence(full: &Model, s: &str, f: &Formula) -> Result<Model, EvidenceError> {
    let e = build_combined_evidence(full, f, Flavor::Minimal)?;
    view(&e, s, f)
}
