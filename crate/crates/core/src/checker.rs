//! Fixpoint labelling of Kripke models.
//!
//! Transition relations need not be total: a state without successors
//! ends a finite maximal path.

use std::collections::VecDeque;

use thiserror::Error;

use crate::formula::{Formula, FormulaSet, Operator};
use crate::model::{Model, ModelError, StateId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("not a Kripke model: {0}")]
    NotKripke(String),
    #[error("proposition `{prop}` is not labelled at state `{state}`")]
    MissingLabel { state: StateId, prop: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions {
    /// Treat missing proposition labels as ff instead of failing.
    pub permissive: bool,
}

/// Labels `m` with the truth of every subformula of `f` and of its
/// desugared form. Sugared subformulas get the labels of their images.
pub fn check(m: &Model, f: &Formula) -> Result<Model, CheckError> {
    check_with(m, f, CheckOptions::default()).map(|(full, _)| full)
}

/// Like [`check`]; also returns a warning per defaulted label.
pub fn check_with(
    m: &Model,
    f: &Formula,
    opts: CheckOptions,
) -> Result<(Model, Vec<String>), CheckError> {
    if let Some(s) = m.open_states().next() {
        return Err(CheckError::NotKripke(format!("state `{s}` is open")));
    }
    if let Some(g) = m.labelled_formulas().find(|g| !g.is_prop()) {
        return Err(CheckError::NotKripke(format!("compound label `{g}`")));
    }
    let core_f = f.desugar();
    let context = FormulaSet::closure_of([f, &core_f]).union(m.context());
    let core = context.core_part();

    let states: Vec<StateId> = m.states().cloned().collect();
    let graph = Graph::from_model(m, &states);
    let mut warnings = Vec::new();
    let mut missing = None;
    let values = eval_set(&graph, &core, |p| {
        states
            .iter()
            .map(|s| match m.label(s, p) {
                Some(v) => v,
                None => {
                    if opts.permissive {
                        warnings.push(format!("`{p}` unlabelled at `{s}`; assuming ff"));
                    } else if missing.is_none() {
                        missing = Some((s.clone(), p.to_string()));
                    }
                    false
                }
            })
            .collect()
    });
    if let Some((state, prop)) = missing {
        return Err(CheckError::MissingLabel { state, prop });
    }

    let mut full = m.clone().with_context(context.clone())?;
    for g in &context {
        let image = g.desugar();
        let row = &values[core.position(&image).expect("desugared image in context")];
        for (s, v) in states.iter().zip(row) {
            full.insert_label(s, g, *v)?;
        }
    }
    Ok((full, warnings))
}

/// Index-based view of a model's transition relation.
#[derive(Debug, Clone)]
pub(crate) struct Graph {
    pub succ: Vec<Vec<usize>>,
    pub pred: Vec<Vec<usize>>,
}

impl Graph {
    pub fn from_model(m: &Model, states: &[StateId]) -> Graph {
        let mut succ = vec![Vec::new(); states.len()];
        for (i, s) in states.iter().enumerate() {
            for t in m.successors(s).expect("state of model") {
                succ[i].push(states.binary_search(t).expect("sorted state list"));
            }
        }
        Graph::from_succ(succ)
    }

    pub fn from_succ(succ: Vec<Vec<usize>>) -> Graph {
        let mut pred = vec![Vec::new(); succ.len()];
        for (i, ts) in succ.iter().enumerate() {
            for &t in ts {
                pred[t].push(i);
            }
        }
        Graph { succ, pred }
    }

    pub fn len(&self) -> usize {
        self.succ.len()
    }
}

/// A core-only formula set flattened for repeated evaluation: members in
/// canonical order with child positions resolved.
#[derive(Debug, Clone)]
pub(crate) struct Plan {
    pub nodes: Vec<(Option<Operator>, Vec<usize>)>,
}

impl Plan {
    pub fn new(set: &FormulaSet) -> Plan {
        let nodes = set
            .iter()
            .map(|f| {
                let children = f
                    .children()
                    .iter()
                    .map(|c| set.position(c).expect("closed set"))
                    .collect();
                (f.operator(), children)
            })
            .collect();
        Plan { nodes }
    }

    /// Rows for every member; `prop(i)` supplies the row of proposition
    /// member `i`.
    pub fn eval(&self, g: &Graph, mut prop: impl FnMut(usize) -> Vec<bool>) -> Vec<Vec<bool>> {
        let mut rows: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for (i, (op, children)) in self.nodes.iter().enumerate() {
            let row = match op {
                None => prop(i),
                Some(op) => {
                    let args: Vec<&[bool]> = children.iter().map(|&c| rows[c].as_slice()).collect();
                    eval_op(g, *op, &args)
                }
            };
            rows.push(row);
        }
        rows
    }
}

/// Evaluates every member of a core-only set in canonical order.
/// `prop` supplies the row of each proposition.
pub(crate) fn eval_set(
    g: &Graph,
    set: &FormulaSet,
    mut prop: impl FnMut(&Formula) -> Vec<bool>,
) -> Vec<Vec<bool>> {
    let members: Vec<&Formula> = set.iter().collect();
    Plan::new(set).eval(g, |i| prop(members[i]))
}

/// One fixpoint step: the row of `op` given the rows of its children.
pub(crate) fn eval_op(g: &Graph, op: Operator, args: &[&[bool]]) -> Vec<bool> {
    let n = g.len();
    match op {
        Operator::True => vec![true; n],
        Operator::Not => args[0].iter().map(|v| !v).collect(),
        Operator::Or => args[0].iter().zip(args[1]).map(|(a, b)| *a || *b).collect(),
        Operator::EX => (0..n)
            .map(|i| g.succ[i].iter().any(|&j| args[0][j]))
            .collect(),
        Operator::EU => {
            let (hold, goal) = (args[0], args[1]);
            let mut sat = goal.to_vec();
            let mut queue: VecDeque<usize> = (0..n).filter(|&i| goal[i]).collect();
            while let Some(j) = queue.pop_front() {
                for &i in &g.pred[j] {
                    if !sat[i] && hold[i] {
                        sat[i] = true;
                        queue.push_back(i);
                    }
                }
            }
            sat
        }
        Operator::EG => {
            // drop states whose every successor has been dropped; deadlocks stay
            let hold = args[0];
            let mut sat = hold.to_vec();
            let mut alive: Vec<usize> = (0..n)
                .map(|i| g.succ[i].iter().filter(|&&j| hold[j]).count())
                .collect();
            let mut queue: VecDeque<usize> = (0..n)
                .filter(|&i| sat[i] && !g.succ[i].is_empty() && alive[i] == 0)
                .collect();
            for &i in &queue {
                sat[i] = false;
            }
            while let Some(j) = queue.pop_front() {
                for &i in &g.pred[j] {
                    alive[i] -= 1;
                    if sat[i] && alive[i] == 0 {
                        sat[i] = false;
                        queue.push_back(i);
                    }
                }
            }
            sat
        }
        other => panic!("operator {other} is not core"),
    }
}
