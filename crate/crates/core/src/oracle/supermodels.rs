//! Bounded enumeration of sound supermodels.
//!
//! A candidate closes every state, adds at most `max_added` transitions
//! leaving open states of the input or fresh states, and picks a total
//! valuation of the relevant propositions that extends the input's.
//! Compound labels follow from the fixpoint evaluator; candidates that
//! disagree with a label of the input are dropped. Fresh states are
//! interchangeable, so only the first `k` of them are ever used, and a
//! fresh state appears only if it is reachable from an open input state.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use super::{OracleError, SUPERMODEL_MAX_PROPS, SUPERMODEL_MAX_STATES};
use crate::checker::{Graph, Plan};
use crate::formula::{Formula, FormulaSet};
use crate::model::{Assertion, Model, StateId};

/// Limits of the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub fresh: usize,
    pub max_added: usize,
}

impl Budget {
    pub fn new(fresh: usize, max_added: usize) -> Budget {
        Budget { fresh, max_added }
    }
}

/// Outcome of checking an assertion against every enumerated supermodel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SemanticVerdict {
    pub supermodels: usize,
    pub violations: usize,
}

impl SemanticVerdict {
    pub fn consistent(&self) -> bool {
        self.supermodels > 0
    }

    /// Consistent, and the assertion holds in every supermodel.
    pub fn holds(&self) -> bool {
        self.consistent() && self.violations == 0
    }
}

struct Space {
    states: Vec<StateId>,
    base: Vec<Vec<usize>>,
    candidates: Vec<(usize, usize)>,
    fresh: usize,
    max_added: usize,
    props: Vec<Formula>,
    plan: Plan,
    members: Vec<Formula>,
    // plan position of each proposition in `props`
    prop_nodes: Vec<usize>,
    // fixed[state][prop] for input states
    fixed: Vec<Vec<Option<bool>>>,
    open: Vec<bool>,
    // (state, plan position, value) from the input labelling
    checks: Vec<(usize, usize, bool)>,
}

struct Candidate<'a> {
    n: usize,
    succ: &'a [Vec<usize>],
    rows: &'a [Vec<bool>],
}

impl Space {
    fn new(m: &Model, budget: Budget, extra: &[Formula]) -> Result<Space, OracleError> {
        let k = m.state_count();
        if k + budget.fresh > SUPERMODEL_MAX_STATES {
            return Err(OracleError::Guard(format!(
                "{k} states plus {} fresh, at most {SUPERMODEL_MAX_STATES}",
                budget.fresh
            )));
        }
        let mut roots: BTreeSet<Formula> = m.labelled_formulas().map(Formula::desugar).collect();
        roots.extend(extra.iter().map(Formula::desugar));
        let set = FormulaSet::closure_of(roots.iter());
        let props: Vec<Formula> = set.propositions().cloned().collect();
        if props.len() > SUPERMODEL_MAX_PROPS {
            return Err(OracleError::Guard(format!(
                "{} propositions, at most {SUPERMODEL_MAX_PROPS}",
                props.len()
            )));
        }

        let mut states: Vec<StateId> = m.states().cloned().collect();
        for i in 0..budget.fresh {
            let mut name = format!("~fresh{i}");
            while m.contains_state(&name) {
                name.insert(0, '~');
            }
            states.push(StateId::new(name));
        }
        let base = Graph::from_model(m, &states[..k]).succ;
        let total = states.len();
        let mut candidates = Vec::new();
        for from in 0..total {
            if from < k && m.is_closed(&states[from]) {
                continue;
            }
            for to in 0..total {
                if from >= k || !base[from].contains(&to) {
                    candidates.push((from, to));
                }
            }
        }
        let fixed = states[..k]
            .iter()
            .map(|s| props.iter().map(|p| m.label(s, p)).collect())
            .collect();
        let checks = m
            .labels()
            .map(|a| {
                let i = states[..k].binary_search(&a.state).expect("state of model");
                (
                    i,
                    set.position(&a.formula.desugar()).expect("in closure"),
                    a.value,
                )
            })
            .collect();
        let open = states[..k].iter().map(|s| !m.is_closed(s)).collect();
        Ok(Space {
            states,
            base,
            candidates,
            fresh: budget.fresh,
            max_added: budget.max_added,
            prop_nodes: props
                .iter()
                .map(|p| set.position(p).expect("in closure"))
                .collect(),
            props,
            plan: Plan::new(&set),
            members: set.iter().cloned().collect(),
            fixed,
            open,
            checks,
        })
    }

    fn position(&self, f: &Formula) -> usize {
        self.members
            .iter()
            .position(|g| g == f)
            .expect("formula in enumeration closure")
    }

    fn for_each(&self, mut visit: impl FnMut(&Candidate) -> ControlFlow<()>) {
        let k = self.base.len();
        let mut chosen: Vec<usize> = Vec::new();
        // subsets of candidate indices in lexicographic order
        loop {
            if self.visit_structure(k, &chosen, &mut visit).is_break() {
                return;
            }
            if chosen.len() < self.max_added.min(self.candidates.len()) {
                let next = chosen.last().map_or(0, |c| c + 1);
                if next < self.candidates.len() {
                    chosen.push(next);
                    continue;
                }
            }
            // advance: bump the last index, popping exhausted ones
            loop {
                let Some(last) = chosen.pop() else {
                    return;
                };
                if last + 1 < self.candidates.len() {
                    chosen.push(last + 1);
                    break;
                }
            }
        }
    }

    fn visit_structure(
        &self,
        k: usize,
        chosen: &[usize],
        visit: &mut impl FnMut(&Candidate) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        let mut used = vec![false; self.fresh];
        for &c in chosen {
            let (a, b) = self.candidates[c];
            for x in [a, b] {
                if x >= k {
                    used[x - k] = true;
                }
            }
        }
        let u = used.iter().filter(|x| **x).count();
        if used[..u].iter().any(|x| !x) {
            return ControlFlow::Continue(());
        }
        let n = k + u;
        let mut succ: Vec<Vec<usize>> = self.base.clone();
        succ.resize(n, Vec::new());
        for &c in chosen {
            let (a, b) = self.candidates[c];
            succ[a].push(b);
        }
        let graph = Graph::from_succ(succ);
        if u > 0 && !fresh_reachable(&graph, k, |s| self.open[s]) {
            return ControlFlow::Continue(());
        }

        let mut free = Vec::new();
        for s in 0..n {
            for p in 0..self.props.len() {
                if s >= k || self.fixed[s][p].is_none() {
                    free.push((s, p));
                }
            }
        }
        let mut prop_rows: Vec<Vec<bool>> = (0..self.props.len())
            .map(|p| {
                (0..n)
                    .map(|s| s < k && self.fixed[s][p] == Some(true))
                    .collect()
            })
            .collect();
        for bits in 0u64..(1u64 << free.len()) {
            for (i, (s, p)) in free.iter().enumerate() {
                prop_rows[*p][*s] = bits >> i & 1 == 1;
            }
            let rows = self.plan.eval(&graph, |node| {
                let p = self
                    .prop_nodes
                    .iter()
                    .position(|x| *x == node)
                    .expect("proposition node");
                prop_rows[p].clone()
            });
            if self.checks.iter().all(|(s, f, v)| rows[*f][*s] == *v) {
                visit(&Candidate {
                    n,
                    succ: &graph.succ,
                    rows: &rows,
                })?;
            }
        }
        ControlFlow::Continue(())
    }

    fn to_model(&self, c: &Candidate, context: &FormulaSet) -> Model {
        let mut m = Model::new(context.clone());
        for s in &self.states[..c.n] {
            m.insert_state(s.clone(), true);
        }
        for (a, targets) in c.succ.iter().enumerate() {
            for b in targets {
                m.insert_transition(&self.states[a], &self.states[*b])
                    .expect("known states");
            }
        }
        for f in context {
            let row = &c.rows[self.position(&f.desugar())];
            for (s, v) in self.states[..c.n].iter().zip(row) {
                m.insert_label(s, f, *v).expect("fresh labelling");
            }
        }
        m
    }
}

fn fresh_reachable(g: &Graph, k: usize, open: impl Fn(usize) -> bool) -> bool {
    let mut seen = vec![false; g.len()];
    let mut stack: Vec<usize> = (0..k).filter(|&s| open(s)).collect();
    while let Some(s) = stack.pop() {
        for &t in &g.succ[s] {
            if !seen[t] {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    seen[k..].iter().all(|x| *x)
}

/// Every enumerated sound supermodel of `m`, each labelled over
/// `m`'s context and its desugared closure.
pub fn enumerate_supermodels(m: &Model, budget: Budget) -> Result<Vec<Model>, OracleError> {
    let context: Vec<Formula> = m.context().iter().cloned().collect();
    let space = Space::new(m, budget, &context)?;
    let desugared: Vec<Formula> = context.iter().map(Formula::desugar).collect();
    let full_context = FormulaSet::closure_of(context.iter().chain(&desugared));
    let mut out = Vec::new();
    space.for_each(|c| {
        out.push(space.to_model(c, &full_context));
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Counts supermodels and those violating `a`. Does not require the
/// labelling of `m` to be restricted to the children of `a.formula`.
pub fn semantic_verdict(
    m: &Model,
    a: &Assertion,
    budget: Budget,
) -> Result<SemanticVerdict, OracleError> {
    let Some(s) = m.states().position(|x| *x == a.state) else {
        return Err(OracleError::UnknownState(a.state.clone()));
    };
    let space = Space::new(m, budget, std::slice::from_ref(&a.formula))?;
    let target = space.position(&a.formula.desugar());
    let mut verdict = SemanticVerdict::default();
    space.for_each(|c| {
        verdict.supermodels += 1;
        if c.rows[target][s] != a.value {
            verdict.violations += 1;
        }
        ControlFlow::Continue(())
    });
    Ok(verdict)
}

/// Bounded check that `m` is evidence for `a`: labels only on children of
/// the asserted formula, at least one supermodel, and the assertion true
/// in all of them.
pub fn is_evidence_semantic(m: &Model, a: &Assertion, budget: Budget) -> Result<bool, OracleError> {
    let children = a.formula.children();
    if let Some(bad) = m.labels().find(|l| !children.contains(&l.formula)) {
        return Err(OracleError::LabelDomain {
            state: bad.state,
            formula: bad.formula,
        });
    }
    Ok(semantic_verdict(m, a, budget)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check;
    use crate::formula::parse_formula;
    use crate::model::fixtures::*;

    fn f(text: &str) -> Formula {
        parse_formula(text).unwrap()
    }

    fn id(s: &str) -> StateId {
        StateId::new(s)
    }

    #[test]
    fn closed_total_model_has_one_supermodel() {
        let all = enumerate_supermodels(&chain(), Budget::new(2, 2)).unwrap();
        assert_eq!(all.len(), 1);
        assert!(all[0].is_full());
    }

    #[test]
    fn single_open_state_count() {
        // one open state s, one proposition p, one fresh state f: new
        // transitions range over the four pairs in {s,f}^2. Without f only
        // {} and {(s,s)} remain (2 structures x 2 valuations); f needs
        // (s,f), leaving 8 subsets (x 4 valuations).
        let mut m = Model::new(props(&["p"]));
        m.insert_state("s", false);
        let all = enumerate_supermodels(&m, Budget::new(1, 4)).unwrap();
        assert_eq!(all.len(), 2 * 2 + 8 * 4);
        assert!(all.iter().all(|n| n.is_full() && is_submodel_ok(&m, n)));
        let distinct: BTreeSet<String> = all.iter().map(Model::to_json).collect();
        assert_eq!(distinct.len(), all.len());
    }

    fn is_submodel_ok(m: &Model, n: &Model) -> bool {
        crate::model::is_submodel(m, n)
    }

    #[test]
    fn forced_contradiction_has_no_supermodel() {
        let tt = Formula::tt();
        let mut m = Model::new(FormulaSet::closure(&tt));
        m.insert_state("s", false);
        m.insert_label(&id("s"), &tt, false).unwrap();
        assert!(enumerate_supermodels(&m, Budget::new(1, 2))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ex_witness_shape() {
        let ex = f("EX q");
        let mut m = Model::new(FormulaSet::closure(&ex));
        m.insert_state("s", false);
        m.insert_state("t", false);
        m.insert_transition(&id("s"), &id("t")).unwrap();
        m.insert_label(&id("t"), &f("q"), true).unwrap();
        assert!(is_evidence_semantic(
            &m,
            &Assertion::new("s", ex.clone(), true),
            Budget::new(1, 2)
        )
        .unwrap());
        assert!(!is_evidence_semantic(
            &m,
            &Assertion::new("s", ex.clone(), false),
            Budget::new(1, 2)
        )
        .unwrap());

        let mut bad = m.clone();
        bad.insert_label(&id("s"), &f("q"), true).unwrap();
        assert!(matches!(
            is_evidence_semantic(
                &bad,
                &Assertion::new("s", f("EX p"), true),
                Budget::new(1, 2)
            ),
            Err(OracleError::LabelDomain { .. })
        ));
    }

    #[test]
    fn closed_state_without_successors_refutes_ex() {
        let ex = f("EX true");
        let mut m = Model::new(FormulaSet::closure(&ex));
        m.insert_state("s", true);
        assert!(is_evidence_semantic(
            &m,
            &Assertion::new("s", ex.clone(), false),
            Budget::new(1, 2)
        )
        .unwrap());
        m.set_closed(&id("s"), false).unwrap();
        assert!(!is_evidence_semantic(
            &m,
            &Assertion::new("s", ex.clone(), false),
            Budget::new(1, 2)
        )
        .unwrap());
        assert!(
            !is_evidence_semantic(&m, &Assertion::new("s", ex, true), Budget::new(1, 2)).unwrap()
        );
    }

    #[test]
    fn supermodels_are_sound() {
        let g = f("E[p U EX q]");
        let mut m = Model::new(FormulaSet::closure(&g));
        m.insert_state("a", false);
        m.insert_state("b", true);
        m.insert_transition(&id("a"), &id("b")).unwrap();
        m.insert_label(&id("a"), &f("p"), true).unwrap();
        for n in enumerate_supermodels(&m, Budget::new(1, 2)).unwrap() {
            let kripke = n.restrict_labels(n.context().propositions());
            let full = check(&kripke, &g).unwrap();
            for s in n.states() {
                assert_eq!(n.label(s, &g), full.label(s, &g));
            }
        }
    }

    #[test]
    fn guards() {
        let m = kripke(&["a", "b", "c", "d", "e", "f", "g"], &[], &[]);
        assert!(matches!(
            enumerate_supermodels(&m, Budget::new(2, 1)),
            Err(OracleError::Guard(_))
        ));
        let wide = kripke(
            &["a"],
            &[],
            &[
                ("a", "p", true),
                ("a", "q", true),
                ("a", "r", true),
                ("a", "s", true),
                ("a", "t", true),
            ],
        );
        assert!(matches!(
            enumerate_supermodels(&wide, Budget::new(0, 0)),
            Err(OracleError::Guard(_))
        ));
    }
}
