//! Recognizers for the shapes of minimal evidence.

use std::collections::BTreeSet;

use super::{core_compound, EvidenceError};
use crate::formula::{Formula, Operator};
use crate::model::{Assertion, Model, StateId};

/// True if `m` has exactly the shape of a minimal witness for `(s, f)`.
pub fn is_min_witness(m: &Model, s: &str, f: &Formula) -> Result<bool, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let s = known(m, s)?;
    let labels = labels(m);
    let no_closed = m.closed_states().is_empty();
    Ok(match op {
        Operator::True => single(m, s) && labels.is_empty(),
        Operator::Not => single(m, s) && labels == set([(s, &c[0], false)]),
        Operator::Or => {
            single(m, s) && (labels == set([(s, &c[0], true)]) || labels == set([(s, &c[1], true)]))
        }
        Operator::EX => {
            let targets = m.successors(s).expect("known state");
            no_closed && m.transition_count() == 1 && targets.len() == 1 && {
                let t = targets.first().expect("one target");
                m.state_count() == if t == s { 1 } else { 2 } && labels == set([(t, &c[0], true)])
            }
        }
        Operator::EU => match walk(m, s) {
            Some((path, None)) => {
                let (last, init) = path.split_last().expect("nonempty path");
                let mut want: BTreeSet<Assertion> =
                    init.iter().map(|x| assertion(x, &c[0], true)).collect();
                want.insert(assertion(last, &c[1], true));
                no_closed && labels == want
            }
            _ => false,
        },
        Operator::EG => match walk(m, s) {
            Some((path, lasso)) => {
                let want_closed: BTreeSet<StateId> = match lasso {
                    Some(_) => BTreeSet::new(),
                    None => BTreeSet::from([path.last().expect("nonempty").clone()]),
                };
                let want: BTreeSet<Assertion> =
                    path.iter().map(|x| assertion(x, &c[0], true)).collect();
                *m.closed_states() == want_closed && labels == want
            }
            None => false,
        },
        _ => unreachable!("core operator"),
    })
}

/// True if `m` has exactly the shape of a minimal counterexample for
/// `(s, f)`. For `E[a U b]` the labelling is `b` ff everywhere and `a` ff
/// exactly on the open states.
pub fn is_min_counter(m: &Model, s: &str, f: &Formula) -> Result<bool, EvidenceError> {
    min_counter(m, s, f, false)
}

/// Like [`is_min_counter`], but reading the `E[a U b]` labelling the
/// other way round: `a` ff everywhere and `b` ff on the open states.
/// Kept for diagnostics only; such models generally fail the
/// counterexample condition.
pub fn is_min_counter_transposed(m: &Model, s: &str, f: &Formula) -> Result<bool, EvidenceError> {
    min_counter(m, s, f, true)
}

fn min_counter(m: &Model, s: &str, f: &Formula, transposed: bool) -> Result<bool, EvidenceError> {
    let (op, c) = core_compound(f)?;
    let s = known(m, s)?;
    let labels = labels(m);
    Ok(match op {
        Operator::True => false,
        Operator::Not => single(m, s) && labels == set([(s, &c[0], true)]),
        Operator::Or => single(m, s) && labels == set([(s, &c[0], false), (s, &c[1], false)]),
        Operator::EX => {
            let targets = m.successors(s).expect("known state");
            *m.closed_states() == BTreeSet::from([s.clone()])
                && m.transition_count() == targets.len()
                && m.states().all(|x| x == s || targets.contains(x))
                && labels == targets.iter().map(|t| assertion(t, &c[0], false)).collect()
        }
        Operator::EU => {
            let (everywhere, open_only) = if transposed {
                (&c[0], &c[1])
            } else {
                (&c[1], &c[0])
            };
            let mut want: BTreeSet<Assertion> = m
                .states()
                .map(|x| assertion(x, everywhere, false))
                .collect();
            want.extend(m.open_states().map(|x| assertion(x, open_only, false)));
            all_reachable(m, s)
                && m.open_states()
                    .all(|x| m.successors(x).expect("known").is_empty())
                && labels == want
        }
        Operator::EG => {
            let deadlocks: BTreeSet<&StateId> = m.deadlocks().collect();
            let interior: BTreeSet<StateId> = m
                .states()
                .filter(|x| !deadlocks.contains(x))
                .cloned()
                .collect();
            all_reachable(m, s)
                && acyclic(m)
                && !m.transitions().any(|(_, t)| t == s)
                && *m.closed_states() == interior
                && labels
                    == deadlocks
                        .iter()
                        .map(|x| assertion(x, &c[0], false))
                        .collect()
        }
        _ => unreachable!("core operator"),
    })
}

/// Evidence for an `E[.. U ..]` or `EG` formula is natural when every
/// state with a successor labels every child of the formula.
pub fn is_natural(m: &Model, f: &Formula) -> bool {
    m.states()
        .filter(|x| !m.successors(x).expect("known").is_empty())
        .all(|x| f.children().iter().all(|c| m.label(x, c).is_some()))
}

fn known<'a>(m: &'a Model, s: &str) -> Result<&'a StateId, EvidenceError> {
    m.state(s)
        .ok_or_else(|| EvidenceError::UnknownState(StateId::new(s)))
}

fn assertion(s: &StateId, f: &Formula, v: bool) -> Assertion {
    Assertion::new(s.clone(), f.clone(), v)
}

fn set<const N: usize>(items: [(&StateId, &Formula, bool); N]) -> BTreeSet<Assertion> {
    items
        .into_iter()
        .map(|(s, f, v)| assertion(s, f, v))
        .collect()
}

fn labels(m: &Model) -> BTreeSet<Assertion> {
    m.labels().collect()
}

fn single(m: &Model, s: &StateId) -> bool {
    m.state_count() == 1
        && m.contains_state(s)
        && m.closed_states().is_empty()
        && m.transition_count() == 0
}

/// Follows the unique successor from `s`. Returns the visited states and,
/// if the walk closes a loop, the index it returns to. `None` unless every
/// state has at most one successor and all of them are visited.
fn walk(m: &Model, s: &StateId) -> Option<(Vec<StateId>, Option<usize>)> {
    let mut path = vec![s.clone()];
    let lasso = loop {
        let targets = m.successors(path.last().expect("nonempty")).expect("known");
        match targets.len() {
            0 => break None,
            1 => {
                let t = targets.first().expect("one target");
                if let Some(k) = path.iter().position(|x| x == t) {
                    break Some(k);
                }
                path.push(t.clone());
            }
            _ => return None,
        }
    };
    let edges = path.len() - usize::from(lasso.is_none());
    (path.len() == m.state_count() && m.transition_count() == edges).then_some((path, lasso))
}

fn all_reachable(m: &Model, s: &StateId) -> bool {
    m.restrict_reachable(s).expect("known state").state_count() == m.state_count()
}

fn acyclic(m: &Model) -> bool {
    // repeatedly drop states without successors
    let mut left: BTreeSet<&StateId> = m.states().collect();
    loop {
        let sinks: Vec<&StateId> = left
            .iter()
            .filter(|x| {
                m.successors(x)
                    .expect("known")
                    .iter()
                    .all(|t| !left.contains(t))
            })
            .copied()
            .collect();
        if sinks.is_empty() {
            return left.is_empty();
        }
        for x in sinks {
            left.remove(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, FormulaSet};

    fn f(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    fn id(s: &str) -> StateId {
        StateId::new(s)
    }

    fn model(
        ctx: &str,
        states: &[(&str, bool)],
        edges: &[(&str, &str)],
        labels: &[(&str, &str, bool)],
    ) -> Model {
        let mut m = Model::new(FormulaSet::closure(&f(ctx)));
        for (s, c) in states {
            m.insert_state(*s, *c);
        }
        for (a, b) in edges {
            m.insert_transition(&id(a), &id(b)).unwrap();
        }
        for (s, g, v) in labels {
            m.insert_label(&id(s), &f(g), *v).unwrap();
        }
        m
    }

    #[test]
    fn ex_witness_shapes() {
        let m = model(
            "EX q",
            &[("s", false), ("t", false)],
            &[("s", "t")],
            &[("t", "q", true)],
        );
        assert!(is_min_witness(&m, "s", &f("EX q")).unwrap());
        let more = m.join([Assertion::new("s", f("q"), true)]).unwrap();
        assert!(!is_min_witness(&more, "s", &f("EX q")).unwrap());
        let looped = model("EX q", &[("s", false)], &[("s", "s")], &[("s", "q", true)]);
        assert!(is_min_witness(&looped, "s", &f("EX q")).unwrap());
    }

    #[test]
    fn eg_witness_shapes() {
        let looped = model("EG p", &[("s", false)], &[("s", "s")], &[("s", "p", true)]);
        assert!(is_min_witness(&looped, "s", &f("EG p")).unwrap());
        let dead = model("EG p", &[("t", true)], &[], &[("t", "p", true)]);
        assert!(is_min_witness(&dead, "t", &f("EG p")).unwrap());
        let open_end = model("EG p", &[("t", false)], &[], &[("t", "p", true)]);
        assert!(!is_min_witness(&open_end, "t", &f("EG p")).unwrap());
        let lasso = model(
            "EG p",
            &[("a", false), ("b", false), ("c", false)],
            &[("a", "b"), ("b", "c"), ("c", "b")],
            &[("a", "p", true), ("b", "p", true), ("c", "p", true)],
        );
        assert!(is_min_witness(&lasso, "a", &f("EG p")).unwrap());
        assert!(!is_min_witness(&lasso, "b", &f("EG p")).unwrap());
    }

    #[test]
    fn eu_shapes() {
        let w = model(
            "E[p U q]",
            &[("a", false), ("b", false), ("c", false)],
            &[("a", "b"), ("b", "c")],
            &[("a", "p", true), ("b", "p", true), ("c", "q", true)],
        );
        assert!(is_min_witness(&w, "a", &f("E[p U q]")).unwrap());
        let cyc = model(
            "E[p U q]",
            &[("s", true)],
            &[("s", "s")],
            &[("s", "q", false)],
        );
        assert!(is_min_counter(&cyc, "s", &f("E[p U q]")).unwrap());
        let c = model(
            "E[p U q]",
            &[("a", true), ("b", false)],
            &[("a", "b")],
            &[("a", "q", false), ("b", "q", false), ("b", "p", false)],
        );
        assert!(is_min_counter(&c, "a", &f("E[p U q]")).unwrap());
        assert!(!is_min_counter_transposed(&c, "a", &f("E[p U q]")).unwrap());
    }

    #[test]
    fn eg_counter_shapes() {
        let c = model(
            "EG p",
            &[("a", true), ("b", false), ("c", false)],
            &[("a", "b"), ("a", "c")],
            &[("b", "p", false), ("c", "p", false)],
        );
        assert!(is_min_counter(&c, "a", &f("EG p")).unwrap());
        let mut back = c.clone();
        back.set_closed(&id("b"), true).unwrap();
        back.insert_transition(&id("b"), &id("a")).unwrap();
        assert!(!is_min_counter(&back, "a", &f("EG p")).unwrap());
    }

    #[test]
    fn local_shapes() {
        let m = model("p || q", &[("s", false)], &[], &[("s", "q", true)]);
        assert!(is_min_witness(&m, "s", &f("p || q")).unwrap());
        let both = model(
            "p || q",
            &[("s", false)],
            &[],
            &[("s", "q", false), ("s", "p", false)],
        );
        assert!(is_min_counter(&both, "s", &f("p || q")).unwrap());
        let t = model("true", &[("s", false)], &[], &[]);
        assert!(is_min_witness(&t, "s", &f("true")).unwrap());
        assert!(!is_min_counter(&t, "s", &f("true")).unwrap());
    }
}
