//! Constrained formula sets: sets over which some partial labelling has no
//! sound supermodel.

use std::collections::{BTreeMap, BTreeSet};

use super::{OracleError, SUPERMODEL_MAX_PROPS};
use crate::checker::{Graph, Plan};
use crate::formula::{Formula, FormulaSet, Operator};

/// Largest state count [`is_constrained_closed_bounded`] accepts.
pub const CONSTRAINED_MAX_STATES: usize = 3;

/// Sufficient test for unconstrainedness: members are built from
/// propositions with `!`, `||` and `E[.. U ..]` only, and no proposition
/// occurs twice across the whole set.
pub fn syntactically_unconstrained(g: &[Formula]) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&Formula> = g.iter().collect();
    while let Some(f) = stack.pop() {
        match f.operator() {
            None => {
                if !seen.insert(f) {
                    return false;
                }
            }
            Some(Operator::Not | Operator::Or | Operator::EU) => stack.extend(f.children()),
            Some(_) => return false,
        }
    }
    true
}

/// Searches fully closed models with at most `max_states` states for a
/// labelling over `S x g` that no valuation of the propositions realizes.
///
/// On a closed model every formula's truth is fixed by the transitions and
/// the propositions, so such a labelling is exactly an inconsistent one.
/// A `true` answer is therefore sound; `false` only means none was found
/// among closed models of this size.
pub fn is_constrained_closed_bounded(
    g: &[Formula],
    max_states: usize,
) -> Result<bool, OracleError> {
    if max_states > CONSTRAINED_MAX_STATES {
        return Err(OracleError::Guard(format!(
            "{max_states} states, at most {CONSTRAINED_MAX_STATES}"
        )));
    }
    let targets: Vec<Formula> = g.iter().map(Formula::desugar).collect();
    let set = FormulaSet::closure_of(targets.iter());
    let props: Vec<&Formula> = set.propositions().collect();
    if props.len() > SUPERMODEL_MAX_PROPS {
        return Err(OracleError::Guard(format!(
            "{} propositions, at most {SUPERMODEL_MAX_PROPS}",
            props.len()
        )));
    }
    let plan = Plan::new(&set);
    let positions: Vec<usize> = targets
        .iter()
        .map(|f| set.position(f).expect("in closure"))
        .collect();
    let prop_index: BTreeMap<usize, usize> = props
        .iter()
        .enumerate()
        .map(|(i, p)| (set.position(p).expect("in closure"), i))
        .collect();

    for n in 1..=max_states {
        let cells = n * targets.len();
        for edges in 0u64..(1u64 << (n * n)) {
            let succ: Vec<Vec<usize>> = (0..n)
                .map(|a| (0..n).filter(|b| edges >> (a * n + b) & 1 == 1).collect())
                .collect();
            let graph = Graph::from_succ(succ);
            let mut realized = BTreeSet::new();
            for bits in 0u64..(1u64 << (n * props.len())) {
                let rows = plan.eval(&graph, |node| {
                    let p = prop_index[&node];
                    (0..n).map(|s| bits >> (p * n + s) & 1 == 1).collect()
                });
                let mut vector = 0u64;
                for (i, pos) in positions.iter().enumerate() {
                    for (s, &b) in rows[*pos].iter().enumerate() {
                        if b {
                            vector |= 1 << (i * n + s);
                        }
                    }
                }
                realized.insert(vector);
            }
            // a total labelling outside the realized set has no completion
            if realized.len() < 1 << cells {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;

    fn fs(texts: &[&str]) -> Vec<Formula> {
        texts.iter().map(|t| parse_formula(t).unwrap()).collect()
    }

    #[test]
    fn syntactic_examples() {
        assert!(syntactically_unconstrained(&fs(&["p", "!q"])));
        assert!(syntactically_unconstrained(&fs(&["E[!p U q || r]", "s"])));
        assert!(!syntactically_unconstrained(&fs(&["true"])));
        assert!(!syntactically_unconstrained(&fs(&["p", "p || q"])));
        assert!(!syntactically_unconstrained(&fs(&["E[p U p]"])));
        assert!(!syntactically_unconstrained(&fs(&["EX p"])));
    }

    #[test]
    fn bounded_examples() {
        assert!(is_constrained_closed_bounded(&fs(&["true"]), 1).unwrap());
        assert!(is_constrained_closed_bounded(&fs(&["EX true"]), 1).unwrap());
        assert!(is_constrained_closed_bounded(&fs(&["p", "p && q"]), 1).unwrap());
        assert!(!is_constrained_closed_bounded(&fs(&["p"]), 3).unwrap());
        assert!(!is_constrained_closed_bounded(&fs(&["p", "!q", "E[r U s]"]), 2).unwrap());
        assert!(is_constrained_closed_bounded(&fs(&["p"]), 4).is_err());
    }
}
