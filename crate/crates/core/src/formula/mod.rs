//! CTL formulas: abstract syntax, surface syntax, desugaring into the
//! existential core fragment, and subformula-closed sets.
//!
//! Formulas are compared structurally everywhere. Two parses of the same
//! text produce equal values, so a formula is its own identity in
//! labellings, proofs and bundles.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub use parser::{parse_formula, ParseError};

/// Logical operators of CTL.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Operator {
    True,
    False,
    Not,
    And,
    Or,
    EX,
    AX,
    EF,
    AF,
    EG,
    AG,
    EU,
    AU,
}

impl Operator {
    pub const ALL: [Operator; 13] = [
        Operator::True,
        Operator::False,
        Operator::Not,
        Operator::And,
        Operator::Or,
        Operator::EX,
        Operator::AX,
        Operator::EF,
        Operator::AF,
        Operator::EG,
        Operator::AG,
        Operator::EU,
        Operator::AU,
    ];

    pub fn arity(self) -> usize {
        match self {
            Operator::True | Operator::False => 0,
            Operator::And | Operator::Or | Operator::EU | Operator::AU => 2,
            _ => 1,
        }
    }

    /// Member of the fragment `{True, Not, Or, EX, EU, EG}` that every
    /// other operator desugars into.
    pub fn is_core(self) -> bool {
        matches!(
            self,
            Operator::True
                | Operator::Not
                | Operator::Or
                | Operator::EX
                | Operator::EU
                | Operator::EG
        )
    }

    pub fn is_temporal(self) -> bool {
        !matches!(
            self,
            Operator::True | Operator::False | Operator::Not | Operator::And | Operator::Or
        )
    }

    /// Short name used in tables and AST listings.
    pub fn name(self) -> &'static str {
        match self {
            Operator::True => "true",
            Operator::False => "false",
            Operator::Not => "!",
            Operator::And => "&&",
            Operator::Or => "||",
            Operator::EX => "EX",
            Operator::AX => "AX",
            Operator::EF => "EF",
            Operator::AF => "AF",
            Operator::EG => "EG",
            Operator::AG => "AG",
            Operator::EU => "EU",
            Operator::AU => "AU",
        }
    }

    pub fn from_name(name: &str) -> Option<Operator> {
        Operator::ALL.into_iter().find(|op| op.name() == name)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A CTL formula: a proposition or an operator applied to its children.
///
/// The derived ordering (propositions before compounds, then by operator
/// and children) is the stable structural order used to break ties in
/// [`FormulaSet`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Prop(Arc<str>),
    Compound(Operator, Arc<[Formula]>),
}

impl Formula {
    pub fn prop(name: impl AsRef<str>) -> Formula {
        Formula::Prop(Arc::from(name.as_ref()))
    }

    /// Builds a compound node, panicking on an arity mismatch.
    pub fn compound(op: Operator, children: Vec<Formula>) -> Formula {
        assert_eq!(
            children.len(),
            op.arity(),
            "operator {op} expects {} operand(s)",
            op.arity()
        );
        Formula::Compound(op, Arc::from(children))
    }

    pub fn tt() -> Formula {
        Formula::compound(Operator::True, vec![])
    }

    pub fn ff() -> Formula {
        Formula::compound(Operator::False, vec![])
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::compound(Operator::Not, vec![f])
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::compound(Operator::And, vec![a, b])
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::compound(Operator::Or, vec![a, b])
    }

    pub fn ex(f: Formula) -> Formula {
        Formula::compound(Operator::EX, vec![f])
    }

    pub fn ax(f: Formula) -> Formula {
        Formula::compound(Operator::AX, vec![f])
    }

    pub fn ef(f: Formula) -> Formula {
        Formula::compound(Operator::EF, vec![f])
    }

    pub fn af(f: Formula) -> Formula {
        Formula::compound(Operator::AF, vec![f])
    }

    pub fn eg(f: Formula) -> Formula {
        Formula::compound(Operator::EG, vec![f])
    }

    pub fn ag(f: Formula) -> Formula {
        Formula::compound(Operator::AG, vec![f])
    }

    pub fn eu(a: Formula, b: Formula) -> Formula {
        Formula::compound(Operator::EU, vec![a, b])
    }

    pub fn au(a: Formula, b: Formula) -> Formula {
        Formula::compound(Operator::AU, vec![a, b])
    }

    /// `None` for propositions.
    pub fn operator(&self) -> Option<Operator> {
        match self {
            Formula::Prop(_) => None,
            Formula::Compound(op, _) => Some(*op),
        }
    }

    pub fn children(&self) -> &[Formula] {
        match self {
            Formula::Prop(_) => &[],
            Formula::Compound(_, children) => children,
        }
    }

    pub fn as_prop(&self) -> Option<&str> {
        match self {
            Formula::Prop(name) => Some(name),
            Formula::Compound(..) => None,
        }
    }

    pub fn is_prop(&self) -> bool {
        matches!(self, Formula::Prop(_))
    }

    pub fn is_compound(&self) -> bool {
        !self.is_prop()
    }

    /// True if the top operator is temporal.
    pub fn is_temporal(&self) -> bool {
        self.operator().is_some_and(Operator::is_temporal)
    }

    /// True if every operator in the formula belongs to the core fragment.
    pub fn is_core(&self) -> bool {
        match self {
            Formula::Prop(_) => true,
            Formula::Compound(op, children) => {
                op.is_core() && children.iter().all(Formula::is_core)
            }
        }
    }

    /// 1 for leaves, otherwise one more than the deepest child.
    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// Number of nodes in the syntax tree, counting repeated subtrees.
    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(Formula::node_count)
            .sum::<usize>()
    }

    pub fn propositions(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_props(&mut out);
        out
    }

    fn collect_props(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Prop(name) => {
                out.insert(name.clone());
            }
            Formula::Compound(_, children) => children.iter().for_each(|c| c.collect_props(out)),
        }
    }

    /// Preorder traversal of the syntax tree (repeated subtrees are visited
    /// once per occurrence).
    pub fn preorder(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            out.push(f);
            stack.extend(f.children().iter().rev());
        }
        out
    }

    /// Rewrites the formula into the core fragment `{True, Not, Or, EX, EU, EG}`.
    ///
    /// Rewrites are applied bottom-up:
    /// `false ~> !true`, `a && b ~> !(!a || !b)`, `AX f ~> !EX !f`,
    /// `EF f ~> E[true U f]`, `AG f ~> !E[true U !f]`, `AF f ~> !EG !f`,
    /// `A[f U g] ~> !(E[!g U (!f && !g)] || EG !g)`.
    pub fn desugar(&self) -> Formula {
        let Formula::Compound(op, children) = self else {
            return self.clone();
        };
        let kids: Vec<Formula> = children.iter().map(Formula::desugar).collect();
        match op {
            Operator::True => Formula::tt(),
            Operator::False => Formula::not(Formula::tt()),
            Operator::Not => Formula::not(kids[0].clone()),
            Operator::Or => Formula::or(kids[0].clone(), kids[1].clone()),
            Operator::And => core_and(kids[0].clone(), kids[1].clone()),
            Operator::EX => Formula::ex(kids[0].clone()),
            Operator::EU => Formula::eu(kids[0].clone(), kids[1].clone()),
            Operator::EG => Formula::eg(kids[0].clone()),
            Operator::AX => Formula::not(Formula::ex(Formula::not(kids[0].clone()))),
            Operator::EF => Formula::eu(Formula::tt(), kids[0].clone()),
            Operator::AG => Formula::not(Formula::eu(Formula::tt(), Formula::not(kids[0].clone()))),
            Operator::AF => Formula::not(Formula::eg(Formula::not(kids[0].clone()))),
            Operator::AU => {
                let (a, b) = (kids[0].clone(), kids[1].clone());
                let not_b = Formula::not(b);
                let until = Formula::eu(not_b.clone(), core_and(Formula::not(a), not_b.clone()));
                Formula::not(Formula::or(until, Formula::eg(not_b)))
            }
        }
    }
}

fn core_and(a: Formula, b: Formula) -> Formula {
    Formula::not(Formula::or(Formula::not(a), Formula::not(b)))
}

/// Binding strength used by the pretty-printer.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Disj,
    Conj,
    Unary,
}

impl Formula {
    fn level(&self) -> Level {
        match self.operator() {
            Some(Operator::Or) => Level::Disj,
            Some(Operator::And) => Level::Conj,
            _ => Level::Unary,
        }
    }

    fn fmt_at(&self, f: &mut fmt::Formatter<'_>, min: Level) -> fmt::Result {
        if self.level() < min {
            f.write_str("(")?;
            self.fmt_at(f, Level::Disj)?;
            return f.write_str(")");
        }
        match self {
            Formula::Prop(name) => f.write_str(name),
            Formula::Compound(op, kids) => match op {
                Operator::True => f.write_str("true"),
                Operator::False => f.write_str("false"),
                Operator::Not => {
                    f.write_str("!")?;
                    kids[0].fmt_at(f, Level::Unary)
                }
                Operator::Or => {
                    kids[0].fmt_at(f, Level::Disj)?;
                    f.write_str(" || ")?;
                    kids[1].fmt_at(f, Level::Conj)
                }
                Operator::And => {
                    kids[0].fmt_at(f, Level::Conj)?;
                    f.write_str(" && ")?;
                    kids[1].fmt_at(f, Level::Unary)
                }
                Operator::EU | Operator::AU => {
                    f.write_str(if *op == Operator::EU { "E[" } else { "A[" })?;
                    kids[0].fmt_at(f, Level::Disj)?;
                    f.write_str(" U ")?;
                    kids[1].fmt_at(f, Level::Disj)?;
                    f.write_str("]")
                }
                _ => {
                    write!(f, "{op} ")?;
                    kids[0].fmt_at(f, Level::Unary)
                }
            },
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_at(f, Level::Disj)
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// A subformula-closed set of formulas in canonical order: ascending depth,
/// ties broken by the structural order. Children always precede parents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct FormulaSet {
    members: Vec<Formula>,
    core_only: bool,
}

impl FormulaSet {
    pub fn empty() -> FormulaSet {
        FormulaSet {
            members: Vec::new(),
            core_only: true,
        }
    }

    /// Smallest subformula-closed set containing `f`.
    pub fn closure(f: &Formula) -> FormulaSet {
        FormulaSet::closure_of([f])
    }

    /// Smallest subformula-closed set containing all of `formulas`.
    pub fn closure_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> FormulaSet {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&Formula> = formulas.into_iter().collect();
        while let Some(f) = stack.pop() {
            if seen.insert(f.clone()) {
                stack.extend(f.children());
            }
        }
        FormulaSet::from_closed(seen)
    }

    fn from_closed(set: BTreeSet<Formula>) -> FormulaSet {
        let mut members: Vec<Formula> = set.into_iter().collect();
        members.sort_by_cached_key(|f| (f.depth(), f.clone()));
        let core_only = members
            .iter()
            .all(|f| f.operator().is_none_or(Operator::is_core));
        FormulaSet { members, core_only }
    }

    pub fn union(&self, other: &FormulaSet) -> FormulaSet {
        FormulaSet::closure_of(self.members.iter().chain(other.members.iter()))
    }

    /// The members whose operators are all core; still subformula-closed.
    pub fn core_part(&self) -> FormulaSet {
        FormulaSet::closure_of(self.members.iter().filter(|f| f.is_core()))
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.position(f).is_some()
    }

    /// Index of `f` in the canonical order.
    pub fn position(&self, f: &Formula) -> Option<usize> {
        let key = (f.depth(), f);
        self.members
            .binary_search_by(|m| (m.depth(), m).cmp(&key))
            .ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Formula> {
        self.members.iter()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_core_only(&self) -> bool {
        self.core_only
    }

    /// Propositional members.
    pub fn propositions(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter().filter(|f| f.is_prop())
    }

    /// Compound members (`F_Oper`).
    pub fn compounds(&self) -> impl Iterator<Item = &Formula> {
        self.members.iter().filter(|f| f.is_compound())
    }

    /// Maximum depth over the members, 0 for the empty set.
    pub fn depth(&self) -> usize {
        self.members.last().map(Formula::depth).unwrap_or(0)
    }

    pub fn is_subset(&self, other: &FormulaSet) -> bool {
        self.members.iter().all(|f| other.contains(f))
    }
}

impl<'a> IntoIterator for &'a FormulaSet {
    type Item = &'a Formula;
    type IntoIter = std::slice::Iter<'a, Formula>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

#[cfg(test)]
pub(crate) mod strategies {
    use super::*;
    use proptest::prelude::*;

    /// Random formulas over `p, q, r` using the full operator set.
    pub fn formula(max_depth: u32) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            4 => prop::sample::select(vec!["p", "q", "r"]).prop_map(Formula::prop),
            1 => Just(Formula::tt()),
            1 => Just(Formula::ff()),
        ];
        leaf.prop_recursive(max_depth, 32, 2, |inner| {
            prop_oneof![
                (
                    prop::sample::select(vec![
                        Operator::Not,
                        Operator::EX,
                        Operator::AX,
                        Operator::EF,
                        Operator::AF,
                        Operator::EG,
                        Operator::AG
                    ]),
                    inner.clone()
                )
                    .prop_map(|(op, f)| Formula::compound(op, vec![f])),
                (
                    prop::sample::select(vec![
                        Operator::And,
                        Operator::Or,
                        Operator::EU,
                        Operator::AU
                    ]),
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Formula::compound(op, vec![a, b])),
            ]
        })
    }
}
