//! The `ctl-evidence/1` bundle: a labelled model, the formula's AST and
//! combined evidence for each temporal node.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{validate_proof, Clause, Proof, ValidationReport};
use crate::evidence::{
    build_combined_evidence, is_natural, locally_close, naturalize, view, EvidenceError, Flavor,
};
use crate::formula::{parse_formula, Formula, FormulaSet, Operator};
use crate::model::{is_submodel, Assertion, Model, StateId};
use crate::model::{to_canonical_json, LoadError, ModelFile};

pub const BUNDLE_VERSION: &str = "ctl-evidence/1";

type LabelTable = BTreeMap<String, BTreeMap<String, bool>>;

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("malformed bundle JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported version `{0}`, expected `{BUNDLE_VERSION}`")]
    Version(String),
    #[error("{context} refers to unknown {kind} `{id}`")]
    Dangling {
        context: String,
        kind: &'static str,
        id: String,
    },
    #[error("bad AST: {0}")]
    Ast(String),
    #[error("`{0}` is not labelled by the proof")]
    NotInContext(Formula),
    #[error("{context}: {source}")]
    Model { context: String, source: LoadError },
    #[error(transparent)]
    Evidence(#[from] EvidenceError),
}

/// A node of the formula DAG. Structurally equal subformulas share a node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AstNode {
    pub id: usize,
    pub formula: String,
    /// Operator name, or `prop`.
    pub op: String,
    pub children: Vec<usize>,
    /// The node of the desugared form; the node itself for core formulas.
    pub core: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    /// Input name to SHA-256 of its contents, hex encoded.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new() -> Provenance {
        Provenance {
            tool: concat!("ctl-evidence ", env!("CARGO_PKG_VERSION")).into(),
            inputs: BTreeMap::new(),
        }
    }

    pub fn with_input(mut self, name: impl Into<String>, contents: &[u8]) -> Provenance {
        self.inputs
            .insert(name.into(), hex::encode(Sha256::digest(contents)));
        self
    }
}

/// Combined evidence for one temporal node, in both flavours, with the
/// labels local closure adds to each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CombinedBlock {
    pub node: usize,
    pub formula: Formula,
    pub minimal: Model,
    pub natural: Model,
    pub closure_minimal: BTreeSet<Assertion>,
    pub closure_natural: BTreeSet<Assertion>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvidenceBundle {
    /// Labelled for sugared formulas as well as core ones.
    pub model: Model,
    pub formula: Formula,
    pub nodes: Vec<AstNode>,
    pub combined: Vec<CombinedBlock>,
    pub provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct BundleFile {
    version: String,
    model: ModelFile,
    ast: AstFile,
    combined: Vec<CombinedFile>,
    local_closure: Vec<ClosureFile>,
    provenance: Provenance,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct AstFile {
    root: usize,
    core_root: usize,
    nodes: Vec<AstNode>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CombinedFile {
    node: usize,
    minimal: ModelFile,
    natural: ModelFile,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureFile {
    node: usize,
    minimal: LabelTable,
    natural: LabelTable,
}

/// All subformulas of `f` and of the desugared forms of each of them.
fn ast_set(f: &Formula) -> FormulaSet {
    let base = FormulaSet::closure_of([f, &f.desugar()]);
    let images: Vec<Formula> = base.iter().map(Formula::desugar).collect();
    base.union(&FormulaSet::closure_of(images.iter()))
}

fn ast_nodes(set: &FormulaSet) -> Vec<AstNode> {
    let id = |g: &Formula| set.position(g).expect("closed set");
    set.iter()
        .enumerate()
        .map(|(i, g)| AstNode {
            id: i,
            formula: g.to_string(),
            op: g.operator().map_or("prop", Operator::name).into(),
            children: g.children().iter().map(id).collect(),
            core: id(&g.desugar()),
        })
        .collect()
}

fn temporal_core(g: &Formula) -> bool {
    g.is_core()
        && matches!(
            g.operator(),
            Some(Operator::EX | Operator::EU | Operator::EG)
        )
}

impl EvidenceBundle {
    /// Bundles `p` for the formula `f`, which must be labelled by `p`.
    pub fn from_proof(
        p: &Proof,
        f: &Formula,
        provenance: Provenance,
    ) -> Result<EvidenceBundle, BundleError> {
        let set = ast_set(f);
        if let Some(g) = set
            .iter()
            .find(|g| g.is_core() && !p.model.context().contains(g))
        {
            return Err(BundleError::NotInContext(g.clone()));
        }
        // sugared nodes take the labels of their images
        let mut sugar = Vec::new();
        for g in set.iter().filter(|g| !g.is_core()) {
            for (s, v) in p.model.labels_of(&g.desugar()).into_iter().flatten() {
                sugar.push(Assertion::new(s.clone(), g.clone(), *v));
            }
        }
        let model = p
            .model
            .clone()
            .with_context(p.model.context().union(&set))
            .and_then(|m| m.join(sugar))
            .map_err(EvidenceError::from)?;
        let labelled: Vec<Formula> = model.labelled_formulas().cloned().collect();
        let model = model
            .with_context(FormulaSet::closure_of(labelled.iter()).union(&set))
            .map_err(EvidenceError::from)?;

        let mut combined = Vec::new();
        for (node, g) in set.iter().enumerate().filter(|(_, g)| temporal_core(g)) {
            let minimal = build_combined_evidence(&p.model, g, Flavor::Minimal)?;
            let natural = naturalize(&minimal, &p.model, g)?;
            let closure_minimal = closure_labels(&minimal, &p.model, g)?;
            let closure_natural = closure_labels(&natural, &p.model, g)?;
            combined.push(CombinedBlock {
                node,
                formula: g.clone(),
                minimal: minimal
                    .with_context(set.clone())
                    .map_err(EvidenceError::from)?,
                natural: natural
                    .with_context(set.clone())
                    .map_err(EvidenceError::from)?,
                closure_minimal,
                closure_natural,
            });
        }
        Ok(EvidenceBundle {
            model,
            formula: f.clone(),
            nodes: ast_nodes(&set),
            combined,
            provenance,
        })
    }

    pub fn block(&self, f: &Formula) -> Option<&CombinedBlock> {
        self.combined.iter().find(|b| b.formula == *f)
    }

    /// The proof the bundle stands for. Temporal evidence is cut out of
    /// the stored blocks; evidence for local operators is rebuilt from the
    /// labels, since it is a single state.
    pub fn proof(&self) -> Result<Proof, EvidenceError> {
        let model = self.model.core_projection();
        let mut evidence = BTreeMap::new();
        for f in model.context().compounds() {
            let combined = if temporal_core(f) {
                match self.block(f) {
                    Some(b) => b.minimal.clone().with_context(model.context().clone())?,
                    None => continue,
                }
            } else {
                build_combined_evidence(&model, f, Flavor::Minimal)?
            };
            for s in model.states() {
                let Some(value) = model.label(s, f) else {
                    continue;
                };
                evidence.insert(
                    Assertion::new(s.clone(), f.clone(), value),
                    view(&combined, s, f)?,
                );
            }
        }
        Ok(Proof { model, evidence })
    }

    /// Canonical JSON; identical bundles give identical bytes.
    pub fn to_json(&self) -> String {
        let file = BundleFile {
            version: BUNDLE_VERSION.into(),
            model: ModelFile::from_model(&self.model),
            ast: AstFile {
                root: self.node_id(&self.formula),
                core_root: self.node_id(&self.formula.desugar()),
                nodes: self.nodes.clone(),
            },
            combined: self
                .combined
                .iter()
                .map(|b| CombinedFile {
                    node: b.node,
                    minimal: ModelFile::from_model(&b.minimal),
                    natural: ModelFile::from_model(&b.natural),
                })
                .collect(),
            local_closure: self
                .combined
                .iter()
                .map(|b| ClosureFile {
                    node: b.node,
                    minimal: table(&b.closure_minimal),
                    natural: table(&b.closure_natural),
                })
                .collect(),
            provenance: self.provenance.clone(),
        };
        to_canonical_json(&file)
    }

    fn node_id(&self, f: &Formula) -> usize {
        let text = f.to_string();
        self.nodes
            .iter()
            .position(|n| n.formula == text)
            .expect("formula in AST")
    }
}

fn closure_labels(
    e: &Model,
    full: &Model,
    f: &Formula,
) -> Result<BTreeSet<Assertion>, EvidenceError> {
    let closed = locally_close(e, full, f)?;
    Ok(closed
        .labels()
        .filter(|a| e.label(&a.state, &a.formula).is_none())
        .collect())
}

fn table(labels: &BTreeSet<Assertion>) -> LabelTable {
    let mut t = LabelTable::new();
    for a in labels {
        t.entry(a.formula.to_string())
            .or_default()
            .insert(a.state.to_string(), a.value);
    }
    t
}

/// Serializes a bundle for `p` and `f`.
pub fn export_bundle(
    p: &Proof,
    f: &Formula,
    provenance: Provenance,
) -> Result<String, BundleError> {
    Ok(EvidenceBundle::from_proof(p, f, provenance)?.to_json())
}

/// Parses a bundle and resolves every reference in it.
pub fn import_bundle(text: &str) -> Result<EvidenceBundle, BundleError> {
    let file: BundleFile = serde_json::from_str(text)?;
    if file.version != BUNDLE_VERSION {
        return Err(BundleError::Version(file.version));
    }
    let n = file.ast.nodes.len();
    let resolve = |context: String, id: usize| -> Result<usize, BundleError> {
        if id < n {
            Ok(id)
        } else {
            Err(BundleError::Dangling {
                context,
                kind: "AST node",
                id: id.to_string(),
            })
        }
    };
    for (i, node) in file.ast.nodes.iter().enumerate() {
        if node.id != i {
            return Err(BundleError::Ast(format!(
                "node at position {i} has id {}",
                node.id
            )));
        }
        for &c in node.children.iter().chain([&node.core]) {
            resolve(format!("AST node {i}"), c)?;
        }
    }
    let root = resolve("AST root".into(), file.ast.root)?;
    resolve("AST core root".into(), file.ast.core_root)?;
    let formula = parse_formula(&file.ast.nodes[root].formula)
        .map_err(|e| BundleError::Ast(format!("root formula: {e}")))?;
    let set = ast_set(&formula);
    let nodes = ast_nodes(&set);
    if nodes != file.ast.nodes
        || file.ast.core_root != set.position(&formula.desugar()).expect("in set")
    {
        return Err(BundleError::Ast(format!(
            "nodes do not match the AST of `{formula}`"
        )));
    }

    let model = file
        .model
        .to_model(&set)
        .map_err(|source| BundleError::Model {
            context: "model".into(),
            source,
        })?;
    let state = |context: &str, s: &str| -> Result<StateId, BundleError> {
        model
            .state(s)
            .cloned()
            .ok_or_else(|| BundleError::Dangling {
                context: context.into(),
                kind: "state",
                id: s.into(),
            })
    };
    let mut combined = Vec::new();
    let mut seen = BTreeSet::new();
    for b in &file.combined {
        let node = resolve("combined block".into(), b.node)?;
        let f = set.iter().nth(node).expect("resolved").clone();
        if !temporal_core(&f) || !seen.insert(node) {
            return Err(BundleError::Ast(format!(
                "combined block for node {node} (`{f}`): not a temporal core node, or repeated"
            )));
        }
        let load = |flavor: &str, m: &ModelFile| -> Result<Model, BundleError> {
            let context = format!("combined[{node}].{flavor}");
            for s in &m.states {
                state(&context, &s.id)?;
            }
            m.to_model(&set)
                .map_err(|source| BundleError::Model { context, source })
        };
        let minimal = load("minimal", &b.minimal)?;
        let natural = load("natural", &b.natural)?;
        combined.push(CombinedBlock {
            node,
            formula: f,
            minimal,
            natural,
            closure_minimal: BTreeSet::new(),
            closure_natural: BTreeSet::new(),
        });
    }
    for c in &file.local_closure {
        let node = resolve("localClosure".into(), c.node)?;
        let block = combined
            .iter_mut()
            .find(|b| b.node == node)
            .ok_or_else(|| BundleError::Dangling {
                context: "localClosure".into(),
                kind: "combined block",
                id: node.to_string(),
            })?;
        let context = format!("localClosure[{node}]");
        for (t, out) in [
            (&c.minimal, &mut block.closure_minimal),
            (&c.natural, &mut block.closure_natural),
        ] {
            for (key, per_state) in t {
                let g = parse_formula(key)
                    .ok()
                    .filter(|g| set.contains(g))
                    .ok_or_else(|| BundleError::Dangling {
                        context: context.clone(),
                        kind: "formula",
                        id: key.clone(),
                    })?;
                for (s, v) in per_state {
                    out.insert(Assertion::new(state(&context, s)?, g.clone(), *v));
                }
            }
        }
    }
    Ok(EvidenceBundle {
        model,
        formula,
        nodes,
        combined,
        provenance: file.provenance,
    })
}

/// Validates the proof a bundle stands for, and that its stored blocks
/// agree with the model.
pub fn validate_bundle(b: &EvidenceBundle) -> ValidationReport {
    let mut report = match b.proof() {
        Ok(p) => validate_proof(&p),
        Err(e) => {
            let mut r = ValidationReport::default();
            r.fail(format!("proof: {e}"), Clause::Inconsistent);
            return r;
        }
    };
    let core = b.model.core_projection();
    for g in b.model.labelled_formulas().filter(|g| !g.is_core()) {
        let image = g.desugar();
        if b.model.labels_of(g) != b.model.labels_of(&image) {
            report.fail(
                format!("labels of `{g}` and `{image}`"),
                Clause::LabelMismatch,
            );
        }
    }
    let set = ast_set(&b.formula);
    for (node, g) in set.iter().enumerate().filter(|(_, g)| temporal_core(g)) {
        let Some(block) = b.combined.iter().find(|x| x.node == node) else {
            report.fail(
                format!("combined[{node}] for `{g}`"),
                Clause::MissingEvidence,
            );
            continue;
        };
        let subject = |part: &str| format!("combined[{node}].{part} for `{g}`");
        for (part, m) in [("minimal", &block.minimal), ("natural", &block.natural)] {
            if !is_submodel(m, &b.model) {
                report.fail(subject(part), Clause::NotSubmodel);
            }
        }
        let until_or_globally = matches!(g.operator(), Some(Operator::EU | Operator::EG));
        if until_or_globally && !is_natural(&block.natural, g) {
            report.fail(subject("natural"), Clause::NotNatural);
        }
        let expect =
            naturalize(&block.minimal, &core, g).and_then(|m| Ok(m.with_context(set.clone())?));
        if expect.as_ref().ok() != Some(&block.natural) {
            report.fail(subject("natural"), Clause::Inconsistent);
        }
        for (part, m, stored) in [
            (
                "localClosure.minimal",
                &block.minimal,
                &block.closure_minimal,
            ),
            (
                "localClosure.natural",
                &block.natural,
                &block.closure_natural,
            ),
        ] {
            if closure_labels(m, &core, g).ok().as_ref() != Some(stored) {
                report.fail(subject(part), Clause::Inconsistent);
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::check;
    use crate::model::fixtures::*;
    use crate::proof::build_proof;

    fn f(t: &str) -> Formula {
        parse_formula(t).unwrap()
    }

    fn bundle(m: &Model, t: &str) -> EvidenceBundle {
        let g = f(t);
        let p = build_proof(&check(m, &g).unwrap()).unwrap();
        EvidenceBundle::from_proof(&p, &g, Provenance::new().with_input("model.json", b"{}"))
            .unwrap()
    }

    #[test]
    fn round_trip_on_chain() {
        let b = bundle(&chain(), "E[p U q]");
        let text = b.to_json();
        let back = import_bundle(&text).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.to_json(), text);
        assert!(validate_bundle(&back).is_ok());
        let p = build_proof(&check(&chain(), &f("E[p U q]")).unwrap()).unwrap();
        assert_eq!(back.proof().unwrap(), p);
    }

    #[test]
    fn two_temporal_blocks_for_eg_ef() {
        let b = bundle(&chain(), "EG (!q && EF q)");
        let kinds: Vec<Option<Operator>> =
            b.combined.iter().map(|x| x.formula.operator()).collect();
        assert_eq!(kinds, [Some(Operator::EU), Some(Operator::EG)]);
        assert!(validate_bundle(&import_bundle(&b.to_json()).unwrap()).is_ok());
        let ef = &b.nodes[b.node_id(&f("EF q"))];
        assert_eq!(ef.op, "EF");
        assert_eq!(b.nodes[ef.core].formula, "E[true U q]");
    }

    #[test]
    fn provenance_hash() {
        let p = Provenance::new().with_input("x", b"abc");
        assert_eq!(
            p.inputs["x"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn unknown_state_is_rejected() {
        let text = bundle(&chain(), "EX q").to_json();
        let tampered = text.replacen("\"id\": \"c\"", "\"id\": \"zz\"", 1);
        assert_ne!(tampered, text);
        assert!(matches!(
            import_bundle(&tampered),
            Err(BundleError::Model { .. } | BundleError::Dangling { .. })
        ));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["combined"][0]["minimal"]["states"][0]["id"] = "zz".into();
        let err = import_bundle(&v.to_string()).unwrap_err();
        assert!(
            matches!(err, BundleError::Dangling { kind: "state", .. }),
            "{err}"
        );
    }

    #[test]
    fn version_and_ast_are_checked() {
        let text = bundle(&chain(), "EX q").to_json();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["version"] = "ctl-evidence/0".into();
        assert!(matches!(
            import_bundle(&v.to_string()),
            Err(BundleError::Version(_))
        ));
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["ast"]["nodes"][0]["children"] = serde_json::json!([99]);
        assert!(matches!(
            import_bundle(&v.to_string()),
            Err(BundleError::Dangling { .. })
        ));
    }

    #[test]
    fn corrupted_block_fails_validation() {
        let text = bundle(&chain(), "E[p U q]").to_json();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["combined"][0]["minimal"]["transitions"] = serde_json::json!([]);
        let b = import_bundle(&v.to_string()).unwrap();
        let report = validate_bundle(&b);
        assert!(report
            .failures
            .iter()
            .any(|x| x.clause == Clause::ConditionFails));
        assert!(report
            .failures
            .iter()
            .any(|x| x.clause == Clause::Inconsistent));
    }
}
