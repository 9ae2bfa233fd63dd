//! Graphviz output. Each state is drawn as a box holding the formula's
//! syntax tree, one row per node with the root in the top-left corner and
//! the first child of a node lowest. Cells are green where the node is
//! labelled tt, red where ff, grey where unlabelled. Open states have
//! dotted borders.

use std::fmt::Write;

use thiserror::Error;

use crate::formula::Formula;
use crate::model::{is_submodel, Model};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("the highlighted model is not a submodel of the drawn one")]
    NotSubmodel,
}

const TT: &str = "palegreen";
const FF: &str = "lightcoral";
const UNDEFINED: &str = "lightgrey";
const HIGHLIGHT: &str = "lightblue";

/// Draws `m` with the tree of `f` in every state. With a highlight, its
/// states are tinted blue, cells show only its labels, and everything
/// outside it is greyed out.
pub fn export_dot(m: &Model, highlight: Option<&Model>, f: &Formula) -> Result<String, DotError> {
    if highlight.is_some_and(|h| !is_submodel(h, m)) {
        return Err(DotError::NotSubmodel);
    }
    let mut rows = Vec::new();
    layout(f, 0, &mut rows);
    let width = rows.iter().map(|(d, _)| d + 1).max().unwrap_or(1);

    let mut out = String::from("digraph model {\n");
    out.push_str("  node [shape=box, fontname=\"Helvetica\", margin=0.05];\n");
    out.push_str("  edge [arrowsize=0.7];\n");
    for s in m.states() {
        let inside = highlight.map(|h| h.contains_state(s));
        let labels = highlight.unwrap_or(m);
        let mut style = vec![if m.is_closed(s) { "solid" } else { "dotted" }];
        let mut attrs = String::new();
        match inside {
            Some(true) => {
                style.push("filled");
                write!(attrs, ", fillcolor=\"{HIGHLIGHT}\"").unwrap();
            }
            Some(false) => attrs.push_str(", color=\"grey\", fontcolor=\"grey\""),
            None => {}
        }
        let mut table = String::from(
            "<table border=\"0\" cellborder=\"1\" cellspacing=\"0\" cellpadding=\"2\">",
        );
        write!(
            table,
            "<tr><td colspan=\"{width}\" border=\"0\"><b>{}</b></td></tr>",
            html(s)
        )
        .unwrap();
        for (depth, g) in &rows {
            table.push_str("<tr>");
            for _ in 0..*depth {
                table.push_str("<td border=\"0\"></td>");
            }
            let colour = match labels
                .contains_state(s)
                .then(|| labels.label(s, g))
                .flatten()
            {
                Some(true) => TT,
                Some(false) => FF,
                None => UNDEFINED,
            };
            let text = html(
                &g.operator()
                    .map_or_else(|| g.to_string(), |op| op.name().to_string()),
            );
            write!(
                table,
                "<td colspan=\"{}\" bgcolor=\"{colour}\" title=\"{}\">{text}</td></tr>",
                width - depth,
                html(&g.to_string()),
            )
            .unwrap();
        }
        table.push_str("</table>");
        writeln!(
            out,
            "  {} [style=\"{}\"{attrs}, label=<{table}>];",
            quote(s),
            style.join(",")
        )
        .unwrap();
    }
    for (a, b) in m.transitions() {
        let attrs = match highlight {
            Some(h) if h.has_transition(a, b) => " [color=\"blue\", penwidth=2]",
            Some(_) => " [color=\"grey\"]",
            None => "",
        };
        writeln!(out, "  {} -> {}{attrs};", quote(a), quote(b)).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// Root first, then the children from last to first.
fn layout<'a>(f: &'a Formula, depth: usize, rows: &mut Vec<(usize, &'a Formula)>) {
    rows.push((depth, f));
    for c in f.children().iter().rev() {
        layout(c, depth + 1, rows);
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn html(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
