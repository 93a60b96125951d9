//! Graphviz export with optional estimate annotations.

use std::fmt::Write;

use crate::graph::{Graph, NodeId};

#[derive(Debug, Clone, Default)]
pub struct DotOptions {
    /// Display names by node id.
    pub names: Option<Vec<String>>,
    /// A score per node, printed under its name.
    pub scores: Option<Vec<f64>>,
    /// Drawn as a double circle.
    pub estimate: Option<NodeId>,
    /// Drawn filled.
    pub source: Option<NodeId>,
    /// Nodes drawn dashed (e.g. untraced).
    pub faded: Vec<NodeId>,
}

pub fn to_dot(g: &Graph, opts: &DotOptions) -> String {
    let mut out = String::from("graph G {\n  node [shape=circle];\n");
    for v in g.nodes() {
        let name = opts
            .names
            .as_ref()
            .and_then(|n| n.get(v.index()).cloned())
            .unwrap_or_else(|| v.to_string());
        let mut label = name.replace('"', "\\\"");
        if let Some(s) = opts.scores.as_ref().and_then(|s| s.get(v.index())).filter(|s| s.is_finite()) {
            let _ = write!(label, "\\n{s:.3}");
        }
        let mut attrs = vec![format!("label=\"{label}\"")];
        if opts.estimate == Some(v) {
            attrs.push("shape=doublecircle".into());
        }
        if opts.source == Some(v) {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=lightgray".into());
        } else if opts.faded.contains(&v) {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  {} [{}];", v.0, attrs.join(", "));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  {} -- {};", u.0, v.0);
    }
    out.push_str("}\n");
    out
}
