//! Hand-editable cluster files.
//!
//! One directive per line: `case <id>`, `edge <id> <id>`, `order <id> <int>`,
//! `source <id>`. Blank lines and text after `#` are ignored. Case ids are
//! any whitespace-free strings; ids become dense node ids in declaration
//! order.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::epidemic::EpidemicNetwork;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::support::Support;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub cases: Vec<String>,
    pub edges: Vec<(String, String)>,
    /// Infection order annotations.
    pub order: BTreeMap<String, u64>,
    pub source: Option<String>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

impl ClusterRecord {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rec = ClusterRecord::default();
        let mut declared: HashMap<String, usize> = HashMap::new();
        // references are checked once every case is declared
        let mut refs: Vec<(usize, String)> = Vec::new();
        let mut source_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = content.split_whitespace().collect();
            let Some((&head, args)) = words.split_first() else {
                continue;
            };
            let want = |k: usize| {
                if args.len() == k {
                    Ok(())
                } else {
                    Err(parse_err(line, format!("`{head}` takes {k} argument(s), found {}", args.len())))
                }
            };
            match head {
                "case" => {
                    want(1)?;
                    if declared.insert(args[0].to_string(), line).is_some() {
                        return Err(parse_err(line, format!("case {} declared twice", args[0])));
                    }
                    rec.cases.push(args[0].to_string());
                }
                "edge" => {
                    want(2)?;
                    if args[0] == args[1] {
                        return Err(parse_err(line, format!("self contact on {}", args[0])));
                    }
                    refs.push((line, args[0].to_string()));
                    refs.push((line, args[1].to_string()));
                    rec.edges.push((args[0].to_string(), args[1].to_string()));
                }
                "order" => {
                    want(2)?;
                    let k: u64 = args[1]
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad order value {:?}", args[1])))?;
                    refs.push((line, args[0].to_string()));
                    if rec.order.insert(args[0].to_string(), k).is_some() {
                        return Err(parse_err(line, format!("second order for {}", args[0])));
                    }
                }
                "source" => {
                    want(1)?;
                    if rec.source.is_some() {
                        return Err(parse_err(
                            line,
                            format!("duplicate source marker (first on line {source_line})"),
                        ));
                    }
                    source_line = line;
                    refs.push((line, args[0].to_string()));
                    rec.source = Some(args[0].to_string());
                }
                other => return Err(parse_err(line, format!("unknown directive `{other}`"))),
            }
        }
        if let Some((line, id)) = refs.iter().find(|(_, id)| !declared.contains_key(id)) {
            return Err(parse_err(*line, format!("reference to undeclared case {id}")));
        }
        if rec.cases.is_empty() {
            return Err(Error::EmptyRecord);
        }
        Ok(rec)
    }

    /// Canonical text: cases, then edges, then orders, then the source.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&format!("case {c}\n"));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!("edge {a} {b}\n"));
        }
        for (c, k) in &self.order {
            out.push_str(&format!("order {c} {k}\n"));
        }
        if let Some(s) = &self.source {
            out.push_str(&format!("source {s}\n"));
        }
        out
    }

    pub fn index_of(&self, id: &str) -> Option<NodeId> {
        self.cases.iter().position(|c| c == id).map(NodeId::new)
    }

    /// Contact graph on the cases (node `i` is `cases[i]`).
    pub fn graph(&self) -> Result<Graph> {
        let idx: HashMap<&str, u32> = self
            .cases
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u32))
            .collect();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (a, b) in &self.edges {
            match (idx.get(a.as_str()), idx.get(b.as_str())) {
                (Some(&u), Some(&v)) => edges.push((u, v)),
                _ => return Err(Error::Corrupt(format!("edge {a} {b} names an undeclared case"))),
            }
        }
        Graph::with_node_count(self.cases.len(), &edges)
    }

    /// The record as a fully observed support.
    pub fn support(&self) -> Result<Support> {
        Ok(Support::bare(self.graph()?))
    }

    pub fn source_node(&self) -> Option<NodeId> {
        self.source.as_deref().and_then(|s| self.index_of(s))
    }

    /// Epidemic network ordered by the `order` annotations, which must
    /// cover every case.
    pub fn epidemic(&self) -> Result<EpidemicNetwork> {
        let g = self.graph()?;
        let mut ranked: Vec<(u64, NodeId)> = Vec::with_capacity(self.cases.len());
        for (i, c) in self.cases.iter().enumerate() {
            let k = self
                .order
                .get(c)
                .ok_or_else(|| Error::InvalidConfig(format!("case {c} has no infection order")))?;
            ranked.push((*k, NodeId::new(i)));
        }
        ranked.sort();
        EpidemicNetwork::from_order(Arc::new(g), ranked.into_iter().map(|(_, v)| v).collect())
    }
}

pub fn read_cluster(path: impl AsRef<Path>) -> Result<ClusterRecord> {
    ClusterRecord::parse(&std::fs::read_to_string(super::resolve(path.as_ref()))?)
}

pub fn write_cluster(path: impl AsRef<Path>, rec: &ClusterRecord) -> Result<()> {
    std::fs::write(path, rec.render())?;
    Ok(())
}

/// Synthetic 19-case tree-shaped cluster.
pub fn fixture_19() -> ClusterRecord {
    ClusterRecord::parse(include_str!("fixtures/tree19.cluster")).expect("bundled fixture parses")
}

/// Synthetic 23-case cluster with a few cycles.
pub fn fixture_23() -> ClusterRecord {
    ClusterRecord::parse(include_str!("fixtures/mesh23.cluster")).expect("bundled fixture parses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_render() {
        let text = "# a tiny cluster\ncase a\ncase b\ncase c\nedge a b  # first contact\nedge b c\norder a 1\norder b 2\norder c 3\nsource a\n";
        let rec = ClusterRecord::parse(text).unwrap();
        assert_eq!(rec.cases, ["a", "b", "c"]);
        assert_eq!(rec.source_node(), Some(NodeId(0)));
        assert_eq!(ClusterRecord::parse(&rec.render()).unwrap(), rec);
        let e = rec.epidemic().unwrap();
        assert_eq!(e.source(), NodeId(0));
        assert_eq!(rec.graph().unwrap().edge_count(), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let line_of = |t: &str| match ClusterRecord::parse(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of("case a\nedge a z\n"), 2);
        assert_eq!(line_of("case a\ncase b\nsource a\n\nsource b\n"), 5);
        assert_eq!(line_of("case a\ncase a\n"), 2);
        assert_eq!(line_of("case a\nfoo a\n"), 2);
        assert_eq!(line_of("case a\norder a x\n"), 2);
        assert!(matches!(ClusterRecord::parse(""), Err(Error::EmptyRecord)));
        assert!(matches!(ClusterRecord::parse("# only a comment\n"), Err(Error::EmptyRecord)));
    }

    #[test]
    fn fixtures_have_expected_scale() {
        let t = fixture_19();
        assert_eq!(t.cases.len(), 19);
        assert!(t.graph().unwrap().is_tree());
        let m = fixture_23();
        assert_eq!(m.cases.len(), 23);
        let g = m.graph().unwrap();
        assert!(g.is_connected() && !g.is_tree());
        for rec in [t, m] {
            assert!(rec.source.is_some());
            let e = rec.epidemic().unwrap();
            assert_eq!(Some(e.source()), rec.source_node());
        }
    }
}
