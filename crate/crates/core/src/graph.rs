//! Directed temporal graphs produced by Granger screening and PCMCI+.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Lagged,
    Contemporaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Granger,
    Pcmci,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub lag: usize,
    /// Partial correlation (PCMCI+) or the largest-magnitude lag coefficient (Granger).
    pub strength: f64,
    pub p_value: f64,
    pub kind: EdgeKind,
    pub provenance: Provenance,
}

/// A contemporaneous adjacency whose orientation could not be settled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conflict {
    pub a: String,
    pub b: String,
    pub strength: f64,
    pub p_value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
    #[serde(default)]
    pub conflicts: Vec<Conflict>,
}

impl CausalGraph {
    pub fn new(nodes: Vec<String>) -> Self {
        CausalGraph {
            nodes,
            edges: Vec::new(),
            conflicts: Vec::new(),
        }
    }

    /// Adds an edge, enforcing node membership, no contemporaneous
    /// self-loops and uniqueness per `(source, target, lag)`.
    pub fn add_edge(&mut self, edge: Edge) -> Result<()> {
        for n in [&edge.source, &edge.target] {
            if !self.nodes.contains(n) {
                return Err(Error::InvalidParameter(format!("edge endpoint `{n}` is not a node")));
            }
        }
        if edge.lag == 0 && edge.source == edge.target {
            return Err(Error::InvalidParameter(format!(
                "contemporaneous self-edge on `{}`",
                edge.source
            )));
        }
        let kind_ok = (edge.lag == 0) == (edge.kind == EdgeKind::Contemporaneous);
        if !kind_ok {
            return Err(Error::InvalidParameter("edge kind does not match its lag".into()));
        }
        if self
            .edges
            .iter()
            .any(|e| e.source == edge.source && e.target == edge.target && e.lag == edge.lag)
        {
            return Err(Error::InvalidParameter(format!(
                "duplicate edge {} -> {} at lag {}",
                edge.source, edge.target, edge.lag
            )));
        }
        self.edges.push(edge);
        Ok(())
    }

    /// Distinct ordered `(source, target)` pairs, lags collapsed.
    pub fn directed_pairs(&self) -> BTreeSet<(String, String)> {
        self.edges
            .iter()
            .map(|e| (e.source.clone(), e.target.clone()))
            .collect()
    }

    /// Distinct cross-variable pairs over `k(k − 1)`.
    pub fn density(&self) -> f64 {
        let k = self.nodes.len();
        if k < 2 {
            return 0.0;
        }
        let cross = self.directed_pairs().iter().filter(|(s, t)| s != t).count();
        cross as f64 / (k * (k - 1)) as f64
    }

    pub fn has_edge(&self, source: &str, target: &str, lag: usize) -> bool {
        self.edges
            .iter()
            .any(|e| e.source == source && e.target == target && e.lag == lag)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: CausalGraph = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("graph JSON: {e}")))?;
        let mut checked = CausalGraph::new(g.nodes.clone());
        for e in g.edges {
            checked.add_edge(e)?;
        }
        checked.conflicts = g.conflicts;
        Ok(checked)
    }

    /// Graphviz text; lag and strength are carried as edge labels.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph causal {\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  \"{n}\";");
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Lagged => "solid",
                EdgeKind::Contemporaneous => "bold",
            };
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [label=\"lag={} r={:.3} p={:.3e}\", style={style}];",
                e.source, e.target, e.lag, e.strength, e.p_value
            );
        }
        for c in &self.conflicts {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [dir=none, style=dashed, label=\"unresolved r={:.3}\"];",
                c.a, c.b, c.strength
            );
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(s: &str, t: &str, lag: usize) -> Edge {
        Edge {
            source: s.into(),
            target: t.into(),
            lag,
            strength: 0.5,
            p_value: 0.01,
            kind: if lag == 0 { EdgeKind::Contemporaneous } else { EdgeKind::Lagged },
            provenance: Provenance::Pcmci,
        }
    }

    #[test]
    fn invariants_enforced() {
        let mut g = CausalGraph::new(vec!["a".into(), "b".into()]);
        g.add_edge(edge("a", "b", 1)).unwrap();
        g.add_edge(edge("a", "b", 2)).unwrap();
        g.add_edge(edge("a", "a", 1)).unwrap();
        assert!(g.add_edge(edge("a", "b", 1)).is_err());
        assert!(g.add_edge(edge("b", "b", 0)).is_err());
        assert!(g.add_edge(edge("a", "c", 1)).is_err());
        assert_eq!(g.directed_pairs().len(), 2);
        assert_eq!(g.density(), 0.5);
    }

    #[test]
    fn json_round_trip_and_dot() {
        let mut g = CausalGraph::new(vec!["a".into(), "b".into()]);
        g.add_edge(edge("a", "b", 0)).unwrap();
        let back = CausalGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        assert!(g.to_dot().contains("\"a\" -> \"b\""));
    }
}
