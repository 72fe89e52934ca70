//! Degree centrality and node roles on a directed summary graph.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::graph::CausalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Driver,
    Mediator,
    Enabler,
    Outcome,
    Neutral,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// How out-degree must compare with in-degree for a rule to match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeOrder {
    OutGreater,
    InGreater,
    Equal,
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleRule {
    pub role: Role,
    pub order: DegreeOrder,
    pub min_out: usize,
    pub min_in: usize,
}

impl RoleRule {
    fn matches(&self, in_degree: usize, out_degree: usize) -> bool {
        let order = match self.order {
            DegreeOrder::OutGreater => out_degree > in_degree,
            DegreeOrder::InGreater => in_degree > out_degree,
            DegreeOrder::Equal => in_degree == out_degree,
            DegreeOrder::Any => true,
        };
        order && out_degree >= self.min_out && in_degree >= self.min_in
    }
}

/// Ordered rule list; the first match wins and nodes matching none are
/// [`Role::Neutral`].
///
/// Default table:
///
/// | role     | order   | out | in |
/// |----------|---------|-----|----|
/// | Driver   | out>in  | ≥3  |    |
/// | Mediator | any     | ≥2  | ≥2 |
/// | Outcome  | in>out  |     |    |
/// | Enabler  | out>in  | ≥1  |    |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleRules(pub Vec<RoleRule>);

impl Default for RoleRules {
    fn default() -> Self {
        let rule = |role, order, min_out, min_in| RoleRule {
            role,
            order,
            min_out,
            min_in,
        };
        RoleRules(vec![
            rule(Role::Driver, DegreeOrder::OutGreater, 3, 0),
            rule(Role::Mediator, DegreeOrder::Any, 2, 2),
            rule(Role::Outcome, DegreeOrder::InGreater, 0, 0),
            rule(Role::Enabler, DegreeOrder::OutGreater, 1, 0),
        ])
    }
}

impl RoleRules {
    pub fn classify(&self, in_degree: usize, out_degree: usize) -> Role {
        self.0
            .iter()
            .find(|r| r.matches(in_degree, out_degree))
            .map(|r| r.role)
            .unwrap_or(Role::Neutral)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCentrality {
    pub node: String,
    pub in_degree: usize,
    pub out_degree: usize,
    pub total: usize,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityTable {
    /// In graph node order.
    pub rows: Vec<NodeCentrality>,
    /// Distinct cross-variable directed pairs.
    pub edge_count: usize,
}

impl CentralityTable {
    pub fn get(&self, node: &str) -> Option<&NodeCentrality> {
        self.rows.iter().find(|r| r.node == node)
    }

    /// Rows by descending total degree, then out-degree, then name.
    pub fn ranked(&self) -> Vec<&NodeCentrality> {
        let mut rows: Vec<&NodeCentrality> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            b.total
                .cmp(&a.total)
                .then(b.out_degree.cmp(&a.out_degree))
                .then(a.node.cmp(&b.node))
        });
        rows
    }
}

pub fn centrality(graph: &CausalGraph) -> CentralityTable {
    centrality_with(graph, &RoleRules::default())
}

/// Degrees over distinct `(source, target)` pairs with lags collapsed;
/// self-loops (own lags) are not counted.
pub fn centrality_with(graph: &CausalGraph, rules: &RoleRules) -> CentralityTable {
    let mut degrees: BTreeMap<&str, (usize, usize)> = graph.nodes.iter().map(|n| (n.as_str(), (0, 0))).collect();
    let pairs: Vec<(String, String)> = graph.directed_pairs().into_iter().filter(|(s, t)| s != t).collect();
    for (s, t) in &pairs {
        if let Some(d) = degrees.get_mut(s.as_str()) {
            d.1 += 1;
        }
        if let Some(d) = degrees.get_mut(t.as_str()) {
            d.0 += 1;
        }
    }
    let rows = graph
        .nodes
        .iter()
        .map(|n| {
            let (in_degree, out_degree) = degrees[n.as_str()];
            NodeCentrality {
                node: n.clone(),
                in_degree,
                out_degree,
                total: in_degree + out_degree,
                role: rules.classify(in_degree, out_degree),
            }
        })
        .collect();
    CentralityTable {
        rows,
        edge_count: pairs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, EdgeKind, Provenance};
    use proptest::prelude::*;

    fn graph(nodes: &[&str], edges: &[(&str, &str, usize)]) -> CausalGraph {
        let mut g = CausalGraph::new(nodes.iter().map(|s| s.to_string()).collect());
        for &(s, t, lag) in edges {
            g.add_edge(Edge {
                source: s.into(),
                target: t.into(),
                lag,
                strength: 0.1,
                p_value: 0.01,
                kind: if lag == 0 { EdgeKind::Contemporaneous } else { EdgeKind::Lagged },
                provenance: Provenance::Granger,
            })
            .unwrap();
        }
        g
    }

    #[test]
    fn empty_graph_is_all_neutral() {
        let t = centrality(&graph(&["a", "b", "c"], &[]));
        assert!(t.rows.iter().all(|r| r.total == 0 && r.role == Role::Neutral));
        assert_eq!(t.edge_count, 0);
    }

    #[test]
    fn star_graph() {
        let t = centrality(&graph(&["h", "a", "b", "c"], &[("h", "a", 1), ("h", "b", 1), ("h", "c", 2)]));
        assert_eq!(t.get("h").unwrap().out_degree, 3);
        assert_eq!(t.get("h").unwrap().role, Role::Driver);
        for n in ["a", "b", "c"] {
            assert_eq!(t.get(n).unwrap().in_degree, 1);
            assert_eq!(t.get(n).unwrap().role, Role::Outcome);
        }
    }

    #[test]
    fn lags_collapse_and_self_loops_are_ignored() {
        let t = centrality(&graph(&["a", "b"], &[("a", "b", 1), ("a", "b", 3), ("a", "a", 1)]));
        assert_eq!(t.get("a").unwrap().out_degree, 1);
        assert_eq!(t.get("a").unwrap().in_degree, 0);
        assert_eq!(t.edge_count, 1);
    }

    #[test]
    fn custom_rules_apply_in_order() {
        let rules = RoleRules(vec![RoleRule {
            role: Role::Driver,
            order: DegreeOrder::Any,
            min_out: 1,
            min_in: 0,
        }]);
        let t = centrality_with(&graph(&["a", "b"], &[("a", "b", 1)]), &rules);
        assert_eq!(t.get("a").unwrap().role, Role::Driver);
        assert_eq!(t.get("b").unwrap().role, Role::Neutral);
    }

    proptest! {
        #[test]
        fn degree_sums_equal_edge_count(edges in proptest::collection::vec((0usize..6, 0usize..6, 1usize..4), 0..30)) {
            let names = ["a", "b", "c", "d", "e", "f"];
            let mut g = CausalGraph::new(names.iter().map(|s| s.to_string()).collect());
            for (s, t, lag) in edges {
                let _ = g.add_edge(Edge {
                    source: names[s].into(),
                    target: names[t].into(),
                    lag,
                    strength: 0.0,
                    p_value: 0.0,
                    kind: EdgeKind::Lagged,
                    provenance: Provenance::Pcmci,
                });
            }
            let t = centrality(&g);
            let ins: usize = t.rows.iter().map(|r| r.in_degree).sum();
            let outs: usize = t.rows.iter().map(|r| r.out_degree).sum();
            prop_assert_eq!(ins, t.edge_count);
            prop_assert_eq!(outs, t.edge_count);
        }
    }
}
