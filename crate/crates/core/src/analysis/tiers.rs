//! Three-tier ranking from degree pattern and direct-effect confirmation.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::centrality::CentralityTable;
use crate::graph::CausalGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tier {
    T1,
    T2,
    T3,
}

impl Tier {
    pub fn description(&self) -> &'static str {
        match self {
            Tier::T1 => "driver",
            Tier::T2 => "enabler",
            Tier::T3 => "outcome",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierRow {
    pub node: String,
    pub tier: Tier,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierAssignment {
    pub rows: Vec<TierRow>,
}

impl TierAssignment {
    pub fn members(&self, tier: Tier) -> Vec<&str> {
        self.rows.iter().filter(|r| r.tier == tier).map(|r| r.node.as_str()).collect()
    }

    pub fn tier_of(&self, node: &str) -> Option<Tier> {
        self.rows.iter().find(|r| r.node == node).map(|r| r.tier)
    }
}

/// T1: out-degree ≥ 2 with a confirmed direct effect. T3: in-degree ≥
/// out-degree and out-degree ≤ 1. T2: everything else. Nodes missing from
/// `directness` count as not direct.
pub fn tier_classify(table: &CentralityTable, directness: &BTreeMap<String, bool>) -> TierAssignment {
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let direct = directness.get(&r.node).copied().unwrap_or(false);
            let tier = if r.out_degree >= 2 && direct {
                Tier::T1
            } else if r.in_degree >= r.out_degree && r.out_degree <= 1 {
                Tier::T3
            } else {
                Tier::T2
            };
            TierRow {
                node: r.node.clone(),
                tier,
                rationale: format!(
                    "out={} in={} {}",
                    r.out_degree,
                    r.in_degree,
                    if direct { "direct" } else { "indirect" }
                ),
            }
        })
        .collect();
    TierAssignment { rows }
}

/// A node is direct when it is the source of at least one cross-variable
/// edge in `graph` (typically the PCMCI+ graph).
pub fn directness_from_graph(graph: &CausalGraph) -> BTreeMap<String, bool> {
    let mut out: BTreeMap<String, bool> = graph.nodes.iter().map(|n| (n.clone(), false)).collect();
    for e in graph.edges.iter().filter(|e| e.source != e.target) {
        out.insert(e.source.clone(), true);
    }
    out
}
