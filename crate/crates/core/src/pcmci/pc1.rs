//! Lagged parent preselection.

use serde::{Deserialize, Serialize};

use super::parcorr::node_test;
use super::samples::{LaggedData, Node};
use super::PcmciConfig;
use crate::error::{Error, Result};
use crate::num::Scalar;

/// A lagged parent that survived preselection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParentLink {
    pub node: Node,
    /// Smallest |partial correlation| seen across the tests of this candidate.
    pub min_abs_stat: f64,
    /// Largest p-value seen across the tests of this candidate.
    pub max_p_value: f64,
}

/// Iterative conditional-independence pruning of the lagged candidates
/// `{(v, τ) : τ = 1..=tau_max}` of `target`.
///
/// Pass `q` tests each candidate conditioning on the `q` strongest other
/// candidates; candidates with `p > alpha_pc` are dropped at the end of the
/// pass and the rest re-ranked by their weakest association. Passes continue
/// until `q` reaches the number of remaining candidates or `max_conds`.
pub fn pc1_parents<T: Scalar>(data: &LaggedData<T>, target: usize, config: &PcmciConfig) -> Result<Vec<ParentLink>> {
    let k = data.k();
    if target >= k {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    let alpha = config.alpha_pc();
    let y = Node::new(target, 0);
    let mut parents: Vec<ParentLink> = (0..k)
        .flat_map(|v| (1..=config.tau_max).map(move |l| Node::new(v, l)))
        .map(|node| ParentLink {
            node,
            min_abs_stat: f64::INFINITY,
            max_p_value: 0.0,
        })
        .collect();
    let mut q = 0;
    while !parents.is_empty() && q < parents.len() && q <= config.max_conds {
        let snapshot: Vec<Node> = parents.iter().map(|p| p.node).collect();
        let mut keep = vec![true; parents.len()];
        for (idx, link) in parents.iter_mut().enumerate() {
            let cond: Vec<Node> = snapshot.iter().copied().filter(|n| *n != link.node).take(q).collect();
            let res = match node_test(data, link.node, y, &cond) {
                Ok(r) => r,
                Err(Error::DegenerateAfterConditioning) => {
                    keep[idx] = false;
                    continue;
                }
                Err(e) => return Err(e),
            };
            link.min_abs_stat = link.min_abs_stat.min(res.statistic.abs());
            link.max_p_value = link.max_p_value.max(res.p_value);
            if res.p_value > alpha {
                keep[idx] = false;
            }
        }
        let mut it = keep.iter();
        parents.retain(|_| *it.next().unwrap());
        parents.sort_by(|a, b| b.min_abs_stat.total_cmp(&a.min_abs_stat));
        q += 1;
    }
    Ok(parents)
}
