//! Momentary-conditional-independence skeleton and contemporaneous orientation.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::parcorr::{node_test, CiTestResult};
use super::pc1::ParentLink;
use super::samples::{LaggedData, Node};
use super::PcmciConfig;
use crate::error::{Error, Result};
use crate::graph::{CausalGraph, Conflict, Edge, EdgeKind, Provenance};
use crate::num::Scalar;

/// A link kept by the skeleton phase, with the test that came closest to
/// removing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MciLink {
    pub source: Node,
    pub target: usize,
    pub statistic: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleVote {
    Collider,
    NonCollider,
    Ambiguous,
}

/// Unshielded triple `source → middle -- target` and its majority vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triple {
    pub source: Node,
    pub middle: usize,
    pub target: usize,
    pub separating_sets: usize,
    pub containing_middle: usize,
    pub vote: TripleVote,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MciOutcome {
    pub graph: CausalGraph,
    pub links: Vec<MciLink>,
    pub triples: Vec<Triple>,
    pub tests_run: usize,
}

#[derive(Debug, Clone, Copy)]
struct Stat {
    statistic: f64,
    p_value: f64,
}

impl Stat {
    fn unset() -> Self {
        Stat {
            statistic: 0.0,
            p_value: -1.0,
        }
    }

    fn absorb(&mut self, r: &CiTestResult) {
        if r.p_value > self.p_value {
            self.p_value = r.p_value;
            self.statistic = r.statistic;
        }
    }
}

/// Link under test: `source` at its lag into `target` at lag 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    source: Node,
    target: usize,
}

fn test_or_independent<T: Scalar>(data: &LaggedData<T>, x: Node, y: Node, cond: &[Node]) -> Result<CiTestResult> {
    match node_test(data, x, y, cond) {
        Err(Error::DegenerateAfterConditioning) => {
            log::warn!("degenerate CI test {x:?} vs {y:?}; treated as independent");
            Ok(CiTestResult {
                statistic: 0.0,
                p_value: 1.0,
                conditioning_set: cond.to_vec(),
                sample_size: data.n_samples(),
                dof: 0,
            })
        }
        other => other,
    }
}

/// Subsets of `pool` of exactly `size`, in lexicographic order, at most `cap`.
fn subsets(pool: &[usize], size: usize, cap: usize) -> Vec<Vec<usize>> {
    let n = pool.len();
    let mut out = Vec::new();
    if size > n || cap == 0 {
        return out;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        out.push(idx.iter().map(|&i| pool[i]).collect());
        if out.len() >= cap {
            break;
        }
        let Some(i) = (0..size).rev().find(|&i| idx[i] < n - size + i) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

struct Skeleton<'a, T: Scalar> {
    data: &'a LaggedData<T>,
    parents: Vec<Vec<Node>>,
}

impl<'a, T: Scalar> Skeleton<'a, T> {
    /// Conditioning set for `x → y`: parents of `y` without `x`, parents of
    /// `x` shifted to its lag, and the contemporaneous extras.
    fn condition(&self, x: Node, y: usize, extra: &[usize]) -> Vec<Node> {
        let mut set: BTreeSet<Node> = self.parents[y].iter().copied().filter(|n| *n != x).collect();
        set.extend(
            self.parents[x.var]
                .iter()
                .map(|n| n.shifted(x.lag))
                .filter(|n| n.lag <= self.data.max_lag),
        );
        set.extend(extra.iter().map(|&v| Node::new(v, 0)));
        set.remove(&x);
        set.remove(&Node::new(y, 0));
        set.into_iter().collect()
    }

    /// Pools of contemporaneous neighbours usable as extras when testing `key`.
    /// A contemporaneous pair is tested from both ends.
    fn pools(&self, key: Key, adj: &[BTreeSet<usize>]) -> Vec<(Node, usize, Vec<usize>)> {
        let x = key.source;
        let y = key.target;
        let own: Vec<usize> = adj[y].iter().copied().filter(|&v| !(x.lag == 0 && v == x.var)).collect();
        let mut out = vec![(x, y, own)];
        if x.lag == 0 {
            let other: Vec<usize> = adj[x.var].iter().copied().filter(|&v| v != y).collect();
            out.push((Node::new(y, 0), x.var, other));
        }
        out
    }
}

/// Runs the skeleton and orientation phases given preselected lagged parents.
pub fn mci_graph<T: Scalar>(data: &LaggedData<T>, parents: &[Vec<ParentLink>], config: &PcmciConfig) -> Result<MciOutcome> {
    let k = data.k();
    if parents.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{} parent lists for {k} variables",
            parents.len()
        )));
    }
    let sk = Skeleton {
        data,
        parents: parents.iter().map(|ps| ps.iter().map(|p| p.node).collect()).collect(),
    };
    let alpha = config.alpha;

    let mut links: BTreeMap<Key, Stat> = BTreeMap::new();
    for (j, ps) in sk.parents.iter().enumerate() {
        for &n in ps {
            links.insert(Key { source: n, target: j }, Stat::unset());
        }
    }
    for a in 0..k {
        for b in a + 1..k {
            links.insert(Key { source: Node::new(a, 0), target: b }, Stat::unset());
        }
    }
    let contemporaneous = |links: &BTreeMap<Key, Stat>| {
        let mut adj = vec![BTreeSet::new(); k];
        for key in links.keys().filter(|key| key.source.lag == 0) {
            adj[key.source.var].insert(key.target);
            adj[key.target].insert(key.source.var);
        }
        adj
    };

    let mut tests_run = 0;
    let mut level = 0;
    loop {
        let adj = contemporaneous(&links);
        let work: Vec<Key> = links
            .keys()
            .copied()
            .filter(|&key| sk.pools(key, &adj).iter().any(|(_, _, pool)| pool.len() >= level))
            .collect();
        if work.is_empty() || level > config.max_conds {
            break;
        }
        let outcomes: Vec<Result<(Key, bool, Vec<CiTestResult>)>> = work
            .par_iter()
            .map(|&key| {
                let mut results = Vec::new();
                for (x, y, pool) in sk.pools(key, &adj) {
                    for extra in subsets(&pool, level, config.max_subsets) {
                        let cond = sk.condition(x, y, &extra);
                        let r = test_or_independent(data, x, Node::new(y, 0), &cond)?;
                        let independent = r.p_value > alpha;
                        results.push(r);
                        if independent {
                            return Ok((key, true, results));
                        }
                    }
                }
                Ok((key, false, results))
            })
            .collect();
        for outcome in outcomes {
            let (key, removed, results) = outcome?;
            tests_run += results.len();
            if removed {
                links.remove(&key);
            } else if let Some(stat) = links.get_mut(&key) {
                for r in &results {
                    stat.absorb(r);
                }
            }
        }
        level += 1;
    }

    let adj = contemporaneous(&links);
    let lagged: Vec<BTreeSet<Node>> = (0..k)
        .map(|j| {
            links
                .keys()
                .filter(|key| key.target == j && key.source.lag > 0)
                .map(|key| key.source)
                .collect()
        })
        .collect();
    let adjacent = |x: Node, j: usize| {
        if x.lag == 0 {
            adj[j].contains(&x.var)
        } else {
            lagged[j].contains(&x)
        }
    };

    // unshielded triples x → m -- j (lagged x) or x -- m -- j (contemporaneous, x < j)
    let mut candidates = Vec::new();
    for m in 0..k {
        for &j in &adj[m] {
            for &x in &lagged[m] {
                if !adjacent(x, j) {
                    candidates.push((x, m, j));
                }
            }
            for &i in &adj[m] {
                if i < j && !adjacent(Node::new(i, 0), j) {
                    candidates.push((Node::new(i, 0), m, j));
                }
            }
        }
    }
    let votes: Vec<Result<(Triple, usize)>> = candidates
        .par_iter()
        .map(|&(x, m, j)| {
            let key = Key { source: x, target: j };
            let mut seps = 0;
            let mut with_m = 0;
            let mut tests = 0;
            for (xx, yy, pool) in sk.pools(key, &adj) {
                let mut budget = config.max_subsets;
                for size in 0..=pool.len().min(config.max_conds) {
                    for extra in subsets(&pool, size, budget) {
                        budget -= 1;
                        let cond = sk.condition(xx, yy, &extra);
                        let r = test_or_independent(data, xx, Node::new(yy, 0), &cond)?;
                        tests += 1;
                        if r.p_value > alpha {
                            seps += 1;
                            if extra.contains(&m) {
                                with_m += 1;
                            }
                        }
                    }
                    if budget == 0 {
                        break;
                    }
                }
            }
            let vote = if seps == 0 || 2 * with_m == seps {
                TripleVote::Ambiguous
            } else if 2 * with_m < seps {
                TripleVote::Collider
            } else {
                TripleVote::NonCollider
            };
            Ok((
                Triple {
                    source: x,
                    middle: m,
                    target: j,
                    separating_sets: seps,
                    containing_middle: with_m,
                    vote,
                },
                tests,
            ))
        })
        .collect();
    let mut triples = Vec::with_capacity(votes.len());
    for v in votes {
        let (t, n) = v?;
        tests_run += n;
        triples.push(t);
    }

    let mut marks = Marks::new(&adj);
    for t in triples.iter().filter(|t| t.vote == TripleVote::Collider) {
        marks.propose(t.target, t.middle);
        if t.source.lag == 0 {
            marks.propose(t.source.var, t.middle);
        }
    }
    marks.settle();
    meek(&mut marks, &triples, &lagged, &adj);

    let names = &data.variables;
    let mut graph = CausalGraph::new(names.clone());
    for (key, stat) in &links {
        let x = key.source;
        if x.lag > 0 {
            graph.add_edge(Edge {
                source: names[x.var].clone(),
                target: names[key.target].clone(),
                lag: x.lag,
                strength: stat.statistic,
                p_value: stat.p_value,
                kind: EdgeKind::Lagged,
                provenance: Provenance::Pcmci,
            })?;
            continue;
        }
        let (a, b) = (x.var, key.target);
        let ambiguous = triples
            .iter()
            .any(|t| t.vote == TripleVote::Ambiguous && t.middle == b && (t.target == a || t.source == x));
        match marks.get(a, b) {
            Mark::Directed(s, t) => graph.add_edge(Edge {
                source: names[s].clone(),
                target: names[t].clone(),
                lag: 0,
                strength: stat.statistic,
                p_value: stat.p_value,
                kind: EdgeKind::Contemporaneous,
                provenance: Provenance::Pcmci,
            })?,
            mark => graph.conflicts.push(Conflict {
                a: names[a].clone(),
                b: names[b].clone(),
                strength: stat.statistic,
                p_value: stat.p_value,
                reason: match mark {
                    Mark::Conflicting => "conflicting collider orientations".into(),
                    _ if ambiguous => "ambiguous collider vote".into(),
                    _ => "orientation not identified".into(),
                },
            }),
        }
    }
    let links = links
        .into_iter()
        .map(|(key, stat)| MciLink {
            source: key.source,
            target: key.target,
            statistic: stat.statistic,
            p_value: stat.p_value,
        })
        .collect();
    Ok(MciOutcome {
        graph,
        links,
        triples,
        tests_run,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mark {
    Undirected,
    Directed(usize, usize),
    Conflicting,
}

struct Marks {
    marks: BTreeMap<(usize, usize), Mark>,
    proposals: BTreeMap<(usize, usize), BTreeSet<(usize, usize)>>,
}

impl Marks {
    fn new(adj: &[BTreeSet<usize>]) -> Self {
        let mut marks = BTreeMap::new();
        for (a, ns) in adj.iter().enumerate() {
            for &b in ns {
                if a < b {
                    marks.insert((a, b), Mark::Undirected);
                }
            }
        }
        Marks {
            marks,
            proposals: BTreeMap::new(),
        }
    }

    fn pair(a: usize, b: usize) -> (usize, usize) {
        (a.min(b), a.max(b))
    }

    fn get(&self, a: usize, b: usize) -> Mark {
        self.marks[&Self::pair(a, b)]
    }

    fn propose(&mut self, from: usize, to: usize) {
        self.proposals.entry(Self::pair(from, to)).or_default().insert((from, to));
    }

    /// Applies collider proposals; opposite proposals on one pair conflict.
    fn settle(&mut self) {
        for (pair, dirs) in std::mem::take(&mut self.proposals) {
            let mark = if dirs.len() > 1 {
                Mark::Conflicting
            } else {
                let (s, t) = *dirs.iter().next().unwrap();
                Mark::Directed(s, t)
            };
            self.marks.insert(pair, mark);
        }
    }

    fn undirected(&self, a: usize, b: usize) -> bool {
        self.marks.get(&Self::pair(a, b)) == Some(&Mark::Undirected)
    }

    fn directed(&self, a: usize, b: usize) -> bool {
        self.marks.get(&Self::pair(a, b)) == Some(&Mark::Directed(a, b))
    }

    fn orient(&mut self, a: usize, b: usize) {
        self.marks.insert(Self::pair(a, b), Mark::Directed(a, b));
    }
}

/// Orientation propagation over undirected contemporaneous pairs.
fn meek(marks: &mut Marks, triples: &[Triple], lagged: &[BTreeSet<Node>], adj: &[BTreeSet<usize>]) {
    let k = adj.len();
    let non_collider = |x: Node, m: usize, j: usize| {
        triples.iter().any(|t| {
            t.vote == TripleVote::NonCollider
                && t.middle == m
                && ((t.source == x && t.target == j) || (x.lag == 0 && t.source == Node::new(j, 0) && t.target == x.var))
        })
    };
    loop {
        let mut changed = false;
        for m in 0..k {
            for j in adj[m].iter().copied().collect::<Vec<_>>() {
                if !marks.undirected(m, j) {
                    continue;
                }
                // R1: x → m -- j with x, j non-adjacent and not a collider at m
                let lag_in = lagged[m]
                    .iter()
                    .any(|&x| !lagged[j].contains(&x) && non_collider(x, m, j));
                let cont_in = adj[m].iter().any(|&i| {
                    i != j && marks.directed(i, m) && !adj[j].contains(&i) && non_collider(Node::new(i, 0), m, j)
                });
                // R2: m → c → j
                let chain = adj[m].iter().any(|&c| marks.directed(m, c) && marks.directed(c, j));
                // R3: m -- c → j and m -- d → j with c, d non-adjacent
                let parents_j: Vec<usize> = adj[m]
                    .iter()
                    .copied()
                    .filter(|&c| c != j && marks.undirected(m, c) && marks.directed(c, j))
                    .collect();
                let kite = parents_j
                    .iter()
                    .enumerate()
                    .any(|(ci, &c)| parents_j[ci + 1..].iter().any(|&d| !adj[c].contains(&d)));
                if lag_in || cont_in || chain || kite {
                    marks.orient(m, j);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerate_in_order() {
        assert_eq!(subsets(&[1, 2, 3], 0, 10), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(&[1, 2, 3], 2, 10), vec![vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(subsets(&[1, 2, 3], 3, 10), vec![vec![1, 2, 3]]);
        assert!(subsets(&[1, 2], 3, 10).is_empty());
        assert_eq!(subsets(&[1, 2, 3, 4], 2, 2).len(), 2);
        assert_eq!(subsets(&[0, 1, 2, 3, 4], 2, 100).len(), 10);
    }
}
