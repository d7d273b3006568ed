//! Layer decomposition of relay networks.
//!
//! A network is layered when every node can be given a level such that each
//! edge climbs exactly one level (an unbounded link climbs `delay` levels).
//! For nodes reachable from the source the level is the hop distance. Nodes
//! outside the source's weakly connected component are levelled within their
//! own component, anchored at their lowest id.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::network::RelayNetwork;
use crate::nodeset::{NodeId, NodeSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDecomposition {
    level: Vec<i64>,
    reachable: NodeSet,
}

/// Two walks reaching `node` with different lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnequalPaths {
    pub node: NodeId,
    pub lengths: (i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Layering {
    Layered(LayerDecomposition),
    NotLayered(UnequalPaths),
}

impl Layering {
    pub fn is_layered(&self) -> bool {
        matches!(self, Layering::Layered(_))
    }

    pub fn into_result(self, net: &RelayNetwork) -> Result<LayerDecomposition> {
        match self {
            Layering::Layered(l) => Ok(l),
            Layering::NotLayered(w) => Err(Error::NotLayered(format!(
                "node `{}` is reached by paths of lengths {} and {}",
                net.name(w.node),
                w.lengths.0,
                w.lengths.1
            ))),
        }
    }
}

/// Per-layer view of a cut: `beta` are cut-side transmitters one level
/// below `gamma`, the far-side receivers; `influencing` are all
/// transmitters with an edge into `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CutLayer {
    pub beta: NodeSet,
    pub gamma: NodeSet,
    pub influencing: NodeSet,
}

pub fn layer_structure(net: &RelayNetwork) -> Layering {
    let n = net.node_count();
    // (neighbour, weight) with weight = level(neighbour) - level(self)
    let mut adj: Vec<Vec<(NodeId, i64)>> = vec![Vec::new(); n];
    for &(a, b) in net.edges() {
        adj[a.0].push((b, 1));
        adj[b.0].push((a, -1));
    }
    for e in net.unbounded() {
        adj[e.from.0].push((e.to, e.delay as i64));
        adj[e.to.0].push((e.from, -(e.delay as i64)));
    }
    let mut level: Vec<Option<i64>> = vec![None; n];
    let starts = std::iter::once(net.source()).chain(net.nodes());
    for start in starts {
        if level[start.0].is_some() {
            continue;
        }
        level[start.0] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u.0].unwrap();
            for &(w, delta) in &adj[u.0] {
                match level[w.0] {
                    None => {
                        level[w.0] = Some(lu + delta);
                        queue.push_back(w);
                    }
                    Some(lw) if lw != lu + delta => {
                        return Layering::NotLayered(UnequalPaths {
                            node: w,
                            lengths: (lw, lu + delta),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Layering::Layered(LayerDecomposition {
        level: level.into_iter().map(Option::unwrap).collect(),
        reachable: net.reachable_from(net.source()),
    })
}

impl LayerDecomposition {
    pub fn level(&self, v: NodeId) -> i64 {
        self.level[v.0]
    }

    pub fn levels(&self) -> &[i64] {
        &self.level
    }

    /// Hop distance from the source, if reachable.
    pub fn distance(&self, v: NodeId) -> Option<i64> {
        self.reachable.contains(v).then(|| self.level[v.0])
    }

    pub fn reachable(&self) -> NodeSet {
        self.reachable
    }

    /// `l_D` for a destination.
    pub fn depth(&self, destination: NodeId) -> Option<i64> {
        self.distance(destination)
    }

    /// Nodes grouped by level, ascending.
    pub fn layers(&self) -> BTreeMap<i64, NodeSet> {
        let mut out: BTreeMap<i64, NodeSet> = BTreeMap::new();
        for (i, &l) in self.level.iter().enumerate() {
            out.entry(l).or_default().insert(NodeId(i));
        }
        out
    }

    pub fn at_level(&self, l: i64) -> NodeSet {
        self.level
            .iter()
            .enumerate()
            .filter(|&(_, &x)| x == l)
            .map(|(i, _)| NodeId(i))
            .collect()
    }

    /// All nodes ordered by level, ties by id.
    pub fn processing_order(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.level.len()).map(NodeId).collect();
        order.sort_by_key(|v| (self.level[v.0], v.0));
        order
    }

    /// Range of `l` for which [`cut_partition`](Self::cut_partition) can be
    /// nonempty.
    pub fn transition_range(&self) -> std::ops::RangeInclusive<i64> {
        let lo = self.level.iter().copied().min().unwrap_or(0);
        let hi = self.level.iter().copied().max().unwrap_or(0);
        (lo + 1)..=hi
    }

    pub fn cut_partition(&self, net: &RelayNetwork, omega: NodeSet, l: i64) -> CutLayer {
        let far = omega.complement(net.node_count());
        let beta = omega.intersection(self.at_level(l - 1));
        let gamma = far.intersection(self.at_level(l));
        let influencing = gamma
            .iter()
            .flat_map(|v| net.input_neighbors(v).iter().copied())
            .collect();
        CutLayer {
            beta,
            gamma,
            influencing,
        }
    }
}
