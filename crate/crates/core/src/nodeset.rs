use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of a node in its network's declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Maximum number of nodes a network may declare.
pub const MAX_NODES: usize = 128;

/// A set of node indices below [`MAX_NODES`], stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NodeSet(u128);

impl NodeSet {
    pub const EMPTY: NodeSet = NodeSet(0);

    pub fn from_bits(bits: u128) -> Self {
        NodeSet(bits)
    }

    pub fn bits(self) -> u128 {
        self.0
    }

    pub fn singleton(id: NodeId) -> Self {
        NodeSet(1u128 << id.0)
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 128 {
            NodeSet(u128::MAX)
        } else {
            NodeSet((1u128 << n) - 1)
        }
    }

    pub fn contains(self, id: NodeId) -> bool {
        id.0 < 128 && self.0 >> id.0 & 1 == 1
    }

    pub fn insert(&mut self, id: NodeId) {
        self.0 |= 1u128 << id.0;
    }

    pub fn remove(&mut self, id: NodeId) {
        self.0 &= !(1u128 << id.0);
    }

    pub fn with(mut self, id: NodeId) -> Self {
        self.insert(id);
        self
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Self) -> Self {
        NodeSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        NodeSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        NodeSet(self.0 & !other.0)
    }

    /// Complement within the first `n` nodes.
    pub fn complement(self, n: usize) -> Self {
        NodeSet(!self.0 & NodeSet::full(n).0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in ascending id order.
    pub fn iter(self) -> impl Iterator<Item = NodeId> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(NodeId(i))
        })
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        let mut s = NodeSet::EMPTY;
        for id in iter {
            s.insert(id);
        }
        s
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|n| n.0)).finish()
    }
}


impl Serialize for NodeSet {
    /// Serialised as the ascending list of member indices.
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter().map(|v| v.0))
    }
}
