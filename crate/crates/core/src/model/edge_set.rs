use std::fmt;

use fixedbitset::FixedBitSet;

use super::EdgeId;

/// A subset of the edges of one instance, stored as a bitset over edge ids.
///
/// Iteration follows edge-id order, which is the canonical
/// (doctor id, hospital id) order of the owning instance.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    bits: FixedBitSet,
}

impl EdgeSet {
    pub fn empty(edge_count: usize) -> Self {
        EdgeSet { bits: FixedBitSet::with_capacity(edge_count) }
    }

    pub fn full(edge_count: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(edge_count);
        bits.insert_range(..);
        EdgeSet { bits }
    }

    pub fn from_edges(edge_count: usize, edges: impl IntoIterator<Item = EdgeId>) -> Self {
        let mut set = Self::empty(edge_count);
        for e in edges {
            set.insert(e);
        }
        set
    }

    /// Number of edges of the owning instance (the universe size).
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.bits.contains(e.0)
    }

    pub fn insert(&mut self, e: EdgeId) -> bool {
        !self.bits.put(e.0)
    }

    pub fn remove(&mut self, e: EdgeId) {
        self.bits.set(e.0, false);
    }

    pub fn iter(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.bits.ones().map(EdgeId)
    }

    pub fn union_with(&mut self, other: &EdgeSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    /// `E \ self`.
    pub fn complement(&self) -> EdgeSet {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &EdgeSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn first(&self) -> Option<EdgeId> {
        self.bits.minimum().map(EdgeId)
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|e| e.0)).finish()
    }
}
