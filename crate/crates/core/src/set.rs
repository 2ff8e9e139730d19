use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A set of point indices drawn from a universe `0..universe`.
///
/// Backed by a bitset so unions, subset tests and intersections run word-parallel.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IndexSet {
    bits: FixedBitSet,
}

impl IndexSet {
    pub fn empty(universe: usize) -> Self {
        IndexSet { bits: FixedBitSet::with_capacity(universe) }
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        IndexSet { bits }
    }

    pub fn singleton(universe: usize, index: usize) -> Result<Self> {
        Self::from_indices(universe, [index])
    }

    /// Builds a set, rejecting indices outside the universe. Duplicates are merged.
    pub fn from_indices<I: IntoIterator<Item = usize>>(universe: usize, indices: I) -> Result<Self> {
        let mut set = Self::empty(universe);
        for index in indices {
            if index >= universe {
                return Err(Error::IndexOutOfRange { index, len: universe });
            }
            set.bits.insert(index);
        }
        Ok(set)
    }

    /// Bit `i` of `mask` selects index `i`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        let mut set = Self::empty(universe);
        for i in 0..universe.min(64) {
            if mask >> i & 1 == 1 {
                set.bits.insert(i);
            }
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn insert(&mut self, index: usize) {
        self.bits.insert(index);
    }

    pub fn remove(&mut self, index: usize) {
        self.bits.set(index, false);
    }

    pub fn first(&self) -> Option<usize> {
        self.bits.minimum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        self.bits.union_with(&other.bits);
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = self.clone();
        out.union_with(other);
        out
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let mut out = self.clone();
        out.bits.intersect_with(&other.bits);
        out
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        let mut out = self.clone();
        out.bits.difference_with(&other.bits);
        out
    }

    pub fn complement(&self) -> IndexSet {
        let mut out = self.clone();
        out.bits.toggle_range(..);
        out
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &IndexSet) -> bool {
        !self.bits.is_disjoint(&other.bits)
    }

    /// Checks that every member is also a valid index of a `universe`-point space.
    pub(crate) fn check_universe(&self, universe: usize) -> Result<()> {
        match self.iter().find(|&i| i >= universe) {
            Some(index) => Err(Error::IndexOutOfRange { index, len: universe }),
            None => Ok(()),
        }
    }

    /// Re-homes the set into a universe of a different size. Members must fit.
    pub(crate) fn resized(&self, universe: usize) -> Result<IndexSet> {
        self.check_universe(universe)?;
        Self::from_indices(universe, self.iter())
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Deserializes a bare index array; the universe is sized to fit the largest member
/// and must be re-homed by the caller.
impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        let universe = indices.iter().max().map_or(0, |m| m + 1);
        Ok(IndexSet::from_indices(universe, indices).expect("universe sized to fit"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            IndexSet::from_indices(3, [0, 3]),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn complement_stays_in_universe() {
        let s = IndexSet::from_indices(5, [1, 3]).unwrap();
        assert_eq!(s.complement().to_vec(), vec![0, 2, 4]);
        assert_eq!(IndexSet::full(4).complement().len(), 0);
    }

    #[test]
    fn mask_roundtrip() {
        let s = IndexSet::from_mask(6, 0b101001);
        assert_eq!(s.to_vec(), vec![0, 3, 5]);
    }
}
