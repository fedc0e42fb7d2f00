//! Strictly increasing index maps `t: {1..L} -> {1..K}`.
//!
//! These select which basis generators (equivalently, which polynomial family
//! members) participate in a Wronskian or a basis word. They are the universal
//! index set for coefficient tables, caches and dumps, so they carry a stable
//! ordering and a canonical text rendering.

use crate::error::{Error, Result};
use std::fmt;

/// A strictly increasing sequence of 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IncreasingMap {
    values: Vec<u32>,
}

impl IncreasingMap {
    /// Builds a map from explicit 1-based values; they must be strictly
    /// increasing and positive.
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.first().is_some_and(|&v| v == 0) {
            return Err(Error::InvalidArgument(
                "index map values are 1-based; found 0".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(format!(
                "index map values must be strictly increasing, got {values:?}"
            )));
        }
        Ok(Self { values })
    }

    /// The empty map (L = 0).
    pub fn empty() -> Self {
        Self { values: Vec::new() }
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest value in the range, or 0 for the empty map.
    pub fn max_value(&self) -> u32 {
        self.values.last().copied().unwrap_or(0)
    }

    /// Bitmask with bit v-1 set for each value v.
    pub fn bits(&self) -> u64 {
        self.values.iter().fold(0u64, |acc, &v| acc | 1u64 << (v - 1))
    }

    /// Rebuilds a map from a bitmask (bit i set means value i+1 present).
    pub fn from_bits(bits: u64) -> Self {
        let mut values = Vec::with_capacity(bits.count_ones() as usize);
        let mut rest = bits;
        while rest != 0 {
            values.push(rest.trailing_zeros() + 1);
            rest &= rest - 1;
        }
        Self { values }
    }

    /// The increasing map onto `{1..dim} \ range(self)`.
    pub fn complement(&self, dim: u32) -> Result<Self> {
        if self.max_value() > dim {
            return Err(Error::InvalidArgument(format!(
                "map {self} does not fit in dimension {dim}"
            )));
        }
        let bits = self.bits();
        let values = (1..=dim).filter(|&v| bits & (1u64 << (v - 1)) == 0).collect();
        Ok(Self { values })
    }

    /// All strictly increasing maps `{1..len} -> {1..dim}` in lexicographic
    /// order. Empty when `len > dim`; the single empty map when `len == 0`.
    pub fn all(len: usize, dim: u32) -> Vec<Self> {
        use itertools::Itertools;
        if len == 0 {
            return vec![Self::empty()];
        }
        (1..=dim)
            .combinations(len)
            .map(|values| Self { values })
            .collect()
    }
}

impl fmt::Display for IncreasingMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_increasing() {
        assert!(IncreasingMap::new(vec![1, 1]).is_err());
        assert!(IncreasingMap::new(vec![2, 1]).is_err());
        assert!(IncreasingMap::new(vec![0, 1]).is_err());
        assert!(IncreasingMap::new(vec![1, 3, 7]).is_ok());
    }

    #[test]
    fn bits_roundtrip() {
        let t = IncreasingMap::new(vec![1, 3, 4]).unwrap();
        assert_eq!(t.bits(), 0b1101);
        assert_eq!(IncreasingMap::from_bits(t.bits()), t);
    }

    #[test]
    fn complement_partitions_range() {
        let t = IncreasingMap::new(vec![2, 4]).unwrap();
        let c = t.complement(5).unwrap();
        assert_eq!(c.values(), &[1, 3, 5]);
        assert_eq!(t.bits() | c.bits(), 0b11111);
        assert!(t.complement(3).is_err());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let maps = IncreasingMap::all(2, 4);
        assert_eq!(maps.len(), 6);
        assert_eq!(maps[0].values(), &[1, 2]);
        assert_eq!(maps[5].values(), &[3, 4]);
        assert!(maps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(IncreasingMap::all(3, 2).len(), 0);
        assert_eq!(IncreasingMap::all(0, 2), vec![IncreasingMap::empty()]);
    }

    #[test]
    fn display_is_canonical() {
        let t = IncreasingMap::new(vec![1, 3]).unwrap();
        assert_eq!(t.to_string(), "(1,3)");
        assert_eq!(IncreasingMap::empty().to_string(), "()");
    }
}
