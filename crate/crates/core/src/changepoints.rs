// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::{Error, Result};

/// Integer interval `start:end` of variables, 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn check(&self, m: usize) -> Result<()> {
        if self.start == 0 || self.start > self.end || self.end > m {
            return Err(Error::InvalidInterval {
                start: self.start,
                end: self.end,
                m,
            });
        }
        Ok(())
    }
}

/// Ordered set `{0 = c_0 < c_1 < ... < c_k = m}`.
///
/// Block `j` covers variables `(c_{j-1} + 1):c_j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "Vec<usize>", into = "Vec<usize>")
)]
pub struct ChangePointSet {
    points: Vec<usize>,
}

impl ChangePointSet {
    pub fn new(points: Vec<usize>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidChangePoints(format!(
                "need at least the points 0 and m, got {points:?}"
            )));
        }
        if points[0] != 0 {
            return Err(Error::InvalidChangePoints(format!(
                "first point must be 0, got {}",
                points[0]
            )));
        }
        if points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidChangePoints(format!(
                "points must be strictly increasing: {points:?}"
            )));
        }
        Ok(Self { points })
    }

    /// Builds the set `{0} ∪ internal ∪ {m}`; `internal` may be unsorted.
    pub fn from_internal(m: usize, internal: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(internal.len() + 2);
        points.push(0);
        let mut sorted = internal.to_vec();
        sorted.sort_unstable();
        if let Some(&bad) = sorted.iter().find(|&&c| c == 0 || c >= m) {
            return Err(Error::InvalidChangePoints(format!(
                "internal point {bad} outside 1..{m}"
            )));
        }
        points.extend(sorted);
        points.push(m);
        Self::new(points)
    }

    /// The single block `{0, m}`.
    pub fn trivial(m: usize) -> Self {
        Self {
            points: alloc::vec![0, m],
        }
    }

    pub fn m(&self) -> usize {
        *self.points.last().expect("nonempty")
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    /// Points strictly between 0 and m.
    pub fn internal(&self) -> &[usize] {
        &self.points[1..self.points.len() - 1]
    }

    /// Number of blocks, `k_C`.
    pub fn num_blocks(&self) -> usize {
        self.points.len() - 1
    }

    pub fn contains(&self, c: usize) -> bool {
        self.points.binary_search(&c).is_ok()
    }

    pub fn blocks(&self) -> impl Iterator<Item = Interval> + '_ {
        self.points
            .windows(2)
            .map(|w| Interval::new(w[0] + 1, w[1]))
    }

    /// `true` when every point of `self` is also a point of `other`.
    pub fn is_subset_of(&self, other: &ChangePointSet) -> bool {
        self.m() == other.m() && self.points.iter().all(|&c| other.contains(c))
    }

    /// Order used to break ties between equally good segmentations.
    ///
    /// Compares the last internal point first, then the one before it, and
    /// so on; smaller wins. This is the choice the prefix recursion makes
    /// when every argmin resolves to the smallest index.
    pub fn tie_break_cmp(&self, other: &ChangePointSet) -> Ordering {
        self.points.iter().rev().cmp(other.points.iter().rev())
    }
}

impl TryFrom<Vec<usize>> for ChangePointSet {
    type Error = Error;

    fn try_from(points: Vec<usize>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<ChangePointSet> for Vec<usize> {
    fn from(c: ChangePointSet) -> Self {
        c.points
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_points() {
        assert!(ChangePointSet::new(vec![0, 3, 3, 5]).is_err());
        assert!(ChangePointSet::new(vec![1, 5]).is_err());
        assert!(ChangePointSet::new(vec![0]).is_err());
        assert!(ChangePointSet::from_internal(5, &[5]).is_err());
        let c = ChangePointSet::from_internal(5, &[3, 1]).unwrap();
        assert_eq!(c.points(), &[0, 1, 3, 5]);
        assert_eq!(c.num_blocks(), 3);
    }

    #[test]
    fn blocks_are_one_based() {
        let c = ChangePointSet::new(vec![0, 2, 4]).unwrap();
        let blocks: Vec<_> = c.blocks().collect();
        assert_eq!(blocks, vec![Interval::new(1, 2), Interval::new(3, 4)]);
    }

    #[test]
    fn tie_break_prefers_smaller_trailing_points() {
        let single = ChangePointSet::new(vec![0, 4]).unwrap();
        let two = ChangePointSet::new(vec![0, 2, 4]).unwrap();
        let three = ChangePointSet::new(vec![0, 1, 2, 4]).unwrap();
        assert_eq!(single.tie_break_cmp(&two), Ordering::Less);
        assert_eq!(two.tie_break_cmp(&three), Ordering::Less);
        assert_eq!(two.tie_break_cmp(&two), Ordering::Equal);
    }
}
