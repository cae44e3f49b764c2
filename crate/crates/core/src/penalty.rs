// SPDX-License-Identifier: MIT OR Apache-2.0

//! Additive regularization `R(C) = sum_j rho(c_{j-1} + 1, c_j)` scaled by
//! `lambda * J(n)`.

use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::Add;

use crate::changepoints::{ChangePointSet, Interval};
use crate::{Error, Result};

/// Extended real in `(-inf, +inf]`.
///
/// `+inf` marks an infeasible block. It absorbs addition and scaling, so
/// `0 * inf` stays `inf`, and ordering is total.
#[derive(Clone, Copy, PartialEq)]
pub struct Cost(f64);

impl Cost {
    pub const INFINITE: Cost = Cost(f64::INFINITY);
    pub const ZERO: Cost = Cost(0.0);

    /// Panics on NaN or `-inf`.
    pub fn finite(x: f64) -> Self {
        assert!(
            !x.is_nan() && x != f64::NEG_INFINITY,
            "cost must be > -inf, got {x}"
        );
        Cost(x)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == f64::INFINITY
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Multiplies a finite cost by `k >= 0`; `+inf` stays `+inf`.
    pub fn scale(self, k: f64) -> Self {
        if self.is_infinite() {
            self
        } else {
            Cost(self.0 * k)
        }
    }
}

impl Add for Cost {
    type Output = Cost;

    fn add(self, rhs: Cost) -> Cost {
        if self.is_infinite() || rhs.is_infinite() {
            Cost::INFINITE
        } else {
            Cost(self.0 + rhs.0)
        }
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("+inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// Base-pair coordinates `B(1), ..., B(m)` of the variables.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "Vec<u64>", into = "Vec<u64>")
)]
pub struct MarkerMap {
    positions: Vec<u64>,
}

impl MarkerMap {
    pub fn new(positions: Vec<u64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidPenalty("empty marker map".into()));
        }
        if let Some(i) = positions.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::InvalidPenalty(format!(
                "marker positions decrease at marker {} ({} > {})",
                i + 2,
                positions[i],
                positions[i + 1]
            )));
        }
        Ok(Self { positions })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    /// Position of 1-based marker `i`.
    pub fn position(&self, i: usize) -> u64 {
        self.positions[i - 1]
    }

    /// `|B(s) - B(r)|` for the block `r:s`.
    pub fn span(&self, interval: Interval) -> u64 {
        self.position(interval.end)
            .abs_diff(self.position(interval.start))
    }
}

impl TryFrom<Vec<u64>> for MarkerMap {
    type Error = Error;

    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MarkerMap> for Vec<u64> {
    fn from(m: MarkerMap) -> Self {
        m.positions
    }
}

/// Per-block penalty `rho(r, s)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum RhoKind {
    /// `rho = 1`, so `R(C)` counts blocks.
    ConstOne,
    /// Physical-distance penalty for runs-of-homozygosity segmentation:
    /// `+inf` when the block spans at most `threshold` units of `beta` base
    /// pairs, otherwise `beta / span`.
    Roh {
        markers: MarkerMap,
        threshold: f64,
        beta: f64,
    },
}

impl RhoKind {
    pub const DEFAULT_BETA: f64 = 1e6;

    pub fn roh(markers: MarkerMap, threshold: f64) -> Self {
        RhoKind::Roh {
            markers,
            threshold,
            beta: Self::DEFAULT_BETA,
        }
    }
}

/// Sample-size scaling `J(n)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", content = "value", rename_all = "snake_case")
)]
pub enum JnKind {
    LogN,
    SqrtN,
    /// `n^alpha` with `alpha` in `(0, 1)`.
    Power(f64),
    /// Entry `i` is `J(i + 1)`.
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PenaltySpec {
    pub rho: RhoKind,
    pub jn: JnKind,
    pub lambda: f64,
}

impl PenaltySpec {
    pub fn new(rho: RhoKind, jn: JnKind, lambda: f64) -> Self {
        Self { rho, jn, lambda }
    }

    /// `rho = 1`, `J(n) = ln n`.
    pub fn const_log(lambda: f64) -> Self {
        Self::new(RhoKind::ConstOne, JnKind::LogN, lambda)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Checks parameters, and for the roh kind that the marker map covers
    /// `m` variables.
    pub fn validate(&self, m: usize) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidPenalty(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            )));
        }
        match &self.jn {
            JnKind::Power(a) if !(*a > 0.0 && *a < 1.0) => {
                return Err(Error::InvalidPenalty(format!(
                    "J(n) power must lie in (0, 1), got {a}"
                )))
            }
            JnKind::Table(t) if t.iter().any(|v| !(v.is_finite() && *v > 0.0)) => {
                return Err(Error::InvalidPenalty(
                    "J(n) table entries must be positive".into(),
                ))
            }
            _ => {}
        }
        if let RhoKind::Roh {
            markers,
            threshold,
            beta,
        } = &self.rho
        {
            if markers.len() != m {
                return Err(Error::InvalidPenalty(format!(
                    "marker map has {} positions for m = {m}",
                    markers.len()
                )));
            }
            if !(*threshold > 0.0 && threshold.is_finite()) {
                return Err(Error::InvalidPenalty(format!(
                    "roh threshold must be positive, got {threshold}"
                )));
            }
            if !(*beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidPenalty(format!(
                    "roh scale must be positive, got {beta}"
                )));
            }
        }
        Ok(())
    }

    /// `rho(r, s)` for the block `interval`.
    pub fn rho(&self, interval: Interval) -> Result<Cost> {
        match &self.rho {
            RhoKind::ConstOne => Ok(Cost::finite(1.0)),
            RhoKind::Roh {
                markers,
                threshold,
                beta,
            } => {
                interval.check(markers.len())?;
                let scaled = markers.span(interval) as f64 / beta;
                if scaled <= *threshold {
                    Ok(Cost::INFINITE)
                } else {
                    Ok(Cost::finite(1.0 / scaled))
                }
            }
        }
    }

    /// `J(n)`.
    pub fn jn(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidPenalty("J(n) needs n >= 1".into()));
        }
        let x = n as f64;
        Ok(match &self.jn {
            JnKind::LogN => libm::log(x),
            JnKind::SqrtN => libm::sqrt(x),
            JnKind::Power(a) => libm::pow(x, *a),
            JnKind::Table(t) => *t.get(n - 1).ok_or_else(|| {
                Error::InvalidPenalty(format!("J(n) table has no entry for n = {n}"))
            })?,
        })
    }

    /// `R(C)`, `+inf` as soon as one block is infeasible.
    pub fn penalty_r(&self, c: &ChangePointSet) -> Result<Cost> {
        let mut total = Cost::ZERO;
        for block in c.blocks() {
            total = total + self.rho(block)?;
        }
        Ok(total)
    }
}
