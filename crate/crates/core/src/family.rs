// SPDX-License-Identifier: MIT OR Apache-2.0

//! Probability families, their sufficient statistics and per-block costs.
//!
//! Every family is summarized by column-prefix tables built in one pass over
//! the data. The statistics of any block `r:s` are then obtained by
//! differencing two prefix entries, so a block's MLE and maximized
//! log-likelihood cost `O(d)` arithmetic regardless of `n` and block length.
//!
//! Costs are exact negative log-likelihoods, additive constants included,
//! so penalized objectives stay comparable across penalties and with BIC.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::changepoints::{ChangePointSet, Interval};
use crate::data::DataMatrix;
use crate::{Error, Result};

/// Variance floor for the unknown-variance Gaussian family.
pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum FamilyKind {
    /// Categorical over `{0, 1}`.
    Bernoulli,
    /// Categorical over `{0, ..., d - 1}`.
    Categorical {
        d: usize,
    },
    /// Gaussian with unknown mean and the given variance.
    GaussianKnownVar {
        variance: f64,
    },
    /// Gaussian with unknown mean and variance.
    GaussianMeanVar,
    Exponential,
    Poisson,
    /// Two-state Markov chain along the variables of a block, with its own
    /// initial distribution and transition matrix per block.
    Markov2,
}

impl FamilyKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilyKind::Categorical { d } if d < 2 => Err(Error::InvalidFamily(format!(
                "categorical alphabet size must be >= 2, got {d}"
            ))),
            FamilyKind::GaussianKnownVar { variance }
                if !(variance > 0.0 && variance.is_finite()) =>
            {
                Err(Error::InvalidFamily(format!(
                    "known variance must be positive, got {variance}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Bernoulli => "bernoulli",
            FamilyKind::Categorical { .. } => "categorical",
            FamilyKind::GaussianKnownVar { .. } => "gaussian_known_var",
            FamilyKind::GaussianMeanVar => "gaussian_mean_var",
            FamilyKind::Exponential => "exponential",
            FamilyKind::Poisson => "poisson",
            FamilyKind::Markov2 => "markov2",
        }
    }

    /// Alphabet size for the discrete families.
    pub fn alphabet(&self) -> Option<usize> {
        match *self {
            FamilyKind::Bernoulli | FamilyKind::Markov2 => Some(2),
            FamilyKind::Categorical { d } => Some(d),
            _ => None,
        }
    }

    /// Free parameters per block, as counted by BIC.
    pub fn free_params(&self) -> usize {
        match *self {
            FamilyKind::Bernoulli => 1,
            FamilyKind::Categorical { d } => d - 1,
            FamilyKind::GaussianKnownVar { .. } => 1,
            FamilyKind::GaussianMeanVar => 2,
            FamilyKind::Exponential | FamilyKind::Poisson => 1,
            FamilyKind::Markov2 => 3,
        }
    }

    pub fn in_domain(&self, x: f64) -> bool {
        let integral = x.is_finite() && libm::trunc(x) == x;
        match *self {
            FamilyKind::Bernoulli | FamilyKind::Markov2 => x == 0.0 || x == 1.0,
            FamilyKind::Categorical { d } => integral && x >= 0.0 && x < d as f64,
            FamilyKind::GaussianKnownVar { .. } | FamilyKind::GaussianMeanVar => x.is_finite(),
            FamilyKind::Exponential => x.is_finite() && x > 0.0,
            FamilyKind::Poisson => integral && x >= 0.0,
        }
    }

    /// Checks every observed cell, reporting the first violation with
    /// 1-based coordinates.
    pub fn validate_data(&self, data: &DataMatrix) -> Result<()> {
        self.validate()?;
        for row in 0..data.n() {
            for col in 0..data.m() {
                let x = data.get(row, col);
                if data.is_observed(row, col) && !self.in_domain(x) {
                    return Err(Error::Domain {
                        row: row + 1,
                        col: col + 1,
                        value: x,
                        family: self.name(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Maximum-likelihood estimate of one block's parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "kind", rename_all = "snake_case")
)]
pub enum BlockParams {
    Categorical {
        probs: Vec<f64>,
    },
    /// `floored` is set when the empirical variance fell below the floor
    /// and `variance` holds the floor instead.
    Gaussian {
        mean: f64,
        variance: f64,
        floored: bool,
    },
    Exponential {
        rate: f64,
    },
    Poisson {
        mean: f64,
    },
    /// `transition[b][a]` is the probability of moving from state `b` to `a`.
    Markov2 {
        initial: [f64; 2],
        transition: [[f64; 2]; 2],
    },
}

impl BlockParams {
    pub fn is_degenerate(&self) -> bool {
        matches!(self, BlockParams::Gaussian { floored: true, .. })
    }
}

#[derive(Debug, Clone)]
enum Tables {
    Categorical {
        d: usize,
        /// `(m + 1) x d`, row `c` holds symbol counts over columns `1..=c`.
        counts: Vec<u64>,
        observed: Vec<u64>,
    },
    Gaussian {
        /// Subtracted from every cell before accumulating.
        offset: f64,
        sum: Vec<f64>,
        sumsq: Vec<f64>,
        observed: Vec<u64>,
    },
    Exponential {
        sum: Vec<f64>,
        observed: Vec<u64>,
    },
    Poisson {
        sum: Vec<f64>,
        log_factorial: Vec<f64>,
        observed: Vec<u64>,
    },
    Markov2 {
        /// Per column, counts of state 0 and 1 among observed cells.
        first: Vec<[u64; 2]>,
        /// `pairs[v]` holds transition counts `N(b, a)` at index `2b + a`
        /// over the column pairs `(1, 2), ..., (v, v + 1)`; `pairs[0]` is zero.
        pairs: Vec<[u64; 4]>,
    },
}

/// Column-prefix aggregates of a [`DataMatrix`] for one family.
///
/// Immutable once built; all queries take `&self`.
#[derive(Debug, Clone)]
pub struct SufficientStatistics {
    family: FamilyKind,
    n: usize,
    m: usize,
    variance_floor: f64,
    tables: Tables,
}

#[inline]
fn xlogy_ratio(x: f64, y: f64) -> f64 {
    // x * ln(x / y), with 0 ln 0 = 0
    if x == 0.0 {
        0.0
    } else {
        x * libm::log(x / y)
    }
}

impl SufficientStatistics {
    pub fn build(data: &DataMatrix, family: FamilyKind) -> Result<Self> {
        Self::build_with_floor(data, family, DEFAULT_VARIANCE_FLOOR)
    }

    pub fn build_with_floor(
        data: &DataMatrix,
        family: FamilyKind,
        variance_floor: f64,
    ) -> Result<Self> {
        family.validate_data(data)?;
        if variance_floor.is_nan() || variance_floor <= 0.0 {
            return Err(Error::InvalidFamily(format!(
                "variance floor must be positive, got {variance_floor}"
            )));
        }
        let (n, m) = (data.n(), data.m());
        let observed_prefix = || {
            let mut observed = vec![0u64; m + 1];
            for col in 0..m {
                let k = (0..n).filter(|&row| data.is_observed(row, col)).count() as u64;
                observed[col + 1] = observed[col] + k;
            }
            observed
        };
        let tables = match family {
            FamilyKind::Bernoulli | FamilyKind::Categorical { .. } => {
                let d = family.alphabet().expect("discrete");
                let mut counts = vec![0u64; (m + 1) * d];
                for col in 0..m {
                    let (done, rest) = counts.split_at_mut((col + 1) * d);
                    let cur = &mut rest[..d];
                    cur.copy_from_slice(&done[col * d..]);
                    for row in 0..n {
                        if data.is_observed(row, col) {
                            cur[data.get(row, col) as usize] += 1;
                        }
                    }
                }
                Tables::Categorical {
                    d,
                    counts,
                    observed: observed_prefix(),
                }
            }
            FamilyKind::GaussianKnownVar { .. } | FamilyKind::GaussianMeanVar => {
                let (mut total, mut k) = (0.0, 0usize);
                for row in 0..n {
                    for col in 0..m {
                        if data.is_observed(row, col) {
                            total += data.get(row, col);
                            k += 1;
                        }
                    }
                }
                let offset = total / k as f64;
                let mut sum = vec![0.0; m + 1];
                let mut sumsq = vec![0.0; m + 1];
                for col in 0..m {
                    let (mut s, mut s2) = (0.0, 0.0);
                    for row in 0..n {
                        if data.is_observed(row, col) {
                            let x = data.get(row, col) - offset;
                            s += x;
                            s2 += x * x;
                        }
                    }
                    sum[col + 1] = sum[col] + s;
                    sumsq[col + 1] = sumsq[col] + s2;
                }
                Tables::Gaussian {
                    offset,
                    sum,
                    sumsq,
                    observed: observed_prefix(),
                }
            }
            FamilyKind::Exponential => Tables::Exponential {
                sum: column_prefix(data, |x| x),
                observed: observed_prefix(),
            },
            FamilyKind::Poisson => Tables::Poisson {
                sum: column_prefix(data, |x| x),
                log_factorial: column_prefix(data, |x| libm::lgamma(x + 1.0)),
                observed: observed_prefix(),
            },
            FamilyKind::Markov2 => {
                let mut first = vec![[0u64; 2]; m];
                for (col, slot) in first.iter_mut().enumerate() {
                    for row in 0..n {
                        if data.is_observed(row, col) {
                            slot[data.get(row, col) as usize] += 1;
                        }
                    }
                }
                let mut pairs = vec![[0u64; 4]; m];
                for v in 1..m {
                    let mut cur = pairs[v - 1];
                    for row in 0..n {
                        if data.is_observed(row, v - 1) && data.is_observed(row, v) {
                            let b = data.get(row, v - 1) as usize;
                            let a = data.get(row, v) as usize;
                            cur[2 * b + a] += 1;
                        }
                    }
                    pairs[v] = cur;
                }
                Tables::Markov2 { first, pairs }
            }
        };
        Ok(Self {
            family,
            n,
            m,
            variance_floor,
            tables,
        })
    }

    pub fn family(&self) -> &FamilyKind {
        &self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn variance_floor(&self) -> f64 {
        self.variance_floor
    }

    /// Observed cells pooled over the block `interval`.
    pub fn observed_count(&self, interval: Interval) -> Result<u64> {
        interval.check(self.m)?;
        let (lo, hi) = (interval.start - 1, interval.end);
        Ok(match &self.tables {
            Tables::Categorical { observed, .. }
            | Tables::Gaussian { observed, .. }
            | Tables::Exponential { observed, .. }
            | Tables::Poisson { observed, .. } => observed[hi] - observed[lo],
            Tables::Markov2 { first, pairs } => {
                let trans: u64 = pairs[hi - 1].iter().sum::<u64>() - pairs[lo].iter().sum::<u64>();
                first[lo].iter().sum::<u64>() + trans
            }
        })
    }

    /// Per-symbol counts over a categorical block.
    pub fn symbol_counts(&self, interval: Interval) -> Result<Vec<u64>> {
        interval.check(self.m)?;
        match &self.tables {
            Tables::Categorical { d, counts, .. } => {
                let (lo, hi) = (interval.start - 1, interval.end);
                Ok((0..*d)
                    .map(|a| counts[hi * d + a] - counts[lo * d + a])
                    .collect())
            }
            _ => Err(Error::InvalidFamily(format!(
                "{} has no symbol counts",
                self.family.name()
            ))),
        }
    }

    /// Initial-state counts and transition counts `N(b, a)` (index `2b + a`)
    /// of a Markov block.
    pub fn markov_counts(&self, interval: Interval) -> Result<([u64; 2], [u64; 4])> {
        interval.check(self.m)?;
        match &self.tables {
            Tables::Markov2 { first, pairs } => {
                let (lo, hi) = (interval.start - 1, interval.end);
                let mut trans = [0u64; 4];
                for (i, t) in trans.iter_mut().enumerate() {
                    *t = pairs[hi - 1][i] - pairs[lo][i];
                }
                Ok((first[lo], trans))
            }
            _ => Err(Error::InvalidFamily(format!(
                "{} has no transition counts",
                self.family.name()
            ))),
        }
    }

    fn check_nonempty(&self, interval: Interval) -> Result<()> {
        if self.observed_count(interval)? == 0 {
            return Err(Error::EmptyInterval {
                start: interval.start,
                end: interval.end,
            });
        }
        Ok(())
    }

    /// Closed-form MLE on the pooled observed cells of the block.
    pub fn segment_mle(&self, interval: Interval) -> Result<BlockParams> {
        self.check_nonempty(interval)?;
        let (lo, hi) = (interval.start - 1, interval.end);
        Ok(match &self.tables {
            Tables::Categorical {
                d,
                counts,
                observed,
            } => {
                let total = (observed[hi] - observed[lo]) as f64;
                BlockParams::Categorical {
                    probs: (0..*d)
                        .map(|a| (counts[hi * d + a] - counts[lo * d + a]) as f64 / total)
                        .collect(),
                }
            }
            Tables::Gaussian {
                offset,
                sum,
                observed,
                ..
            } => {
                let k = (observed[hi] - observed[lo]) as f64;
                let mean = offset + (sum[hi] - sum[lo]) / k;
                match self.family {
                    FamilyKind::GaussianKnownVar { variance } => BlockParams::Gaussian {
                        mean,
                        variance,
                        floored: false,
                    },
                    _ => {
                        let (variance, floored) = self.gaussian_variance(lo, hi);
                        BlockParams::Gaussian {
                            mean,
                            variance,
                            floored,
                        }
                    }
                }
            }
            Tables::Exponential { sum, observed } => BlockParams::Exponential {
                rate: (observed[hi] - observed[lo]) as f64 / (sum[hi] - sum[lo]),
            },
            Tables::Poisson { sum, observed, .. } => BlockParams::Poisson {
                mean: (sum[hi] - sum[lo]) / (observed[hi] - observed[lo]) as f64,
            },
            Tables::Markov2 { .. } => {
                let (init, trans) = self.markov_counts(interval)?;
                let n0 = (init[0] + init[1]) as f64;
                let row = |b: usize| {
                    let out = (trans[2 * b] + trans[2 * b + 1]) as f64;
                    if out == 0.0 {
                        // No transitions leave state b; the row does not enter
                        // the likelihood.
                        [0.5, 0.5]
                    } else {
                        [trans[2 * b] as f64 / out, trans[2 * b + 1] as f64 / out]
                    }
                };
                BlockParams::Markov2 {
                    initial: [init[0] as f64 / n0, init[1] as f64 / n0],
                    transition: [row(0), row(1)],
                }
            }
        })
    }

    /// `(variance, floored)` for prefix bounds `lo < hi` (0-based exclusive, inclusive).
    fn gaussian_variance(&self, lo: usize, hi: usize) -> (f64, bool) {
        let ss = self.gaussian_ss(lo, hi);
        let Tables::Gaussian { observed, .. } = &self.tables else {
            unreachable!()
        };
        let v = ss / (observed[hi] - observed[lo]) as f64;
        if v < self.variance_floor {
            (self.variance_floor, true)
        } else {
            (v, false)
        }
    }

    fn gaussian_ss(&self, lo: usize, hi: usize) -> f64 {
        let Tables::Gaussian {
            sum,
            sumsq,
            observed,
            ..
        } = &self.tables
        else {
            unreachable!()
        };
        let k = (observed[hi] - observed[lo]) as f64;
        let s = sum[hi] - sum[lo];
        let ss = sumsq[hi] - sumsq[lo] - s * s / k;
        // Below the rounding error of the differenced prefixes the residual
        // sum of squares is indistinguishable from zero. Floored blocks
        // amplify it by 1 / floor, so snap it.
        let noise = 16.0 * f64::EPSILON * (sumsq[hi] + sumsq[lo] + s * s / k);
        if ss <= noise {
            0.0
        } else {
            ss
        }
    }

    /// Whether the block's variance estimate hits the floor.
    pub fn is_degenerate(&self, interval: Interval) -> Result<bool> {
        Ok(self.segment_mle(interval)?.is_degenerate())
    }

    /// Negative maximized log-likelihood of the block, all constants included.
    pub fn segment_neg_loglik(&self, interval: Interval) -> Result<f64> {
        self.check_nonempty(interval)?;
        Ok(self.cost_between(interval.start - 1, interval.end))
    }

    /// Block cost for columns `prev + 1 ..= end`, without validation.
    ///
    /// Every column holds at least one observed cell, so any nonempty block
    /// has a positive pooled count.
    pub(crate) fn cost_between(&self, prev: usize, end: usize) -> f64 {
        let (lo, hi) = (prev, end);
        match &self.tables {
            Tables::Categorical {
                d,
                counts,
                observed,
            } => {
                let total = (observed[hi] - observed[lo]) as f64;
                let mut ll = 0.0;
                for a in 0..*d {
                    let k = (counts[hi * d + a] - counts[lo * d + a]) as f64;
                    ll += xlogy_ratio(k, total);
                }
                -ll
            }
            Tables::Gaussian { observed, .. } => {
                let k = (observed[hi] - observed[lo]) as f64;
                let ss = self.gaussian_ss(lo, hi);
                let variance = match self.family {
                    FamilyKind::GaussianKnownVar { variance } => variance,
                    _ => self.gaussian_variance(lo, hi).0,
                };
                0.5 * k * libm::log(2.0 * PI * variance) + ss / (2.0 * variance)
            }
            Tables::Exponential { sum, observed } => {
                let k = (observed[hi] - observed[lo]) as f64;
                let s = sum[hi] - sum[lo];
                // -(k ln(rate) - rate * s) at rate = k / s
                k * libm::log(s / k) + k
            }
            Tables::Poisson {
                sum,
                log_factorial,
                observed,
            } => {
                let k = (observed[hi] - observed[lo]) as f64;
                let s = sum[hi] - sum[lo];
                let lf = log_factorial[hi] - log_factorial[lo];
                -xlogy_ratio(s, k) + s + lf
            }
            Tables::Markov2 { first, pairs } => {
                let init = first[lo];
                let n0 = (init[0] + init[1]) as f64;
                let mut ll = xlogy_ratio(init[0] as f64, n0) + xlogy_ratio(init[1] as f64, n0);
                let t = |i: usize| (pairs[hi - 1][i] - pairs[lo][i]) as f64;
                for b in 0..2 {
                    let (to0, to1) = (t(2 * b), t(2 * b + 1));
                    let out = to0 + to1;
                    ll += xlogy_ratio(to0, out) + xlogy_ratio(to1, out);
                }
                -ll
            }
        }
    }

    /// `l(C; x)`: the maximized log-likelihood of a segmentation.
    pub fn full_loglik(&self, c: &ChangePointSet) -> Result<f64> {
        if c.m() != self.m {
            return Err(Error::DimensionMismatch(c.m(), self.m));
        }
        let mut total = 0.0;
        for block in c.blocks() {
            total -= self.segment_neg_loglik(block)?;
        }
        Ok(total)
    }
}

fn column_prefix(data: &DataMatrix, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let (n, m) = (data.n(), data.m());
    let mut out = vec![0.0; m + 1];
    for col in 0..m {
        let mut s = 0.0;
        for row in 0..n {
            if data.is_observed(row, col) {
                s += f(data.get(row, col));
            }
        }
        out[col + 1] = out[col] + s;
    }
    out
}
