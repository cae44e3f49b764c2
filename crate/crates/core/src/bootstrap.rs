// SPDX-License-Identifier: MIT OR Apache-2.0

//! Row-resampling bootstrap for estimated change points.
//!
//! Rows of the data are i.i.d., so each replicate draws `n` rows with
//! replacement and refits. From the replicate sets we estimate
//!
//! * `p(c)`: the fraction of replicates containing index `c`,
//! * `p(I)`: the fraction whose set meets the interval `I`,
//! * the plug-in mean and `1/B` variance of a set distance between the
//!   original estimate and each replicate.
//!
//! Replicate `b` draws from ChaCha8 seeded with `seed` on stream `b`, so a
//! summary depends only on `(data, configuration, seed)` and not on the
//! order in which replicates run.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::changepoints::{ChangePointSet, Interval};
use crate::data::DataMatrix;
use crate::family::{FamilyKind, SufficientStatistics};
use crate::segmentation::{Algorithm, FitResult};
use crate::selection::{fit_plan, FitPlan};
use crate::{Error, Result};

/// RNG for replicate `index` under `seed`.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` rows uniformly with replacement; masks travel with rows.
pub fn resample_rows<R: Rng + ?Sized>(data: &DataMatrix, rng: &mut R) -> DataMatrix {
    let n = data.n();
    let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    data.select_rows(&rows)
        .expect("resampled rows keep the shape of a valid matrix")
}

/// Whether replicates reuse the original fit's `lambda` or run the grid
/// selection again.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum LambdaMode {
    #[default]
    ReuseBase,
    Reselect,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapConfig {
    pub family: FamilyKind,
    pub plan: FitPlan,
    pub algorithm: Algorithm,
    pub replicates: usize,
    pub seed: u64,
    pub lambda_mode: LambdaMode,
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        self.family.validate()
    }

    /// Plan used on every replicate once the base fit is known.
    pub fn replicate_plan(&self, base: &FitResult) -> FitPlan {
        match (self.lambda_mode, &self.plan) {
            (LambdaMode::ReuseBase, plan) => FitPlan::Fixed {
                penalty: plan.penalty().with_lambda(base.lambda_used),
            },
            (LambdaMode::Reselect, plan) => plan.clone(),
        }
    }
}

/// Fits the original data.
pub fn base_fit(data: &DataMatrix, config: &BootstrapConfig) -> Result<FitResult> {
    let stats = SufficientStatistics::build(data, config.family.clone())?;
    fit_plan(&stats, &config.plan, config.algorithm)
}

/// Resamples and refits replicate `index` (0-based).
pub fn bootstrap_replicate(
    data: &DataMatrix,
    config: &BootstrapConfig,
    plan: &FitPlan,
    index: usize,
) -> Result<ChangePointSet> {
    let wrap = |e: Error| Error::Replicate {
        index,
        source: Box::new(e),
    };
    let mut rng = replicate_rng(config.seed, index as u64);
    let sample = resample_rows(data, &mut rng);
    let stats = SufficientStatistics::build(&sample, config.family.clone()).map_err(wrap)?;
    Ok(fit_plan(&stats, plan, config.algorithm)
        .map_err(wrap)?
        .change_points)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub seed: u64,
    pub base_fit: FitResult,
    pub replicate_sets: Vec<ChangePointSet>,
    /// Entry `c - 1` counts the replicates containing `c`, for `c` in `1..m`.
    pub detection_counts: Vec<usize>,
}

impl BootstrapSummary {
    pub fn new(
        base_fit: FitResult,
        replicate_sets: Vec<ChangePointSet>,
        seed: u64,
    ) -> Result<Self> {
        let m = base_fit.change_points.m();
        if replicate_sets.is_empty() {
            return Err(Error::Config(
                "bootstrap needs at least one replicate".into(),
            ));
        }
        let mut detection_counts = vec![0usize; m.saturating_sub(1)];
        for set in &replicate_sets {
            if set.m() != m {
                return Err(Error::DimensionMismatch(set.m(), m));
            }
            for &c in set.internal() {
                detection_counts[c - 1] += 1;
            }
        }
        Ok(Self {
            replicates: replicate_sets.len(),
            seed,
            base_fit,
            replicate_sets,
            detection_counts,
        })
    }

    pub fn m(&self) -> usize {
        self.base_fit.change_points.m()
    }

    /// `p(c)` for `c` in `1..m`.
    pub fn detection_rate(&self, c: usize) -> Result<f64> {
        if c == 0 || c >= self.m() {
            return Err(Error::InvalidInterval {
                start: c,
                end: c,
                m: self.m() - 1,
            });
        }
        Ok(self.detection_counts[c - 1] as f64 / self.replicates as f64)
    }

    /// `p(c)` for every `c` in `1..m`, in order.
    pub fn detection_rates(&self) -> Vec<f64> {
        let b = self.replicates as f64;
        self.detection_counts
            .iter()
            .map(|&k| k as f64 / b)
            .collect()
    }

    /// `p(I)`: fraction of replicates with a change point inside `I`.
    pub fn interval_rate(&self, interval: Interval) -> Result<f64> {
        interval.check(self.m().saturating_sub(1))?;
        let hits = self
            .replicate_sets
            .iter()
            .filter(|set| {
                set.internal()
                    .iter()
                    .any(|&c| c >= interval.start && c <= interval.end)
            })
            .count();
        Ok(hits as f64 / self.replicates as f64)
    }
}

/// Sequential bootstrap. The `blockseg` crate offers a parallel driver with
/// identical output.
pub fn bootstrap_run(data: &DataMatrix, config: &BootstrapConfig) -> Result<BootstrapSummary> {
    config.validate()?;
    let base = base_fit(data, config)?;
    let plan = config.replicate_plan(&base);
    let sets = (0..config.replicates)
        .map(|b| bootstrap_replicate(data, config, &plan, b))
        .collect::<Result<Vec<_>>>()?;
    BootstrapSummary::new(base, sets, config.seed)
}

/// Jaccard index `|C1 ∩ C2| / |C1 ∪ C2|` over the full point sets,
/// endpoints included.
pub fn jaccard(a: &ChangePointSet, b: &ChangePointSet) -> Result<f64> {
    if a.m() != b.m() {
        return Err(Error::DimensionMismatch(a.m(), b.m()));
    }
    let (x, y) = (a.points(), b.points());
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = x.len() + y.len() - common;
    Ok(common as f64 / union as f64)
}

/// A distance between change-point sets.
pub trait SetMetric {
    fn distance(&self, a: &ChangePointSet, b: &ChangePointSet) -> Result<f64>;
}

impl<F> SetMetric for F
where
    F: Fn(&ChangePointSet, &ChangePointSet) -> Result<f64>,
{
    fn distance(&self, a: &ChangePointSet, b: &ChangePointSet) -> Result<f64> {
        self(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum StandardMetric {
    /// `1 - jaccard`.
    OneMinusJaccard,
    /// `|k_1 - k_2|`, the difference in internal change-point counts.
    AbsCountDiff,
}

impl SetMetric for StandardMetric {
    fn distance(&self, a: &ChangePointSet, b: &ChangePointSet) -> Result<f64> {
        match self {
            StandardMetric::OneMinusJaccard => Ok(1.0 - jaccard(a, b)?),
            StandardMetric::AbsCountDiff => {
                if a.m() != b.m() {
                    return Err(Error::DimensionMismatch(a.m(), b.m()));
                }
                Ok(a.num_blocks().abs_diff(b.num_blocks()) as f64)
            }
        }
    }
}

/// Mean and `1/B` variance of `d(base, replicate_b)` over the replicates.
pub fn distance_stats<M: SetMetric + ?Sized>(
    summary: &BootstrapSummary,
    metric: &M,
) -> Result<(f64, f64)> {
    let base = &summary.base_fit.change_points;
    let d = summary
        .replicate_sets
        .iter()
        .map(|set| metric.distance(base, set))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_var(&d))
}

pub(crate) fn mean_var(d: &[f64]) -> (f64, f64) {
    if d.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let b = d.len() as f64;
    let mean = d.iter().sum::<f64>() / b;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / b;
    (mean, var)
}

impl core::fmt::Display for StandardMetric {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            StandardMetric::OneMinusJaccard => "one_minus_jaccard",
            StandardMetric::AbsCountDiff => "abs_count_diff",
        })
    }
}

impl core::str::FromStr for StandardMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_minus_jaccard" => Ok(StandardMetric::OneMinusJaccard),
            "abs_count_diff" => Ok(StandardMetric::AbsCountDiff),
            other => Err(Error::Config(format!("unknown set metric {other:?}"))),
        }
    }
}
