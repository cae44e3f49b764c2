// SPDX-License-Identifier: MIT OR Apache-2.0

//! Choosing `lambda` from a finite grid by BIC.
//!
//! `BIC = -2 l(C) + d log n` with `d = k_C * p + (k_C - 1)`: `p` free
//! parameters per block plus one location per internal change point.

use alloc::format;
use alloc::vec::Vec;

use crate::family::SufficientStatistics;
use crate::penalty::PenaltySpec;
use crate::segmentation::{fit, Algorithm, FitResult};
use crate::{Error, Result};

/// Human-readable form of the score, for output metadata.
pub const BIC_FORMULA: &str =
    "bic = -2*loglik + (k*p + (k-1))*ln(n); k = blocks, p = free parameters per block";

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(try_from = "Vec<f64>", into = "Vec<f64>")
)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    /// Drops duplicates, keeping first occurrences.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Config(format!(
                "lambda grid values must be positive, got {bad}"
            )));
        }
        let mut out: Vec<f64> = Vec::with_capacity(values.len());
        for v in values {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(Self { values: out })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for LambdaGrid {
    fn default() -> Self {
        Self {
            values: alloc::vec![0.1, 1.0, 10.0],
        }
    }
}

impl TryFrom<Vec<f64>> for LambdaGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<LambdaGrid> for Vec<f64> {
    fn from(g: LambdaGrid) -> Self {
        g.values
    }
}

/// BIC of a fit on the data summarized by `stats`.
pub fn bic(stats: &SufficientStatistics, fit: &FitResult) -> f64 {
    let k = fit.change_points.num_blocks();
    let d = k * stats.family().free_params() + (k - 1);
    2.0 * fit.neg_loglik + d as f64 * libm::log(stats.n() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// The minimum-BIC fit.
    pub fit: FitResult,
    pub bic: f64,
    /// `(lambda, bic)` for every grid value, in grid order.
    pub scores: Vec<(f64, f64)>,
}

impl Selection {
    /// Picks the minimum-BIC fit; ties go to the smallest `lambda`.
    pub fn from_fits(stats: &SufficientStatistics, fits: Vec<FitResult>) -> Result<Self> {
        let scores: Vec<(f64, f64)> = fits
            .iter()
            .map(|f| (f.lambda_used, bic(stats, f)))
            .collect();
        let winner = scores
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)))
            .map(|(i, _)| i)
            .ok_or_else(|| Error::Config("lambda grid is empty".into()))?;
        let bic = scores[winner].1;
        let fit = fits.into_iter().nth(winner).expect("index in range");
        Ok(Self { fit, bic, scores })
    }
}

/// Fits once per grid value with `base`'s `rho` and `J(n)`, and keeps the
/// minimum-BIC fit.
pub fn select_by_bic(
    stats: &SufficientStatistics,
    base: &PenaltySpec,
    grid: &LambdaGrid,
    algorithm: Algorithm,
) -> Result<Selection> {
    let fits = grid
        .values()
        .iter()
        .map(|&lambda| fit(stats, &base.with_lambda(lambda), algorithm))
        .collect::<Result<Vec<_>>>()?;
    Selection::from_fits(stats, fits)
}

/// How `lambda` is obtained for a fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(tag = "mode", rename_all = "snake_case")
)]
pub enum FitPlan {
    Fixed {
        penalty: PenaltySpec,
    },
    /// `penalty.lambda` is ignored.
    Bic {
        penalty: PenaltySpec,
        grid: LambdaGrid,
    },
}

impl FitPlan {
    pub fn penalty(&self) -> &PenaltySpec {
        match self {
            FitPlan::Fixed { penalty } | FitPlan::Bic { penalty, .. } => penalty,
        }
    }
}

pub fn fit_plan(
    stats: &SufficientStatistics,
    plan: &FitPlan,
    algorithm: Algorithm,
) -> Result<FitResult> {
    match plan {
        FitPlan::Fixed { penalty } => fit(stats, penalty, algorithm),
        FitPlan::Bic { penalty, grid } => Ok(select_by_bic(stats, penalty, grid, algorithm)?.fit),
    }
}
