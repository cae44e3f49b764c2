// SPDX-License-Identifier: MIT OR Apache-2.0

//! Solvers for the penalized-likelihood change-point estimator.
//!
//! With an additive penalty the objective decouples over blocks:
//! `PL(C) = sum_j Q((c_{j-1} + 1):c_j)` where
//! `Q(I) = -loglik(I) + lambda * J(n) * rho(I)`.
//!
//! * [`fit_dp`] solves `F(i) = min_c F(c) + Q((c + 1):i)` exactly in
//!   `O(m^2)` block evaluations.
//! * [`fit_hier`] splits greedily: on `I = r:s` it picks the `c` minimizing
//!   `h_I(c) = PL(r:c) + PL((c + 1):s)`, where `h_I(s) = PL(I)`, and stops
//!   on `I` when that `c` is `s`.
//! * [`brute_force`] enumerates all `2^(m-1)` sets.
//!
//! Every argmin resolves ties toward the smallest index, so all three agree
//! on the order given by [`ChangePointSet::tie_break_cmp`].

use alloc::vec;
use alloc::vec::Vec;

use crate::changepoints::{ChangePointSet, Interval};
use crate::family::{BlockParams, SufficientStatistics};
use crate::penalty::{Cost, PenaltySpec, RhoKind};
use crate::{Error, Result};

/// Largest `m` accepted by [`brute_force`].
pub const BRUTE_FORCE_MAX_M: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "snake_case")
)]
pub enum Algorithm {
    Dp,
    Hier,
    Brute,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dp => "dp",
            Algorithm::Hier => "hier",
            Algorithm::Brute => "brute",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    /// Intervals examined by the hierarchical splitter.
    pub calls: Option<u64>,
    /// Number of `Q` evaluations.
    pub cost_evaluations: u64,
    /// 1-based indices of blocks whose variance estimate was floored.
    pub degenerate_blocks: Vec<usize>,
    /// Filled in by callers that can read a clock.
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub change_points: ChangePointSet,
    pub block_params: Vec<BlockParams>,
    /// `PL(C) = -l(C) + lambda * J(n) * R(C)`.
    pub objective: f64,
    /// `-l(C)`.
    pub neg_loglik: f64,
    pub lambda_used: f64,
    /// `J(n)` at the data's sample size.
    pub jn: f64,
    pub algorithm: Algorithm,
    pub diagnostics: Diagnostics,
}

/// Block objective `Q` for one data set and penalty.
struct Objective<'a> {
    stats: &'a SufficientStatistics,
    spec: &'a PenaltySpec,
    scale: f64,
}

impl<'a> Objective<'a> {
    fn new(stats: &'a SufficientStatistics, spec: &'a PenaltySpec) -> Result<Self> {
        spec.validate(stats.m())?;
        let scale = spec.lambda * spec.jn(stats.n())?;
        Ok(Self { stats, spec, scale })
    }

    /// `Q((prev + 1):end)`.
    #[inline]
    fn q(&self, prev: usize, end: usize) -> Cost {
        let rho = match &self.spec.rho {
            RhoKind::ConstOne => Cost::finite(1.0),
            _ => match self.spec.rho(Interval::new(prev + 1, end)) {
                Ok(r) => r,
                Err(_) => unreachable!("interval within validated marker map"),
            },
        };
        if rho.is_infinite() {
            return Cost::INFINITE;
        }
        Cost::finite(self.stats.cost_between(prev, end)) + rho.scale(self.scale)
    }

    /// `sum_j Q(block_j)`, accumulated left to right.
    fn total(&self, c: &ChangePointSet) -> Cost {
        c.points()
            .windows(2)
            .fold(Cost::ZERO, |acc, w| acc + self.q(w[0], w[1]))
    }

    fn finish(
        &self,
        change_points: ChangePointSet,
        objective: Cost,
        algorithm: Algorithm,
        mut diagnostics: Diagnostics,
    ) -> Result<FitResult> {
        if objective.is_infinite() {
            return Err(Error::NoFeasibleSegmentation);
        }
        let mut block_params = Vec::with_capacity(change_points.num_blocks());
        let mut neg_loglik = 0.0;
        for (j, block) in change_points.blocks().enumerate() {
            let params = self.stats.segment_mle(block)?;
            if params.is_degenerate() {
                diagnostics.degenerate_blocks.push(j + 1);
            }
            block_params.push(params);
            neg_loglik += self.stats.segment_neg_loglik(block)?;
        }
        Ok(FitResult {
            change_points,
            block_params,
            objective: objective.value(),
            neg_loglik,
            lambda_used: self.spec.lambda,
            jn: self.spec.jn(self.stats.n())?,
            algorithm,
            diagnostics,
        })
    }
}

/// `Q(I) = -loglik(I) + lambda * J(n) * rho(I)`; `+inf` iff `rho(I)` is.
pub fn segment_q(
    stats: &SufficientStatistics,
    spec: &PenaltySpec,
    interval: Interval,
) -> Result<Cost> {
    interval.check(stats.m())?;
    let obj = Objective::new(stats, spec)?;
    let rho = spec.rho(interval)?;
    if rho.is_infinite() {
        return Ok(Cost::INFINITE);
    }
    Ok(Cost::finite(stats.segment_neg_loglik(interval)?) + rho.scale(obj.scale))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DpOptions {
    /// Precompute every `Q` into a dense `m x m` table first.
    pub cache_costs: bool,
}

pub fn fit_dp(stats: &SufficientStatistics, spec: &PenaltySpec) -> Result<FitResult> {
    fit_dp_with(stats, spec, DpOptions::default())
}

pub fn fit_dp_with(
    stats: &SufficientStatistics,
    spec: &PenaltySpec,
    options: DpOptions,
) -> Result<FitResult> {
    let obj = Objective::new(stats, spec)?;
    let m = stats.m();
    let cache = options.cache_costs.then(|| {
        let mut table = vec![Cost::INFINITE; m * m];
        for end in 1..=m {
            for prev in 0..end {
                table[prev * m + end - 1] = obj.q(prev, end);
            }
        }
        table
    });
    let q = |prev: usize, end: usize| match &cache {
        Some(t) => t[prev * m + end - 1],
        None => obj.q(prev, end),
    };

    // best[i] = F(i), the optimal PL of columns 1..=i; back[i] is the last
    // change point before i in that optimum.
    let mut best = vec![Cost::INFINITE; m + 1];
    let mut back = vec![0usize; m + 1];
    best[0] = Cost::ZERO;
    for end in 1..=m {
        let mut min = Cost::INFINITE;
        let mut arg = 0;
        for (prev, &f) in best[..end].iter().enumerate() {
            if f.is_infinite() {
                continue;
            }
            let cand = f + q(prev, end);
            if cand < min {
                min = cand;
                arg = prev;
            }
        }
        best[end] = min;
        back[end] = arg;
    }
    if best[m].is_infinite() {
        return Err(Error::NoFeasibleSegmentation);
    }

    let mut points = vec![m];
    let mut i = m;
    while i > 0 {
        i = back[i];
        points.push(i);
    }
    points.reverse();
    let change_points = ChangePointSet::new(points)?;
    let diagnostics = Diagnostics {
        cost_evaluations: (m * (m + 1) / 2) as u64,
        ..Diagnostics::default()
    };
    obj.finish(change_points, best[m], Algorithm::Dp, diagnostics)
}

pub fn fit_hier(stats: &SufficientStatistics, spec: &PenaltySpec) -> Result<FitResult> {
    let obj = Objective::new(stats, spec)?;
    let m = stats.m();
    let mut internal = Vec::new();
    let mut calls = 0u64;
    let mut evals = 0u64;
    // Intervals as (prev, end), i.e. columns prev + 1 ..= end.
    let mut stack = vec![(0usize, m)];
    while let Some((prev, end)) = stack.pop() {
        calls += 1;
        // h_I(s) = PL(I)
        let mut min = obj.q(prev, end);
        let mut arg = end;
        evals += 1;
        for c in prev + 1..end {
            let h = obj.q(prev, c) + obj.q(c, end);
            evals += 2;
            if h < min || (h == min && c < arg) {
                min = h;
                arg = c;
            }
        }
        if min.is_infinite() {
            // Only reachable on the root: split halves are finite by
            // construction.
            return Err(Error::NoFeasibleSegmentation);
        }
        if arg != end {
            internal.push(arg);
            stack.push((arg, end));
            stack.push((prev, arg));
        }
    }
    let change_points = ChangePointSet::from_internal(m, &internal)?;
    let objective = obj.total(&change_points);
    let diagnostics = Diagnostics {
        calls: Some(calls),
        cost_evaluations: evals,
        ..Diagnostics::default()
    };
    obj.finish(change_points, objective, Algorithm::Hier, diagnostics)
}

/// Exhaustive minimum over all `2^(m-1)` change-point sets, `m <= 20`.
pub fn brute_force(stats: &SufficientStatistics, spec: &PenaltySpec) -> Result<FitResult> {
    let m = stats.m();
    if m > BRUTE_FORCE_MAX_M {
        return Err(Error::TooLarge {
            m,
            cap: BRUTE_FORCE_MAX_M,
        });
    }
    let obj = Objective::new(stats, spec)?;
    let mut best: Option<(Cost, ChangePointSet)> = None;
    let mut evals = 0u64;
    for mask in 0u32..(1u32 << (m - 1)) {
        let mut points = Vec::with_capacity(mask.count_ones() as usize + 2);
        points.push(0);
        points.extend((1..m).filter(|c| mask & (1 << (c - 1)) != 0));
        points.push(m);
        let cand = ChangePointSet::new(points)?;
        evals += cand.num_blocks() as u64;
        let value = obj.total(&cand);
        let better = match &best {
            None => true,
            Some((v, c)) => value < *v || (value == *v && cand.tie_break_cmp(c).is_lt()),
        };
        if better {
            best = Some((value, cand));
        }
    }
    let (value, change_points) = best.expect("at least one candidate");
    let diagnostics = Diagnostics {
        cost_evaluations: evals,
        ..Diagnostics::default()
    };
    obj.finish(change_points, value, Algorithm::Brute, diagnostics)
}

pub fn fit(
    stats: &SufficientStatistics,
    spec: &PenaltySpec,
    algorithm: Algorithm,
) -> Result<FitResult> {
    match algorithm {
        Algorithm::Dp => fit_dp(stats, spec),
        Algorithm::Hier => fit_hier(stats, spec),
        Algorithm::Brute => brute_force(stats, spec),
    }
}

impl FitResult {
    /// Recomputes `sum_j Q(block_j)` from the statistics.
    pub fn recompute_objective(
        &self,
        stats: &SufficientStatistics,
        spec: &PenaltySpec,
    ) -> Result<Cost> {
        let obj = Objective::new(stats, spec)?;
        Ok(obj.total(&self.change_points))
    }
}
