// SPDX-License-Identifier: MIT OR Apache-2.0

//! Parallel drivers over shared, immutable sufficient statistics.
//!
//! Work items (grid values, bootstrap replicates, experiment cells) run on a
//! rayon pool and are gathered back in index order, so every result equals
//! the sequential one in `blockseg-core` regardless of scheduling.

use std::sync::OnceLock;
use std::time::Instant;

use blockseg_core::{
    base_fit, bootstrap_replicate, fit, run_cell_with_clock, Algorithm, BootstrapConfig,
    BootstrapSummary, DataMatrix, Error as CoreError, ExperimentProtocol, ExperimentRow, FitPlan,
    FitResult, LambdaGrid, PenaltySpec, Selection, SufficientStatistics, TrueModel,
};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// A sized rayon pool.
pub struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    /// `workers = None` uses the available parallelism.
    pub fn new(workers: Option<usize>) -> Result<Self> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            if w == 0 {
                return Err(Error::Config("--workers must be at least 1".into()));
            }
            builder = builder.num_threads(w);
        }
        let pool = builder
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// One fit per grid value, in parallel; minimum BIC wins.
    pub fn select_by_bic(
        &self,
        stats: &SufficientStatistics,
        base: &PenaltySpec,
        grid: &LambdaGrid,
        algorithm: Algorithm,
    ) -> Result<Selection> {
        let fits: Vec<_> = self.pool.install(|| {
            grid.values()
                .par_iter()
                .map(|&lambda| timed_fit(stats, &base.with_lambda(lambda), algorithm))
                .collect()
        });
        let fits = first_error(fits)?;
        Ok(Selection::from_fits(stats, fits)?)
    }

    /// Fits according to `plan`; the selection's `(lambda, bic)` scores are
    /// returned alongside when a grid is used.
    pub fn fit_plan(
        &self,
        stats: &SufficientStatistics,
        plan: &FitPlan,
        algorithm: Algorithm,
    ) -> Result<(FitResult, Option<Selection>)> {
        match plan {
            FitPlan::Fixed { penalty } => Ok((timed_fit(stats, penalty, algorithm)?, None)),
            FitPlan::Bic { penalty, grid } => {
                let sel = self.select_by_bic(stats, penalty, grid, algorithm)?;
                Ok((sel.fit.clone(), Some(sel)))
            }
        }
    }

    /// Bootstrap with replicates spread over the pool.
    pub fn bootstrap(
        &self,
        data: &DataMatrix,
        config: &BootstrapConfig,
    ) -> Result<BootstrapSummary> {
        config.validate()?;
        let base = base_fit(data, config)?;
        let plan = config.replicate_plan(&base);
        let sets: Vec<_> = self.pool.install(|| {
            (0..config.replicates)
                .into_par_iter()
                .map(|b| bootstrap_replicate(data, config, &plan, b))
                .collect()
        });
        let sets = first_error(sets.into_iter().map(|r| r.map_err(Error::from)).collect())?;
        Ok(BootstrapSummary::new(base, sets, config.seed)?)
    }

    /// Runs every `(n, replicate)` cell of the experiment. With `timing`,
    /// rows carry wall-clock seconds of each selection.
    pub fn run_experiment(
        &self,
        protocol: &ExperimentProtocol,
        timing: bool,
    ) -> Result<(TrueModel, Vec<ExperimentRow>)> {
        protocol.validate()?;
        let model = protocol.gen_model()?;
        let cells: Vec<(usize, usize)> = protocol
            .n_grid
            .iter()
            .flat_map(|&n| (0..protocol.replicates).map(move |r| (n, r)))
            .collect();
        let results: Vec<_> = self.pool.install(|| {
            cells
                .par_iter()
                .map(|&(n, r)| {
                    let clock: &dyn Fn() -> f64 = &seconds_since_start;
                    run_cell_with_clock(protocol, &model, n, r, timing.then_some(clock))
                        .map_err(Error::from)
                })
                .collect()
        });
        let rows = first_error(results)?.into_iter().flatten().collect();
        Ok((model, rows))
    }
}

fn seconds_since_start() -> f64 {
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}

/// Fit with `diagnostics.wall_seconds` filled in.
pub fn timed_fit(
    stats: &SufficientStatistics,
    spec: &PenaltySpec,
    algorithm: Algorithm,
) -> Result<FitResult, CoreError> {
    let t0 = Instant::now();
    let mut f = fit(stats, spec, algorithm)?;
    f.diagnostics.wall_seconds = Some(t0.elapsed().as_secs_f64());
    Ok(f)
}

/// Unwraps results gathered in index order, reporting the lowest-index
/// failure.
fn first_error<T, E>(results: Vec<Result<T, E>>) -> Result<Vec<T>>
where
    Error: From<E>,
{
    results
        .into_iter()
        .collect::<std::result::Result<Vec<_>, E>>()
        .map_err(Error::from)
}
