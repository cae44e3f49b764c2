// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point detection in the block structure of a random vector.
//!
//! The `m` coordinates of a random vector are partitioned into contiguous
//! blocks of identically distributed variables. Given `n` i.i.d. samples of
//! the vector, the block boundaries are estimated by penalized maximum
//! likelihood: the negative log-likelihood at per-block MLEs plus
//! `lambda * J(n) * R(C)`, where `R` is an additive sum of per-block
//! penalties.
//!
//! Two solvers are provided: an exact dynamic program over prefix optima
//! ([`fit_dp`]) and a greedy hierarchical (binary) splitter ([`fit_hier`]).
//! [`brute_force`] enumerates every segmentation and serves as a test oracle.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! drivers and the command line live in the `blockseg` crate.
//!
//! ```
//! use blockseg_core::{fit_dp, DataMatrix, FamilyKind, PenaltySpec, SufficientStatistics};
//!
//! let rows = vec![vec![0.0, 0.0, 1.0, 1.0]; 10];
//! let data = DataMatrix::from_rows(&rows)?;
//! let stats = SufficientStatistics::build(&data, FamilyKind::Bernoulli)?;
//! let fit = fit_dp(&stats, &PenaltySpec::const_log(1.0))?;
//! assert_eq!(fit.change_points.points(), &[0, 2, 4]);
//! # Ok::<(), blockseg_core::Error>(())
//! ```

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bootstrap;
pub mod changepoints;
pub mod data;
mod error;
pub mod family;
pub mod penalty;
pub mod segmentation;
pub mod selection;
pub mod simulate;

pub use bootstrap::{
    base_fit, bootstrap_replicate, bootstrap_run, distance_stats, jaccard, replicate_rng,
    resample_rows, BootstrapConfig, BootstrapSummary, LambdaMode, SetMetric, StandardMetric,
};
pub use changepoints::{ChangePointSet, Interval};
pub use data::DataMatrix;
pub use error::Error;
pub use family::{BlockParams, FamilyKind, SufficientStatistics, DEFAULT_VARIANCE_FLOOR};
pub use penalty::{Cost, JnKind, MarkerMap, PenaltySpec, RhoKind};
pub use segmentation::{
    brute_force, fit, fit_dp, fit_dp_with, fit_hier, segment_q, Algorithm, Diagnostics, DpOptions,
    FitResult, BRUTE_FORCE_MAX_M,
};
pub use selection::{bic, fit_plan, select_by_bic, FitPlan, LambdaGrid, Selection, BIC_FORMULA};
pub use simulate::{
    gen_data, gen_model, run_cell, run_cell_with_clock, run_experiment, ExperimentProtocol,
    ExperimentRow, ParamLaw, TrueModel,
};

pub type Result<T, E = Error> = core::result::Result<T, E>;
