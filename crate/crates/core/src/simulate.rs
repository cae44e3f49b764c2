// SPDX-License-Identifier: MIT OR Apache-2.0

//! Synthetic block models and the consistency experiment.
//!
//! An experiment draws one true model (change points and block parameters)
//! and keeps it fixed across every sample size and replicate. For each
//! `(n, replicate)` a fresh data set is drawn and every requested algorithm
//! is fitted with `lambda` chosen by BIC.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Exp1, Normal, Poisson};

use crate::bootstrap::{jaccard, replicate_rng};
use crate::changepoints::ChangePointSet;
use crate::data::DataMatrix;
use crate::family::{BlockParams, FamilyKind, SufficientStatistics};
use crate::penalty::{JnKind, PenaltySpec, RhoKind};
use crate::segmentation::Algorithm;
use crate::selection::{select_by_bic, LambdaGrid};
use crate::{Error, Result};

/// Distributions block parameters are drawn from.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamLaw {
    /// Standard deviation of the normal law of Gaussian block means.
    pub gaussian_mean_sd: f64,
    /// Rate of the exponential law of Gaussian block variances.
    pub gaussian_variance_rate: f64,
    /// Uniform range of exponential-family rates.
    pub exponential_rate: (f64, f64),
    /// Uniform range of Poisson means.
    pub poisson_mean: (f64, f64),
}

impl Default for ParamLaw {
    fn default() -> Self {
        Self {
            gaussian_mean_sd: libm::sqrt(5.0),
            gaussian_variance_rate: 1.0,
            exponential_rate: (0.2, 5.0),
            poisson_mean: (0.5, 10.0),
        }
    }
}

impl ParamLaw {
    /// Bernoulli and Markov probabilities are uniform on `[0, 1]`;
    /// categorical probability vectors are uniform on the simplex.
    pub fn draw<R: Rng + ?Sized>(&self, family: &FamilyKind, rng: &mut R) -> Result<BlockParams> {
        Ok(match *family {
            FamilyKind::Bernoulli => {
                let p: f64 = rng.random();
                BlockParams::Categorical {
                    probs: alloc::vec![1.0 - p, p],
                }
            }
            FamilyKind::Categorical { d } => {
                let w: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
                let total: f64 = w.iter().sum();
                BlockParams::Categorical {
                    probs: w.into_iter().map(|x| x / total).collect(),
                }
            }
            FamilyKind::GaussianKnownVar { variance } => BlockParams::Gaussian {
                mean: self.mean_law()?.sample(rng),
                variance,
                floored: false,
            },
            FamilyKind::GaussianMeanVar => {
                let var_law = Exp::new(self.gaussian_variance_rate)
                    .map_err(|e| Error::Config(format!("variance law: {e}")))?;
                BlockParams::Gaussian {
                    mean: self.mean_law()?.sample(rng),
                    variance: var_law.sample(rng),
                    floored: false,
                }
            }
            FamilyKind::Exponential => BlockParams::Exponential {
                rate: uniform(rng, self.exponential_rate)?,
            },
            FamilyKind::Poisson => BlockParams::Poisson {
                mean: uniform(rng, self.poisson_mean)?,
            },
            FamilyKind::Markov2 => {
                let p0: f64 = rng.random();
                let q0: f64 = rng.random();
                let q1: f64 = rng.random();
                BlockParams::Markov2 {
                    initial: [1.0 - p0, p0],
                    transition: [[1.0 - q0, q0], [1.0 - q1, q1]],
                }
            }
        })
    }

    fn mean_law(&self) -> Result<Normal<f64>> {
        Normal::new(0.0, self.gaussian_mean_sd).map_err(|e| Error::Config(format!("mean law: {e}")))
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> Result<f64> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Config(format!(
            "invalid parameter range ({lo}, {hi})"
        )));
    }
    Ok(lo + (hi - lo) * rng.random::<f64>())
}

/// A block model with known change points and parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrueModel {
    pub family: FamilyKind,
    pub change_points: ChangePointSet,
    pub params: Vec<BlockParams>,
}

impl TrueModel {
    pub fn new(
        family: FamilyKind,
        change_points: ChangePointSet,
        params: Vec<BlockParams>,
    ) -> Result<Self> {
        family.validate()?;
        if params.len() != change_points.num_blocks() {
            return Err(Error::Config(format!(
                "{} parameter sets for {} blocks",
                params.len(),
                change_points.num_blocks()
            )));
        }
        if let Some(j) = params.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::Config(format!(
                "blocks {} and {} share parameters",
                j + 1,
                j + 2
            )));
        }
        Ok(Self {
            family,
            change_points,
            params,
        })
    }

    pub fn m(&self) -> usize {
        self.change_points.m()
    }

    /// Number of internal change points, `k*`.
    pub fn k_star(&self) -> usize {
        self.change_points.num_blocks() - 1
    }
}

/// Draws `k_star` internal change points uniformly without replacement from
/// `1..m` and per-block parameters from `law`, redrawing any block whose
/// parameters equal its predecessor's.
pub fn gen_model<R: Rng + ?Sized>(
    family: &FamilyKind,
    m: usize,
    k_star: usize,
    rng: &mut R,
    law: &ParamLaw,
) -> Result<TrueModel> {
    family.validate()?;
    if m == 0 || k_star > m - 1 {
        return Err(Error::Config(format!(
            "cannot place {k_star} change points among {m} variables"
        )));
    }
    let internal: Vec<usize> = sample(rng, m - 1, k_star)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    let change_points = ChangePointSet::from_internal(m, &internal)?;
    let mut params: Vec<BlockParams> = Vec::with_capacity(k_star + 1);
    for _ in 0..=k_star {
        let mut p = law.draw(family, rng)?;
        while params.last() == Some(&p) {
            p = law.draw(family, rng)?;
        }
        params.push(p);
    }
    TrueModel::new(family.clone(), change_points, params)
}

fn draw_cell<R: Rng + ?Sized>(params: &BlockParams, rng: &mut R) -> Result<f64> {
    Ok(match params {
        BlockParams::Categorical { probs } => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut symbol = probs.len() - 1;
            for (a, p) in probs.iter().enumerate() {
                acc += p;
                if u < acc {
                    symbol = a;
                    break;
                }
            }
            symbol as f64
        }
        BlockParams::Gaussian { mean, variance, .. } => Normal::new(*mean, libm::sqrt(*variance))
            .map_err(|e| Error::Config(format!("gaussian block: {e}")))?
            .sample(rng),
        BlockParams::Exponential { rate } => {
            // Exp can round to exactly zero, which leaves the domain.
            let law =
                Exp::new(*rate).map_err(|e| Error::Config(format!("exponential block: {e}")))?;
            loop {
                let x = law.sample(rng);
                if x > 0.0 {
                    break x;
                }
            }
        }
        BlockParams::Poisson { mean } => Poisson::new(*mean)
            .map_err(|e| Error::Config(format!("poisson block: {e}")))?
            .sample(rng),
        BlockParams::Markov2 { .. } => unreachable!("markov blocks are drawn as chains"),
    })
}

/// Draws `n` i.i.d. rows from `model`.
///
/// Cells are independent within a block except for the Markov family,
/// where each row runs a fresh chain through every block.
pub fn gen_data<R: Rng + ?Sized>(model: &TrueModel, n: usize, rng: &mut R) -> Result<DataMatrix> {
    if n == 0 {
        return Err(Error::Shape("need n >= 1".into()));
    }
    let m = model.m();
    let mut cells = Vec::with_capacity(n * m);
    for _ in 0..n {
        for (block, params) in model.change_points.blocks().zip(&model.params) {
            match params {
                BlockParams::Markov2 {
                    initial,
                    transition,
                } => {
                    let mut state = usize::from(rng.random::<f64>() >= initial[0]);
                    cells.push(state as f64);
                    for _ in 1..block.len() {
                        state = usize::from(rng.random::<f64>() >= transition[state][0]);
                        cells.push(state as f64);
                    }
                }
                other => {
                    for _ in 0..block.len() {
                        cells.push(draw_cell(other, rng)?);
                    }
                }
            }
        }
    }
    DataMatrix::new(n, m, cells)
}

/// Configuration of a consistency experiment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentProtocol {
    pub family: FamilyKind,
    pub m: usize,
    pub k_star: usize,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub lambda_grid: LambdaGrid,
    pub jn: JnKind,
    pub rho: RhoKind,
    pub algorithms: Vec<Algorithm>,
    pub seed: u64,
    pub law: ParamLaw,
}

impl ExperimentProtocol {
    /// Bernoulli, `m = 200`, `J(n) = ln n`, `rho = 1`, `lambda` in
    /// `{0.1, 1, 10}`, `n = 50, 100, ..., 500`, 50 replicates per `n`.
    pub fn bernoulli_default(k_star: usize, seed: u64) -> Self {
        Self {
            family: FamilyKind::Bernoulli,
            m: 200,
            k_star,
            n_grid: (1..=10).map(|i| 50 * i).collect(),
            replicates: 50,
            lambda_grid: LambdaGrid::default(),
            jn: JnKind::LogN,
            rho: RhoKind::ConstOne,
            algorithms: alloc::vec![Algorithm::Dp, Algorithm::Hier],
            seed,
            law: ParamLaw::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config("n grid must be nonempty and positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::Config("need at least one replicate per n".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms requested".into()));
        }
        if self.m == 0 || self.k_star >= self.m {
            return Err(Error::Config(format!(
                "cannot place {} change points among {} variables",
                self.k_star, self.m
            )));
        }
        PenaltySpec::new(self.rho.clone(), self.jn.clone(), 1.0).validate(self.m)
    }

    pub fn model_rng(&self) -> ChaCha8Rng {
        replicate_rng(self.seed, 0)
    }

    /// RNG for the data set of one `(n, replicate)` cell.
    pub fn data_rng(&self, n: usize, replicate: usize) -> ChaCha8Rng {
        let stream = (1u64 << 63) | ((n as u64) << 32) | replicate as u64;
        replicate_rng(self.seed, stream)
    }

    pub fn gen_model(&self) -> Result<TrueModel> {
        gen_model(
            &self.family,
            self.m,
            self.k_star,
            &mut self.model_rng(),
            &self.law,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentRow {
    pub n: usize,
    pub replicate: usize,
    pub algorithm: Algorithm,
    /// Jaccard index against the true change points.
    pub jaccard: f64,
    /// Estimated number of internal change points.
    pub k_hat: usize,
    /// Hierarchical call count; `None` for other algorithms.
    pub calls: Option<u64>,
    pub lambda: f64,
    pub change_points: ChangePointSet,
    pub seconds: Option<f64>,
}

/// Draws one data set and fits it with every algorithm of the protocol.
pub fn run_cell(
    protocol: &ExperimentProtocol,
    model: &TrueModel,
    n: usize,
    replicate: usize,
) -> Result<Vec<ExperimentRow>> {
    run_cell_with_clock(protocol, model, n, replicate, None)
}

/// As [`run_cell`], recording each algorithm's selection time from `clock`,
/// which returns seconds since an arbitrary origin.
pub fn run_cell_with_clock(
    protocol: &ExperimentProtocol,
    model: &TrueModel,
    n: usize,
    replicate: usize,
    clock: Option<&dyn Fn() -> f64>,
) -> Result<Vec<ExperimentRow>> {
    let data = gen_data(model, n, &mut protocol.data_rng(n, replicate))?;
    let stats = SufficientStatistics::build(&data, protocol.family.clone())?;
    let base = PenaltySpec::new(protocol.rho.clone(), protocol.jn.clone(), 1.0);
    protocol
        .algorithms
        .iter()
        .map(|&algorithm| {
            let started = clock.map(|c| c());
            let sel = select_by_bic(&stats, &base, &protocol.lambda_grid, algorithm)?;
            let seconds = clock.zip(started).map(|(c, t0)| c() - t0);
            let fit = sel.fit;
            Ok(ExperimentRow {
                n,
                replicate,
                algorithm,
                jaccard: jaccard(&fit.change_points, &model.change_points)?,
                k_hat: fit.change_points.num_blocks() - 1,
                calls: fit.diagnostics.calls,
                lambda: fit.lambda_used,
                change_points: fit.change_points,
                seconds,
            })
        })
        .collect()
}

/// Runs every cell sequentially, rows ordered by `(n, replicate, algorithm)`
/// as listed in the protocol.
pub fn run_experiment(protocol: &ExperimentProtocol) -> Result<(TrueModel, Vec<ExperimentRow>)> {
    protocol.validate()?;
    let model = protocol.gen_model()?;
    let mut rows = Vec::new();
    for &n in &protocol.n_grid {
        for r in 0..protocol.replicates {
            rows.extend(run_cell(protocol, &model, n, r)?);
        }
    }
    Ok((model, rows))
}
