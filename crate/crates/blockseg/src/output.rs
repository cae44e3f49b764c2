// SPDX-License-Identifier: MIT OR Apache-2.0

//! Output documents. See `FORMATS.md` for the field reference.
//!
//! Every document carries `schema_version`, the resolved run configuration
//! and the seed. CSV outputs put them in leading `# key: value` comment
//! lines, with JSON values.

use std::io::Write;

use blockseg_core::{
    distance_stats, BootstrapSummary, ExperimentRow, FitResult, Selection, StandardMetric,
    TrueModel, BIC_FORMULA,
};
use serde::{Deserialize, Serialize};

use crate::cli::RunConfig;
use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaScore {
    pub lambda: f64,
    pub bic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub fit: FitResult,
    pub bic: f64,
    pub bic_formula: String,
    /// Present when `lambda` was chosen from a grid.
    pub lambda_scores: Option<Vec<LambdaScore>>,
}

impl FitDocument {
    pub fn new(config: RunConfig, fit: FitResult, bic: f64, selection: Option<&Selection>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: config.seed,
            config,
            fit,
            bic,
            bic_formula: BIC_FORMULA.to_owned(),
            lambda_scores: selection.map(|s| {
                s.scores
                    .iter()
                    .map(|&(lambda, bic)| LambdaScore { lambda, bic })
                    .collect()
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRate {
    pub index: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStat {
    pub metric: String,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub seed: u64,
    pub replicates: usize,
    pub base_fit: FitResult,
    pub bic: f64,
    pub detection_rates: Vec<IndexRate>,
    pub distances: Vec<DistanceStat>,
    pub replicate_sets: Vec<Vec<usize>>,
}

impl BootstrapDocument {
    pub fn new(config: RunConfig, summary: &BootstrapSummary, bic: f64) -> Result<Self> {
        let distances = [
            StandardMetric::OneMinusJaccard,
            StandardMetric::AbsCountDiff,
        ]
        .into_iter()
        .map(|metric| {
            let (mean, variance) = distance_stats(summary, &metric)?;
            Ok(DistanceStat {
                metric: metric.to_string(),
                mean,
                variance,
            })
        })
        .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            config,
            seed: summary.seed,
            replicates: summary.replicates,
            base_fit: summary.base_fit.clone(),
            bic,
            detection_rates: summary
                .detection_rates()
                .into_iter()
                .enumerate()
                .map(|(i, rate)| IndexRate { index: i + 1, rate })
                .collect(),
            distances,
            replicate_sets: summary
                .replicate_sets
                .iter()
                .map(|c| c.points().to_vec())
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateDocument {
    pub schema_version: u32,
    pub config: RunConfig,
    pub seed: u64,
    pub true_model: TrueModel,
    pub rows: Vec<ExperimentRow>,
}

fn meta_line<W: Write, T: Serialize + ?Sized>(out: &mut W, key: &str, value: &T) -> Result<()> {
    writeln!(out, "# {key}: {}", serde_json::to_string(value)?).map_err(csv::Error::from)?;
    Ok(())
}

fn config_header<W: Write>(out: &mut W, config: &RunConfig) -> Result<()> {
    meta_line(out, "schema_version", &SCHEMA_VERSION)?;
    meta_line(out, "config", config)?;
    meta_line(out, "seed", &config.seed)
}

/// Block table: `block,start,end,params` with params as JSON.
pub fn write_fit_csv<W: Write>(mut out: W, doc: &FitDocument) -> Result<()> {
    config_header(&mut out, &doc.config)?;
    meta_line(&mut out, "change_points", &doc.fit.change_points)?;
    meta_line(&mut out, "objective", &doc.fit.objective)?;
    meta_line(&mut out, "lambda_used", &doc.fit.lambda_used)?;
    meta_line(&mut out, "bic", &doc.bic)?;
    meta_line(&mut out, "bic_formula", &doc.bic_formula)?;
    meta_line(&mut out, "diagnostics", &doc.fit.diagnostics)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["block", "start", "end", "params"])?;
    for (j, (block, params)) in doc
        .fit
        .change_points
        .blocks()
        .zip(&doc.fit.block_params)
        .enumerate()
    {
        w.write_record([
            (j + 1).to_string(),
            block.start.to_string(),
            block.end.to_string(),
            serde_json::to_string(params)?,
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `index,rate` table of detection rates.
pub fn write_bootstrap_csv<W: Write>(mut out: W, doc: &BootstrapDocument) -> Result<()> {
    config_header(&mut out, &doc.config)?;
    meta_line(&mut out, "replicates", &doc.replicates)?;
    meta_line(&mut out, "base_change_points", &doc.base_fit.change_points)?;
    meta_line(&mut out, "lambda_used", &doc.base_fit.lambda_used)?;
    meta_line(&mut out, "distances", &doc.distances)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "rate"])?;
    for r in &doc.detection_rates {
        w.write_record([r.index.to_string(), r.rate.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `n,replicate,algorithm,jaccard,k_hat,calls,seconds`; `calls` is empty
/// for non-hierarchical rows and `seconds` unless timing was requested.
pub fn write_simulate_csv<W: Write>(mut out: W, doc: &SimulateDocument) -> Result<()> {
    config_header(&mut out, &doc.config)?;
    meta_line(
        &mut out,
        "true_change_points",
        &doc.true_model.change_points,
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "replicate",
        "algorithm",
        "jaccard",
        "k_hat",
        "calls",
        "seconds",
    ])?;
    for r in &doc.rows {
        w.write_record([
            r.n.to_string(),
            r.replicate.to_string(),
            r.algorithm.name().to_owned(),
            r.jaccard.to_string(),
            r.k_hat.to_string(),
            r.calls.map(|c| c.to_string()).unwrap_or_default(),
            r.seconds.map(|s| s.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
