// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line interface: argument parsing, resolved configuration and the
//! `fit`, `bootstrap` and `simulate` subcommands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use blockseg_core::{
    bic, Algorithm, BootstrapConfig, ExperimentProtocol, FamilyKind, FitPlan, JnKind, LambdaGrid,
    LambdaMode, ParamLaw, PenaltySpec, RhoKind, SufficientStatistics,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_marker_map, load_matrix};
use crate::output::{
    write_bootstrap_csv, write_fit_csv, write_simulate_csv, BootstrapDocument, FitDocument,
    SimulateDocument, SCHEMA_VERSION,
};
use crate::parallel::Runner;

#[derive(Debug, Parser)]
#[command(
    name = "blockseg",
    version,
    about = "Change-point detection in block structure by penalized likelihood"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one data matrix.
    Fit(FitArgs),
    /// Bootstrap detection rates for each change point.
    Bootstrap(BootstrapArgs),
    /// Synthetic consistency experiment.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Delimited matrix, one sample per row.
    pub input: PathBuf,
    #[arg(long, default_value = "dp", value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Field delimiter: `,`, `;`, `tab`. Detected when omitted.
    #[arg(long, value_parser = parse_delimiter)]
    pub delimiter: Option<char>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    pub input: PathBuf,
    #[arg(long, default_value = "dp", value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_parser = parse_delimiter)]
    pub delimiter: Option<char>,
    /// Number of bootstrap replicates.
    #[arg(long = "bootstrap", default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Choose lambda afresh in every replicate instead of reusing the base fit's.
    #[arg(long)]
    pub reselect_lambda: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Number of variables.
    #[arg(long, default_value_t = 200)]
    pub m: usize,
    /// Number of true change points.
    #[arg(long, default_value_t = 10)]
    pub k_star: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "50,100,150,200,250,300,350,400,450,500"
    )]
    pub n_grid: Vec<usize>,
    /// Data sets per sample size.
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long, value_delimiter = ',', default_value = "dp,hier", value_parser = parse_algorithm)]
    pub algorithms: Vec<Algorithm>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record wall-clock seconds per fit (output is then not reproducible byte for byte).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Family and penalty options shared by all subcommands.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// bernoulli, categorical:D, gaussian_known_var:V, gaussian_mean_var,
    /// exponential, poisson or markov2.
    #[arg(long, value_parser = parse_family)]
    pub family: FamilyKind,
    /// Fixed penalty weight.
    #[arg(long, conflicts_with = "lambda_grid")]
    pub lambda: Option<f64>,
    /// Candidate weights for BIC selection [default: 0.1,1,10].
    #[arg(long, value_delimiter = ',')]
    pub lambda_grid: Option<Vec<f64>>,
    /// Sample-size scaling: log, sqrt or pow:ALPHA.
    #[arg(long, default_value = "log", value_parser = parse_jn)]
    pub jn: JnKind,
    #[arg(long, value_enum, default_value_t = PenaltyKind::Const)]
    pub penalty: PenaltyKind,
    /// Base-pair position of every variable; required by `--penalty roh`.
    #[arg(long)]
    pub marker_map: Option<PathBuf>,
    /// Minimum block span T, in units of beta base pairs.
    #[arg(long, default_value_t = 1.0)]
    pub min_span_mb: f64,
    #[arg(long, default_value_t = RhoKind::DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to json for fit, csv otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; defaults to available parallelism.
    #[arg(long, env = "BLOCKSEG_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    Const,
    Roh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubcommandName {
    Fit,
    Bootstrap,
    Simulate,
}

/// How lambda is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LambdaChoice {
    Fixed { lambda: f64 },
    Bic { grid: LambdaGrid },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub m: usize,
    pub k_star: usize,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub algorithms: Vec<Algorithm>,
    pub timing: bool,
    pub law: ParamLaw,
}

/// Fully resolved run configuration, embedded in every output.
///
/// The output path and worker count are left out: neither affects results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: SubcommandName,
    pub family: FamilyKind,
    pub algorithm: Option<Algorithm>,
    pub lambda: LambdaChoice,
    pub jn: JnKind,
    pub penalty: PenaltyKind,
    pub marker_map: Option<PathBuf>,
    pub min_span_mb: f64,
    pub beta: f64,
    pub bootstrap: Option<usize>,
    pub lambda_mode: Option<LambdaMode>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub delimiter: Option<char>,
    pub format: Format,
    pub simulate: Option<SimulateConfig>,
    pub schema_version: u32,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn base(subcommand: SubcommandName, model: &ModelArgs, output: &OutputArgs) -> Result<Self> {
        let lambda = match (&model.lambda, &model.lambda_grid) {
            (Some(l), _) => LambdaChoice::Fixed { lambda: *l },
            (None, Some(g)) => LambdaChoice::Bic {
                grid: LambdaGrid::new(g.clone()).map_err(config)?,
            },
            (None, None) => LambdaChoice::Bic {
                grid: LambdaGrid::default(),
            },
        };
        let default_format = match subcommand {
            SubcommandName::Fit => Format::Json,
            _ => Format::Csv,
        };
        Ok(Self {
            subcommand,
            family: model.family.clone(),
            algorithm: None,
            lambda,
            jn: model.jn.clone(),
            penalty: model.penalty,
            marker_map: model.marker_map.clone(),
            min_span_mb: model.min_span_mb,
            beta: model.beta,
            bootstrap: None,
            lambda_mode: None,
            seed: None,
            input: None,
            delimiter: None,
            format: output.format.unwrap_or(default_format),
            simulate: None,
            schema_version: SCHEMA_VERSION,
            out: output.out.clone(),
        })
    }

    /// Resolves and validates the configuration, before any data is read.
    pub fn resolve(command: &Command) -> Result<(Self, Option<usize>)> {
        let (config, output) = match command {
            Command::Fit(a) => {
                let mut c = Self::base(SubcommandName::Fit, &a.model, &a.output)?;
                c.algorithm = Some(a.algorithm);
                c.input = Some(a.input.clone());
                c.delimiter = a.delimiter;
                (c, &a.output)
            }
            Command::Bootstrap(a) => {
                let mut c = Self::base(SubcommandName::Bootstrap, &a.model, &a.output)?;
                c.algorithm = Some(a.algorithm);
                c.input = Some(a.input.clone());
                c.delimiter = a.delimiter;
                c.bootstrap = Some(a.replicates);
                c.seed = Some(a.seed);
                c.lambda_mode = Some(if a.reselect_lambda {
                    LambdaMode::Reselect
                } else {
                    LambdaMode::ReuseBase
                });
                (c, &a.output)
            }
            Command::Simulate(a) => {
                let mut c = Self::base(SubcommandName::Simulate, &a.model, &a.output)?;
                c.seed = Some(a.seed);
                c.simulate = Some(SimulateConfig {
                    m: a.m,
                    k_star: a.k_star,
                    n_grid: a.n_grid.clone(),
                    replicates: a.replicates,
                    algorithms: a.algorithms.clone(),
                    timing: a.timing,
                    law: ParamLaw::default(),
                });
                (c, &a.output)
            }
        };
        config.validate()?;
        if output.workers == Some(0) {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        Ok((config, output.workers))
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate().map_err(config)?;
        let lambda = match &self.lambda {
            LambdaChoice::Fixed { lambda } => *lambda,
            LambdaChoice::Bic { .. } => 1.0,
        };
        PenaltySpec::new(RhoKind::ConstOne, self.jn.clone(), lambda)
            .validate(1)
            .map_err(config)?;
        if self.penalty == PenaltyKind::Roh {
            if self.marker_map.is_none() {
                return Err(Error::Config("--penalty roh requires --marker-map".into()));
            }
            if !(self.beta > 0.0 && self.beta.is_finite()) {
                return Err(Error::Config(format!(
                    "--beta must be positive, got {}",
                    self.beta
                )));
            }
            if !(self.min_span_mb >= 0.0 && self.min_span_mb.is_finite()) {
                return Err(Error::Config(format!(
                    "--min-span-mb must be nonnegative, got {}",
                    self.min_span_mb
                )));
            }
        } else if self.marker_map.is_some() {
            return Err(Error::Config(
                "--marker-map is only used with --penalty roh".into(),
            ));
        }
        if self.bootstrap == Some(0) {
            return Err(Error::Config("--bootstrap must be at least 1".into()));
        }
        if let Some(s) = &self.simulate {
            self.protocol(s, RhoKind::ConstOne)
                .validate()
                .map_err(config)?;
        }
        Ok(())
    }

    /// Penalty for `m` variables; reads the marker map for the roh kind.
    pub fn penalty_spec(&self, m: usize) -> Result<PenaltySpec> {
        let rho = match (self.penalty, &self.marker_map) {
            (PenaltyKind::Roh, Some(path)) => RhoKind::Roh {
                markers: load_marker_map(path, m)?,
                threshold: self.min_span_mb,
                beta: self.beta,
            },
            (PenaltyKind::Roh, None) => {
                return Err(Error::Config("--penalty roh requires --marker-map".into()))
            }
            (PenaltyKind::Const, _) => RhoKind::ConstOne,
        };
        let lambda = match &self.lambda {
            LambdaChoice::Fixed { lambda } => *lambda,
            LambdaChoice::Bic { grid } => grid.values()[0],
        };
        let spec = PenaltySpec::new(rho, self.jn.clone(), lambda);
        spec.validate(m).map_err(config)?;
        Ok(spec)
    }

    pub fn plan(&self, m: usize) -> Result<FitPlan> {
        let penalty = self.penalty_spec(m)?;
        Ok(match &self.lambda {
            LambdaChoice::Fixed { .. } => FitPlan::Fixed { penalty },
            LambdaChoice::Bic { grid } => FitPlan::Bic {
                penalty,
                grid: grid.clone(),
            },
        })
    }

    fn protocol(&self, s: &SimulateConfig, rho: RhoKind) -> ExperimentProtocol {
        let lambda_grid = match &self.lambda {
            LambdaChoice::Fixed { lambda } => LambdaGrid::new(vec![*lambda]).unwrap_or_default(),
            LambdaChoice::Bic { grid } => grid.clone(),
        };
        ExperimentProtocol {
            family: self.family.clone(),
            m: s.m,
            k_star: s.k_star,
            n_grid: s.n_grid.clone(),
            replicates: s.replicates,
            lambda_grid,
            jn: self.jn.clone(),
            rho,
            algorithms: s.algorithms.clone(),
            seed: self.seed.unwrap_or(0),
            law: s.law.clone(),
        }
    }
}

fn config(e: blockseg_core::Error) -> Error {
    Error::Config(e.to_string())
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let (config, workers) = RunConfig::resolve(&cli.command)?;
    let runner = Runner::new(workers)?;
    let bytes = match config.subcommand {
        SubcommandName::Fit => run_fit(&config, &runner)?,
        SubcommandName::Bootstrap => run_bootstrap(&config, &runner)?,
        SubcommandName::Simulate => run_simulate(&config, &runner)?,
    };
    emit(config.out.as_deref(), &bytes)
}

fn input(config: &RunConfig) -> Result<blockseg_core::DataMatrix> {
    let path = config
        .input
        .as_deref()
        .ok_or_else(|| Error::Config("missing input file".into()))?;
    let delimiter = config.delimiter.map(|c| c as u8);
    load_matrix(path, &config.family, delimiter)
}

fn run_fit(config: &RunConfig, runner: &Runner) -> Result<Vec<u8>> {
    let data = input(config)?;
    let plan = config.plan(data.m())?;
    let stats = SufficientStatistics::build(&data, config.family.clone())?;
    let algorithm = config.algorithm.unwrap_or(Algorithm::Dp);
    let (fit, selection) = runner.fit_plan(&stats, &plan, algorithm)?;
    let score = selection
        .as_ref()
        .map_or_else(|| bic(&stats, &fit), |s| s.bic);
    let doc = FitDocument::new(config.clone(), fit, score, selection.as_ref());
    let mut out = Vec::new();
    match config.format {
        Format::Json => json(&mut out, &doc)?,
        Format::Csv => write_fit_csv(&mut out, &doc)?,
    }
    Ok(out)
}

fn run_bootstrap(config: &RunConfig, runner: &Runner) -> Result<Vec<u8>> {
    let data = input(config)?;
    let bootstrap = BootstrapConfig {
        family: config.family.clone(),
        plan: config.plan(data.m())?,
        algorithm: config.algorithm.unwrap_or(Algorithm::Dp),
        replicates: config.bootstrap.unwrap_or(200),
        seed: config.seed.unwrap_or(0),
        lambda_mode: config.lambda_mode.unwrap_or_default(),
    };
    let summary = runner.bootstrap(&data, &bootstrap)?;
    let stats = SufficientStatistics::build(&data, config.family.clone())?;
    let score = bic(&stats, &summary.base_fit);
    let doc = BootstrapDocument::new(config.clone(), &summary, score)?;
    let mut out = Vec::new();
    match config.format {
        Format::Json => json(&mut out, &doc)?,
        Format::Csv => write_bootstrap_csv(&mut out, &doc)?,
    }
    Ok(out)
}

fn run_simulate(config: &RunConfig, runner: &Runner) -> Result<Vec<u8>> {
    let s = config
        .simulate
        .as_ref()
        .ok_or_else(|| Error::Config("missing simulation settings".into()))?;
    let protocol = config.protocol(s, config.penalty_spec(s.m)?.rho);
    let (true_model, rows) = runner.run_experiment(&protocol, s.timing)?;
    let doc = SimulateDocument {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        seed: protocol.seed,
        true_model,
        rows,
    };
    let mut out = Vec::new();
    match config.format {
        Format::Json => json(&mut out, &doc)?,
        Format::Csv => write_simulate_csv(&mut out, &doc)?,
    }
    Ok(out)
}

fn json<T: Serialize>(out: &mut Vec<u8>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.push(b'\n');
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| Error::Io {
            path: p.to_owned(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Machine-readable error document written to standard error.
pub fn error_json(kind: &str, message: &str, exit_code: i32) -> String {
    serde_json::json!({
        "error": { "kind": kind, "message": message, "exit_code": exit_code }
    })
    .to_string()
}

pub fn parse_family(s: &str) -> std::result::Result<FamilyKind, String> {
    let (name, arg) = match s.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (s, None),
    };
    let family = match (name, arg) {
        ("bernoulli", None) => FamilyKind::Bernoulli,
        ("categorical", Some(d)) => FamilyKind::Categorical {
            d: d.parse().map_err(|_| format!("bad alphabet size {d:?}"))?,
        },
        ("gaussian_known_var", Some(v)) => FamilyKind::GaussianKnownVar {
            variance: v.parse().map_err(|_| format!("bad variance {v:?}"))?,
        },
        ("gaussian_mean_var", None) => FamilyKind::GaussianMeanVar,
        ("exponential", None) => FamilyKind::Exponential,
        ("poisson", None) => FamilyKind::Poisson,
        ("markov2", None) => FamilyKind::Markov2,
        ("categorical", None) => {
            return Err("categorical needs an alphabet size: categorical:D".into())
        }
        ("gaussian_known_var", None) => {
            return Err("gaussian_known_var needs a variance: gaussian_known_var:V".into())
        }
        _ => return Err(format!("unknown family {s:?}")),
    };
    family.validate().map_err(|e| e.to_string())?;
    Ok(family)
}

pub fn parse_jn(s: &str) -> std::result::Result<JnKind, String> {
    match s {
        "log" => Ok(JnKind::LogN),
        "sqrt" => Ok(JnKind::SqrtN),
        _ => match s.strip_prefix("pow:") {
            Some(a) => a
                .parse()
                .map(JnKind::Power)
                .map_err(|_| format!("bad exponent {a:?}")),
            None => Err(format!("expected log, sqrt or pow:ALPHA, got {s:?}")),
        },
    }
}

pub fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    match s {
        "dp" => Ok(Algorithm::Dp),
        "hier" => Ok(Algorithm::Hier),
        "brute" => Ok(Algorithm::Brute),
        _ => Err(format!("expected dp, hier or brute, got {s:?}")),
    }
}

pub fn parse_delimiter(s: &str) -> std::result::Result<char, String> {
    match s {
        "tab" | "\\t" | "\t" => Ok('\t'),
        "," | ";" | " " | "|" => Ok(s.chars().next().unwrap_or(',')),
        _ => Err(format!("unsupported delimiter {s:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<(RunConfig, Option<usize>)> {
        let cli = Cli::try_parse_from(std::iter::once("blockseg").chain(args.iter().copied()))
            .map_err(|e| Error::Config(e.to_string()))?;
        RunConfig::resolve(&cli.command)
    }

    #[test]
    fn families_parse() {
        assert_eq!(
            parse_family("categorical:4"),
            Ok(FamilyKind::Categorical { d: 4 })
        );
        assert_eq!(
            parse_family("gaussian_known_var:2.5"),
            Ok(FamilyKind::GaussianKnownVar { variance: 2.5 })
        );
        assert!(parse_family("categorical:1").is_err());
        assert!(parse_family("gaussian_known_var").is_err());
        assert!(parse_family("weibull").is_err());
    }

    #[test]
    fn jn_parse() {
        assert_eq!(parse_jn("pow:0.5"), Ok(JnKind::Power(0.5)));
        assert!(parse_jn("cube").is_err());
    }

    #[test]
    fn defaults_resolve() {
        let (c, _) = parse(&["fit", "x.csv", "--family", "bernoulli"]).unwrap();
        assert_eq!(
            c.lambda,
            LambdaChoice::Bic {
                grid: LambdaGrid::default()
            }
        );
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.algorithm, Some(Algorithm::Dp));
        let (c, _) = parse(&["simulate", "--family", "bernoulli", "--lambda", "2"]).unwrap();
        assert_eq!(c.format, Format::Csv);
        assert_eq!(c.simulate.unwrap().n_grid.len(), 10);
    }

    #[test]
    fn validation_before_compute() {
        let roh = parse(&[
            "fit",
            "missing.csv",
            "--family",
            "bernoulli",
            "--penalty",
            "roh",
        ]);
        assert_eq!(roh.unwrap_err().exit_code(), 2);
        let b0 = parse(&[
            "bootstrap",
            "missing.csv",
            "--family",
            "bernoulli",
            "--bootstrap",
            "0",
        ]);
        assert_eq!(b0.unwrap_err().exit_code(), 2);
        let neg = parse(&["fit", "missing.csv", "--family", "bernoulli", "--lambda=-1"]);
        assert_eq!(neg.unwrap_err().exit_code(), 2);
        let alpha = parse(&[
            "fit",
            "missing.csv",
            "--family",
            "bernoulli",
            "--jn",
            "pow:1.5",
        ]);
        assert_eq!(alpha.unwrap_err().exit_code(), 2);
        let both = parse(&[
            "fit",
            "x",
            "--family",
            "bernoulli",
            "--lambda",
            "1",
            "--lambda-grid",
            "1,2",
        ]);
        assert!(both.is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let (c, _) = parse(&[
            "bootstrap",
            "x.csv",
            "--family",
            "categorical:3",
            "--jn",
            "sqrt",
            "--seed",
            "9",
        ])
        .unwrap();
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }
}
