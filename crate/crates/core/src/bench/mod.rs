//! Experiment runner behind the `gbs` command-line tool.
//!
//! Each command takes an [`ExperimentConfig`]. `geometry` reports coherence,
//! neighborliness and the rate constants; `run` executes one search and
//! writes its transcript; `montecarlo` runs seeded independent trials in
//! parallel and checks them against the configured guarantee. Trial `t`
//! draws from its own streams, so outputs do not depend on scheduling.

pub mod config;
pub mod experiment;
pub mod report;
pub mod stats;

use std::fs;
use std::io::{BufRead, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use config::{Algorithm, BoundKind, ConfigError, ExperimentConfig, FamilySpec, TruthSpec};
pub use experiment::{Experiment, TrialRecord, TruthDraw};
pub use report::{BoundReport, BoundRow};

use crate::geometry::{epsilon0, gbs_query_bound, gbs_rate, sgbs_rate, GeometryError};
use crate::oracle::{InteractiveOracle, Oracle};
use crate::search::SearchError;
use crate::space::SpaceError;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Runtime(String),
    #[error("writing {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl BenchError {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        BenchError::Config(ConfigError::Invalid(message.into()))
    }

    /// Process exit code: 2 for configuration problems, 3 for failures while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            _ => 3,
        }
    }
}

impl From<SearchError> for BenchError {
    fn from(e: SearchError) -> Self {
        BenchError::Runtime(e.to_string())
    }
}

impl From<GeometryError> for BenchError {
    fn from(e: GeometryError) -> Self {
        BenchError::Runtime(e.to_string())
    }
}

impl From<SpaceError> for BenchError {
    fn from(e: SpaceError) -> Self {
        BenchError::Config(e.into())
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), BenchError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| BenchError::Output { path: path.display().to_string(), source })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometryReport {
    pub family: &'static str,
    #[serde(rename = "N")]
    pub n_hypotheses: usize,
    #[serde(rename = "M")]
    pub n_cells: usize,
    pub complement_pairs: usize,
    pub c_star: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub worst_hypothesis: usize,
    pub residual: f64,
    pub k: usize,
    /// Absent when `c* = 1`.
    pub lambda_gbs: Option<f64>,
    pub gbs_query_bound: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_sgbs: Option<f64>,
}

/// Coherence, neighborliness and rate constants of the configured space.
/// The noise rates are included when the config sets noise or `beta`.
pub fn cmd_geometry(config: ExperimentConfig) -> Result<GeometryReport, BenchError> {
    let noisy = config.noise.bound() > 0.0 || config.beta.is_some();
    let exp = Experiment::new(config)?;
    let g = exp.geometry()?;
    let s = &exp.space;
    let c = g.certificate.c_star;
    let lambda = gbs_rate(c, g.k).ok();
    let (alpha, beta) = (exp.config.noise.bound(), exp.config.beta());
    Ok(GeometryReport {
        family: s.family().name(),
        n_hypotheses: s.n_hypotheses(),
        n_cells: s.n_cells(),
        complement_pairs: s.complement_pairs().len(),
        c_star: c,
        p: g.certificate.p.clone(),
        worst_hypothesis: g.certificate.worst_hypothesis,
        residual: g.certificate.residual,
        k: g.k,
        lambda_gbs: lambda,
        gbs_query_bound: lambda.map(|l| gbs_query_bound(s.n_hypotheses(), l)).transpose()?,
        alpha: noisy.then_some(alpha),
        beta: noisy.then_some(beta),
        epsilon0: noisy.then(|| epsilon0(alpha, beta)).transpose()?,
        lambda_sgbs: if noisy { sgbs_rate(c, alpha, beta).ok() } else { None },
    })
}

/// Writes `geometry.json` when `out` is given.
pub fn geometry_to(config: ExperimentConfig, out: Option<&Path>) -> Result<GeometryReport, BenchError> {
    let report = cmd_geometry(config)?;
    if let Some(dir) = out {
        write_file(dir, "geometry.json", &to_json(&report))?;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub family: &'static str,
    #[serde(rename = "N")]
    pub n_hypotheses: usize,
    #[serde(rename = "M")]
    pub n_cells: usize,
    pub truth: Option<usize>,
    pub held_out: Option<usize>,
    pub outcome: Option<usize>,
    pub success: Option<bool>,
    pub queries_used: usize,
    pub steps: usize,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Candidates>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Candidates {
    pub h1: usize,
    pub h2: usize,
    pub degenerate_runoff: bool,
}

fn search_budget(config: &ExperimentConfig) -> usize {
    match config.algorithm {
        Algorithm::Agnostic => config.budget.or(config.checkpoints.last().copied()).unwrap_or(0),
        _ => config.soft_budget(),
    }
}

fn run_with<O: Oracle + ?Sized>(
    exp: &Experiment,
    truth: Option<TruthDraw>,
    oracle: &mut O,
) -> Result<(RunSummary, String), BenchError> {
    let start = Instant::now();
    // An interactive run has no known truth; the search itself never looks
    // at it, so any draw serves for choosing the space.
    let draw = truth.unwrap_or(TruthDraw::Member(0));
    let out = exp.search(0, draw, oracle, search_budget(&exp.config), &[])?;
    let member = truth.and_then(|t| match t {
        TruthDraw::Member(h) => Some(h),
        TruthDraw::HeldOut(_) => None,
    });
    let summary = RunSummary {
        algorithm: exp.config.algorithm,
        family: exp.space.family().name(),
        n_hypotheses: exp.space.n_hypotheses(),
        n_cells: exp.space.n_cells(),
        truth: member,
        held_out: truth.and_then(|t| match t {
            TruthDraw::HeldOut(h) => Some(h),
            TruthDraw::Member(_) => None,
        }),
        outcome: out.outcome,
        success: member.map(|h| out.outcome == Some(h)),
        queries_used: oracle.query_count(),
        steps: out.transcript.steps.len(),
        wall_seconds: start.elapsed().as_secs_f64(),
        candidates: out.agnostic.as_ref().map(|a| Candidates { h1: a.h1, h2: a.h2, degenerate_runoff: a.runoff.degenerate }),
    };
    Ok((summary, out.transcript.to_csv()))
}

fn single_run_checks(config: &ExperimentConfig) -> Result<(), BenchError> {
    if config.trials != 1 {
        return Err(BenchError::config("run executes a single trial; use montecarlo for more"));
    }
    if config.truth == TruthSpec::Exhaustive {
        return Err(BenchError::config("an exhaustive truth needs montecarlo"));
    }
    if config.algorithm == Algorithm::Agnostic && config.checkpoints.len() > 1 && config.budget.is_none() {
        return Err(BenchError::config("run takes one agnostic budget"));
    }
    Ok(())
}

/// One simulated search. Writes `transcript.csv` and `summary.json` to `out`.
pub fn cmd_run(config: ExperimentConfig, out: &Path) -> Result<RunSummary, BenchError> {
    single_run_checks(&config)?;
    let exp = Experiment::new(config)?;
    let truth = exp.draw_truth(0);
    let mut oracle = exp.simulated_oracle(0, truth)?;
    let (summary, csv) = run_with(&exp, Some(truth), &mut oracle)?;
    write_file(out, "transcript.csv", &csv)?;
    write_file(out, "summary.json", &to_json(&summary))?;
    Ok(summary)
}

/// One search answered by a person: prompts go to `output`, labels are read
/// from `input`.
pub fn cmd_interactive<R: BufRead, W: Write>(
    config: ExperimentConfig,
    input: R,
    output: W,
    out: Option<&Path>,
) -> Result<RunSummary, BenchError> {
    single_run_checks(&config)?;
    if matches!(config.truth, TruthSpec::HeldOut { .. }) {
        return Err(BenchError::config("an interactive run has no held-out truth"));
    }
    let exp = Experiment::new(config)?;
    let mut oracle = InteractiveOracle::new(&exp.space, input, output);
    let (summary, csv) = run_with(&exp, None, &mut oracle)?;
    if let Some(dir) = out {
        write_file(dir, "transcript.csv", &csv)?;
        write_file(dir, "summary.json", &to_json(&summary))?;
    }
    Ok(summary)
}

/// Runs every trial, in parallel, and aggregates in run order. Writes
/// `trials.csv`, `report.csv` and `report.json` to `out`.
pub fn cmd_montecarlo(config: ExperimentConfig, out: &Path) -> Result<BoundReport, BenchError> {
    let exp = Experiment::new(config)?;
    if exp.config.bound_kind() == BoundKind::Supermartingale {
        let samples = (0..exp.config.trials)
            .into_par_iter()
            .map(|s| exp.ratio_sample(s))
            .collect::<Result<Vec<_>, _>>()?;
        let report = report::supermartingale_report(&exp, &samples);
        write_file(out, "trials.csv", &experiment::ratios_csv(&samples))?;
        write_file(out, "report.csv", &report.to_csv())?;
        write_file(out, "report.json", &to_json(&report))?;
        return Ok(report);
    }
    let records = (0..exp.runs()).into_par_iter().map(|r| exp.trial(r)).collect::<Result<Vec<_>, _>>()?;
    let report = report::build_report(&exp, &records)?;
    write_file(out, "trials.csv", &experiment::trials_csv(exp.config.algorithm, &exp.config.checkpoints, &records))?;
    write_file(out, "report.csv", &report.to_csv())?;
    write_file(out, "report.json", &to_json(&report))?;
    Ok(report)
}
