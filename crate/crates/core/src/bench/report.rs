//! Aggregation of Monte Carlo runs against the configured guarantee.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::{Algorithm, BoundKind};
use super::experiment::{Experiment, RatioSample, TrialRecord};
use super::stats::{wilson, MeanEstimate, Z95};
use super::BenchError;
use crate::fmt_f64;

/// One compared quantity. A row passes when the lower edge of its 95%
/// interval is at most the bound, or when there is no bound. A zero bound
/// therefore demands zero failures.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    /// What is estimated: `failure` (a probability) or `risk` (a mean).
    pub check: &'static str,
    /// Query count, budget, or repetitions the row refers to.
    pub n: usize,
    pub trials: usize,
    pub failures: Option<usize>,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl BoundRow {
    fn failure(n: usize, failures: usize, trials: usize, bound: Option<f64>) -> Self {
        let (lower, upper) = wilson(failures, trials, Z95);
        BoundRow {
            check: "failure",
            n,
            trials,
            failures: Some(failures),
            estimate: failures as f64 / trials as f64,
            lower,
            upper,
            bound,
            pass: bound.is_none_or(|b| lower <= b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueryStats {
    pub mean: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub algorithm: Algorithm,
    pub family: &'static str,
    #[serde(rename = "N")]
    pub n_hypotheses: usize,
    #[serde(rename = "M")]
    pub n_cells: usize,
    pub runs: usize,
    pub seed: u64,
    /// Constants the bounds were computed from.
    pub constants: serde_json::Map<String, serde_json::Value>,
    pub queries: Option<QueryStats>,
    pub rows: Vec<BoundRow>,
    pub pass: bool,
}

impl BoundReport {
    fn new(exp: &Experiment, kind: BoundKind, runs: usize) -> Self {
        BoundReport {
            kind,
            algorithm: exp.config.algorithm,
            family: exp.space.family().name(),
            n_hypotheses: exp.space.n_hypotheses(),
            n_cells: exp.space.n_cells(),
            runs,
            seed: exp.config.seed,
            constants: serde_json::Map::new(),
            queries: None,
            rows: Vec::new(),
            pass: true,
        }
    }

    fn constant(&mut self, key: &str, value: impl Into<serde_json::Value>) {
        self.constants.insert(key.into(), value.into());
    }

    fn finish(mut self) -> Self {
        self.pass = self.rows.iter().all(|r| r.pass);
        self
    }

    /// Rows as CSV: `check,n,trials,failures,estimate,lower,upper,bound,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,n,trials,failures,estimate,lower,upper,bound,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.check,
                r.n,
                r.trials,
                r.failures.map(|f| f.to_string()).unwrap_or_default(),
                fmt_f64(r.estimate),
                fmt_f64(r.lower),
                fmt_f64(r.upper),
                r.bound.map(fmt_f64).unwrap_or_default(),
                u8::from(r.pass)
            );
        }
        out
    }
}

fn query_stats(records: &[TrialRecord]) -> Option<QueryStats> {
    let q: Vec<usize> = records.iter().map(|r| r.queries).collect();
    Some(QueryStats {
        mean: q.iter().sum::<usize>() as f64 / q.len().max(1) as f64,
        min: *q.iter().min()?,
        max: *q.iter().max()?,
    })
}

fn failures(records: &[TrialRecord]) -> usize {
    records.iter().filter(|r| r.success == Some(false)).count()
}

/// Aggregates trial records in run order.
pub fn build_report(exp: &Experiment, records: &[TrialRecord]) -> Result<BoundReport, BenchError> {
    let kind = exp.config.bound_kind();
    let runs = records.len();
    let n = exp.space.n_hypotheses() as f64;
    let alpha = exp.config.noise.bound();
    let mut report = BoundReport::new(exp, kind, runs);
    report.queries = query_stats(records);
    match exp.config.algorithm {
        Algorithm::Gbs | Algorithm::Ngbs => {
            let mut row = match kind {
                // A constant hypothesis leaves the ceiling infinite; only
                // identification is checked then.
                BoundKind::QueryBound if exp.geometry()?.certificate.c_star >= 1.0 => {
                    report.constant("lambda_gbs", 1.0);
                    report.constant("gbs_query_bound", serde_json::Value::Null);
                    BoundRow::failure(0, failures(records), runs, Some(0.0))
                }
                BoundKind::QueryBound => {
                    let (lambda, ceiling) = exp.query_bound()?;
                    report.constant("lambda_gbs", lambda);
                    report.constant("gbs_query_bound", ceiling);
                    let over = records.iter().filter(|r| r.queries > ceiling || r.success == Some(false)).count();
                    BoundRow::failure(ceiling, over, runs, Some(0.0))
                }
                BoundKind::RepetitionFailure => {
                    let delta = exp.config.delta.expect("validated");
                    let r = exp.repetitions()?;
                    report.constant("repetitions", r);
                    report.constant("delta", delta);
                    BoundRow::failure(r, failures(records), runs, Some(delta))
                }
                _ => BoundRow::failure(0, failures(records), runs, None),
            };
            if exp.config.algorithm == Algorithm::Ngbs && kind != BoundKind::RepetitionFailure {
                row.n = exp.repetitions()?;
            }
            report.rows.push(row);
        }
        Algorithm::Sgbs | Algorithm::Msgbs => {
            let lambda = if kind == BoundKind::ErrorDecay {
                let l = exp.decay_rate()?;
                report.constant("lambda_sgbs", l);
                report.constant("beta", exp.config.beta());
                report.constant("alpha", alpha);
                Some(l)
            } else {
                None
            };
            for (i, &c) in exp.config.checkpoints.iter().enumerate() {
                let wrong = records.iter().filter(|r| r.wrong_at[i]).count();
                let bound = lambda.map(|l| n * (1.0 - l).powi(c as i32));
                report.rows.push(BoundRow::failure(c, wrong, runs, bound));
            }
            let budget = exp.config.soft_budget();
            if exp.config.checkpoints.last() != Some(&budget) {
                let bound = lambda.map(|l| n * (1.0 - l).powi(budget as i32));
                report.rows.push(BoundRow::failure(budget, failures(records), runs, bound));
            }
        }
        Algorithm::Agnostic => {
            let checked = kind == BoundKind::Agnostic;
            let members = records.iter().all(|r| r.truth.member.is_some());
            let lambda = if checked && members {
                let l = exp.decay_rate()?;
                report.constant("lambda_sgbs", l);
                Some(l)
            } else {
                None
            };
            report.constant("alpha", alpha);
            report.constant("beta", exp.config.beta());
            for (i, budget) in exp.config.checkpoints().into_iter().enumerate() {
                let at: Vec<_> = records.iter().map(|r| &r.agnostic[i]).collect();
                let chosen: Vec<f64> = at.iter().map(|a| a.risk_choice).collect();
                let first = MeanEstimate::of(&at.iter().map(|a| a.risk_h1).collect::<Vec<_>>());
                let second = MeanEstimate::of(&at.iter().map(|a| a.risk_h2).collect::<Vec<_>>());
                let best = if first.mean <= second.mean { first } else { second };
                // Interval from the paired difference to the better candidate.
                let diffs: Vec<f64> = at
                    .iter()
                    .map(|a| a.risk_choice - if first.mean <= second.mean { a.risk_h1 } else { a.risk_h2 })
                    .collect();
                let mean = MeanEstimate::of(&chosen).mean;
                let se = MeanEstimate::of(&diffs).std_error;
                let bound = checked.then(|| best.mean + (3.0 / budget as f64).sqrt());
                let lower = mean - Z95 * se;
                report.rows.push(BoundRow {
                    check: "risk",
                    n: budget,
                    trials: runs,
                    failures: None,
                    estimate: mean,
                    lower,
                    upper: mean + Z95 * se,
                    bound,
                    pass: bound.is_none_or(|b| lower <= b),
                });
                if members {
                    let wrong = records.iter().zip(&at).filter(|(r, a)| r.truth.member != Some(a.choice)).count();
                    let nb = budget as f64;
                    let bound = lambda.map(|l| n * (-l * nb / 3.0).exp() + 2.0 * (-nb * (1.0 - 2.0 * alpha).powi(2) / 6.0).exp());
                    report.rows.push(BoundRow::failure(budget, wrong, runs, bound));
                }
            }
        }
    }
    Ok(report.finish())
}

pub fn supermartingale_report(exp: &Experiment, samples: &[RatioSample]) -> BoundReport {
    let mut report = BoundReport::new(exp, BoundKind::Supermartingale, samples.len());
    let violations = samples
        .iter()
        .filter(|s| s.ratio > 1.0 + 1e-12 || (s.beta - s.alpha >= 0.01 && s.ratio >= 1.0))
        .count();
    let max = samples.iter().map(|s| s.ratio).fold(f64::NEG_INFINITY, f64::max);
    report.constant("max_ratio", max);
    report.constant("tolerance", 1e-12);
    report.rows.push(BoundRow::failure(1, violations, samples.len(), Some(0.0)));
    report.finish()
}
