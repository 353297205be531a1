//! Search that stays safe when the truth may lie outside the space.
//!
//! The budget is split three ways. Modified soft-decision search proposes
//! one candidate, which is excellent when the truth is a member. Empirical
//! risk minimization on passive samples proposes another, which is
//! competitive in any case. A runoff then compares the two on queries drawn
//! only where they disagree.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::Serialize;

use crate::oracle::{NoiseSpec, Oracle};
use crate::search::{Metric, Phase, QueryRule, SearchError, SearchTranscript, SoftSearch, Step};
use crate::space::{HypothesisSpace, Label};

const NORMALIZATION_TOL: f64 = 1e-9;

/// A distribution over cells for passive sampling.
#[derive(Clone, Debug)]
pub struct SamplingMeasure {
    probs: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl SamplingMeasure {
    /// Accepts weights summing to 1 within 1e-9 and renormalizes them exactly.
    pub fn new(probs: Vec<f64>) -> Result<Self, SearchError> {
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) || (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(SearchError::Domain(format!("sampling measure must be nonnegative and sum to 1 (sum {total})")));
        }
        Self::from_weights(probs)
    }

    fn from_weights(mut weights: Vec<f64>) -> Result<Self, SearchError> {
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let index = WeightedIndex::new(&weights).map_err(|e| SearchError::Domain(e.to_string()))?;
        Ok(SamplingMeasure { probs: weights, index })
    }

    pub fn uniform(n_cells: usize) -> Self {
        Self::from_weights(vec![1.0; n_cells]).expect("at least one cell")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mass(&self, cells: &[usize]) -> f64 {
        cells.iter().map(|&c| self.probs[c]).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// Cells where two hypotheses disagree, with the sampling measure restricted
/// to them.
#[derive(Clone, Debug)]
pub struct DisagreementRegion {
    pub cells: Vec<usize>,
    /// `None` when the region is empty.
    pub restricted: Option<SamplingMeasure>,
    /// Mass of the region under the original measure.
    pub mass: f64,
    /// The region is nonempty but has zero mass; `restricted` is then
    /// uniform over its cells.
    pub degenerate: bool,
}

pub fn disagreement_region(space: &HypothesisSpace, h1: usize, h2: usize, px: &SamplingMeasure) -> DisagreementRegion {
    let cells: Vec<usize> = (0..space.n_cells()).filter(|&c| space.value(h1, c) != space.value(h2, c)).collect();
    let mass = px.mass(&cells);
    if cells.is_empty() {
        return DisagreementRegion { cells, restricted: None, mass, degenerate: false };
    }
    let degenerate = !(mass > 0.0);
    let mut weights = vec![0.0; space.n_cells()];
    for &c in &cells {
        weights[c] = if degenerate { 1.0 } else { px.probs()[c] };
    }
    let restricted = SamplingMeasure::from_weights(weights).ok();
    DisagreementRegion { cells, restricted, mass, degenerate }
}

/// Disagreements of one hypothesis with observed labels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub hypothesis: usize,
    pub errors: usize,
    pub samples: usize,
}

impl RiskEstimate {
    pub fn empirical_error(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.errors as f64 / self.samples as f64
        }
    }
}

fn record(log: &mut Option<&mut SearchTranscript>, phase: Phase, cell: usize, response: Label, metric: f64) {
    if let Some(t) = log.as_deref_mut() {
        let n = t.steps.len() + 1;
        t.push(Step { n, cell, response, metric: Metric::EmpiricalRisk(metric), c_n: None, draws: 1, phase: Some(phase) });
    }
}

fn argmin_random<R: Rng + ?Sized>(errors: &[usize], rng: &mut R) -> usize {
    let best = *errors.iter().min().expect("nonempty");
    let ties: Vec<usize> = (0..errors.len()).filter(|&h| errors[h] == best).collect();
    ties[rng.gen_range(0..ties.len())]
}

fn erm_logged<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    px: &SamplingMeasure,
    m: usize,
    rng: &mut R,
    mut log: Option<&mut SearchTranscript>,
) -> Result<(usize, RiskEstimate), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if m == 0 {
        return Err(SearchError::Domain("ERM needs at least one sample".into()));
    }
    let mut errors = vec![0usize; space.n_hypotheses()];
    for i in 0..m {
        let cell = px.sample(rng);
        let y = oracle.respond(cell)?;
        for (h, e) in errors.iter_mut().enumerate() {
            if space.label(h, cell) != y {
                *e += 1;
            }
        }
        let best = *errors.iter().min().unwrap();
        record(&mut log, Phase::Erm, cell, y, best as f64 / (i + 1) as f64);
    }
    let h = argmin_random(&errors, rng);
    Ok((h, RiskEstimate { hypothesis: h, errors: errors[h], samples: m }))
}

/// Empirical risk minimization over `m` i.i.d. draws from `px`.
pub fn run_erm<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    px: &SamplingMeasure,
    m: usize,
    rng: &mut R,
) -> Result<(usize, RiskEstimate), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    erm_logged(space, oracle, px, m, rng, None)
}

/// Empirical error of a fixed hypothesis over `m` draws from `px`.
pub fn estimate_risk<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    px: &SamplingMeasure,
    h: usize,
    m: usize,
    rng: &mut R,
) -> Result<RiskEstimate, SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut errors = 0;
    for _ in 0..m {
        let cell = px.sample(rng);
        if oracle.respond(cell)? != space.label(h, cell) {
            errors += 1;
        }
    }
    Ok(RiskEstimate { hypothesis: h, errors, samples: m })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunoffOutcome {
    pub choice: usize,
    pub first: RiskEstimate,
    pub second: RiskEstimate,
    pub degenerate: bool,
}

fn runoff_logged<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    h1: usize,
    h2: usize,
    px: &SamplingMeasure,
    m: usize,
    rng: &mut R,
    mut log: Option<&mut SearchTranscript>,
) -> Result<RunoffOutcome, SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let region = disagreement_region(space, h1, h2, px);
    let mut first = RiskEstimate { hypothesis: h1, errors: 0, samples: 0 };
    let mut second = RiskEstimate { hypothesis: h2, errors: 0, samples: 0 };
    let Some(restricted) = region.restricted else {
        return Ok(RunoffOutcome { choice: h1, first, second, degenerate: false });
    };
    if m == 0 {
        return Err(SearchError::Domain("runoff needs at least one sample".into()));
    }
    for i in 0..m {
        let cell = restricted.sample(rng);
        let y = oracle.respond(cell)?;
        // On the region exactly one of the two disagrees with any label.
        if space.label(h1, cell) != y {
            first.errors += 1;
        } else {
            second.errors += 1;
        }
        record(&mut log, Phase::Runoff, cell, y, first.errors.min(second.errors) as f64 / (i + 1) as f64);
    }
    first.samples = m;
    second.samples = m;
    let choice = match first.errors.cmp(&second.errors) {
        std::cmp::Ordering::Less => h1,
        std::cmp::Ordering::Greater => h2,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                h1
            } else {
                h2
            }
        }
    };
    Ok(RunoffOutcome { choice, first, second, degenerate: region.degenerate })
}

/// Picks whichever of `h1`, `h2` makes fewer errors on `m` draws from the
/// measure restricted to their disagreement region. Returns `h1` without
/// querying when they never disagree.
pub fn runoff<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    h1: usize,
    h2: usize,
    px: &SamplingMeasure,
    m: usize,
    rng: &mut R,
) -> Result<RunoffOutcome, SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    runoff_logged(space, oracle, h1, h2, px, m, rng, None)
}

#[derive(Clone, Debug, Serialize)]
pub struct AgnosticRun {
    /// Candidate from modified soft-decision search.
    pub h1: usize,
    /// Candidate from empirical risk minimization.
    pub h2: usize,
    pub choice: usize,
    pub runoff: RunoffOutcome,
    #[serde(skip)]
    pub transcript: SearchTranscript,
}

/// Splits `n` queries as `floor(n/3)` soft-decision steps, `floor(n/3)` ERM
/// samples and the remainder for the runoff.
pub fn run_agnostic<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    px: &SamplingMeasure,
    n: usize,
    beta: f64,
    one_neighbors: &[(usize, usize)],
    rng: &mut R,
) -> Result<AgnosticRun, SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if n < 3 {
        return Err(SearchError::Domain(format!("agnostic search needs a budget of at least 3, got {n}")));
    }
    if px.len() != space.n_cells() {
        return Err(SearchError::Domain(format!("sampling measure has {} cells, space has {}", px.len(), space.n_cells())));
    }
    let third = n / 3;
    let mut search = SoftSearch::new(space, beta, QueryRule::Modified { one_neighbors })?.with_phase(Phase::Msgbs);
    for _ in 0..third {
        search.step(oracle, rng)?;
    }
    let (mut transcript, h1) = search.finish(rng);
    let (h2, _) = erm_logged(space, oracle, px, third, rng, Some(&mut transcript))?;
    let outcome = runoff_logged(space, oracle, h1, h2, px, n - 2 * third, rng, Some(&mut transcript))?;
    transcript.outcome = Some(outcome.choice);
    Ok(AgnosticRun { h1, h2, choice: outcome.choice, runoff: outcome, transcript })
}

/// Probability that `h` mislabels a draw from `px`, against labels that
/// follow `truth` but flip with the cell's noise level.
pub fn true_risk(space: &HypothesisSpace, h: usize, px: &SamplingMeasure, truth: &[Label], noise: &NoiseSpec) -> f64 {
    (0..space.n_cells())
        .map(|c| {
            let q = noise.level(c);
            px.probs()[c] * if space.label(h, c) == truth[c] { q } else { 1.0 - q }
        })
        .sum()
}

/// Mass on which `h` disagrees with the noiseless truth.
pub fn noiseless_risk(space: &HypothesisSpace, h: usize, px: &SamplingMeasure, truth: &[Label]) -> f64 {
    (0..space.n_cells()).filter(|&c| space.label(h, c) != truth[c]).map(|c| px.probs()[c]).sum()
}
