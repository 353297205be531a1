//! Search algorithms over a hypothesis space.
//!
//! [`run_gbs`] and [`run_ngbs`] keep a version space and query the cell that
//! splits it most evenly; the repetition-coded variant majority-votes each
//! query. [`run_sgbs`] keeps a posterior instead and never discards a
//! hypothesis, which makes it robust to label noise. [`expected_cn_ratio`]
//! evaluates the one-step expected contraction of the posterior exactly.

mod cn;
mod posterior;
mod soft;
mod transcript;

use rand::Rng;
use thiserror::Error;

pub use cn::{expected_cn_ratio, expected_cn_ratio_per_cell, expected_gamma};
pub use posterior::{bayes_update, cn_statistic, weighted_prediction, Posterior};
pub use soft::{query_distribution, run_sgbs, select_query_msgbs, select_query_sgbs, QueryRule, SoftSearch, Variant};
pub use transcript::{Metric, Phase, SearchTranscript, Step};

use crate::oracle::{Oracle, OracleError};
use crate::space::HypothesisSpace;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("every hypothesis was eliminated after {queries} queries")]
    EmptyVersionSpace { queries: usize, transcript: Box<SearchTranscript> },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Domain(String),
}

/// How to choose among equally good queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TiePolicy {
    #[default]
    Random,
    LowestIndex,
}

/// Hypotheses consistent with every response so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VersionSpace {
    alive: Vec<usize>,
}

impl VersionSpace {
    pub fn full(n: usize) -> Self {
        VersionSpace { alive: (0..n).collect() }
    }

    pub fn alive(&self) -> &[usize] {
        &self.alive
    }

    pub fn len(&self) -> usize {
        self.alive.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alive.is_empty()
    }

    /// `|sum_{h alive} h(A)|` for every cell.
    pub fn imbalance(&self, space: &HypothesisSpace) -> Vec<i64> {
        let mut sums = vec![0i64; space.n_cells()];
        for &h in &self.alive {
            for (s, &v) in sums.iter_mut().zip(space.matrix().row(h)) {
                *s += v as i64;
            }
        }
        sums.iter_mut().for_each(|s| *s = s.abs());
        sums
    }

    /// The most balanced cell.
    pub fn split_cell<R: Rng + ?Sized>(&self, space: &HypothesisSpace, ties: TiePolicy, rng: &mut R) -> usize {
        let imbalance = self.imbalance(space);
        let best = *imbalance.iter().min().expect("space has at least one cell");
        let mut candidates = (0..imbalance.len()).filter(|&c| imbalance[c] == best);
        match ties {
            TiePolicy::LowestIndex => candidates.next().unwrap(),
            TiePolicy::Random => {
                let all: Vec<usize> = candidates.collect();
                all[rng.gen_range(0..all.len())]
            }
        }
    }

    pub fn retain(&mut self, space: &HypothesisSpace, cell: usize, label: crate::Label) {
        self.alive.retain(|&h| space.label(h, cell) == label);
    }
}

fn splitting_search<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    repetitions: usize,
    ties: TiePolicy,
    rng: &mut R,
) -> Result<(SearchTranscript, usize), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if repetitions.is_multiple_of(2) {
        return Err(OracleError::EvenRepetition(repetitions).into());
    }
    let truth = oracle.truth_index();
    let start = oracle.query_count();
    let mut vs = VersionSpace::full(space.n_hypotheses());
    let mut transcript = SearchTranscript::default();
    while vs.len() > 1 {
        let cell = vs.split_cell(space, ties, rng);
        let label = if repetitions == 1 { oracle.respond(cell)? } else { oracle.respond_majority(cell, repetitions)?.label };
        vs.retain(space, cell, label);
        // With the version space read as a uniform posterior, C_n = |H_n| - 1.
        let c_n = truth.filter(|t| vs.alive().contains(t)).map(|_| (vs.len() - 1) as f64);
        transcript.push(Step {
            n: transcript.steps.len() + 1,
            cell,
            response: label,
            metric: Metric::VersionSpace(vs.len()),
            c_n,
            draws: repetitions,
            phase: None,
        });
        if vs.is_empty() {
            let queries = oracle.query_count() - start;
            return Err(SearchError::EmptyVersionSpace { queries, transcript: Box::new(transcript) });
        }
    }
    let outcome = vs.alive()[0];
    transcript.outcome = Some(outcome);
    debug_assert_eq!(transcript.queries_used, oracle.query_count() - start);
    Ok((transcript, outcome))
}

/// The splitting algorithm: query the most balanced cell, discard every
/// hypothesis that disagrees, repeat until one remains.
pub fn run_gbs<O, R>(space: &HypothesisSpace, oracle: &mut O, ties: TiePolicy, rng: &mut R) -> Result<(SearchTranscript, usize), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    splitting_search(space, oracle, 1, ties, rng)
}

/// The splitting algorithm with each query repeated `repetitions` times and
/// decided by majority vote.
pub fn run_ngbs<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    repetitions: usize,
    ties: TiePolicy,
    rng: &mut R,
) -> Result<(SearchTranscript, usize), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    splitting_search(space, oracle, repetitions, ties, rng)
}
