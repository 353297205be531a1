//! Soft-decision search: query where the posterior is most uncertain, update
//! multiplicatively, never eliminate.

use rand::Rng;

use super::posterior::{check_beta, weighted_prediction, Posterior};
use super::{Metric, Phase, SearchError, SearchTranscript, Step};
use crate::oracle::Oracle;
use crate::space::HypothesisSpace;

/// Slack on comparisons of weighted predictions, so the minimizing cell is
/// never itself mistaken for one side of a bipolar pair.
const W_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    Plain,
    Modified,
}

/// How the next cell is chosen from the current posterior.
#[derive(Clone, Copy, Debug)]
pub enum QueryRule<'g> {
    /// A cell minimizing `|W(p, A)|`.
    Plain,
    /// Prefer a random side of a 1-neighbor pair straddling zero by more than
    /// the minimum `|W|`; fall back to the plain rule.
    Modified { one_neighbors: &'g [(usize, usize)] },
}

enum Candidates {
    Minimizers(Vec<usize>),
    /// Ordered `(positive side, negative side)`.
    Bipolar(Vec<(usize, usize)>),
}

fn candidates(posterior: &Posterior, space: &HypothesisSpace, rule: QueryRule<'_>) -> Candidates {
    let w: Vec<f64> = (0..space.n_cells()).map(|c| weighted_prediction(posterior, space, c)).collect();
    let b = w.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    if let QueryRule::Modified { one_neighbors } = rule {
        let pairs: Vec<(usize, usize)> = one_neighbors
            .iter()
            .filter_map(|&(x, y)| {
                if w[x] > b + W_TOL && w[y] < -b - W_TOL {
                    Some((x, y))
                } else if w[y] > b + W_TOL && w[x] < -b - W_TOL {
                    Some((y, x))
                } else {
                    None
                }
            })
            .collect();
        if !pairs.is_empty() {
            return Candidates::Bipolar(pairs);
        }
    }
    Candidates::Minimizers((0..w.len()).filter(|&c| w[c].abs() <= b + W_TOL).collect())
}

/// Probability of each cell being queried next, as `(cell, probability)`
/// pairs over the cells with nonzero probability, in increasing cell order.
pub fn query_distribution(posterior: &Posterior, space: &HypothesisSpace, rule: QueryRule<'_>) -> Vec<(usize, f64)> {
    let mut mass = vec![0.0; space.n_cells()];
    match candidates(posterior, space, rule) {
        Candidates::Minimizers(cells) => {
            let share = 1.0 / cells.len() as f64;
            cells.iter().for_each(|&c| mass[c] += share);
        }
        Candidates::Bipolar(pairs) => {
            let share = 0.5 / pairs.len() as f64;
            for (x, y) in pairs {
                mass[x] += share;
                mass[y] += share;
            }
        }
    }
    mass.into_iter().enumerate().filter(|&(_, m)| m > 0.0).collect()
}

fn select<R: Rng + ?Sized>(posterior: &Posterior, space: &HypothesisSpace, rule: QueryRule<'_>, rng: &mut R) -> usize {
    match candidates(posterior, space, rule) {
        Candidates::Minimizers(cells) => cells[rng.gen_range(0..cells.len())],
        Candidates::Bipolar(pairs) => {
            let (x, y) = pairs[rng.gen_range(0..pairs.len())];
            if rng.gen_bool(0.5) {
                x
            } else {
                y
            }
        }
    }
}

/// A minimizer of `|W(p, A)|`, ties uniform.
pub fn select_query_sgbs<R: Rng + ?Sized>(posterior: &Posterior, space: &HypothesisSpace, rng: &mut R) -> usize {
    select(posterior, space, QueryRule::Plain, rng)
}

pub fn select_query_msgbs<R: Rng + ?Sized>(
    posterior: &Posterior,
    space: &HypothesisSpace,
    one_neighbors: &[(usize, usize)],
    rng: &mut R,
) -> usize {
    select(posterior, space, QueryRule::Modified { one_neighbors }, rng)
}

/// Stepwise soft-decision search, for callers that inspect the estimate
/// along the way.
pub struct SoftSearch<'s, 'g> {
    space: &'s HypothesisSpace,
    posterior: Posterior,
    beta: f64,
    rule: QueryRule<'g>,
    phase: Option<Phase>,
    transcript: SearchTranscript,
}

impl<'s, 'g> SoftSearch<'s, 'g> {
    pub fn new(space: &'s HypothesisSpace, beta: f64, rule: QueryRule<'g>) -> Result<Self, SearchError> {
        check_beta(beta)?;
        Ok(SoftSearch {
            space,
            posterior: Posterior::uniform(space.n_hypotheses()),
            beta,
            rule,
            phase: None,
            transcript: SearchTranscript::default(),
        })
    }

    /// Tags every recorded step with `phase`.
    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn posterior(&self) -> &Posterior {
        &self.posterior
    }

    pub fn transcript(&self) -> &SearchTranscript {
        &self.transcript
    }

    /// Queries one cell and updates the posterior; returns the cell.
    pub fn step<O, R>(&mut self, oracle: &mut O, rng: &mut R) -> Result<usize, SearchError>
    where
        O: Oracle + ?Sized,
        R: Rng + ?Sized,
    {
        let cell = select(&self.posterior, self.space, self.rule, rng);
        let label = oracle.respond(cell)?;
        self.posterior.update(self.space, cell, label, self.beta)?;
        self.transcript.push(Step {
            n: self.transcript.steps.len() + 1,
            cell,
            response: label,
            metric: Metric::MaxWeight(self.posterior.max_weight()),
            c_n: oracle.truth_index().map(|t| self.posterior.cn(t)),
            draws: 1,
            phase: self.phase,
        });
        Ok(cell)
    }

    /// A hypothesis of largest posterior weight, ties uniform.
    pub fn estimate<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.posterior.argmax(rng)
    }

    pub fn finish<R: Rng + ?Sized>(mut self, rng: &mut R) -> (SearchTranscript, usize) {
        let outcome = self.estimate(rng);
        self.transcript.outcome = Some(outcome);
        (self.transcript, outcome)
    }
}

/// Runs exactly `budget` query/update steps and reports the posterior mode.
pub fn run_sgbs<O, R>(
    space: &HypothesisSpace,
    oracle: &mut O,
    beta: f64,
    budget: usize,
    rule: QueryRule<'_>,
    rng: &mut R,
) -> Result<(SearchTranscript, usize), SearchError>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut search = SoftSearch::new(space, beta, rule)?;
    for _ in 0..budget {
        search.step(oracle, rng)?;
    }
    Ok(search.finish(rng))
}
