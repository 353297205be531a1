//! Exact one-step expectation of the C_n statistic.
//!
//! After querying cell A and receiving y, the truth's weight is divided by
//! the factor `gamma = normalizer / (its own update factor)`, and
//! `C_{n+1} / C_n = (gamma - p(h*)) / (1 - p(h*))`. With `d = (1 + W(p, A)) / 2`
//! the weight predicting +1 on A, gamma takes one of four values depending
//! on `h*(A)` and `y`. Averaging over the query rule's choice of A and over
//! `y` (wrong with probability q_A) gives the expectation exactly.

use super::posterior::{check_beta, weighted_prediction, Posterior};
use super::soft::{query_distribution, QueryRule};
use super::SearchError;
use crate::space::{HypothesisSpace, Label};

fn gamma(d_pos: f64, truth: Label, response: Label, beta: f64) -> f64 {
    let normalizer = match response {
        Label::Pos => (1.0 - d_pos) * beta + d_pos * (1.0 - beta),
        Label::Neg => d_pos * beta + (1.0 - d_pos) * (1.0 - beta),
    };
    let own_factor = if truth == response { 1.0 - beta } else { beta };
    normalizer / own_factor
}

fn check(posterior: &Posterior, space: &HypothesisSpace, truth: usize, levels: &[f64], beta: f64) -> Result<(), SearchError> {
    check_beta(beta)?;
    if posterior.len() != space.n_hypotheses() || posterior.len() < 2 || truth >= posterior.len() {
        return Err(SearchError::Domain("need a posterior over at least two hypotheses and a valid truth".into()));
    }
    if levels.len() != space.n_cells() || levels.iter().any(|&q| !(0.0..=beta).contains(&q)) {
        return Err(SearchError::Domain(format!("noise levels must lie in [0, beta] for each of {} cells", space.n_cells())));
    }
    Ok(())
}

/// `E[gamma | p]` with per-cell flip probabilities `levels`.
pub fn expected_gamma(
    posterior: &Posterior,
    space: &HypothesisSpace,
    truth: usize,
    rule: QueryRule<'_>,
    levels: &[f64],
    beta: f64,
) -> Result<f64, SearchError> {
    check(posterior, space, truth, levels, beta)?;
    let mut total = 0.0;
    for (cell, prob) in query_distribution(posterior, space, rule) {
        let d_pos = (1.0 + weighted_prediction(posterior, space, cell)) / 2.0;
        let t = space.label(truth, cell);
        let q = levels[cell];
        total += prob * ((1.0 - q) * gamma(d_pos, t, t, beta) + q * gamma(d_pos, t, -t, beta));
    }
    Ok(total)
}

/// `E[C_{n+1} / C_n | p_n]` when every cell flips with probability `levels[A]`.
pub fn expected_cn_ratio_per_cell(
    posterior: &Posterior,
    space: &HypothesisSpace,
    truth: usize,
    rule: QueryRule<'_>,
    levels: &[f64],
    beta: f64,
) -> Result<f64, SearchError> {
    let g = expected_gamma(posterior, space, truth, rule, levels, beta)?;
    let p = posterior.probs()[truth];
    Ok((g - p) / (1.0 - p))
}

/// `E[C_{n+1} / C_n | p_n]` under the worst admissible noise, `alpha` on
/// every cell.
pub fn expected_cn_ratio(
    posterior: &Posterior,
    space: &HypothesisSpace,
    truth: usize,
    rule: QueryRule<'_>,
    alpha: f64,
    beta: f64,
) -> Result<f64, SearchError> {
    if !(alpha >= 0.0 && alpha <= beta) {
        return Err(SearchError::Domain(format!("need 0 <= alpha <= beta, got alpha={alpha}, beta={beta}")));
    }
    expected_cn_ratio_per_cell(posterior, space, truth, rule, &vec![alpha; space.n_cells()], beta)
}
