//! Posterior weights over hypotheses and the multiplicative update.

use rand::Rng;

use super::SearchError;
use crate::space::{HypothesisSpace, Label};

const TIE_TOL: f64 = 1e-12;

/// Probability vector over hypotheses, kept as normalized log-weights so
/// that long runs never underflow a weight to zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    log_weights: Vec<f64>,
    probs: Vec<f64>,
}

impl Posterior {
    pub fn uniform(n: usize) -> Self {
        Self::from_log_weights(vec![0.0; n])
    }

    pub fn from_weights(weights: &[f64]) -> Result<Self, SearchError> {
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(SearchError::Domain("posterior weights must be positive and finite".into()));
        }
        Ok(Self::from_log_weights(weights.iter().map(|w| w.ln()).collect()))
    }

    fn from_log_weights(mut log_weights: Vec<f64>) -> Self {
        let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + log_weights.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        log_weights.iter_mut().for_each(|l| *l -= lse);
        let probs = log_weights.iter().map(|l| l.exp()).collect();
        Posterior { log_weights, probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn max_weight(&self) -> f64 {
        self.probs.iter().copied().fold(0.0, f64::max)
    }

    /// Multiplies agreeing weights by `1 - beta`, disagreeing ones by `beta`,
    /// and renormalizes.
    pub fn update(&mut self, space: &HypothesisSpace, cell: usize, label: Label, beta: f64) -> Result<(), SearchError> {
        check_beta(beta)?;
        let (agree, disagree) = ((1.0 - beta).ln(), beta.ln());
        let y = label.value();
        let lw: Vec<f64> = self
            .log_weights
            .iter()
            .enumerate()
            .map(|(h, l)| l + if space.value(h, cell) == y { agree } else { disagree })
            .collect();
        *self = Self::from_log_weights(lw);
        Ok(())
    }

    /// Index of a largest weight, ties broken uniformly at random.
    pub fn argmax<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let best = self.log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..self.len()).filter(|&h| self.log_weights[h] >= best - TIE_TOL).collect();
        ties[rng.gen_range(0..ties.len())]
    }

    /// `(1 - p(h*)) / p(h*)`, computed from log-weights so it stays accurate
    /// when `p(h*)` is close to 1.
    pub fn cn(&self, truth: usize) -> f64 {
        let lt = self.log_weights[truth];
        self.log_weights.iter().enumerate().filter(|&(h, _)| h != truth).map(|(_, l)| (l - lt).exp()).sum()
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<(), SearchError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(SearchError::Domain(format!("beta must lie in (0, 1/2), got {beta}")));
    }
    Ok(())
}

/// `W(p, A) = sum_h p(h) h(A)`.
pub fn weighted_prediction(posterior: &Posterior, space: &HypothesisSpace, cell: usize) -> f64 {
    posterior.probs().iter().enumerate().map(|(h, p)| p * space.value(h, cell) as f64).sum()
}

pub fn bayes_update(
    posterior: &Posterior,
    space: &HypothesisSpace,
    cell: usize,
    label: Label,
    beta: f64,
) -> Result<Posterior, SearchError> {
    let mut next = posterior.clone();
    next.update(space, cell, label, beta)?;
    Ok(next)
}

/// The C_n statistic of a posterior relative to the truth.
pub fn cn_statistic(posterior: &Posterior, truth: usize) -> f64 {
    posterior.cn(truth)
}
