//! Neighbor structure, coherence and the rate constants derived from them.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::lp::{self, LpError};
use crate::space::HypothesisSpace;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("coherence solve failed: {0}")]
    Lp(#[from] LpError),
    #[error("coherence certificate gap {residual:e} exceeds tolerance {tolerance:e}")]
    SolverFailure { residual: f64, tolerance: f64 },
    #[error("{0}")]
    Domain(String),
}

/// Number of hypotheses that respond differently on cells `a` and `b`, with a
/// complement pair counted once.
pub fn neighbor_degree(space: &HypothesisSpace, a: usize, b: usize) -> usize {
    if a == b {
        return 0;
    }
    let mut degree = 0;
    for h in 0..space.n_hypotheses() {
        if space.value(h, a) == space.value(h, b) {
            continue;
        }
        // When h flips so does its complement; only the lower index counts.
        match space.complement_of(h) {
            Some(c) if c < h => {}
            _ => degree += 1,
        }
    }
    degree
}

/// All pairwise neighbor degrees between cells.
#[derive(Clone, Debug)]
pub struct NeighborGraph {
    m: usize,
    degrees: Vec<u32>,
}

impl NeighborGraph {
    pub fn new(space: &HypothesisSpace) -> Self {
        let m = space.n_cells();
        let n = space.n_hypotheses();
        // Only one member of each complement pair contributes.
        let counted: Vec<usize> = (0..n).filter(|&h| !matches!(space.complement_of(h), Some(c) if c < h)).collect();
        let columns: Vec<Vec<i8>> = (0..m).map(|a| counted.iter().map(|&h| space.value(h, a)).collect()).collect();
        let mut degrees = vec![0u32; m * m];
        for a in 0..m {
            for b in a + 1..m {
                let d = columns[a].iter().zip(&columns[b]).filter(|(x, y)| x != y).count() as u32;
                degrees[a * m + b] = d;
                degrees[b * m + a] = d;
            }
        }
        NeighborGraph { m, degrees }
    }

    pub fn n_cells(&self) -> usize {
        self.m
    }

    pub fn degree(&self, a: usize, b: usize) -> usize {
        self.degrees[a * self.m + b] as usize
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0) as usize
    }

    /// Whether cells joined by edges of degree at most `k` form one component.
    pub fn is_connected_at(&self, k: usize) -> bool {
        if self.m <= 1 {
            return true;
        }
        let mut seen = vec![false; self.m];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(a) = queue.pop_front() {
            for b in 0..self.m {
                if !seen[b] && self.degree(a, b) <= k {
                    seen[b] = true;
                    reached += 1;
                    queue.push_back(b);
                }
            }
        }
        reached == self.m
    }

    /// Unordered pairs `(a, b)`, `a < b`, at degree exactly 1.
    pub fn one_neighbor_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs = Vec::new();
        for a in 0..self.m {
            for b in a + 1..self.m {
                if self.degree(a, b) == 1 {
                    pairs.push((a, b));
                }
            }
        }
        pairs
    }

    /// Smallest `k >= 1` at which the graph is connected.
    pub fn minimal_k(&self) -> usize {
        // Every degree is at most N, so the graph at k = max degree is
        // complete and the search range is never empty.
        let (mut lo, mut hi) = (1, self.max_degree().max(1));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.is_connected_at(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }
}

pub fn is_k_neighborly(space: &HypothesisSpace, k: usize) -> bool {
    NeighborGraph::new(space).is_connected_at(k)
}

pub fn minimal_k(space: &HypothesisSpace) -> usize {
    NeighborGraph::new(space).minimal_k()
}

/// Optimal distribution over cells for the coherence minimax, with a dual
/// bound certifying it.
#[derive(Clone, Debug, Serialize)]
pub struct CoherenceCertificate {
    pub c_star: f64,
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    pub worst_hypothesis: usize,
    /// Upper bound minus the dual lower bound.
    pub residual: f64,
}

/// `|sum_A h(A) P(A)|` for every hypothesis.
pub fn moments(space: &HypothesisSpace, p: &[f64]) -> Vec<f64> {
    (0..space.n_hypotheses())
        .map(|h| space.matrix().row(h).iter().zip(p).map(|(&v, &w)| v as f64 * w).sum::<f64>().abs())
        .collect()
}

/// `min_P max_h |sum_A h(A) P(A)|` over distributions `P` on cells.
///
/// Treated as a zero-sum game whose row player picks a signed hypothesis
/// `±h` and whose column player picks a cell. Shifting the payoffs by 2
/// makes them positive, so the standard reduction `max sum y, G y <= 1`
/// starts feasible at the origin; its duals give the row player's strategy
/// and hence a lower bound on the value.
pub fn coherence(space: &HypothesisSpace, tolerance: f64) -> Result<CoherenceCertificate, GeometryError> {
    if !(tolerance > 0.0) {
        return Err(GeometryError::Domain(format!("tolerance must be positive, got {tolerance}")));
    }
    let m = space.n_cells();
    // A complement contributes the same two signed rows as its partner.
    let players: Vec<usize> =
        (0..space.n_hypotheses()).filter(|&h| !matches!(space.complement_of(h), Some(c) if c < h)).collect();
    let mut game = Vec::with_capacity(2 * players.len());
    for &h in &players {
        let row = space.matrix().row(h);
        game.push(row.iter().map(|&v| 2.0 + v as f64).collect::<Vec<f64>>());
        game.push(row.iter().map(|&v| 2.0 - v as f64).collect::<Vec<f64>>());
    }
    let sol = lp::maximize(&vec![1.0; m], &game, &vec![1.0; game.len()])?;
    let total: f64 = sol.x.iter().sum();
    let mut p: Vec<f64> = sol.x.iter().map(|&y| (y / total).max(0.0)).collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);

    let mom = moments(space, &p);
    let (worst_hypothesis, c_star) =
        mom.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (h, v)| if v > best.1 { (h, v) } else { best });

    let qsum: f64 = sol.duals.iter().sum();
    let lower = (0..m)
        .map(|a| sol.duals.iter().zip(&game).map(|(q, row)| q * (row[a] - 2.0)).sum::<f64>() / qsum)
        .fold(f64::INFINITY, f64::min);
    let residual = (c_star - lower).max(0.0);
    if residual > tolerance {
        return Err(GeometryError::SolverFailure { residual, tolerance });
    }
    Ok(CoherenceCertificate { c_star, p, worst_hypothesis, residual })
}

/// Per-step reduction factor for the splitting algorithm.
pub fn gbs_rate(c_star: f64, k: usize) -> Result<f64, GeometryError> {
    if !(0.0..1.0).contains(&c_star) {
        return Err(GeometryError::Domain(format!("coherence must lie in [0, 1), got {c_star}")));
    }
    if k == 0 {
        return Err(GeometryError::Domain("neighborliness order must be at least 1".into()));
    }
    Ok(f64::max((1.0 + c_star) / 2.0, (k as f64 + 1.0) / (k as f64 + 2.0)))
}

/// `ceil(ln N / ln(1/lambda))`; zero for a single hypothesis.
pub fn gbs_query_bound(n: usize, lambda: f64) -> Result<usize, GeometryError> {
    if n == 0 || !(lambda > 0.0 && lambda < 1.0) {
        return Err(GeometryError::Domain(format!("need N >= 1 and 0 < lambda < 1, got N={n}, lambda={lambda}")));
    }
    let ratio = (n as f64).ln() / (1.0 / lambda).ln();
    // Exact integer ratios can land a rounding error above the integer.
    Ok((ratio - 1e-9).ceil().max(0.0) as usize)
}

fn check_noise_pair(alpha: f64, beta: f64) -> Result<(), GeometryError> {
    if !(alpha >= 0.0 && alpha <= beta && beta > 0.0 && beta < 0.5) {
        return Err(GeometryError::Domain(format!("need 0 <= alpha <= beta < 1/2 and beta > 0, got alpha={alpha}, beta={beta}")));
    }
    Ok(())
}

/// Guaranteed per-step contraction margin of the soft-decision update.
pub fn epsilon0(alpha: f64, beta: f64) -> Result<f64, GeometryError> {
    check_noise_pair(alpha, beta)?;
    let e = 1.0 - beta * (1.0 - alpha) / (1.0 - beta) - alpha * (1.0 - beta) / beta;
    Ok(e.clamp(0.0, 1.0))
}

/// Exponential decay constant of the modified soft-decision search.
pub fn sgbs_rate(c_star: f64, alpha: f64, beta: f64) -> Result<f64, GeometryError> {
    if !(0.0..1.0).contains(&c_star) {
        return Err(GeometryError::Domain(format!("coherence must lie in [0, 1), got {c_star}")));
    }
    Ok(f64::min((1.0 - c_star) / 2.0, 0.25) * epsilon0(alpha, beta)?)
}

/// Repetitions per query so that `n0` majority votes all succeed with
/// probability `1 - delta`, rounded up to an odd count.
pub fn ngbs_repetitions(n0: usize, delta: f64, alpha: f64) -> Result<usize, GeometryError> {
    if n0 == 0 || !(delta > 0.0 && delta < 1.0) || !(0.0..0.5).contains(&alpha) {
        return Err(GeometryError::Domain(format!(
            "need n0 >= 1, 0 < delta < 1, 0 <= alpha < 1/2; got n0={n0}, delta={delta}, alpha={alpha}"
        )));
    }
    let margin = 0.5 - alpha;
    let r = ((n0 as f64 / delta).ln() / (margin * margin)).ceil().max(1.0) as usize;
    Ok(if r.is_multiple_of(2) { r + 1 } else { r })
}

/// The largest admissible update parameter tends to this value as alpha
/// approaches 1/2; used when only alpha is known.
pub fn default_beta(alpha: f64) -> f64 {
    (0.5 + alpha) / 2.0
}

#[derive(Clone, Debug, Serialize)]
pub struct RateConstants {
    pub k: usize,
    pub c_star: f64,
    pub lambda_gbs: f64,
    pub epsilon0: Option<f64>,
    pub lambda_sgbs: Option<f64>,
}

impl RateConstants {
    pub fn new(k: usize, c_star: f64, noise: Option<(f64, f64)>) -> Result<Self, GeometryError> {
        let lambda_gbs = gbs_rate(c_star, k)?;
        let (epsilon0, lambda_sgbs) = match noise {
            Some((alpha, beta)) => (Some(epsilon0(alpha, beta)?), Some(sgbs_rate(c_star, alpha, beta)?)),
            None => (None, None),
        };
        Ok(RateConstants { k, c_star, lambda_gbs, epsilon0, lambda_sgbs })
    }
}
