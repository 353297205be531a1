//! Dense two-phase simplex for small linear programs.
//!
//! Solves `maximize c·x subject to A x <= b, x >= 0` where `b` may have
//! negative entries. The tableau is dense; problem sizes in this crate stay in
//! the low thousands of entries per row, which keeps a textbook implementation
//! fast enough. Pivoting follows Dantzig's rule and falls back to Bland's rule
//! after a run of degenerate pivots so that cycling cannot occur.

use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const FEASIBILITY_EPS: f64 = 1e-9;
const DEGENERATE_RUN_BEFORE_BLAND: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not converge within {0} pivots")]
    IterationLimit(usize),
    #[error("constraint row {row} has {got} coefficients, expected {expected}")]
    Shape { row: usize, got: usize, expected: usize },
}

/// Optimal primal and dual solution.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// One multiplier per constraint row, nonnegative at optimality.
    pub duals: Vec<f64>,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.rows[p][q];
        for v in self.rows[p].iter_mut() {
            *v /= piv;
        }
        let prow = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = self.obj[q];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.obj[q] = 0.0;
        }
        self.basis[p] = q;
    }

    /// Resets the objective row to `cost` expressed in the current basis.
    fn price(&mut self, cost: &[f64]) {
        self.obj = vec![0.0; self.width + 1];
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows.len() {
            let c = self.obj[self.basis[i]];
            if c != 0.0 {
                for (v, rv) in self.obj.iter_mut().zip(&self.rows[i]) {
                    *v -= c * rv;
                }
            }
        }
    }

    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<(), LpError> {
        let mut degenerate_run = 0usize;
        for _ in 0..max_pivots {
            let bland = degenerate_run >= DEGENERATE_RUN_BEFORE_BLAND;
            let entering = if bland {
                (0..allowed).find(|&j| self.obj[j] > PIVOT_EPS)
            } else {
                let mut best = None;
                let mut best_val = PIVOT_EPS;
                for j in 0..allowed {
                    if self.obj[j] > best_val {
                        best_val = self.obj[j];
                        best = Some(j);
                    }
                }
                best
            };
            let Some(q) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][q];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12
                                || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((p, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio.abs() <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(p, q);
        }
        Err(LpError::IterationLimit(max_pivots))
    }
}

/// Maximizes `c·x` subject to `a x <= b`, `x >= 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<LpSolution, LpError> {
    let n = c.len();
    let m = a.len();
    assert_eq!(m, b.len(), "constraint matrix and bound vector disagree");
    for (i, row) in a.iter().enumerate() {
        if row.len() != n {
            return Err(LpError::Shape { row: i, got: row.len(), expected: n });
        }
    }
    let negated: Vec<bool> = b.iter().map(|&bi| bi < 0.0).collect();
    let artificial_count = negated.iter().filter(|&&x| x).count();
    let width = n + m + artificial_count;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = n + m;
    for i in 0..m {
        let mut row = vec![0.0; width + 1];
        let s = if negated[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = s * a[i][j];
        }
        row[n + i] = s;
        row[width] = s * b[i];
        if negated[i] {
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: Vec::new(), basis, width };
    let max_pivots = 50 * (width + m + 10);

    if artificial_count > 0 {
        let mut phase1 = vec![0.0; width];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        t.price(&phase1);
        t.optimize(width, max_pivots)?;
        if -t.obj[width] < -FEASIBILITY_EPS {
            return Err(LpError::Infeasible);
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if t.basis[i] >= n + m {
                if let Some(q) = (0..n + m).find(|&j| t.rows[i][j].abs() > 1e-9) {
                    t.pivot(i, q);
                }
            }
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(c);
    t.price(&cost);
    t.optimize(n + m, max_pivots)?;

    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs(i);
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    let duals = (0..m).map(|i| (-t.obj[n + i]).max(0.0)).collect();
    Ok(LpSolution { x, objective, duals })
}
