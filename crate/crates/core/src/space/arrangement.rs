//! Cells of a hyperplane arrangement by incremental insertion.
//!
//! Each cell is tracked by its sign vector over the hyperplanes inserted so
//! far. Inserting a hyperplane asks, for every existing cell and each side of
//! the new hyperplane, for the largest ball that fits inside the cell on that
//! side (a Chebyshev-centre LP). A side exists when that radius clears the
//! separation margin; its centre becomes the cell witness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Family, HypothesisSpace, Label, SpaceError};
use crate::lp;

const SEPARATION_MARGIN: f64 = 1e-7;
const EMPTY_RADIUS: f64 = 1e-10;
const UNIT_NORM_TOL: f64 = 1e-12;

/// `h_i(x) = sign(<a_i, x> + b_i)` with unit normals.
///
/// When `cube` is set the query space is the open cube `(-r, r)^d` instead of
/// all of R^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceParams {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    #[serde(default)]
    pub cube: Option<f64>,
}

impl HalfspaceParams {
    pub fn new(normals: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self, SpaceError> {
        let p = HalfspaceParams { normals, offsets, cube: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_cube(mut self, half_width: f64) -> Self {
        self.cube = Some(half_width);
        self
    }

    pub fn dim(&self) -> usize {
        self.normals.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn b_max(&self) -> f64 {
        self.offsets.iter().fold(0.0, |m, b| m.max(b.abs()))
    }

    pub fn validate(&self) -> Result<(), SpaceError> {
        let d = self.dim();
        if self.normals.is_empty() || d == 0 {
            return Err(SpaceError::EmptyMatrix);
        }
        if self.offsets.len() != self.normals.len() {
            return Err(SpaceError::InvalidParameter(format!(
                "{} normals but {} offsets",
                self.normals.len(),
                self.offsets.len()
            )));
        }
        for (i, a) in self.normals.iter().enumerate() {
            if a.len() != d {
                return Err(SpaceError::InvalidParameter(format!("normal {i} has dimension {}, expected {d}", a.len())));
            }
            let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(SpaceError::NonUnitNormal { index: i, norm });
            }
        }
        if let Some(r) = self.cube {
            if !(r > 0.0) {
                return Err(SpaceError::InvalidParameter("cube half-width must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, h: usize, x: &[f64]) -> Label {
        let s: f64 = self.normals[h].iter().zip(x).map(|(a, xi)| a * xi).sum::<f64>() + self.offsets[h];
        Label::from_real(s)
    }

    /// `n` random unit normals with offsets uniform in `[-b_max, b_max]`
    /// (or zero when `through_origin`). Almost surely in general position.
    pub fn random<R: Rng + ?Sized>(n: usize, d: usize, b_max: f64, through_origin: bool, rng: &mut R) -> Self {
        let normals = (0..n)
            .map(|_| loop {
                // Rejection-sample the unit ball, then project onto the sphere.
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-3 && norm <= 1.0 {
                    break v.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
                }
            })
            .collect();
        let offsets = (0..n)
            .map(|_| if through_origin { 0.0 } else { rng.gen_range(-b_max..=b_max) })
            .collect();
        HalfspaceParams { normals, offsets, cube: None }
    }
}

struct PartialCell {
    signs: Vec<Label>,
    witness: Vec<f64>,
}

/// Largest inscribed-ball radius (capped at 1) of the region where every
/// listed hyperplane has the requested sign, with its centre.
fn inscribed_ball(params: &HalfspaceParams, constraints: &[(usize, Label)]) -> Result<(f64, Vec<f64>), lp::LpError> {
    let d = params.dim();
    // Variables: x+ (d), x- (d), s+, s-.
    let nv = 2 * d + 2;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for &(h, side) in constraints {
        let sigma = side.as_f64();
        // sigma (<a, x> + b) >= s  <=>  -sigma <a, x> + s <= sigma b
        let mut row = vec![0.0; nv];
        for j in 0..d {
            row[j] = -sigma * params.normals[h][j];
            row[d + j] = sigma * params.normals[h][j];
        }
        row[2 * d] = 1.0;
        row[2 * d + 1] = -1.0;
        a.push(row);
        b.push(sigma * params.offsets[h]);
    }
    if let Some(r) = params.cube {
        for j in 0..d {
            for sigma in [1.0, -1.0] {
                // sigma x_j + s <= r
                let mut row = vec![0.0; nv];
                row[j] = sigma;
                row[d + j] = -sigma;
                row[2 * d] = 1.0;
                row[2 * d + 1] = -1.0;
                a.push(row);
                b.push(r);
            }
        }
    }
    let mut cap = vec![0.0; nv];
    cap[2 * d] = 1.0;
    cap[2 * d + 1] = -1.0;
    a.push(cap);
    b.push(1.0);
    let mut c = vec![0.0; nv];
    c[2 * d] = 1.0;
    c[2 * d + 1] = -1.0;
    let sol = lp::maximize(&c, &a, &b)?;
    let x = (0..d).map(|j| sol.x[j] - sol.x[d + j]).collect();
    Ok((sol.objective, x))
}

/// Enumerates the full-dimensional cells of the arrangement and builds the
/// induced space. In general position the cell count is `sum_{j<=d} C(N, j)`.
pub fn build_halfspaces(params: &HalfspaceParams) -> Result<HypothesisSpace, SpaceError> {
    params.validate()?;
    let d = params.dim();
    let n = params.len();
    let lp_failure = |hyperplane: usize| SpaceError::DegenerateArrangement { hyperplane, radius: f64::NAN };

    let (_, origin_witness) = inscribed_ball(params, &[]).map_err(|_| lp_failure(0))?;
    let mut cells = vec![PartialCell { signs: Vec::new(), witness: origin_witness }];
    debug_assert_eq!(cells[0].witness.len(), d);

    for h in 0..n {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for cell in cells {
            let mut constraints: Vec<(usize, Label)> = cell.signs.iter().copied().enumerate().collect();
            let mut found = 0;
            for side in [Label::Neg, Label::Pos] {
                constraints.push((h, side));
                let (radius, centre) = inscribed_ball(params, &constraints).map_err(|_| lp_failure(h))?;
                constraints.pop();
                if radius > SEPARATION_MARGIN {
                    let mut signs = cell.signs.clone();
                    signs.push(side);
                    next.push(PartialCell { signs, witness: centre });
                    found += 1;
                } else if radius > EMPTY_RADIUS {
                    return Err(SpaceError::DegenerateArrangement { hyperplane: h, radius });
                }
            }
            if found == 0 {
                return Err(SpaceError::DegenerateArrangement { hyperplane: h, radius: 0.0 });
            }
        }
        cells = next;
    }

    let columns = cells.iter().map(|c| c.signs.iter().map(|l| l.value()).collect()).collect();
    let witnesses = cells.into_iter().map(|c| Some(c.witness)).collect();
    HypothesisSpace::assemble(n, columns, witnesses, Family::Halfspaces(params.clone()))
}
