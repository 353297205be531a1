use serde::{Deserialize, Serialize};

use super::{Family, HypothesisSpace, SpaceError};
#[cfg(test)]
use super::Label;

/// Thresholds `h_i(x) = sign(x - i/(N+1))`, `i = 1..=N`, on `[0, 1]`.
///
/// N thresholds cut the line into N+1 intervals with distinct responses.
pub fn build_thresholds(n: usize) -> Result<HypothesisSpace, SpaceError> {
    if n == 0 {
        return Err(SpaceError::InvalidParameter("thresholds need N >= 1".into()));
    }
    let family = Family::Thresholds { n };
    let width = 1.0 / (n + 1) as f64;
    let witnesses: Vec<Vec<f64>> = (0..=n).map(|i| vec![(i as f64 + 0.5) * width]).collect();
    let columns = witnesses
        .iter()
        .map(|x| (0..n).map(|h| family.evaluate(h, x).unwrap().value()).collect())
        .collect();
    HypothesisSpace::assemble(n, columns, witnesses.into_iter().map(Some).collect(), family)
}

fn check_bounds(index: usize, a: f64, b: f64) -> Result<(), SpaceError> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a >= b || a.is_nan() || b.is_nan() {
        return Err(SpaceError::InvalidInterval { index, a, b });
    }
    Ok(())
}

/// Sorted distinct breakpoints of `[0, 1]` and the midpoints between them.
fn segment_midpoints(mut cuts: Vec<f64>) -> Vec<f64> {
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Interval hypotheses: `h_i(x) = +1` on `[a_i, b_i)`, `-1` elsewhere.
///
/// Cells are the open sub-intervals between consecutive endpoints, merged
/// where their responses coincide.
pub fn build_intervals(bounds: &[(f64, f64)]) -> Result<HypothesisSpace, SpaceError> {
    if bounds.is_empty() {
        return Err(SpaceError::EmptyMatrix);
    }
    for (i, &(a, b)) in bounds.iter().enumerate() {
        check_bounds(i, a, b)?;
    }
    let family = Family::Intervals { bounds: bounds.to_vec() };
    let mids = segment_midpoints(bounds.iter().flat_map(|&(a, b)| [a, b]).collect());
    let n = bounds.len();
    let columns = mids
        .iter()
        .map(|&x| (0..n).map(|h| family.evaluate(h, &[x]).unwrap().value()).collect())
        .collect();
    let witnesses = mids.into_iter().map(|x| Some(vec![x])).collect();
    HypothesisSpace::assemble(n, columns, witnesses, family)
}

/// N disjoint intervals of length 1/N tiling `[0, 1)`.
pub fn disjoint_intervals(n: usize) -> Result<HypothesisSpace, SpaceError> {
    if n == 0 {
        return Err(SpaceError::InvalidParameter("need at least one interval".into()));
    }
    let bounds: Vec<(f64, f64)> =
        (0..n).map(|i| (i as f64 / n as f64, (i + 1) as f64 / n as f64)).collect();
    build_intervals(&bounds)
}

/// Axis-aligned box `[a_1, b_1] x ... x [a_d, b_d]` inside the unit cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub bounds: Vec<(f64, f64)>,
}

impl Rect {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Rect { bounds }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.bounds.iter().zip(x).all(|(&(a, b), &xi)| xi >= a && xi <= b)
    }

    pub fn volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }
}

/// Rectangle hypotheses (+1 inside the closed box), optionally followed by
/// their complements. Cells are the open grid boxes cut by all boundary
/// coordinates, merged where responses coincide.
pub fn build_rectangles(
    rects: &[Rect],
    d: usize,
    include_complements: bool,
) -> Result<HypothesisSpace, SpaceError> {
    if rects.is_empty() || d == 0 {
        return Err(SpaceError::EmptyMatrix);
    }
    for (i, r) in rects.iter().enumerate() {
        if r.bounds.len() != d {
            return Err(SpaceError::InvalidParameter(format!(
                "rectangle {i} has {} dimensions, expected {d}",
                r.bounds.len()
            )));
        }
        for &(a, b) in &r.bounds {
            check_bounds(i, a, b)?;
        }
    }
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| segment_midpoints(rects.iter().flat_map(|r| [r.bounds[j].0, r.bounds[j].1]).collect()))
        .collect();
    let family = Family::Rectangles { rects: rects.to_vec(), include_complements };
    let n = if include_complements { 2 * rects.len() } else { rects.len() };

    let mut columns = Vec::new();
    let mut witnesses = Vec::new();
    let mut odometer = vec![0usize; d];
    loop {
        let x: Vec<f64> = odometer.iter().enumerate().map(|(j, &k)| axes[j][k]).collect();
        columns.push((0..n).map(|h| family.evaluate(h, &x).unwrap().value()).collect());
        witnesses.push(Some(x));
        let mut j = 0;
        loop {
            if j == d {
                return HypothesisSpace::assemble(n, columns, witnesses, family);
            }
            odometer[j] += 1;
            if odometer[j] < axes[j].len() {
                break;
            }
            odometer[j] = 0;
            j += 1;
        }
    }
}
