//! Finite hypothesis spaces represented through the partition of the query
//! space they induce.
//!
//! Every hypothesis is constant on each cell of the partition, so a space is
//! fully described by its response matrix: one row per hypothesis, one
//! column per cell. Builders for the geometric families keep an interior
//! witness point for every cell so that a search can emit a concrete query.

mod arrangement;
mod families;
pub mod io;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use arrangement::{build_halfspaces, HalfspaceParams};
pub use families::{build_intervals, build_rectangles, build_thresholds, disjoint_intervals, Rect};

/// A binary response. Reals are thresholded with `sign(0) = +1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Neg,
    #[serde(rename = "+1")]
    Pos,
}

impl Label {
    pub fn from_real(x: f64) -> Self {
        if x >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Pos),
            -1 => Some(Label::Neg),
            _ => None,
        }
    }

    pub fn value(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.value())
    }

    pub fn negate(self) -> Self {
        match self {
            Label::Pos => Label::Neg,
            Label::Neg => Label::Pos,
        }
    }
}

impl std::ops::Neg for Label {
    type Output = Label;
    fn neg(self) -> Label {
        self.negate()
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Pos => "+1",
            Label::Neg => "-1",
        })
    }
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("response matrix has no rows or no columns")]
    EmptyMatrix,
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("entry ({row}, {col}) is {value}, expected -1 or +1")]
    InvalidEntry { row: usize, col: usize, value: i64 },
    #[error("hypotheses {first} and {second} have identical responses on every cell")]
    DuplicateHypothesis { first: usize, second: usize },
    #[error("interval {index} has a = {a} >= b = {b} or lies outside [0, 1]")]
    InvalidInterval { index: usize, a: f64, b: f64 },
    #[error("normal {index} has norm {norm}, expected 1")]
    NonUnitNormal { index: usize, norm: f64 },
    #[error("cannot separate a candidate cell when inserting hyperplane {hyperplane} (inscribed radius {radius:e})")]
    DegenerateArrangement { hyperplane: usize, radius: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("query {0} cannot be evaluated under this family")]
    UnevaluableQuery(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// N x M table of labels, stored row-major as `i8` in {-1, +1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResponseMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl ResponseMatrix {
    pub fn n_hypotheses(&self) -> usize {
        self.rows
    }

    pub fn n_cells(&self) -> usize {
        self.cols
    }

    pub fn get(&self, h: usize, cell: usize) -> Label {
        if self.entries[h * self.cols + cell] > 0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn value(&self, h: usize, cell: usize) -> i8 {
        self.entries[h * self.cols + cell]
    }

    pub fn row(&self, h: usize) -> &[i8] {
        &self.entries[h * self.cols..(h + 1) * self.cols]
    }

    pub fn column(&self, cell: usize) -> Vec<i8> {
        (0..self.rows).map(|h| self.value(h, cell)).collect()
    }
}

/// A partition cell and, for geometric families, a point strictly inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub witness: Option<Vec<f64>>,
}

/// Family descriptor with the parameters needed to evaluate hypotheses at
/// arbitrary query points.
#[derive(Clone, Debug)]
pub enum Family {
    Thresholds { n: usize },
    Intervals { bounds: Vec<(f64, f64)> },
    Halfspaces(HalfspaceParams),
    Rectangles { rects: Vec<Rect>, include_complements: bool },
    Explicit,
    /// A base family restricted to a finite pool of query points.
    Pooled { base: Box<Family> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Thresholds { .. } => "thresholds",
            Family::Intervals { .. } => "intervals",
            Family::Halfspaces(_) => "halfspaces",
            Family::Rectangles { .. } => "rectangles",
            Family::Explicit => "explicit",
            Family::Pooled { .. } => "pooled",
        }
    }

    /// Evaluates hypothesis `h` at `point`; `None` for abstract families.
    pub fn evaluate(&self, h: usize, point: &[f64]) -> Option<Label> {
        match self {
            Family::Thresholds { n } => {
                let t = (h + 1) as f64 / (*n + 1) as f64;
                Some(Label::from_real(point[0] - t))
            }
            Family::Intervals { bounds } => {
                let (a, b) = bounds[h];
                Some(if point[0] >= a && point[0] < b { Label::Pos } else { Label::Neg })
            }
            Family::Halfspaces(params) => Some(params.evaluate(h, point)),
            Family::Rectangles { rects, .. } => {
                let (idx, flip) = if h < rects.len() { (h, false) } else { (h - rects.len(), true) };
                let inside = rects[idx].contains(point);
                let l = if inside { Label::Pos } else { Label::Neg };
                Some(if flip { -l } else { l })
            }
            Family::Explicit => None,
            Family::Pooled { base } => base.evaluate(h, point),
        }
    }
}

/// A query for [`restrict_to_pool`]: a concrete point, or an existing cell.
#[derive(Clone, Debug, PartialEq)]
pub enum Query {
    Point(Vec<f64>),
    Cell(usize),
}

#[derive(Clone, Debug)]
pub struct HypothesisSpace {
    matrix: ResponseMatrix,
    cells: Vec<Cell>,
    complement_pairs: Vec<(usize, usize)>,
    complement_of: Vec<Option<usize>>,
    family: Family,
    raw_to_cell: Vec<usize>,
}

impl HypothesisSpace {
    /// Builds a space from candidate columns (one per raw query region),
    /// merging identical columns and validating hypothesis uniqueness.
    pub(crate) fn assemble(
        n: usize,
        columns: Vec<Vec<i8>>,
        witnesses: Vec<Option<Vec<f64>>>,
        family: Family,
    ) -> Result<Self, SpaceError> {
        if n == 0 || columns.is_empty() {
            return Err(SpaceError::EmptyMatrix);
        }
        debug_assert_eq!(columns.len(), witnesses.len());
        let mut seen: HashMap<Vec<i8>, usize> = HashMap::new();
        let mut kept: Vec<Vec<i8>> = Vec::new();
        let mut cells = Vec::new();
        let mut raw_to_cell = Vec::with_capacity(columns.len());
        for (col, witness) in columns.into_iter().zip(witnesses) {
            debug_assert_eq!(col.len(), n);
            let next = kept.len();
            let idx = *seen.entry(col.clone()).or_insert(next);
            if idx == next {
                kept.push(col);
                cells.push(Cell { index: idx, witness });
            }
            raw_to_cell.push(idx);
        }
        let m = kept.len();
        let mut entries = vec![0i8; n * m];
        for (a, col) in kept.iter().enumerate() {
            for (h, &v) in col.iter().enumerate() {
                entries[h * m + a] = v;
            }
        }
        let matrix = ResponseMatrix { rows: n, cols: m, entries };

        let mut rows: HashMap<&[i8], usize> = HashMap::with_capacity(n);
        for h in 0..n {
            if let Some(&first) = rows.get(matrix.row(h)) {
                return Err(SpaceError::DuplicateHypothesis { first, second: h });
            }
            rows.insert(matrix.row(h), h);
        }
        let mut complement_of = vec![None; n];
        let mut complement_pairs = Vec::new();
        for h in 0..n {
            let neg: Vec<i8> = matrix.row(h).iter().map(|v| -v).collect();
            if let Some(&g) = rows.get(neg.as_slice()) {
                complement_of[h] = Some(g);
                if h < g {
                    complement_pairs.push((h, g));
                }
            }
        }
        Ok(HypothesisSpace { matrix, cells, complement_pairs, complement_of, family, raw_to_cell })
    }

    /// Builds an explicit space from a raw sign matrix (rows = hypotheses).
    /// Duplicate columns are merged; [`Self::raw_to_cell`] maps each raw
    /// column to its merged cell.
    pub fn from_matrix(raw: &[Vec<i8>]) -> Result<Self, SpaceError> {
        let n = raw.len();
        let m = raw.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return Err(SpaceError::EmptyMatrix);
        }
        for (r, row) in raw.iter().enumerate() {
            if row.len() != m {
                return Err(SpaceError::Ragged { row: r, got: row.len(), expected: m });
            }
            if let Some((c, &v)) = row.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
                return Err(SpaceError::InvalidEntry { row: r, col: c, value: i64::from(v) });
            }
        }
        let columns = (0..m).map(|c| raw.iter().map(|row| row[c]).collect()).collect();
        Self::assemble(n, columns, vec![None; m], Family::Explicit)
    }

    pub fn matrix(&self) -> &ResponseMatrix {
        &self.matrix
    }

    pub fn n_hypotheses(&self) -> usize {
        self.matrix.rows
    }

    pub fn n_cells(&self) -> usize {
        self.matrix.cols
    }

    #[inline]
    pub fn value(&self, h: usize, cell: usize) -> i8 {
        self.matrix.value(h, cell)
    }

    pub fn label(&self, h: usize, cell: usize) -> Label {
        self.matrix.get(h, cell)
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn witness(&self, cell: usize) -> Option<&[f64]> {
        self.cells[cell].witness.as_deref()
    }

    pub fn complement_pairs(&self) -> &[(usize, usize)] {
        &self.complement_pairs
    }

    pub fn complement_of(&self, h: usize) -> Option<usize> {
        self.complement_of[h]
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Merged cell index for every column of the raw input.
    pub fn raw_to_cell(&self) -> &[usize] {
        &self.raw_to_cell
    }

    /// Response column of hypothesis `h` as labels.
    pub fn hypothesis_labels(&self, h: usize) -> Vec<Label> {
        (0..self.n_cells()).map(|a| self.label(h, a)).collect()
    }

    /// Removes one hypothesis, re-merging cells it alone distinguished.
    /// Returns the reduced space and, for each reduced cell, the raw cells it
    /// absorbed.
    pub fn without_hypothesis(&self, removed: usize) -> Result<(Self, Vec<Vec<usize>>), SpaceError> {
        let n = self.n_hypotheses();
        if removed >= n {
            return Err(SpaceError::InvalidParameter(format!("hypothesis {removed} out of range")));
        }
        let keep: Vec<usize> = (0..n).filter(|&h| h != removed).collect();
        let columns: Vec<Vec<i8>> = (0..self.n_cells())
            .map(|a| keep.iter().map(|&h| self.value(h, a)).collect())
            .collect();
        let witnesses = self.cells.iter().map(|c| c.witness.clone()).collect();
        let reduced = Self::assemble(keep.len(), columns, witnesses, self.family.clone())?;
        let mut groups = vec![Vec::new(); reduced.n_cells()];
        for (raw, &cell) in reduced.raw_to_cell.iter().enumerate() {
            groups[cell].push(raw);
        }
        Ok((reduced, groups))
    }
}

/// Restricts a space to a finite pool of queries. Cells of the result are the
/// distinct response columns over the pool.
pub fn restrict_to_pool(space: &HypothesisSpace, pool: &[Query]) -> Result<HypothesisSpace, SpaceError> {
    if pool.is_empty() {
        return Err(SpaceError::InvalidParameter("empty query pool".into()));
    }
    let n = space.n_hypotheses();
    let mut columns = Vec::with_capacity(pool.len());
    let mut witnesses = Vec::with_capacity(pool.len());
    for (i, q) in pool.iter().enumerate() {
        match q {
            Query::Cell(c) => {
                if *c >= space.n_cells() {
                    return Err(SpaceError::UnevaluableQuery(i));
                }
                columns.push(space.matrix.column(*c));
                witnesses.push(space.cells[*c].witness.clone());
            }
            Query::Point(x) => {
                let col = (0..n)
                    .map(|h| space.family.evaluate(h, x).map(Label::value))
                    .collect::<Option<Vec<i8>>>()
                    .ok_or(SpaceError::UnevaluableQuery(i))?;
                columns.push(col);
                witnesses.push(Some(x.clone()));
            }
        }
    }
    let base = match &space.family {
        Family::Pooled { base } => base.clone(),
        other => Box::new(other.clone()),
    };
    HypothesisSpace::assemble(n, columns, witnesses, Family::Pooled { base })
}
