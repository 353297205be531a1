//! Label sources: a simulated noisy channel around a hidden truth, and a
//! human at the terminal.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::StreamRng;
use crate::space::{HypothesisSpace, Label};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("majority vote needs an odd positive repetition count, got {0}")]
    EvenRepetition(usize),
    #[error("cell {cell} out of range for {n_cells} cells")]
    InvalidCell { cell: usize, n_cells: usize },
    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),
    #[error("invalid truth: {0}")]
    InvalidTruth(String),
    #[error("no response: input closed")]
    InputClosed,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Noiseless,
    Constant,
    PerCell,
}

/// Probability that a response is flipped, per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_cell_levels: Option<Vec<f64>>,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec { mode: NoiseMode::Noiseless, alpha: 0.0, per_cell_levels: None }
    }

    pub fn constant(alpha: f64) -> Self {
        NoiseSpec { mode: NoiseMode::Constant, alpha, per_cell_levels: None }
    }

    /// `alpha` is taken as the largest level.
    pub fn per_cell(levels: Vec<f64>) -> Self {
        let alpha = levels.iter().copied().fold(0.0, f64::max);
        NoiseSpec { mode: NoiseMode::PerCell, alpha, per_cell_levels: Some(levels) }
    }

    pub fn validate(&self, n_cells: usize) -> Result<(), OracleError> {
        let in_range = |a: f64| (0.0..0.5).contains(&a);
        match self.mode {
            NoiseMode::Noiseless => Ok(()),
            NoiseMode::Constant if in_range(self.alpha) => Ok(()),
            NoiseMode::Constant => Err(OracleError::InvalidNoise(format!("alpha {} outside [0, 1/2)", self.alpha))),
            NoiseMode::PerCell => {
                let levels = self
                    .per_cell_levels
                    .as_ref()
                    .ok_or_else(|| OracleError::InvalidNoise("per_cell mode needs per_cell_levels".into()))?;
                if levels.len() != n_cells {
                    return Err(OracleError::InvalidNoise(format!("{} levels for {n_cells} cells", levels.len())));
                }
                if let Some(bad) = levels.iter().find(|&&a| !in_range(a) || a > self.alpha) {
                    return Err(OracleError::InvalidNoise(format!("level {bad} outside [0, min(alpha, 1/2))")));
                }
                Ok(())
            }
        }
    }

    /// The bound used by the algorithms' guarantees.
    pub fn bound(&self) -> f64 {
        match self.mode {
            NoiseMode::Noiseless => 0.0,
            _ => self.alpha,
        }
    }

    pub fn level(&self, cell: usize) -> f64 {
        match self.mode {
            NoiseMode::Noiseless => 0.0,
            NoiseMode::Constant => self.alpha,
            NoiseMode::PerCell => self.per_cell_levels.as_ref().map_or(self.alpha, |l| l[cell]),
        }
    }

    pub fn levels(&self, n_cells: usize) -> Vec<f64> {
        (0..n_cells).map(|c| self.level(c)).collect()
    }
}

/// The hidden labelling: a member of the space, or an arbitrary labelling of
/// its cells.
#[derive(Clone, Debug, PartialEq)]
pub enum Truth {
    Hypothesis(usize),
    Labels(Vec<Label>),
}

impl Truth {
    pub fn labels(&self, space: &HypothesisSpace) -> Result<Vec<Label>, OracleError> {
        match self {
            Truth::Hypothesis(h) if *h < space.n_hypotheses() => Ok(space.hypothesis_labels(*h)),
            Truth::Hypothesis(h) => {
                Err(OracleError::InvalidTruth(format!("hypothesis {h} out of range for {}", space.n_hypotheses())))
            }
            Truth::Labels(l) if l.len() == space.n_cells() => Ok(l.clone()),
            Truth::Labels(l) => Err(OracleError::InvalidTruth(format!("{} labels for {} cells", l.len(), space.n_cells()))),
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Truth::Hypothesis(h) => Some(*h),
            Truth::Labels(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Majority {
    pub label: Label,
    pub positives: usize,
}

pub trait Oracle {
    fn respond(&mut self, cell: usize) -> Result<Label, OracleError>;

    /// Responses given so far, counting each repetition.
    fn query_count(&self) -> usize;

    /// Index of the truth when it is a member of the space and known.
    fn truth_index(&self) -> Option<usize> {
        None
    }

    fn respond_majority(&mut self, cell: usize, repetitions: usize) -> Result<Majority, OracleError> {
        if repetitions.is_multiple_of(2) {
            return Err(OracleError::EvenRepetition(repetitions));
        }
        let mut positives = 0;
        for _ in 0..repetitions {
            if self.respond(cell)? == Label::Pos {
                positives += 1;
            }
        }
        let label = if 2 * positives > repetitions { Label::Pos } else { Label::Neg };
        Ok(Majority { label, positives })
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn respond(&mut self, cell: usize) -> Result<Label, OracleError> {
        (**self).respond(cell)
    }

    fn query_count(&self) -> usize {
        (**self).query_count()
    }

    fn truth_index(&self) -> Option<usize> {
        (**self).truth_index()
    }
}

/// Answers from a fixed truth, each flipped independently with its cell's
/// noise level.
pub struct SimulatedOracle {
    truth: Vec<Label>,
    truth_index: Option<usize>,
    noise: NoiseSpec,
    rng: StreamRng,
    queries: usize,
}

impl SimulatedOracle {
    pub fn new(space: &HypothesisSpace, truth: &Truth, noise: NoiseSpec, rng: StreamRng) -> Result<Self, OracleError> {
        noise.validate(space.n_cells())?;
        Ok(SimulatedOracle { truth: truth.labels(space)?, truth_index: truth.index(), noise, rng, queries: 0 })
    }

    pub fn truth_labels(&self) -> &[Label] {
        &self.truth
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }
}

impl Oracle for SimulatedOracle {
    fn respond(&mut self, cell: usize) -> Result<Label, OracleError> {
        let n_cells = self.truth.len();
        let clean = *self.truth.get(cell).ok_or(OracleError::InvalidCell { cell, n_cells })?;
        // One draw per response whatever the noise level, so the stream stays
        // aligned across noise settings.
        let u: f64 = self.rng.gen();
        self.queries += 1;
        Ok(if u < self.noise.level(cell) { -clean } else { clean })
    }

    fn query_count(&self) -> usize {
        self.queries
    }

    fn truth_index(&self) -> Option<usize> {
        self.truth_index
    }
}

/// Prompts for each label on `output` and reads `+` or `-` from `input`.
pub struct InteractiveOracle<R, W> {
    input: R,
    output: W,
    witnesses: Vec<Option<Vec<f64>>>,
    queries: usize,
}

impl<R: BufRead, W: Write> InteractiveOracle<R, W> {
    pub fn new(space: &HypothesisSpace, input: R, output: W) -> Self {
        let witnesses = space.cells().iter().map(|c| c.witness.clone()).collect();
        InteractiveOracle { input, output, witnesses, queries: 0 }
    }

    fn parse(line: &str) -> Option<Label> {
        match line.trim() {
            "+" | "+1" | "1" | "y" | "yes" => Some(Label::Pos),
            "-" | "-1" | "\u{2212}" | "n" | "no" => Some(Label::Neg),
            _ => None,
        }
    }
}

impl<R: BufRead, W: Write> Oracle for InteractiveOracle<R, W> {
    fn respond(&mut self, cell: usize) -> Result<Label, OracleError> {
        let n_cells = self.witnesses.len();
        let witness = self.witnesses.get(cell).ok_or(OracleError::InvalidCell { cell, n_cells })?;
        let point = match witness {
            Some(x) => format!("[{}]", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")),
            None => format!("cell {cell}"),
        };
        loop {
            write!(self.output, "query {}: label for {point}? [+/-] ", self.queries + 1)?;
            self.output.flush()?;
            let mut line = String::new();
            if self.input.read_line(&mut line)? == 0 {
                return Err(OracleError::InputClosed);
            }
            if let Some(label) = Self::parse(&line) {
                self.queries += 1;
                return Ok(label);
            }
            writeln!(self.output, "please answer + or -")?;
        }
    }

    fn query_count(&self) -> usize {
        self.queries
    }
}
