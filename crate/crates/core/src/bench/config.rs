//! Experiment configuration: one JSON document per experiment.
//!
//! ```json
//! {
//!   "family": {"kind": "random_halfspaces", "n": 16, "d": 2, "through_origin": true},
//!   "algorithm": "msgbs",
//!   "noise": {"mode": "constant", "alpha": 0.1},
//!   "beta": 0.3,
//!   "truth": {"kind": "random"},
//!   "trials": 2000,
//!   "seed": 7,
//!   "checkpoints": [10, 20, 30]
//! }
//! ```
//!
//! Relative matrix paths resolve against the config file's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{NoiseMode, NoiseSpec};
use crate::rng::{stream, Purpose};
use crate::search::TiePolicy;
use crate::space::io::parse_matrix;
use crate::space::{
    build_halfspaces, build_intervals, build_rectangles, build_thresholds, disjoint_intervals,
    restrict_to_pool, HalfspaceParams, HypothesisSpace, Query, Rect, SpaceError,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("building the space: {0}")]
    Space(#[from] SpaceError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    Thresholds {
        n: usize,
    },
    Intervals {
        bounds: Vec<(f64, f64)>,
    },
    /// `n` intervals of length `1/n` tiling `[0, 1)`.
    DisjointIntervals {
        n: usize,
    },
    /// Every interval `[i/k, j/k)` with `0 <= i < j <= k`.
    GridIntervals {
        k: usize,
    },
    Halfspaces {
        normals: Vec<Vec<f64>>,
        offsets: Vec<f64>,
        #[serde(default)]
        cube: Option<f64>,
    },
    /// Random unit normals; offsets uniform in `[-b_max, b_max]`. Drawn from
    /// the experiment seed unless `seed` is given.
    RandomHalfspaces {
        n: usize,
        d: usize,
        #[serde(default)]
        b_max: f64,
        #[serde(default)]
        through_origin: bool,
        #[serde(default)]
        cube: Option<f64>,
        #[serde(default)]
        seed: Option<u64>,
    },
    Rectangles {
        rects: Vec<Vec<(f64, f64)>>,
        #[serde(default)]
        include_complements: bool,
    },
    /// A sign matrix, inline or in the plain-text matrix format.
    Matrix {
        #[serde(default)]
        path: Option<PathBuf>,
        #[serde(default)]
        rows: Option<Vec<Vec<i8>>>,
    },
    /// A geometric family restricted to a finite pool of points.
    Pooled {
        base: Box<FamilySpec>,
        points: Vec<Vec<f64>>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[default]
    Gbs,
    Ngbs,
    Sgbs,
    Msgbs,
    Agnostic,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Gbs => "gbs",
            Algorithm::Ngbs => "ngbs",
            Algorithm::Sgbs => "sgbs",
            Algorithm::Msgbs => "msgbs",
            Algorithm::Agnostic => "agnostic",
        }
    }

    pub fn is_soft(self) -> bool {
        matches!(self, Algorithm::Sgbs | Algorithm::Msgbs | Algorithm::Agnostic)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TruthSpec {
    Index {
        index: usize,
    },
    /// Uniform over the space, drawn per trial.
    #[default]
    Random,
    /// Every hypothesis in turn; `trials` runs per hypothesis.
    Exhaustive,
    /// A hypothesis removed from the space generates the labels. Drawn per
    /// trial unless `index` is given.
    HeldOut {
        #[serde(default)]
        index: Option<usize>,
    },
}

/// Which guarantee a Monte Carlo sweep is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Noiseless splitting search stays within its query ceiling.
    QueryBound,
    /// Repetition-coded search fails with probability at most `delta`.
    RepetitionFailure,
    /// Modified soft-decision error decays like `N (1 - lambda)^n`.
    ErrorDecay,
    /// Risk and failure guarantees of the three-phase agnostic search.
    Agnostic,
    /// Exact one-step expectation of C_n never exceeds 1.
    Supermartingale,
    /// Report curves only.
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieSpec {
    #[default]
    Random,
    LowestIndex,
}

impl From<TieSpec> for TiePolicy {
    fn from(t: TieSpec) -> Self {
        match t {
            TieSpec::Random => TiePolicy::Random,
            TieSpec::LowestIndex => TiePolicy::LowestIndex,
        }
    }
}

fn noiseless() -> NoiseSpec {
    NoiseSpec::noiseless()
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default = "noiseless")]
    pub noise: NoiseSpec,
    /// Update parameter of the soft variants; defaults to `(1/2 + alpha)/2`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Queries for the soft variants; defaults to the largest checkpoint.
    #[serde(default)]
    pub budget: Option<usize>,
    /// Votes per query for the repetition-coded search.
    #[serde(default)]
    pub repetitions: Option<usize>,
    /// Target failure probability; sets `repetitions` when that is absent.
    #[serde(default)]
    pub delta: Option<f64>,
    /// Number of majority votes the failure target covers; defaults to the
    /// noiseless query ceiling.
    #[serde(default)]
    pub n0: Option<usize>,
    #[serde(default)]
    pub truth: TruthSpec,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Query counts at which the soft estimate is read out; budgets for the
    /// agnostic search.
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    /// Defaults by algorithm: query_bound, repetition_failure (when `delta`
    /// is set), error_decay for msgbs, agnostic, none otherwise.
    #[serde(default)]
    pub bound: Option<BoundKind>,
    #[serde(default)]
    pub ties: TieSpec,
    /// Passive sampling distribution over cells for the agnostic search;
    /// uniform when absent.
    #[serde(default)]
    pub sampling: Option<Vec<f64>>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let message = full.rfind(" at line ").map_or(full.as_str(), |i| &full[..i]).to_owned();
            ConfigError::Parse { line: e.line(), column: e.column(), message }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path.parent().map(Path::to_owned).unwrap_or_default();
        Ok(config)
    }

    /// Checks that the options fit together; space-dependent checks happen
    /// when the space is built.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        let alg = self.algorithm;
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if (self.repetitions.is_some() || self.delta.is_some() || self.n0.is_some()) && alg != Algorithm::Ngbs {
            return bad("repetitions, delta and n0 apply only to ngbs");
        }
        if alg == Algorithm::Ngbs && self.repetitions.is_none() && self.delta.is_none() {
            return bad("ngbs needs repetitions or delta");
        }
        if self.beta.is_some() && !alg.is_soft() {
            return bad("beta applies only to sgbs, msgbs and agnostic");
        }
        if (self.budget.is_some() || !self.checkpoints.is_empty()) && !alg.is_soft() {
            return bad("budget and checkpoints apply only to sgbs, msgbs and agnostic");
        }
        if self.sampling.is_some() && alg != Algorithm::Agnostic {
            return bad("sampling applies only to agnostic");
        }
        if matches!(self.truth, TruthSpec::HeldOut { .. }) && alg != Algorithm::Agnostic {
            return bad("a held-out truth requires the agnostic algorithm");
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) || self.checkpoints.first() == Some(&0) {
            return bad("checkpoints must be positive and strictly increasing");
        }
        if let (Some(b), Some(&last)) = (self.budget, self.checkpoints.last()) {
            if alg != Algorithm::Agnostic && last > b {
                return bad("checkpoints may not exceed the budget");
            }
        }
        if alg == Algorithm::Agnostic && self.budget.is_none() && self.checkpoints.is_empty() {
            return bad("agnostic needs a budget or checkpoints");
        }
        if alg == Algorithm::Agnostic && self.budget.into_iter().chain(self.checkpoints.iter().copied()).any(|n| n < 3) {
            return bad("agnostic budgets must be at least 3");
        }
        if let Some(beta) = self.beta {
            if !(beta > 0.0 && beta < 0.5) {
                return bad("beta must lie in (0, 1/2)");
            }
            if beta < self.noise.bound() {
                return bad("beta must be at least the noise bound alpha");
            }
        }
        if self.noise.mode != NoiseMode::Noiseless && !(0.0..0.5).contains(&self.noise.alpha) {
            return bad("noise alpha must lie in [0, 1/2)");
        }
        match self.bound {
            Some(BoundKind::QueryBound) if alg != Algorithm::Gbs => bad("query_bound applies to gbs"),
            Some(BoundKind::RepetitionFailure) if alg != Algorithm::Ngbs || self.delta.is_none() => {
                bad("repetition_failure needs ngbs with delta")
            }
            Some(BoundKind::ErrorDecay) if alg != Algorithm::Msgbs => bad("error_decay applies to msgbs"),
            Some(BoundKind::Agnostic) if alg != Algorithm::Agnostic => bad("the agnostic bound applies to agnostic"),
            Some(BoundKind::Supermartingale) if !matches!(alg, Algorithm::Sgbs | Algorithm::Msgbs) => {
                bad("supermartingale sweeps use sgbs or msgbs for the query rule")
            }
            _ => Ok(()),
        }
    }

    pub fn bound_kind(&self) -> BoundKind {
        self.bound.unwrap_or(match self.algorithm {
            Algorithm::Gbs => BoundKind::QueryBound,
            Algorithm::Ngbs if self.delta.is_some() => BoundKind::RepetitionFailure,
            Algorithm::Msgbs => BoundKind::ErrorDecay,
            Algorithm::Agnostic => BoundKind::Agnostic,
            _ => BoundKind::None,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or_else(|| crate::geometry::default_beta(self.noise.bound()))
    }

    /// Budgets for the agnostic search, or read-out points for the soft
    /// searches.
    pub fn checkpoints(&self) -> Vec<usize> {
        if !self.checkpoints.is_empty() {
            self.checkpoints.clone()
        } else {
            self.budget.into_iter().collect()
        }
    }

    /// Query budget of a soft-decision run.
    pub fn soft_budget(&self) -> usize {
        self.budget.or(self.checkpoints.last().copied()).unwrap_or(0)
    }

    pub fn build_space(&self) -> Result<HypothesisSpace, ConfigError> {
        build_family(&self.family, self.seed, &self.base_dir)
    }
}

pub fn build_family(spec: &FamilySpec, seed: u64, base_dir: &Path) -> Result<HypothesisSpace, ConfigError> {
    Ok(match spec {
        FamilySpec::Thresholds { n } => build_thresholds(*n)?,
        FamilySpec::Intervals { bounds } => build_intervals(bounds)?,
        FamilySpec::DisjointIntervals { n } => disjoint_intervals(*n)?,
        FamilySpec::GridIntervals { k } => {
            if *k == 0 {
                return Err(ConfigError::Invalid("grid_intervals needs k >= 1".into()));
            }
            let kf = *k as f64;
            let bounds: Vec<(f64, f64)> =
                (0..*k).flat_map(|i| (i + 1..=*k).map(move |j| (i as f64 / kf, j as f64 / kf))).collect();
            build_intervals(&bounds)?
        }
        FamilySpec::Halfspaces { normals, offsets, cube } => {
            let mut params = HalfspaceParams::new(normals.clone(), offsets.clone())?;
            if let Some(r) = cube {
                params = params.with_cube(*r);
            }
            build_halfspaces(&params)?
        }
        FamilySpec::RandomHalfspaces { n, d, b_max, through_origin, cube, seed: own } => {
            if *n == 0 || *d == 0 || !(*b_max >= 0.0) {
                return Err(ConfigError::Invalid("random_halfspaces needs n, d >= 1 and b_max >= 0".into()));
            }
            let mut rng = stream(own.unwrap_or(seed), 0, Purpose::Space);
            let mut params = HalfspaceParams::random(*n, *d, *b_max, *through_origin, &mut rng);
            if let Some(r) = cube {
                params = params.with_cube(*r);
            }
            build_halfspaces(&params)?
        }
        FamilySpec::Rectangles { rects, include_complements } => {
            let d = rects.first().map_or(0, Vec::len);
            let rects: Vec<Rect> = rects.iter().cloned().map(Rect::new).collect();
            build_rectangles(&rects, d, *include_complements)?
        }
        FamilySpec::Matrix { path, rows } => match (path, rows) {
            (Some(p), None) => {
                let full = base_dir.join(p);
                let text = fs::read_to_string(&full).map_err(|source| ConfigError::Io { path: full, source })?;
                HypothesisSpace::from_matrix(&parse_matrix(&text)?)?
            }
            (None, Some(rows)) => HypothesisSpace::from_matrix(rows)?,
            _ => return Err(ConfigError::Invalid("matrix family needs exactly one of path and rows".into())),
        },
        FamilySpec::Pooled { base, points } => {
            if matches!(**base, FamilySpec::Matrix { .. }) {
                return Err(ConfigError::Invalid("pooled family needs a geometric base".into()));
            }
            let base = build_family(base, seed, base_dir)?;
            let pool: Vec<Query> = points.iter().cloned().map(Query::Point).collect();
            restrict_to_pool(&base, &pool)?
        }
    })
}
