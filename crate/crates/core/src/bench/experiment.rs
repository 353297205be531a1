//! One configured experiment: the built space, cached geometry, and
//! per-trial execution with independent seeded streams.

use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::Rng;
use serde::Serialize;

use super::config::{Algorithm, ExperimentConfig, TruthSpec};
use super::BenchError;
use crate::agnostic::{noiseless_risk, run_agnostic, true_risk, AgnosticRun, SamplingMeasure};
use crate::fmt_f64;
use crate::geometry::{coherence, gbs_query_bound, gbs_rate, ngbs_repetitions, sgbs_rate, CoherenceCertificate, NeighborGraph, DEFAULT_TOLERANCE};
use crate::oracle::{Oracle, SimulatedOracle, Truth};
use crate::rng::{stream, Purpose};
use crate::search::{expected_cn_ratio, run_gbs, run_ngbs, Posterior, QueryRule, SearchError, SearchTranscript, SoftSearch};
use crate::space::{HypothesisSpace, Label};

/// Coherence and neighborliness of the configured space.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub certificate: CoherenceCertificate,
    pub k: usize,
}

/// The space a held-out truth is searched in, with the truth's labels on its
/// cells.
#[derive(Clone, Debug)]
struct HeldOutSpace {
    space: HypothesisSpace,
    one_neighbors: Vec<(usize, usize)>,
    labels: Vec<Label>,
}

/// Who generates the labels in one trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthDraw {
    Member(usize),
    /// Index in the configured space of the removed hypothesis.
    HeldOut(usize),
}

/// Result of one search.
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub transcript: SearchTranscript,
    /// `None` when every hypothesis was eliminated.
    pub outcome: Option<usize>,
    /// Whether the estimate at each checkpoint missed the truth.
    pub wrong_at: Vec<bool>,
    pub agnostic: Option<AgnosticRun>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AgnosticRecord {
    pub n: usize,
    pub h1: usize,
    pub h2: usize,
    pub choice: usize,
    pub risk_h1: f64,
    pub risk_h2: f64,
    pub risk_choice: f64,
    pub noiseless_risk_choice: f64,
    pub queries: usize,
    pub degenerate_runoff: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub run: usize,
    pub truth: TruthDrawRecord,
    pub outcome: Option<usize>,
    /// `None` when the truth is not a member.
    pub success: Option<bool>,
    pub queries: usize,
    pub wrong_at: Vec<bool>,
    pub agnostic: Vec<AgnosticRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TruthDrawRecord {
    pub member: Option<usize>,
    pub held_out: Option<usize>,
}

impl From<TruthDraw> for TruthDrawRecord {
    fn from(t: TruthDraw) -> Self {
        match t {
            TruthDraw::Member(h) => TruthDrawRecord { member: Some(h), held_out: None },
            TruthDraw::HeldOut(h) => TruthDrawRecord { member: None, held_out: Some(h) },
        }
    }
}

/// One sampled triple of the supermartingale sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioSample {
    pub sample: usize,
    pub truth: usize,
    pub alpha: f64,
    pub beta: f64,
    pub ratio: f64,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub space: HypothesisSpace,
    geometry: OnceLock<Result<Geometry, String>>,
    pairs: OnceLock<Vec<(usize, usize)>>,
    held_out: Vec<OnceLock<Result<HeldOutSpace, String>>>,
}

fn one_neighbors(space: &HypothesisSpace) -> Vec<(usize, usize)> {
    NeighborGraph::new(space).one_neighbor_pairs()
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self, BenchError> {
        config.validate()?;
        let space = config.build_space()?;
        let n = space.n_hypotheses();
        match config.truth {
            TruthSpec::Index { index } | TruthSpec::HeldOut { index: Some(index) } if index >= n => {
                return Err(BenchError::config(format!("truth index {index} out of range for {n} hypotheses")));
            }
            TruthSpec::HeldOut { .. } if n < 3 => {
                return Err(BenchError::config("holding out a truth needs at least three hypotheses"));
            }
            _ => {}
        }
        if !matches!(config.truth, TruthSpec::HeldOut { .. }) {
            config.noise.validate(space.n_cells()).map_err(|e| BenchError::config(e.to_string()))?;
            if let Some(w) = &config.sampling {
                if w.len() != space.n_cells() {
                    return Err(BenchError::config(format!("sampling has {} weights for {} cells", w.len(), space.n_cells())));
                }
            }
        }
        let held_out = match config.truth {
            TruthSpec::HeldOut { .. } => (0..n).map(|_| OnceLock::new()).collect(),
            _ => Vec::new(),
        };
        Ok(Experiment { config, space, geometry: OnceLock::new(), pairs: OnceLock::new(), held_out })
    }

    pub fn geometry(&self) -> Result<&Geometry, BenchError> {
        self.geometry
            .get_or_init(|| {
                let certificate = coherence(&self.space, DEFAULT_TOLERANCE).map_err(|e| e.to_string())?;
                Ok(Geometry { certificate, k: NeighborGraph::new(&self.space).minimal_k() })
            })
            .as_ref()
            .map_err(|e| BenchError::Runtime(e.clone()))
    }

    /// Runs in a sweep: `trials`, times N for exhaustive truths.
    pub fn runs(&self) -> usize {
        match self.config.truth {
            TruthSpec::Exhaustive => self.config.trials * self.space.n_hypotheses(),
            _ => self.config.trials,
        }
    }

    pub fn draw_truth(&self, run: usize) -> TruthDraw {
        let n = self.space.n_hypotheses();
        let random = || stream(self.config.seed, run as u64, Purpose::Truth).gen_range(0..n);
        match self.config.truth {
            TruthSpec::Index { index } => TruthDraw::Member(index),
            TruthSpec::Random => TruthDraw::Member(random()),
            TruthSpec::Exhaustive => TruthDraw::Member(run % n),
            TruthSpec::HeldOut { index } => TruthDraw::HeldOut(index.unwrap_or_else(random)),
        }
    }

    fn held_out_space(&self, removed: usize) -> Result<&HeldOutSpace, BenchError> {
        self.held_out[removed]
            .get_or_init(|| {
                let (space, groups) = self.space.without_hypothesis(removed).map_err(|e| e.to_string())?;
                let mut labels = Vec::with_capacity(groups.len());
                for (cell, raw) in groups.iter().enumerate() {
                    let first = self.space.label(removed, raw[0]);
                    if raw.iter().any(|&a| self.space.label(removed, a) != first) {
                        return Err(format!(
                            "held-out hypothesis {removed} is not constant on cell {cell} of the reduced space"
                        ));
                    }
                    labels.push(first);
                }
                self.config.noise.validate(space.n_cells()).map_err(|e| e.to_string())?;
                Ok(HeldOutSpace { one_neighbors: one_neighbors(&space), space, labels })
            })
            .as_ref()
            .map_err(|e| BenchError::Runtime(e.clone()))
    }

    /// The space searched in, the truth's labels on it, and the 1-neighbor
    /// pairs for the modified rule.
    fn setting(&self, truth: TruthDraw) -> Result<(&HypothesisSpace, Truth, &[(usize, usize)]), BenchError> {
        match truth {
            TruthDraw::Member(h) => {
                let pairs: &[(usize, usize)] = if matches!(self.config.algorithm, Algorithm::Msgbs | Algorithm::Agnostic) {
                    self.one_neighbor_pairs()
                } else {
                    &[]
                };
                Ok((&self.space, Truth::Hypothesis(h), pairs))
            }
            TruthDraw::HeldOut(h) => {
                let held = self.held_out_space(h)?;
                Ok((&held.space, Truth::Labels(held.labels.clone()), &held.one_neighbors[..]))
            }
        }
    }

    fn one_neighbor_pairs(&self) -> &[(usize, usize)] {
        self.pairs.get_or_init(|| one_neighbors(&self.space))
    }

    pub fn repetitions(&self) -> Result<usize, BenchError> {
        if let Some(r) = self.config.repetitions {
            return Ok(r);
        }
        let delta = self.config.delta.expect("validated: ngbs has repetitions or delta");
        let n0 = match self.config.n0 {
            Some(n0) => n0,
            None => {
                let g = self.geometry()?;
                gbs_query_bound(self.space.n_hypotheses(), gbs_rate(g.certificate.c_star, g.k)?)?.max(1)
            }
        };
        Ok(ngbs_repetitions(n0, delta, self.config.noise.bound())?)
    }

    /// Query ceiling of the noiseless splitting search.
    pub fn query_bound(&self) -> Result<(f64, usize), BenchError> {
        let g = self.geometry()?;
        let lambda = gbs_rate(g.certificate.c_star, g.k)?;
        Ok((lambda, gbs_query_bound(self.space.n_hypotheses(), lambda)?))
    }

    /// Decay constant of the modified soft-decision search.
    pub fn decay_rate(&self) -> Result<f64, BenchError> {
        let g = self.geometry()?;
        Ok(sgbs_rate(g.certificate.c_star, self.config.noise.bound(), self.config.beta())?)
    }

    fn sampling(&self, space: &HypothesisSpace) -> Result<SamplingMeasure, BenchError> {
        match &self.config.sampling {
            Some(w) if w.len() == space.n_cells() => Ok(SamplingMeasure::new(w.clone())?),
            Some(w) => Err(BenchError::Runtime(format!("sampling has {} weights for {} cells", w.len(), space.n_cells()))),
            None => Ok(SamplingMeasure::uniform(space.n_cells())),
        }
    }

    /// One search against `oracle`. Soft variants read the estimate out at
    /// `checkpoints`; the agnostic search spends `budget`.
    pub fn search<O: Oracle + ?Sized>(
        &self,
        run: usize,
        truth: TruthDraw,
        oracle: &mut O,
        budget: usize,
        checkpoints: &[usize],
    ) -> Result<SearchOutcome, BenchError> {
        let (space, _, pairs) = self.setting(truth)?;
        let cfg = &self.config;
        let mut rng = stream(cfg.seed, run as u64, Purpose::Algorithm);
        let mut readout = stream(cfg.seed, run as u64, Purpose::Readout);
        let plain = |transcript: SearchTranscript, outcome| SearchOutcome { transcript, outcome, wrong_at: Vec::new(), agnostic: None };
        match cfg.algorithm {
            Algorithm::Gbs => {
                let (t, h) = run_gbs(space, oracle, cfg.ties.into(), &mut rng)?;
                Ok(plain(t, Some(h)))
            }
            Algorithm::Ngbs => match run_ngbs(space, oracle, self.repetitions()?, cfg.ties.into(), &mut rng) {
                Ok((t, h)) => Ok(plain(t, Some(h))),
                Err(SearchError::EmptyVersionSpace { transcript, .. }) => Ok(plain(*transcript, None)),
                Err(e) => Err(e.into()),
            },
            Algorithm::Sgbs | Algorithm::Msgbs => {
                let rule = if cfg.algorithm == Algorithm::Msgbs { QueryRule::Modified { one_neighbors: pairs } } else { QueryRule::Plain };
                let target = match truth {
                    TruthDraw::Member(h) => h,
                    TruthDraw::HeldOut(_) => unreachable!("held-out truths run only the agnostic search"),
                };
                let mut search = SoftSearch::new(space, cfg.beta(), rule)?;
                let mut wrong_at = Vec::with_capacity(checkpoints.len());
                let mut next = checkpoints.iter().peekable();
                for step in 1..=budget {
                    search.step(oracle, &mut rng)?;
                    while next.next_if(|&&c| c == step).is_some() {
                        wrong_at.push(search.estimate(&mut readout) != target);
                    }
                }
                let (t, h) = search.finish(&mut readout);
                Ok(SearchOutcome { transcript: t, outcome: Some(h), wrong_at, agnostic: None })
            }
            Algorithm::Agnostic => {
                let px = self.sampling(space)?;
                let run = run_agnostic(space, oracle, &px, budget, cfg.beta(), pairs, &mut rng)?;
                Ok(SearchOutcome { transcript: run.transcript.clone(), outcome: Some(run.choice), wrong_at: Vec::new(), agnostic: Some(run) })
            }
        }
    }

    pub fn simulated_oracle(&self, run: usize, truth: TruthDraw) -> Result<SimulatedOracle, BenchError> {
        let (space, t, _) = self.setting(truth)?;
        SimulatedOracle::new(space, &t, self.config.noise.clone(), stream(self.config.seed, run as u64, Purpose::Oracle))
            .map_err(|e| BenchError::Runtime(e.to_string()))
    }

    /// One Monte Carlo run.
    pub fn trial(&self, run: usize) -> Result<TrialRecord, BenchError> {
        let truth = self.draw_truth(run);
        let member = match truth {
            TruthDraw::Member(h) => Some(h),
            TruthDraw::HeldOut(_) => None,
        };
        if self.config.algorithm != Algorithm::Agnostic {
            let mut oracle = self.simulated_oracle(run, truth)?;
            let checkpoints = self.config.checkpoints.clone();
            let out = self.search(run, truth, &mut oracle, self.config.soft_budget(), &checkpoints)?;
            return Ok(TrialRecord {
                run,
                truth: truth.into(),
                outcome: out.outcome,
                success: member.map(|h| out.outcome == Some(h)),
                queries: oracle.query_count(),
                wrong_at: out.wrong_at,
                agnostic: Vec::new(),
            });
        }
        let (space, t, _) = self.setting(truth)?;
        let labels = t.labels(space).map_err(|e| BenchError::Runtime(e.to_string()))?;
        let px = self.sampling(space)?;
        let noise = &self.config.noise;
        let mut records = Vec::new();
        let mut queries = 0;
        for n in self.config.checkpoints() {
            let mut oracle = self.simulated_oracle(run, truth)?;
            let out = self.search(run, truth, &mut oracle, n, &[])?;
            let a = out.agnostic.expect("agnostic search reports its candidates");
            queries += oracle.query_count();
            records.push(AgnosticRecord {
                n,
                h1: a.h1,
                h2: a.h2,
                choice: a.choice,
                risk_h1: true_risk(space, a.h1, &px, &labels, noise),
                risk_h2: true_risk(space, a.h2, &px, &labels, noise),
                risk_choice: true_risk(space, a.choice, &px, &labels, noise),
                noiseless_risk_choice: noiseless_risk(space, a.choice, &px, &labels),
                queries: oracle.query_count(),
                degenerate_runoff: a.runoff.degenerate,
            });
        }
        let last = records.last().map(|r| r.choice);
        Ok(TrialRecord {
            run,
            truth: truth.into(),
            outcome: last,
            success: member.map(|h| last == Some(h)),
            queries,
            wrong_at: Vec::new(),
            agnostic: records,
        })
    }

    /// One sampled (posterior, truth, alpha, beta) triple on the configured
    /// space, with the exact one-step expectation of `C_{n+1}/C_n`.
    pub fn ratio_sample(&self, sample: usize) -> Result<RatioSample, BenchError> {
        let mut rng = stream(self.config.seed, sample as u64, Purpose::Algorithm);
        let n = self.space.n_hypotheses();
        if n < 2 {
            return Err(BenchError::config("the supermartingale sweep needs at least two hypotheses"));
        }
        // Log-uniform weights over six decades.
        let w: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.gen_range(-6.0..0.0))).collect();
        let posterior = Posterior::from_weights(&w)?;
        let truth = rng.gen_range(0..n);
        let alpha = rng.gen_range(0.0..0.49);
        let beta = rng.gen_range(alpha..0.49);
        let rule = match self.config.algorithm {
            Algorithm::Msgbs => QueryRule::Modified { one_neighbors: self.one_neighbor_pairs() },
            _ => QueryRule::Plain,
        };
        let ratio = expected_cn_ratio(&posterior, &self.space, truth, rule, alpha, beta)?;
        Ok(RatioSample { sample, truth, alpha, beta, ratio })
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-run CSV. Agnostic sweeps emit one row per (run, budget).
pub fn trials_csv(algorithm: Algorithm, checkpoints: &[usize], records: &[TrialRecord]) -> String {
    let mut out = String::new();
    if algorithm == Algorithm::Agnostic {
        out.push_str("run,n,truth,held_out,h1,h2,choice,success,risk_h1,risk_h2,risk_choice,noiseless_risk_choice,queries,degenerate_runoff\n");
        for r in records {
            for a in &r.agnostic {
                let success = r.truth.member.map(|h| u8::from(a.choice == h));
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    r.run,
                    a.n,
                    opt(r.truth.member),
                    opt(r.truth.held_out),
                    a.h1,
                    a.h2,
                    a.choice,
                    opt(success),
                    fmt_f64(a.risk_h1),
                    fmt_f64(a.risk_h2),
                    fmt_f64(a.risk_choice),
                    fmt_f64(a.noiseless_risk_choice),
                    a.queries,
                    u8::from(a.degenerate_runoff)
                );
            }
        }
        return out;
    }
    out.push_str("run,truth,outcome,success,queries");
    for c in checkpoints {
        let _ = write!(out, ",error_at_{c}");
    }
    out.push('\n');
    for r in records {
        let _ = write!(out, "{},{},{},{},{}", r.run, opt(r.truth.member), opt(r.outcome), opt(r.success.map(u8::from)), r.queries);
        for &w in &r.wrong_at {
            let _ = write!(out, ",{}", u8::from(w));
        }
        out.push('\n');
    }
    out
}

pub fn ratios_csv(samples: &[RatioSample]) -> String {
    let mut out = String::from("sample,truth,alpha,beta,ratio\n");
    for s in samples {
        let _ = writeln!(out, "{},{},{},{},{}", s.sample, s.truth, fmt_f64(s.alpha), fmt_f64(s.beta), fmt_f64(s.ratio));
    }
    out
}
