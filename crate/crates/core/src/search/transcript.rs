//! Per-step search logs and their CSV form.

use std::fmt::Write as _;

use serde::Serialize;

use crate::fmt_f64;
use crate::space::Label;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Msgbs,
    Erm,
    Runoff,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Msgbs => "msgbs",
            Phase::Erm => "erm",
            Phase::Runoff => "runoff",
        }
    }
}

/// Progress summary recorded after each step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Metric {
    /// Hypotheses still consistent with every response.
    VersionSpace(usize),
    /// Largest posterior weight.
    MaxWeight(f64),
    /// Lowest empirical error among the candidates.
    EmpiricalRisk(f64),
}

impl Metric {
    fn render(self) -> String {
        match self {
            Metric::VersionSpace(n) => n.to_string(),
            Metric::MaxWeight(w) | Metric::EmpiricalRisk(w) => fmt_f64(w),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Step {
    /// 1-based; state is recorded after the step's update.
    pub n: usize,
    pub cell: usize,
    pub response: Label,
    pub metric: Metric,
    /// `(1 - p(h*)) / p(h*)`, when the truth is a known member of the space.
    pub c_n: Option<f64>,
    /// Oracle responses consumed by the step.
    pub draws: usize,
    pub phase: Option<Phase>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SearchTranscript {
    pub steps: Vec<Step>,
    pub outcome: Option<usize>,
    pub queries_used: usize,
}

impl SearchTranscript {
    pub fn push(&mut self, step: Step) {
        self.queries_used += step.draws;
        self.steps.push(step);
    }

    /// Columns `n,cell,response,metric,c_n`, plus `phase` when any step
    /// carries one.
    pub fn to_csv(&self) -> String {
        let phased = self.steps.iter().any(|s| s.phase.is_some());
        let mut out = String::from("n,cell,response,metric,c_n");
        if phased {
            out.push_str(",phase");
        }
        out.push('\n');
        for s in &self.steps {
            let c_n = s.c_n.map(fmt_f64).unwrap_or_default();
            let _ = write!(out, "{},{},{},{},{}", s.n, s.cell, s.response, s.metric.render(), c_n);
            if phased {
                let _ = write!(out, ",{}", s.phase.map_or("", Phase::as_str));
            }
            out.push('\n');
        }
        out
    }
}
