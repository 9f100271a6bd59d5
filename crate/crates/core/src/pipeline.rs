//! Forecasting pathways: input variable -> optional capability metric ->
//! benchmark score.
//!
//! One-step pathways fit a sigmoid directly on the frontier of the
//! (input, score) plane. Two-step pathways fit a line on the frontier of the
//! (input, capability) plane and a sigmoid from capability to score on every
//! model that has both.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::capability::{fit_pc1, CapabilityMetric, Pc1Model};
use crate::dataset::{date_to_numeric, numeric_to_date, Dataset, Field, ModelRecord};
use crate::error::{Error, Result};
use crate::frontier::{extract_frontier, FrontierPoint, FrontierSet};
use crate::regression::{
    fit_linear, fit_sigmoid, sigmoid_eval, sigmoid_invert, LinearFit, SigmoidFit,
};

pub mod bootstrap;

pub use bootstrap::{
    bootstrap_forecast, BootstrapOptions, ForecastReport, PercentileBand, ThresholdDistribution,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputVariable {
    ReleaseDate,
    LogFlop,
}

impl InputVariable {
    pub fn value(self, r: &ModelRecord) -> Option<f64> {
        match self {
            InputVariable::ReleaseDate => Some(r.date_numeric()),
            InputVariable::LogFlop => r.log_flop(),
        }
    }

    pub fn field(self) -> Field {
        match self {
            InputVariable::ReleaseDate => Field::ReleaseDate,
            InputVariable::LogFlop => Field::ScaledTrainingFlop,
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            InputVariable::ReleaseDate => "date",
            InputVariable::LogFlop => "logflop",
        }
    }

    /// Human-readable label for an input value.
    pub fn label(self, x: f64) -> String {
        match self {
            InputVariable::ReleaseDate => match numeric_to_date(x) {
                Ok(d) => d.to_string(),
                Err(_) => format!("{x}"),
            },
            InputVariable::LogFlop => format!("{x:.4}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intermediate {
    None,
    Elo,
    Pc1,
}

/// One of the six (input, intermediate) combinations, aimed at a benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwaySpec {
    pub input: InputVariable,
    pub intermediate: Intermediate,
    pub target_benchmark: String,
    pub ceiling: f64,
}

/// Pathway shape without a target, e.g. `date-elo`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathwayKind {
    pub input: InputVariable,
    pub intermediate: Intermediate,
}

impl PathwayKind {
    pub const ALL: [PathwayKind; 6] = [
        PathwayKind::new(InputVariable::LogFlop, Intermediate::None),
        PathwayKind::new(InputVariable::ReleaseDate, Intermediate::None),
        PathwayKind::new(InputVariable::LogFlop, Intermediate::Elo),
        PathwayKind::new(InputVariable::ReleaseDate, Intermediate::Elo),
        PathwayKind::new(InputVariable::LogFlop, Intermediate::Pc1),
        PathwayKind::new(InputVariable::ReleaseDate, Intermediate::Pc1),
    ];

    pub const fn new(input: InputVariable, intermediate: Intermediate) -> Self {
        Self {
            input,
            intermediate,
        }
    }

    pub fn spec(self, target_benchmark: impl Into<String>, ceiling: f64) -> PathwaySpec {
        PathwaySpec {
            input: self.input,
            intermediate: self.intermediate,
            target_benchmark: target_benchmark.into(),
            ceiling,
        }
    }
}

impl fmt::Display for PathwayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.input.short_name())?;
        match self.intermediate {
            Intermediate::None => Ok(()),
            Intermediate::Elo => f.write_str("-elo"),
            Intermediate::Pc1 => f.write_str("-pc1"),
        }
    }
}

impl FromStr for PathwayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase().replace(['_', '>'], "-");
        let mut parts = lower.split('-').filter(|p| !p.is_empty());
        let input = match parts.next() {
            Some("date") | Some("release") => InputVariable::ReleaseDate,
            Some("logflop") | Some("flop") | Some("compute") => InputVariable::LogFlop,
            _ => return Err(Error::InvalidArgument(format!("unknown pathway `{s}`"))),
        };
        let intermediate = match parts.next() {
            None => Intermediate::None,
            Some("elo") => Intermediate::Elo,
            Some("pc1") => Intermediate::Pc1,
            Some(_) => return Err(Error::InvalidArgument(format!("unknown pathway `{s}`"))),
        };
        if parts.next().is_some() {
            return Err(Error::InvalidArgument(format!("unknown pathway `{s}`")));
        }
        Ok(PathwayKind::new(input, intermediate))
    }
}

impl PathwaySpec {
    pub fn kind(&self) -> PathwayKind {
        PathwayKind::new(self.input, self.intermediate)
    }

    pub fn is_two_step(&self) -> bool {
        self.intermediate != Intermediate::None
    }

    /// Fields a record needs to take part in every stage of this pathway.
    pub fn required_fields(&self, ds: &Dataset) -> Vec<Field> {
        let mut f = vec![
            self.input.field(),
            Field::Benchmark(self.target_benchmark.clone()),
        ];
        match self.intermediate {
            Intermediate::None => {}
            Intermediate::Elo => f.push(Field::Elo),
            Intermediate::Pc1 => f.extend(ds.benchmarks().map(|b| Field::Benchmark(b.to_string()))),
        }
        f.sort();
        f.dedup();
        f
    }
}

impl fmt::Display for PathwaySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.kind(), self.target_benchmark)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPathway {
    pub spec: PathwaySpec,
    pub stage1: Option<LinearFit>,
    pub stage2: SigmoidFit,
    pub frontier_used: FrontierSet,
    pub pc1_model: Option<Pc1Model>,
    /// Ids of the points the sigmoid was fitted on.
    pub stage2_ids: Vec<String>,
    /// Every model id read by any part of the fit (frontier candidates,
    /// regressions, PCA statistics).
    pub consumed_ids: BTreeSet<String>,
}

impl FittedPathway {
    pub fn predict(&self, x: f64) -> f64 {
        predict(self, x)
    }

    /// Capability value the pathway feeds into its sigmoid for `record`.
    pub fn stage2_input(&self, record: &ModelRecord) -> Option<f64> {
        match self.spec.intermediate {
            Intermediate::None => self.spec.input.value(record),
            Intermediate::Elo => record.elo,
            Intermediate::Pc1 => self.pc1_model.as_ref()?.project(record).ok(),
        }
    }
}

fn points(
    ds: &Dataset,
    x: impl Fn(&ModelRecord) -> Option<f64>,
    y: impl Fn(&ModelRecord) -> Option<f64>,
) -> Vec<FrontierPoint> {
    ds.records()
        .iter()
        .filter_map(|r| Some(FrontierPoint::new(r.model_id.clone(), x(r)?, y(r)?)))
        .collect()
}

pub fn fit_pathway(ds: &Dataset, spec: &PathwaySpec) -> Result<FittedPathway> {
    if !ds.has_benchmark(&spec.target_benchmark) {
        return Err(Error::UnknownField(spec.target_benchmark.clone()));
    }
    let target = spec.target_benchmark.as_str();
    let input = spec.input;
    let mut consumed = BTreeSet::new();

    let (metric, pc1_model) = match spec.intermediate {
        Intermediate::None => {
            let pts = points(ds, |r| input.value(r), |r| r.score(target));
            if pts.is_empty() {
                return Err(Error::Empty("no records with both input and target score"));
            }
            consumed.extend(pts.iter().map(|p| p.model_id.clone()));
            let frontier = extract_frontier(&pts)?;
            if frontier.len() < 2 {
                return Err(Error::degenerate(format!(
                    "frontier has {} point(s), need 2",
                    frontier.len()
                )));
            }
            let stage2 = fit_sigmoid(&frontier.xy(), spec.ceiling)?;
            return Ok(FittedPathway {
                spec: spec.clone(),
                stage1: None,
                stage2,
                stage2_ids: frontier.ids(),
                frontier_used: frontier,
                pc1_model: None,
                consumed_ids: consumed,
            });
        }
        Intermediate::Elo => (CapabilityMetric::Elo, None),
        Intermediate::Pc1 => {
            let names: Vec<String> = ds.benchmarks().map(str::to_string).collect();
            let m = fit_pc1(ds, &names, Some(target))?;
            consumed.extend(m.fit_model_ids.iter().cloned());
            (CapabilityMetric::Pc1(m.clone()), Some(m))
        }
    };

    let stage1_pts = points(ds, |r| input.value(r), |r| metric.value(r));
    if stage1_pts.is_empty() {
        return Err(Error::Empty("no records with both input and capability"));
    }
    consumed.extend(stage1_pts.iter().map(|p| p.model_id.clone()));
    let frontier = extract_frontier(&stage1_pts)?;
    if frontier.len() < 2 {
        return Err(Error::degenerate(format!(
            "frontier has {} point(s), need 2",
            frontier.len()
        )));
    }
    let stage1 = fit_linear(&frontier.xy())?;

    let stage2_pts = points(ds, |r| metric.value(r), |r| r.score(target));
    consumed.extend(stage2_pts.iter().map(|p| p.model_id.clone()));
    let xy: Vec<(f64, f64)> = stage2_pts.iter().map(|p| (p.x, p.y)).collect();
    let stage2 = fit_sigmoid(&xy, spec.ceiling)?;

    Ok(FittedPathway {
        spec: spec.clone(),
        stage1: Some(stage1),
        stage2,
        frontier_used: frontier,
        pc1_model,
        stage2_ids: stage2_pts.into_iter().map(|p| p.model_id).collect(),
        consumed_ids: consumed,
    })
}

pub fn predict(p: &FittedPathway, x: f64) -> f64 {
    let z = match &p.stage1 {
        Some(line) => line.predict(x),
        None => x,
    };
    sigmoid_eval(&p.stage2, z)
}

/// Input value at which the pathway's forecast equals `score`.
pub fn invert_to_threshold(p: &FittedPathway, score: f64) -> Result<f64> {
    let ceiling = p.stage2.ceiling;
    if !(score > 0.0 && score < ceiling) {
        return Err(Error::InvalidArgument(format!(
            "threshold {score} must lie strictly between 0 and the ceiling {ceiling}"
        )));
    }
    let line_slope = p.stage1.map_or(1.0, |l| l.slope);
    if p.stage2.slope == 0.0 || line_slope == 0.0 {
        return Err(Error::NotInvertible(
            "a pathway stage has zero slope".into(),
        ));
    }
    if p.stage2.slope * line_slope < 0.0 {
        return Err(Error::NotInvertible(
            "pathway is decreasing in its input".into(),
        ));
    }
    let z = sigmoid_invert(&p.stage2, score)?;
    match &p.stage1 {
        Some(line) => line.invert(z),
        None => Ok(z),
    }
}

/// Input values at which forecasts are reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub input: InputVariable,
    pub values: Vec<f64>,
}

impl Horizon {
    /// First of every month from `start`'s month through `end` inclusive.
    pub fn monthly(start: NaiveDate, end: NaiveDate) -> Horizon {
        let mut values = Vec::new();
        let mut d = NaiveDate::from_ymd_opt(start.year(), start.month(), 1).expect("valid month");
        if d < start {
            d = next_month(d);
        }
        while d <= end {
            values.push(date_to_numeric(d));
            d = next_month(d);
        }
        Horizon {
            input: InputVariable::ReleaseDate,
            values,
        }
    }

    pub fn dates(dates: &[NaiveDate]) -> Horizon {
        Horizon {
            input: InputVariable::ReleaseDate,
            values: dates.iter().map(|&d| date_to_numeric(d)).collect(),
        }
    }

    pub fn log_flop(values: Vec<f64>) -> Horizon {
        Horizon {
            input: InputVariable::LogFlop,
            values,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.values.iter().map(|&x| self.input.label(x)).collect()
    }
}

fn next_month(d: NaiveDate) -> NaiveDate {
    let (y, m) = if d.month() == 12 {
        (d.year() + 1, 1)
    } else {
        (d.year(), d.month() + 1)
    };
    NaiveDate::from_ymd_opt(y, m, 1).expect("valid month")
}
