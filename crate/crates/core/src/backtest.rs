//! Expanding-window backtests over release-date ordered divisions.
//!
//! The data are cut into four date-ordered groups. Step `k` (1..=3) trains
//! on groups `1..=k` and evaluates on group `k + 1`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capability::fit_pc1;
use crate::dataset::{Dataset, Field, ModelRecord};
use crate::error::{Error, Result};
use crate::frontier::{extract_frontier, FrontierPoint};
use crate::pipeline::{fit_pathway, PathwaySpec};
use crate::regression::{fit_sigmoid, logit, CLAMP_FRACTION};
use crate::stats::{mean, rmse};

pub const DIVISIONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub divisions: Vec<Vec<String>>,
}

impl SplitPlan {
    pub fn sizes(&self) -> Vec<usize> {
        self.divisions.iter().map(Vec::len).collect()
    }

    /// Training ids for step `k` (1-based): divisions `0..k`.
    pub fn train_ids(&self, k: usize) -> Vec<String> {
        self.divisions[..k].iter().flatten().cloned().collect()
    }

    pub fn test_ids(&self, k: usize) -> &[String] {
        &self.divisions[k]
    }
}

/// Four date-ordered divisions; the earliest groups absorb the remainder.
pub fn make_splits(ds: &Dataset) -> Result<SplitPlan> {
    let n = ds.len();
    if n < DIVISIONS {
        return Err(Error::degenerate(format!(
            "need at least {DIVISIONS} records to split, got {n}"
        )));
    }
    let sorted = ds.sorted_by_date();
    let (base, rem) = (n / DIVISIONS, n % DIVISIONS);
    let mut divisions = Vec::with_capacity(DIVISIONS);
    let mut start = 0;
    for g in 0..DIVISIONS {
        let size = base + usize::from(g < rem);
        divisions.push(
            sorted[start..start + size]
                .iter()
                .map(|r| r.model_id.clone())
                .collect(),
        );
        start += size;
    }
    Ok(SplitPlan { divisions })
}

/// Variable fed into the metric-to-benchmark sigmoid in a metric backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestMetric {
    Pc1,
    Elo,
    LogFlop,
    Date,
    /// The target score itself, on the logit scale so the sigmoid can
    /// represent it exactly (scores are clamped away from 0 and the ceiling).
    /// A perfect predictor for sanity checks.
    Identity,
}

impl BacktestMetric {
    pub const TABLE: [BacktestMetric; 4] = [
        BacktestMetric::Pc1,
        BacktestMetric::Elo,
        BacktestMetric::LogFlop,
        BacktestMetric::Date,
    ];
}

impl fmt::Display for BacktestMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BacktestMetric::Pc1 => "pc1",
            BacktestMetric::Elo => "elo",
            BacktestMetric::LogFlop => "logflop",
            BacktestMetric::Date => "date",
            BacktestMetric::Identity => "identity",
        })
    }
}

impl FromStr for BacktestMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "pc1" => Ok(BacktestMetric::Pc1),
            "elo" => Ok(BacktestMetric::Elo),
            "logflop" | "flop" => Ok(BacktestMetric::LogFlop),
            "date" | "releasedate" => Ok(BacktestMetric::Date),
            "identity" => Ok(BacktestMetric::Identity),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BacktestMode {
    #[default]
    CapabilityMetric,
    FullPath,
}

/// Reference set for deciding which test models count as frontier models in
/// a full-path backtest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontierReference {
    /// Frontier of the whole dataset's (input, benchmark) plane.
    #[default]
    Full,
    /// Frontier of the training and test groups of each step.
    TrainTest,
}

impl FromStr for FrontierReference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(FrontierReference::Full),
            "train+test" | "train-test" => Ok(FrontierReference::TrainTest),
            _ => Err(Error::InvalidArgument(format!(
                "unknown frontier reference `{s}`"
            ))),
        }
    }
}

/// How per-split RMSEs combine into a report's aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitWeighting {
    #[default]
    Unweighted,
    TestSize,
}

impl FromStr for SplitWeighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unweighted" => Ok(SplitWeighting::Unweighted),
            "test-size" | "test_size" => Ok(SplitWeighting::TestSize),
            _ => Err(Error::InvalidArgument(format!(
                "unknown split weighting `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BacktestOptions {
    pub frontier_reference: FrontierReference,
    pub weighting: SplitWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub model_id: String,
    pub actual: f64,
    pub predicted: f64,
}

/// What one step's fits actually read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitAudit {
    pub step: usize,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub consumed_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub mode: BacktestMode,
    pub label: String,
    pub benchmark: String,
    pub per_split_rmse: Vec<Option<f64>>,
    pub models_evaluated: Vec<Vec<String>>,
    pub predictions: Vec<Vec<Prediction>>,
    pub aggregate_rmse: f64,
    pub audit: Vec<SplitAudit>,
}

fn aggregate(per_split: &[Option<f64>], sizes: &[usize], weighting: SplitWeighting) -> Option<f64> {
    match weighting {
        SplitWeighting::Unweighted => {
            mean(&per_split.iter().flatten().copied().collect::<Vec<_>>())
        }
        SplitWeighting::TestSize => {
            let (mut num, mut den) = (0.0, 0.0);
            for (r, &n) in per_split.iter().zip(sizes) {
                if let Some(r) = r {
                    num += r * n as f64;
                    den += n as f64;
                }
            }
            (den > 0.0).then(|| num / den)
        }
    }
}

fn metric_fields(ds: &Dataset, metric: BacktestMetric, benchmark: &str) -> Vec<Field> {
    let mut f = vec![Field::Benchmark(benchmark.to_string())];
    match metric {
        BacktestMetric::Pc1 => f.extend(ds.benchmarks().map(|b| Field::Benchmark(b.to_string()))),
        BacktestMetric::Elo => f.push(Field::Elo),
        BacktestMetric::LogFlop => f.push(Field::ScaledTrainingFlop),
        BacktestMetric::Date | BacktestMetric::Identity => {}
    }
    f.sort();
    f.dedup();
    f
}

/// Sigmoid from a capability metric to `benchmark`, trained on all models of
/// the training window and scored on all models of the test group.
pub fn backtest_capability_metric(
    ds: &Dataset,
    metric: BacktestMetric,
    benchmark: &str,
    opts: &BacktestOptions,
) -> Result<BacktestReport> {
    if !ds.has_benchmark(benchmark) {
        return Err(Error::UnknownField(benchmark.to_string()));
    }
    let data = ds.complete_case_fields(&metric_fields(ds, metric, benchmark))?;
    let plan = make_splits(&data)?;
    let ceiling = ds.ceiling(benchmark);
    let names: Vec<String> = data.benchmarks().map(str::to_string).collect();

    let mut per_split = Vec::new();
    let mut evaluated = Vec::new();
    let mut predictions = Vec::new();
    let mut audit = Vec::new();
    let mut sizes = Vec::new();
    for k in 1..DIVISIONS {
        let train = data.select(&plan.train_ids(k));
        let test = data.select(plan.test_ids(k));
        let mut consumed = BTreeSet::new();

        let pc1 = match metric {
            BacktestMetric::Pc1 => {
                let m = fit_pc1(&train, &names, Some(benchmark))?;
                consumed.extend(m.fit_model_ids.iter().cloned());
                Some(m)
            }
            _ => None,
        };
        let value = |r: &ModelRecord| -> Result<f64> {
            Ok(match metric {
                BacktestMetric::Pc1 => pc1.as_ref().expect("fitted").project(r)?,
                BacktestMetric::Elo => r.elo.expect("complete case"),
                BacktestMetric::LogFlop => r.log_flop().expect("complete case"),
                BacktestMetric::Date => r.date_numeric(),
                BacktestMetric::Identity => {
                    let p = r.score(benchmark).expect("complete case") / ceiling;
                    logit(p.clamp(CLAMP_FRACTION, 1.0 - CLAMP_FRACTION))
                }
            })
        };

        let mut xy = Vec::with_capacity(train.len());
        for r in train.records() {
            xy.push((value(r)?, r.score(benchmark).expect("complete case")));
            consumed.insert(r.model_id.clone());
        }
        let fit = fit_sigmoid(&xy, ceiling)?;

        let mut preds = Vec::with_capacity(test.len());
        for r in test.records() {
            preds.push(Prediction {
                model_id: r.model_id.clone(),
                actual: r.score(benchmark).expect("complete case"),
                predicted: fit.eval(value(r)?),
            });
        }
        per_split.push(rmse(preds.iter().map(|p| (p.actual, p.predicted))));
        evaluated.push(preds.iter().map(|p| p.model_id.clone()).collect());
        sizes.push(preds.len());
        predictions.push(preds);
        audit.push(SplitAudit {
            step: k,
            train_ids: train.ids(),
            test_ids: test.ids(),
            consumed_ids: consumed,
        });
    }
    let aggregate_rmse = aggregate(&per_split, &sizes, opts.weighting)
        .ok_or_else(|| Error::degenerate("every test split was empty"))?;
    Ok(BacktestReport {
        mode: BacktestMode::CapabilityMetric,
        label: metric.to_string(),
        benchmark: benchmark.to_string(),
        per_split_rmse: per_split,
        models_evaluated: evaluated,
        predictions,
        aggregate_rmse,
        audit,
    })
}

fn frontier_ids(data: &Dataset, spec: &PathwaySpec) -> Result<HashSet<String>> {
    let pts: Vec<FrontierPoint> = data
        .records()
        .iter()
        .filter_map(|r| {
            Some(FrontierPoint::new(
                r.model_id.clone(),
                spec.input.value(r)?,
                r.score(&spec.target_benchmark)?,
            ))
        })
        .collect();
    Ok(extract_frontier(&pts)?.ids().into_iter().collect())
}

/// Whole pathway fitted per window, scored only on frontier models of the
/// test group. Steps without frontier test models are skipped.
pub fn backtest_full_path(
    ds: &Dataset,
    spec: &PathwaySpec,
    opts: &BacktestOptions,
) -> Result<BacktestReport> {
    if !ds.has_benchmark(&spec.target_benchmark) {
        return Err(Error::UnknownField(spec.target_benchmark.clone()));
    }
    let data = ds.complete_case_fields(&spec.required_fields(ds))?;
    let plan = make_splits(&data)?;
    let full_frontier = frontier_ids(&data, spec)?;

    let mut per_split = Vec::new();
    let mut evaluated = Vec::new();
    let mut predictions = Vec::new();
    let mut audit = Vec::new();
    let mut sizes = Vec::new();
    for k in 1..DIVISIONS {
        let train = data.select(&plan.train_ids(k));
        let test = data.select(plan.test_ids(k));
        let reference = match opts.frontier_reference {
            FrontierReference::Full => full_frontier.clone(),
            FrontierReference::TrainTest => {
                frontier_ids(&data.select(&plan.train_ids(k + 1)), spec)?
            }
        };
        let fitted = fit_pathway(&train, spec)?;
        let preds: Vec<Prediction> = test
            .records()
            .iter()
            .filter(|r| reference.contains(&r.model_id))
            .map(|r| Prediction {
                model_id: r.model_id.clone(),
                actual: r.score(&spec.target_benchmark).expect("complete case"),
                predicted: fitted.predict(spec.input.value(r).expect("complete case")),
            })
            .collect();
        per_split.push(rmse(preds.iter().map(|p| (p.actual, p.predicted))));
        evaluated.push(preds.iter().map(|p| p.model_id.clone()).collect());
        sizes.push(preds.len());
        predictions.push(preds);
        audit.push(SplitAudit {
            step: k,
            train_ids: train.ids(),
            test_ids: test.ids(),
            consumed_ids: fitted.consumed_ids,
        });
    }
    let aggregate_rmse = aggregate(&per_split, &sizes, opts.weighting)
        .ok_or_else(|| Error::degenerate("no frontier models in any test split"))?;
    Ok(BacktestReport {
        mode: BacktestMode::FullPath,
        label: spec.kind().to_string(),
        benchmark: spec.target_benchmark.clone(),
        per_split_rmse: per_split,
        models_evaluated: evaluated,
        predictions,
        aggregate_rmse,
        audit,
    })
}

/// One row of a cross-benchmark summary: the unweighted mean of the
/// per-benchmark aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub label: String,
    pub mean_rmse: f64,
    pub reports: Vec<BacktestReport>,
}

pub fn metric_summary(
    ds: &Dataset,
    metrics: &[BacktestMetric],
    benchmarks: &[String],
    opts: &BacktestOptions,
) -> Result<Vec<SummaryRow>> {
    metrics
        .iter()
        .map(|&m| {
            let reports = benchmarks
                .par_iter()
                .map(|b| backtest_capability_metric(ds, m, b, opts))
                .collect::<Result<Vec<_>>>()?;
            summarize(m.to_string(), reports)
        })
        .collect()
}

pub fn path_summary(
    ds: &Dataset,
    kinds: &[crate::pipeline::PathwayKind],
    benchmarks: &[String],
    opts: &BacktestOptions,
) -> Result<Vec<SummaryRow>> {
    kinds
        .iter()
        .map(|&k| {
            let reports = benchmarks
                .par_iter()
                .map(|b| backtest_full_path(ds, &k.spec(b.clone(), ds.ceiling(b)), opts))
                .collect::<Result<Vec<_>>>()?;
            summarize(k.to_string(), reports)
        })
        .collect()
}

fn summarize(label: String, reports: Vec<BacktestReport>) -> Result<SummaryRow> {
    let aggs: Vec<f64> = reports.iter().map(|r| r.aggregate_rmse).collect();
    let mean_rmse = mean(&aggs).ok_or(Error::Empty("no benchmarks to summarize"))?;
    Ok(SummaryRow {
        label,
        mean_rmse,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Ceilings;
    use crate::pipeline::{InputVariable, Intermediate, PathwayKind};
    use chrono::NaiveDate;

    fn ds_with_dates(n: usize) -> Dataset {
        let base = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
        let recs = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                ModelRecord::new(
                    format!("m{i:02}"),
                    base + chrono::Duration::days(20 * i as i64),
                )
                .with_elo(1000.0 + 300.0 * x)
                .with_score("s", 0.05 + 0.9 * x * x)
                .with_score("t", 0.1 + 0.5 * x)
                .with_score("u", 0.2 + 0.3 * x.sqrt())
            })
            .collect();
        Dataset::new(recs, Vec::new(), Ceilings::default()).unwrap()
    }

    #[test]
    fn split_sizes() {
        assert_eq!(
            make_splits(&ds_with_dates(38)).unwrap().sizes(),
            [10, 10, 9, 9]
        );
        assert_eq!(
            make_splits(&ds_with_dates(4)).unwrap().sizes(),
            [1, 1, 1, 1]
        );
        assert!(make_splits(&ds_with_dates(3)).is_err());
    }

    #[test]
    fn splits_are_date_ordered_partition() {
        let ds = ds_with_dates(23);
        let plan = make_splits(&ds).unwrap();
        let all: BTreeSet<String> = plan.divisions.iter().flatten().cloned().collect();
        assert_eq!(all.len(), 23);
        for w in plan.divisions.windows(2) {
            let last = w[0]
                .iter()
                .map(|id| ds.get(id).unwrap().release_date)
                .max()
                .unwrap();
            let first = w[1]
                .iter()
                .map(|id| ds.get(id).unwrap().release_date)
                .min()
                .unwrap();
            assert!(last <= first);
        }
    }

    #[test]
    fn identity_metric_is_perfect() {
        let ds = ds_with_dates(20);
        let rep = backtest_capability_metric(
            &ds,
            BacktestMetric::Identity,
            "s",
            &BacktestOptions::default(),
        )
        .unwrap();
        for r in &rep.per_split_rmse {
            assert!(r.unwrap() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn windows_expand_and_never_leak() {
        let ds = ds_with_dates(20);
        for metric in [
            BacktestMetric::Pc1,
            BacktestMetric::Elo,
            BacktestMetric::Date,
        ] {
            let rep =
                backtest_capability_metric(&ds, metric, "s", &BacktestOptions::default()).unwrap();
            for w in rep.audit.windows(2) {
                let a: BTreeSet<_> = w[0].train_ids.iter().collect();
                let b: BTreeSet<_> = w[1].train_ids.iter().collect();
                assert!(a.is_subset(&b) && a.len() < b.len());
            }
            for step in &rep.audit {
                assert!(step
                    .test_ids
                    .iter()
                    .all(|id| !step.consumed_ids.contains(id)));
            }
        }
    }

    #[test]
    fn rmse_matches_stored_predictions() {
        let ds = ds_with_dates(20);
        let rep =
            backtest_capability_metric(&ds, BacktestMetric::Elo, "t", &BacktestOptions::default())
                .unwrap();
        for (preds, r) in rep.predictions.iter().zip(&rep.per_split_rmse) {
            let direct = (preds
                .iter()
                .map(|p| (p.actual - p.predicted).powi(2))
                .sum::<f64>()
                / preds.len() as f64)
                .sqrt();
            assert!((direct - r.unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn split_without_frontier_models_is_skipped() {
        // last group is late but scores poorly: none of it is on the frontier
        let base = NaiveDate::from_ymd_opt(2023, 1, 1).unwrap();
        let recs: Vec<ModelRecord> = (0..8)
            .map(|i| {
                let score = if i < 6 { 0.1 + 0.1 * i as f64 } else { 0.05 };
                ModelRecord::new(
                    format!("m{i}"),
                    base + chrono::Duration::days(30 * i as i64),
                )
                .with_elo(1000.0 + 40.0 * i as f64)
                .with_score("s", score)
            })
            .collect();
        let ds = Dataset::new(recs, Vec::new(), Ceilings::default()).unwrap();
        let spec = PathwayKind::new(InputVariable::ReleaseDate, Intermediate::Elo).spec("s", 1.0);
        let rep = backtest_full_path(&ds, &spec, &BacktestOptions::default()).unwrap();
        assert!(rep.per_split_rmse[0].is_some());
        assert!(rep.per_split_rmse[2].is_none());
        assert!(rep.models_evaluated[2].is_empty());
        let expected = mean(
            &rep.per_split_rmse
                .iter()
                .flatten()
                .copied()
                .collect::<Vec<_>>(),
        )
        .unwrap();
        assert_eq!(rep.aggregate_rmse, expected);
    }

    #[test]
    fn weighting_by_test_size() {
        let per = [Some(1.0), None, Some(3.0)];
        assert_eq!(
            aggregate(&per, &[1, 5, 3], SplitWeighting::Unweighted),
            Some(2.0)
        );
        assert_eq!(
            aggregate(&per, &[1, 5, 3], SplitWeighting::TestSize),
            Some(2.5)
        );
    }

    #[test]
    fn metric_names_parse() {
        for m in BacktestMetric::TABLE {
            assert_eq!(m.to_string().parse::<BacktestMetric>().unwrap(), m);
        }
        assert!("gdp".parse::<BacktestMetric>().is_err());
    }
}
