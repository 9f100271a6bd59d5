//! Paired bootstrap over whole model records.
//!
//! Iteration `i` draws its resample from a ChaCha stream keyed by
//! `(seed, i)`, so results do not depend on scheduling or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_pathway, invert_to_threshold, Horizon, PathwaySpec};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::stats::percentile_sorted;

/// Largest tolerated fraction of failed refits.
pub const MAX_DISCARD_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOptions {
    pub n: usize,
    pub seed: u64,
    /// When false every iteration refits the unresampled data (debugging).
    pub resample: bool,
    pub percentiles: Vec<f64>,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self {
            n: 10_000,
            seed: 0,
            resample: true,
            percentiles: vec![2.5, 50.0, 97.5],
        }
    }
}

impl BootstrapOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PercentileBand {
    pub percentile: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub pathway: String,
    pub input: super::InputVariable,
    pub horizon: Vec<String>,
    pub horizon_values: Vec<f64>,
    pub point_estimates: Vec<f64>,
    pub percentile_bands: Vec<PercentileBand>,
    pub n_bootstrap: usize,
    pub n_discarded: usize,
    pub seed: u64,
}

impl ForecastReport {
    pub fn band(&self, percentile: f64) -> Option<&[f64]> {
        self.percentile_bands
            .iter()
            .find(|b| b.percentile == percentile)
            .map(|b| b.values.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPercentile {
    pub percentile: f64,
    pub value: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDistribution {
    pub pathway: String,
    pub input: super::InputVariable,
    pub target_score: f64,
    /// Crossing input value from the full-data fit.
    pub point_estimate: f64,
    pub point_label: String,
    pub samples: Vec<f64>,
    pub percentiles: Vec<ThresholdPercentile>,
    pub n_discarded: usize,
}

impl ThresholdDistribution {
    pub fn percentile(&self, p: f64) -> Option<f64> {
        self.percentiles
            .iter()
            .find(|q| q.percentile == p)
            .map(|q| q.value)
    }
}

struct Iteration {
    forecast: Option<Vec<f64>>,
    crossing: Option<f64>,
}

/// Draw the resample for iteration `index`.
pub fn resample_indices(seed: u64, index: u64, len: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..len).map(|_| rng.random_range(0..len)).collect()
}

pub fn bootstrap_forecast(
    ds: &Dataset,
    spec: &PathwaySpec,
    horizon: &Horizon,
    threshold: Option<f64>,
    opts: &BootstrapOptions,
) -> Result<(ForecastReport, Option<ThresholdDistribution>)> {
    if opts.n == 0 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least one iteration".into(),
        ));
    }
    if horizon.input != spec.input {
        return Err(Error::InvalidArgument(
            "horizon is expressed in a different input variable than the pathway".into(),
        ));
    }
    let mut pcts = opts.percentiles.clone();
    pcts.sort_by(f64::total_cmp);
    pcts.dedup();
    if pcts.iter().any(|p| !(0.0..=100.0).contains(p)) {
        return Err(Error::InvalidArgument(
            "percentiles must lie in [0, 100]".into(),
        ));
    }

    let full = fit_pathway(ds, spec)?;
    let point_estimates: Vec<f64> = horizon.values.iter().map(|&x| full.predict(x)).collect();
    let point_crossing = threshold
        .map(|t| invert_to_threshold(&full, t))
        .transpose()?;

    let records = ds.records();
    let iterations: Vec<Iteration> = (0..opts.n)
        .into_par_iter()
        .map(|i| {
            let sample = if opts.resample {
                let idx = resample_indices(opts.seed, i as u64, records.len());
                ds.with_records_unchecked(idx.into_iter().map(|j| records[j].clone()).collect())
            } else {
                ds.clone()
            };
            match fit_pathway(&sample, spec) {
                Ok(p) => Iteration {
                    forecast: Some(horizon.values.iter().map(|&x| p.predict(x)).collect()),
                    crossing: threshold.and_then(|t| invert_to_threshold(&p, t).ok()),
                },
                Err(_) => Iteration {
                    forecast: None,
                    crossing: None,
                },
            }
        })
        .collect();

    let forecasts: Vec<&Vec<f64>> = iterations
        .iter()
        .filter_map(|it| it.forecast.as_ref())
        .collect();
    let n_discarded = opts.n - forecasts.len();
    check_discards(n_discarded, opts.n)?;

    let mut percentile_bands: Vec<PercentileBand> = pcts
        .iter()
        .map(|&p| PercentileBand {
            percentile: p,
            values: Vec::with_capacity(horizon.values.len()),
        })
        .collect();
    let mut column = Vec::with_capacity(forecasts.len());
    for h in 0..horizon.values.len() {
        column.clear();
        column.extend(forecasts.iter().map(|f| f[h]));
        column.sort_by(f64::total_cmp);
        for band in percentile_bands.iter_mut() {
            band.values
                .push(percentile_sorted(&column, band.percentile));
        }
    }

    let report = ForecastReport {
        pathway: spec.to_string(),
        input: spec.input,
        horizon: horizon.labels(),
        horizon_values: horizon.values.clone(),
        point_estimates,
        percentile_bands,
        n_bootstrap: opts.n,
        n_discarded,
        seed: opts.seed,
    };

    let dist = match (threshold, point_crossing) {
        (Some(target), Some(point)) => {
            let samples: Vec<f64> = iterations.iter().filter_map(|it| it.crossing).collect();
            let discarded = opts.n - samples.len();
            check_discards(discarded, opts.n)?;
            let mut sorted = samples.clone();
            sorted.sort_by(f64::total_cmp);
            let percentiles = pcts
                .iter()
                .map(|&p| {
                    let value = percentile_sorted(&sorted, p);
                    ThresholdPercentile {
                        percentile: p,
                        value,
                        label: spec.input.label(value),
                    }
                })
                .collect();
            Some(ThresholdDistribution {
                pathway: spec.to_string(),
                input: spec.input,
                target_score: target,
                point_estimate: point,
                point_label: spec.input.label(point),
                samples,
                percentiles,
                n_discarded: discarded,
            })
        }
        _ => None,
    };
    Ok((report, dist))
}

fn check_discards(discarded: usize, total: usize) -> Result<()> {
    if discarded as f64 > MAX_DISCARD_FRACTION * total as f64 || discarded == total {
        Err(Error::TooManyDiscarded { discarded, total })
    } else {
        Ok(())
    }
}
