//! Forecasting frontier benchmark scores from release date or training
//! compute, optionally through an intermediate capability metric (Elo or
//! PC-1).
//!
//! The building blocks are small and composable: [`frontier`] extracts the
//! Pareto frontier of an (input, score) plane, [`regression`] fits lines and
//! ceiling-scaled sigmoids, [`capability`] provides PC-1, and [`pipeline`]
//! composes them into the six forecasting pathways with a paired bootstrap.
//! [`backtest`] evaluates metrics and pathways with expanding windows.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod backtest;
pub mod capability;
pub mod compute_norm;
pub mod dataset;
mod error;
pub mod fixtures;
pub mod frontier;
mod linalg;
pub mod pipeline;
pub mod regression;
pub mod stats;

pub use backtest::{
    backtest_capability_metric, backtest_full_path, make_splits, BacktestMetric, BacktestMode,
    BacktestOptions, BacktestReport, FrontierReference, SplitPlan, SplitWeighting,
};
pub use capability::{capability_column, fit_pc1, project_pc1, CapabilityMetric, Pc1Model};
pub use compute_norm::{
    hoffmann_loss, optimal_allocation, scaled_flop, ComputeAllocation, HoffmannConstants,
};
pub use dataset::{
    date_to_numeric, load_records, numeric_to_date, save_records, Ceilings, Dataset, Field, Format,
    ModelRecord,
};
pub use error::{Error, Result};
pub use frontier::{extract_frontier, FrontierPoint, FrontierSet};
pub use linalg::symmetric_eigen;
pub use pipeline::{
    bootstrap_forecast, fit_pathway, invert_to_threshold, predict, BootstrapOptions, FittedPathway,
    ForecastReport, Horizon, InputVariable, Intermediate, PathwayKind, PathwaySpec,
    ThresholdDistribution,
};
pub use regression::{
    fit_linear, fit_sigmoid, sigmoid_eval, sigmoid_invert, LinearFit, SigmoidFit,
};
