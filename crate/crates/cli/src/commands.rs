use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context as _, Result};
use capcast_core::backtest::{metric_summary, path_summary, SummaryRow};
use capcast_core::compute_norm::{normalize_dataset, scaled_flop};
use capcast_core::pipeline::bootstrap::{
    bootstrap_forecast, ForecastReport, ThresholdDistribution,
};
use capcast_core::{
    capability_column, extract_frontier, fit_pathway, fit_pc1, fixtures, hoffmann_loss,
    invert_to_threshold, optimal_allocation, BacktestMetric, BacktestOptions, BootstrapOptions,
    CapabilityMetric, Ceilings, Dataset, Field, Format, FrontierPoint, FrontierReference,
    HoffmannConstants, Horizon, InputVariable, PathwayKind, PathwaySpec, SplitWeighting,
};
use chrono::NaiveDate;
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{sha256_hex, table, DataSource, Provenance, Writer};
use crate::GlobalArgs;

/// End of the default forecast horizon.
const DEFAULT_HORIZON_END: (i32, u32, u32) = (2027, 1, 1);

struct Run {
    cfg: RunConfig,
    ds: Dataset,
    writer: Writer,
}

impl Run {
    /// Load config and data, apply overrides, and open the output writer.
    fn start<A: Serialize>(
        command: &'static str,
        g: &GlobalArgs,
        args: &A,
        fill_flop: bool,
        apply: impl FnOnce(&mut RunConfig),
    ) -> Result<Run> {
        let mut cfg = match &g.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if g.data.is_some() && g.fixture.is_some() {
            bail!("--data and --fixture are mutually exclusive");
        }
        if let Some(p) = &g.data {
            cfg.data.path = Some(p.clone());
            cfg.data.fixture = None;
        }
        if let Some(f) = &g.fixture {
            cfg.data.fixture = Some(f.clone());
            cfg.data.path = None;
        }
        if let Some(f) = &g.format {
            cfg.data.format = Some(f.clone());
        }
        for (name, value) in &g.ceilings {
            if !(value.is_finite() && *value > 0.0) {
                bail!("ceiling for `{name}` must be positive");
            }
            cfg.ceilings.insert(name.clone(), *value);
        }
        if let Some(d) = &g.out_dir {
            cfg.output.dir = Some(d.clone());
        }
        if !g.formats.is_empty() {
            cfg.output.formats = g.formats.clone();
        }
        apply(&mut cfg);
        cfg.resolve_seed()?;
        let cfg =
            RunConfig::parse(&cfg.canonical()).context("resolved configuration is invalid")?;

        let k = cfg.compute.resolve()?;
        let (mut ds, data) = load_data(&cfg)?;
        if fill_flop {
            ds = fill_missing_flop(&ds, &k)?;
        }
        let provenance = Provenance {
            tool: "capcast",
            version: env!("CARGO_PKG_VERSION"),
            command,
            arguments: serde_json::to_value(args)?,
            config_sha256: sha256_hex(cfg.canonical().as_bytes()),
            data,
        };
        let writer = Writer::new(&cfg.output, provenance)?;
        Ok(Run { cfg, ds, writer })
    }

    fn finish(self) {
        for p in self.writer.written() {
            eprintln!("wrote {}", p.display());
        }
    }
}

fn load_data(cfg: &RunConfig) -> Result<(Dataset, DataSource)> {
    let ceilings = Ceilings(cfg.ceilings.clone());
    if let Some(path) = &cfg.data.path {
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let format = match &cfg.data.format {
            Some(f) => Format::from_str(f)?,
            None => Format::from_path(path).with_context(|| {
                format!(
                    "cannot infer the format of {}; pass --format",
                    path.display()
                )
            })?,
        };
        let ds = match format {
            Format::Csv => Dataset::read_csv(bytes.as_slice(), ceilings),
            Format::Json => Dataset::from_json_str(std::str::from_utf8(&bytes)?, ceilings),
        }
        .with_context(|| format!("loading {}", path.display()))?;
        let source = DataSource {
            source: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            fixture: None,
            elo_snapshot: None,
        };
        return Ok((ds, source));
    }
    let Some(name) = &cfg.data.fixture else {
        bail!("no dataset given: pass --data FILE or --fixture NAME");
    };
    let (ds, meta) =
        fixtures::by_name(name).with_context(|| format!("unknown fixture `{name}`"))?;
    let mut merged = meta.ceilings.clone();
    merged.0.extend(ceilings.0);
    let ds = ds.with_ceilings(merged)?;
    let source = DataSource {
        source: format!("fixture:{name}"),
        sha256: sha256_hex(fixtures::source_csv(name).unwrap_or_default().as_bytes()),
        fixture: Some(meta.fixture.name.clone()),
        elo_snapshot: Some(meta.fixture.elo_snapshot.clone()),
    };
    Ok((ds, source))
}

/// Scaled FLOP for records that have parameter and token counts but no
/// scaled value yet.
fn fill_missing_flop(ds: &Dataset, k: &HoffmannConstants) -> Result<Dataset> {
    let mut failure = None;
    let out = ds.map_records(|r| {
        let mut r = r.clone();
        if let (None, Some(n), Some(d)) = (r.scaled_training_flop, r.parameter_count, r.token_count)
        {
            match scaled_flop(n, d, k) {
                Ok(c) => r.scaled_training_flop = Some(c),
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        r
    })?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(out),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.4}")
}

fn fmt_e(x: f64) -> String {
    format!("{x:.4e}")
}

fn benchmarks_or_all(ds: &Dataset, names: &[String]) -> Result<Vec<String>> {
    if names.is_empty() {
        return Ok(ds.benchmarks().map(str::to_string).collect());
    }
    for n in names {
        if !ds.has_benchmark(n) {
            bail!("unknown benchmark `{n}`");
        }
    }
    Ok(names.to_vec())
}

// ---------------------------------------------------------------- normalize

#[derive(Debug, Args, Serialize)]
pub struct NormalizeArgs {
    /// Hoffmann constants preset (`chinchilla`, `besiroglu`).
    #[arg(long)]
    pub preset: Option<String>,
    /// Where to write the dataset copy; format follows the extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct NormalizedRow {
    model_id: String,
    parameter_count: f64,
    token_count: f64,
    loss: f64,
    n_opt: f64,
    d_opt: f64,
    raw_training_flop: f64,
    scaled_training_flop: f64,
}

#[derive(Debug, Serialize)]
struct NormalizeResult {
    constants: HoffmannConstants,
    rows: Vec<NormalizedRow>,
}

pub fn normalize(g: &GlobalArgs, args: &NormalizeArgs) -> Result<()> {
    let mut run = Run::start("normalize", g, args, false, |cfg| {
        if let Some(p) = &args.preset {
            cfg.compute.preset = p.clone();
            cfg.compute.constants = None;
        }
    })?;
    let k = run.cfg.compute.resolve()?;
    let with_nd = run
        .ds
        .records()
        .iter()
        .filter(|r| r.parameter_count.is_some() && r.token_count.is_some())
        .count();
    if with_nd == 0 {
        eprintln!(
            "warning: no record has both parameter_count and token_count; nothing to normalize"
        );
        return Ok(());
    }
    let (out, _) = normalize_dataset(&run.ds, &k)?;
    let mut rows = Vec::new();
    for r in out.records() {
        let (Some(n), Some(d)) = (r.parameter_count, r.token_count) else {
            continue;
        };
        let loss = hoffmann_loss(n, d, &k)?;
        let alloc = optimal_allocation(loss, &k)?;
        rows.push(NormalizedRow {
            model_id: r.model_id.clone(),
            parameter_count: n,
            token_count: d,
            loss,
            n_opt: alloc.n_opt,
            d_opt: alloc.d_opt,
            raw_training_flop: r.raw_training_flop.unwrap_or(6.0 * n * d),
            scaled_training_flop: alloc.c_opt,
        });
    }
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.model_id.clone(),
                fmt_e(r.parameter_count),
                fmt_e(r.token_count),
                fmt_f(r.loss),
                fmt_e(r.n_opt),
                fmt_e(r.d_opt),
                fmt_e(r.raw_training_flop),
                fmt_e(r.scaled_training_flop),
            ]
        })
        .collect();
    let header = [
        "model",
        "N",
        "D",
        "loss",
        "N_opt",
        "D_opt",
        "raw_flop",
        "scaled_flop",
    ];
    print!("{}", table(&header, &text_rows));

    let result = NormalizeResult { constants: k, rows };
    run.writer.json("normalize", &result)?;
    let csv_rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .map(|r| {
            vec![
                r.model_id.clone(),
                r.parameter_count.to_string(),
                r.token_count.to_string(),
                r.loss.to_string(),
                r.n_opt.to_string(),
                r.d_opt.to_string(),
                r.raw_training_flop.to_string(),
                r.scaled_training_flop.to_string(),
            ]
        })
        .collect();
    run.writer.csv(
        "normalize",
        &[
            "model_id",
            "parameter_count",
            "token_count",
            "loss",
            "n_opt",
            "d_opt",
            "raw_training_flop",
            "scaled_training_flop",
        ],
        &csv_rows,
    )?;
    let target = match (&args.out, run.writer.dir()) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join("normalized_data.csv")),
        (None, None) => None,
    };
    if let Some(path) = target {
        let format = Format::from_path(&path).unwrap_or(Format::Csv);
        let bytes = match format {
            Format::Csv => {
                let mut buf = Vec::new();
                out.write_csv(&mut buf)?;
                buf
            }
            Format::Json => out.to_json_string().into_bytes(),
        };
        run.writer.raw(path, &bytes)?;
    }
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- capability

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Pc1,
    Elo,
}

#[derive(Debug, Args, Serialize)]
pub struct CapabilityArgs {
    #[arg(long, value_enum, default_value = "pc1")]
    pub metric: MetricArg,
    /// Benchmarks entering PC-1, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub benchmarks: Vec<String>,
    /// Benchmark excluded from PC-1 (the forecasting target).
    #[arg(long)]
    pub holdout: Option<String>,
}

#[derive(Debug, Serialize)]
struct ColumnEntry {
    model_id: String,
    value: f64,
}

#[derive(Debug, Serialize)]
struct CapabilityResult {
    metric: MetricArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    pc1: Option<capcast_core::Pc1Model>,
    column: Vec<ColumnEntry>,
}

pub fn capability(g: &GlobalArgs, args: &CapabilityArgs) -> Result<()> {
    let mut run = Run::start("capability", g, args, false, |_| {})?;
    let (metric, pc1) = match args.metric {
        MetricArg::Elo => (CapabilityMetric::Elo, None),
        MetricArg::Pc1 => {
            let names = benchmarks_or_all(&run.ds, &args.benchmarks)?;
            let m = fit_pc1(&run.ds, &names, args.holdout.as_deref())?;
            println!(
                "PC-1 over {} benchmarks, {} models: explained variance {:.4}",
                m.benchmark_names.len(),
                m.fit_model_ids.len(),
                m.explained_variance_ratio
            );
            (CapabilityMetric::Pc1(m.clone()), Some(m))
        }
    };
    let column: Vec<ColumnEntry> = capability_column(&run.ds, &metric)?
        .into_iter()
        .map(|(model_id, value)| ColumnEntry { model_id, value })
        .collect();
    let rows: Vec<Vec<String>> = column
        .iter()
        .map(|c| vec![c.model_id.clone(), fmt_f(c.value)])
        .collect();
    print!("{}", table(&["model", "value"], &rows));
    let csv_rows: Vec<Vec<String>> = column
        .iter()
        .map(|c| vec![c.model_id.clone(), c.value.to_string()])
        .collect();
    run.writer
        .csv("capability", &["model_id", "value"], &csv_rows)?;
    run.writer.json(
        "capability",
        &CapabilityResult {
            metric: args.metric,
            pc1,
            column,
        },
    )?;
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- frontier

#[derive(Debug, Args, Serialize)]
pub struct FrontierArgs {
    /// Horizontal axis: `date`, `logflop`, `elo` or a benchmark.
    #[arg(long, default_value = "date")]
    pub x: String,
    /// Vertical axis, usually a benchmark.
    #[arg(long)]
    pub y: String,
}

fn axis_value(field: &Field, r: &capcast_core::ModelRecord) -> Option<f64> {
    match field {
        Field::ReleaseDate => Some(r.date_numeric()),
        Field::ScaledTrainingFlop => r.log_flop(),
        f => r.get(f),
    }
}

fn axis_label(field: &Field, x: f64) -> String {
    match field {
        Field::ReleaseDate => InputVariable::ReleaseDate.label(x),
        _ => fmt_f(x),
    }
}

#[derive(Debug, Serialize)]
struct FrontierMember {
    model_id: String,
    x: f64,
    x_label: String,
    y: f64,
}

#[derive(Debug, Serialize)]
struct FrontierResult {
    x: String,
    y: String,
    n_candidates: usize,
    members: Vec<FrontierMember>,
}

pub fn frontier(g: &GlobalArgs, args: &FrontierArgs) -> Result<()> {
    let mut run = Run::start("frontier", g, args, true, |_| {})?;
    let fx = run.ds.field(&args.x)?;
    let fy = run.ds.field(&args.y)?;
    let pts: Vec<FrontierPoint> = run
        .ds
        .records()
        .iter()
        .filter_map(|r| {
            Some(FrontierPoint::new(
                r.model_id.clone(),
                axis_value(&fx, r)?,
                axis_value(&fy, r)?,
            ))
        })
        .collect();
    let set = extract_frontier(&pts)?;
    let members: Vec<FrontierMember> = set
        .points
        .iter()
        .map(|p| FrontierMember {
            model_id: p.model_id.clone(),
            x: p.x,
            x_label: axis_label(&fx, p.x),
            y: p.y,
        })
        .collect();
    println!(
        "{} of {} models on the {} x {} frontier",
        members.len(),
        pts.len(),
        args.x,
        args.y
    );
    let rows: Vec<Vec<String>> = members
        .iter()
        .map(|m| vec![m.model_id.clone(), m.x_label.clone(), fmt_f(m.y)])
        .collect();
    print!("{}", table(&["model", &args.x, &args.y], &rows));
    let csv_rows: Vec<Vec<String>> = members
        .iter()
        .map(|m| {
            vec![
                m.model_id.clone(),
                m.x.to_string(),
                m.x_label.clone(),
                m.y.to_string(),
            ]
        })
        .collect();
    run.writer
        .csv("frontier", &["model_id", "x", "x_label", "y"], &csv_rows)?;
    run.writer.json(
        "frontier",
        &FrontierResult {
            x: args.x.clone(),
            y: args.y.clone(),
            n_candidates: pts.len(),
            members,
        },
    )?;
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- fit

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Pathway, e.g. `date-elo`, `logflop-pc1`, `date`.
    #[arg(long)]
    pub path: Option<PathwayKind>,
    #[arg(long)]
    pub benchmark: Option<String>,
}

fn apply_pathway(cfg: &mut RunConfig, path: Option<PathwayKind>, benchmark: &Option<String>) {
    if let Some(p) = path {
        cfg.pathway.path = Some(p.to_string());
    }
    if let Some(b) = benchmark {
        cfg.pathway.benchmark = Some(b.clone());
    }
}

fn resolve_spec(cfg: &RunConfig, ds: &Dataset) -> Result<PathwaySpec> {
    let kind: PathwayKind = cfg
        .pathway
        .path
        .as_deref()
        .context("no pathway given: pass --path")?
        .parse()?;
    let bench = cfg
        .pathway
        .benchmark
        .as_deref()
        .context("no benchmark given: pass --benchmark")?;
    if !ds.has_benchmark(bench) {
        bail!("unknown benchmark `{bench}`");
    }
    Ok(kind.spec(bench, ds.ceiling(bench)))
}

pub fn fit(g: &GlobalArgs, args: &FitArgs) -> Result<()> {
    let mut run = Run::start("fit", g, args, true, |cfg| {
        apply_pathway(cfg, args.path, &args.benchmark)
    })?;
    let spec = resolve_spec(&run.cfg, &run.ds)?;
    let fitted = fit_pathway(&run.ds, &spec)?;
    println!("pathway {spec}");
    if let Some(l) = &fitted.stage1 {
        println!(
            "  stage 1 (frontier line): slope {:.6}  intercept {:.6}  r^2 {:.4}  n {}",
            l.slope, l.intercept, l.r_squared, l.n_points
        );
    }
    let s = &fitted.stage2;
    println!(
        "  sigmoid: slope {:.6}  offset {:.6}  ceiling {}  rmse {:.4}  n {}",
        s.slope, s.offset, s.ceiling, s.rmse_fit, s.n_points
    );
    println!("  frontier: {}", fitted.frontier_used.ids().join(", "));
    run.writer.json("fit", &fitted)?;
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- backtest

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Metric,
    Path,
}

/// `all` or a comma-separated list of pathways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSelection(pub Vec<PathwayKind>);

impl FromStr for PathSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim) {
            if part == "all" {
                out.extend(PathwayKind::ALL);
            } else {
                out.push(
                    part.parse()
                        .map_err(|e: capcast_core::Error| e.to_string())?,
                );
            }
        }
        out.dedup();
        Ok(PathSelection(out))
    }
}

#[derive(Debug, Args, Serialize)]
pub struct BacktestArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Capability metrics for `--mode metric`, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub metrics: Vec<BacktestMetric>,
    /// Pathways for `--mode path`: `all` or a comma-separated list.
    #[arg(long)]
    pub paths: Option<PathSelection>,
    /// Target benchmarks, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub benchmarks: Vec<String>,
    /// Frontier used to select test models in path mode: `full` or `train+test`.
    #[arg(long)]
    pub frontier_ref: Option<FrontierReference>,
    /// Split aggregation: `unweighted` or `test-size`.
    #[arg(long)]
    pub weighting: Option<SplitWeighting>,
}

pub fn backtest(g: &GlobalArgs, args: &BacktestArgs) -> Result<()> {
    let mut run = Run::start("backtest", g, args, true, |cfg| {
        let b = &mut cfg.backtest;
        if let Some(m) = args.mode {
            b.mode = match m {
                ModeArg::Metric => "metric".into(),
                ModeArg::Path => "path".into(),
            };
        }
        if !args.metrics.is_empty() {
            b.metrics = args.metrics.iter().map(ToString::to_string).collect();
        }
        if let Some(p) = &args.paths {
            b.paths = p.0.iter().map(ToString::to_string).collect();
        }
        if !args.benchmarks.is_empty() {
            b.benchmarks = args.benchmarks.clone();
        }
        if let Some(f) = args.frontier_ref {
            b.frontier_reference = match f {
                FrontierReference::Full => "full".into(),
                FrontierReference::TrainTest => "train+test".into(),
            };
        }
        if let Some(w) = args.weighting {
            b.weighting = match w {
                SplitWeighting::Unweighted => "unweighted".into(),
                SplitWeighting::TestSize => "test-size".into(),
            };
        }
    })?;
    let bc = run.cfg.backtest.clone();
    let opts = BacktestOptions {
        frontier_reference: bc.frontier_reference.parse()?,
        weighting: bc.weighting.parse()?,
    };
    let benches = benchmarks_or_all(&run.ds, &bc.benchmarks)?;
    let rows: Vec<SummaryRow> = match bc.mode.as_str() {
        "metric" => {
            let metrics = bc
                .metrics
                .iter()
                .map(|m| m.parse::<BacktestMetric>())
                .collect::<Result<Vec<_>, _>>()?;
            metric_summary(&run.ds, &metrics, &benches, &opts)?
        }
        "path" => {
            let mut kinds = Vec::new();
            for p in &bc.paths {
                kinds.extend(PathSelection::from_str(p).map_err(anyhow::Error::msg)?.0);
            }
            path_summary(&run.ds, &kinds, &benches, &opts)?
        }
        other => bail!("unknown backtest mode `{other}` (expected `metric` or `path`)"),
    };

    let mut header: Vec<&str> = vec!["label"];
    header.extend(benches.iter().map(String::as_str));
    header.push("mean");
    let text_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![r.label.clone()];
            v.extend(
                r.reports
                    .iter()
                    .map(|rep| format!("{:.3}", rep.aggregate_rmse)),
            );
            v.push(format!("{:.3}", r.mean_rmse));
            v
        })
        .collect();
    println!("{} backtest, aggregate RMSE", bc.mode);
    print!("{}", table(&header, &text_rows));

    let mut matrix = Vec::new();
    for r in &rows {
        for rep in &r.reports {
            for (i, rmse) in rep.per_split_rmse.iter().enumerate() {
                matrix.push(vec![
                    r.label.clone(),
                    rep.benchmark.clone(),
                    rep.audit[i].step.to_string(),
                    rmse.map(|x| x.to_string()).unwrap_or_default(),
                    rep.models_evaluated[i].len().to_string(),
                ]);
            }
            matrix.push(vec![
                r.label.clone(),
                rep.benchmark.clone(),
                "aggregate".into(),
                rep.aggregate_rmse.to_string(),
                rep.models_evaluated
                    .iter()
                    .map(Vec::len)
                    .sum::<usize>()
                    .to_string(),
            ]);
        }
    }
    run.writer.csv(
        "backtest",
        &["label", "benchmark", "step", "rmse", "n_models"],
        &matrix,
    )?;
    let summary: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![r.label.clone(), r.mean_rmse.to_string()])
        .collect();
    run.writer
        .csv("backtest_summary", &["label", "mean_rmse"], &summary)?;
    run.writer.json("backtest", &rows)?;
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- forecast

#[derive(Debug, Args, Serialize)]
pub struct BootstrapArgs {
    /// Bootstrap iterations (0: point estimates only).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// Random seed (default: $CAPCAST_SEED, then 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reported percentiles, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Vec<f64>,
}

fn apply_bootstrap(cfg: &mut RunConfig, b: &BootstrapArgs) {
    if let Some(n) = b.bootstrap {
        cfg.bootstrap.iterations = n;
    }
    if let Some(s) = b.seed {
        cfg.bootstrap.seed = Some(s);
    }
    if !b.percentiles.is_empty() {
        cfg.bootstrap.percentiles = b.percentiles.clone();
    }
}

fn bootstrap_options(cfg: &RunConfig) -> BootstrapOptions {
    BootstrapOptions {
        n: cfg.bootstrap.iterations,
        seed: cfg.bootstrap.seed.unwrap_or_default(),
        resample: true,
        percentiles: cfg.bootstrap.percentiles.clone(),
    }
}

#[derive(Debug, Args, Serialize)]
pub struct ForecastArgs {
    #[arg(long)]
    pub path: Option<PathwayKind>,
    #[arg(long)]
    pub benchmark: Option<String>,
    /// Forecast dates, comma separated (YYYY-MM-DD).
    #[arg(long, value_delimiter = ',')]
    pub at: Vec<NaiveDate>,
    /// Start of a monthly horizon (default: earliest release date).
    #[arg(long)]
    pub from: Option<NaiveDate>,
    /// End of a monthly horizon (default: 2027-01-01).
    #[arg(long)]
    pub to: Option<NaiveDate>,
    /// Log10 scaled-FLOP values for compute-input pathways.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub logflop: Vec<f64>,
    /// Also report when this score is reached.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub boot: BootstrapArgs,
}

fn resolve_horizon(cfg: &RunConfig, ds: &Dataset, input: InputVariable) -> Result<Horizon> {
    let h = &cfg.horizon;
    match input {
        InputVariable::ReleaseDate => {
            if !h.at.is_empty() {
                return Ok(Horizon::dates(&h.at));
            }
            let start = match h.start {
                Some(d) => d,
                None => ds
                    .sorted_by_date()
                    .first()
                    .map(|r| r.release_date)
                    .context("empty dataset")?,
            };
            let (y, m, d) = DEFAULT_HORIZON_END;
            let end = h
                .end
                .unwrap_or(NaiveDate::from_ymd_opt(y, m, d).expect("valid date"));
            if end < start {
                bail!("horizon end {end} precedes its start {start}");
            }
            Ok(Horizon::monthly(start, end))
        }
        InputVariable::LogFlop => {
            if !h.logflop.is_empty() {
                return Ok(Horizon::log_flop(h.logflop.clone()));
            }
            let xs: Vec<f64> = ds.records().iter().filter_map(|r| r.log_flop()).collect();
            if xs.is_empty() {
                bail!("no record has training compute; pass --logflop values");
            }
            let lo = (xs.iter().copied().fold(f64::INFINITY, f64::min) * 4.0).floor() / 4.0;
            let hi =
                (xs.iter().copied().fold(f64::NEG_INFINITY, f64::max) * 4.0).ceil() / 4.0 + 2.0;
            let n = ((hi - lo) / 0.25).round() as usize;
            Ok(Horizon::log_flop(
                (0..=n).map(|i| lo + 0.25 * i as f64).collect(),
            ))
        }
    }
}

fn point_threshold(
    spec: &PathwaySpec,
    fitted: &capcast_core::FittedPathway,
    target: f64,
) -> Result<ThresholdDistribution> {
    let x = invert_to_threshold(fitted, target)?;
    Ok(ThresholdDistribution {
        pathway: spec.to_string(),
        input: spec.input,
        target_score: target,
        point_estimate: x,
        point_label: spec.input.label(x),
        samples: Vec::new(),
        percentiles: Vec::new(),
        n_discarded: 0,
    })
}

fn run_pathway(
    ds: &Dataset,
    spec: &PathwaySpec,
    horizon: &Horizon,
    threshold: Option<f64>,
    opts: &BootstrapOptions,
) -> Result<(ForecastReport, Option<ThresholdDistribution>)> {
    if opts.n > 0 {
        return Ok(bootstrap_forecast(ds, spec, horizon, threshold, opts)?);
    }
    let fitted = fit_pathway(ds, spec)?;
    let dist = threshold
        .map(|t| point_threshold(spec, &fitted, t))
        .transpose()?;
    let report = ForecastReport {
        pathway: spec.to_string(),
        input: spec.input,
        horizon: horizon.labels(),
        horizon_values: horizon.values.clone(),
        point_estimates: horizon.values.iter().map(|&x| fitted.predict(x)).collect(),
        percentile_bands: Vec::new(),
        n_bootstrap: 0,
        n_discarded: 0,
        seed: opts.seed,
    };
    Ok((report, dist))
}

fn write_threshold(writer: &mut Writer, dist: &ThresholdDistribution) -> Result<()> {
    let mut rows = vec![vec![
        "point".to_string(),
        dist.point_estimate.to_string(),
        dist.point_label.clone(),
    ]];
    rows.extend(dist.percentiles.iter().map(|p| {
        vec![
            p.percentile.to_string(),
            p.value.to_string(),
            p.label.clone(),
        ]
    }));
    writer.csv("threshold", &["percentile", "value", "label"], &rows)?;
    writer.json("threshold", dist)
}

fn print_threshold(dist: &ThresholdDistribution) {
    println!(
        "{} reaches {} at {} (point estimate)",
        dist.pathway, dist.target_score, dist.point_label
    );
    if !dist.percentiles.is_empty() {
        let rows: Vec<Vec<String>> = dist
            .percentiles
            .iter()
            .map(|p| vec![format!("p{}", p.percentile), p.label.clone()])
            .collect();
        print!("{}", table(&["percentile", "crossing"], &rows));
        if dist.n_discarded > 0 {
            println!(
                "({} resamples without a crossing were discarded)",
                dist.n_discarded
            );
        }
    }
}

pub fn forecast(g: &GlobalArgs, args: &ForecastArgs) -> Result<()> {
    let mut run = Run::start("forecast", g, args, true, |cfg| {
        apply_pathway(cfg, args.path, &args.benchmark);
        apply_bootstrap(cfg, &args.boot);
        if !args.at.is_empty() {
            cfg.horizon.at = args.at.clone();
        }
        if args.from.is_some() {
            cfg.horizon.start = args.from;
        }
        if args.to.is_some() {
            cfg.horizon.end = args.to;
        }
        if !args.logflop.is_empty() {
            cfg.horizon.logflop = args.logflop.clone();
        }
    })?;
    let spec = resolve_spec(&run.cfg, &run.ds)?;
    let horizon = resolve_horizon(&run.cfg, &run.ds, spec.input)?;
    let opts = bootstrap_options(&run.cfg);
    let (report, dist) = run_pathway(&run.ds, &spec, &horizon, args.threshold, &opts)?;

    let mut header = vec![spec.input.short_name().to_string(), "point".to_string()];
    header.extend(
        report
            .percentile_bands
            .iter()
            .map(|b| format!("p{}", b.percentile)),
    );
    let text_rows: Vec<Vec<String>> = (0..report.horizon.len())
        .map(|i| {
            let mut v = vec![report.horizon[i].clone(), fmt_f(report.point_estimates[i])];
            v.extend(report.percentile_bands.iter().map(|b| fmt_f(b.values[i])));
            v
        })
        .collect();
    println!("forecast {spec}");
    print!(
        "{}",
        table(
            &header.iter().map(String::as_str).collect::<Vec<_>>(),
            &text_rows
        )
    );
    if report.n_bootstrap > 0 {
        println!(
            "{} bootstrap iterations, seed {}, {} discarded",
            report.n_bootstrap, report.seed, report.n_discarded
        );
    }

    let mut long = Vec::new();
    for i in 0..report.horizon.len() {
        long.push(vec![
            report.horizon[i].clone(),
            "point".into(),
            report.point_estimates[i].to_string(),
        ]);
        for b in &report.percentile_bands {
            long.push(vec![
                report.horizon[i].clone(),
                b.percentile.to_string(),
                b.values[i].to_string(),
            ]);
        }
    }
    run.writer.csv(
        "forecast",
        &[spec.input.short_name(), "percentile", "value"],
        &long,
    )?;
    run.writer.json("forecast", &report)?;
    if let Some(d) = &dist {
        print_threshold(d);
        write_threshold(&mut run.writer, d)?;
    }
    run.finish();
    Ok(())
}

// ---------------------------------------------------------------- threshold

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub path: Option<PathwayKind>,
    #[arg(long)]
    pub benchmark: Option<String>,
    /// Target score; must lie strictly between 0 and the ceiling.
    #[arg(long, alias = "threshold")]
    pub score: f64,
    #[command(flatten)]
    pub boot: BootstrapArgs,
}

pub fn threshold(g: &GlobalArgs, args: &ThresholdArgs) -> Result<()> {
    let mut run = Run::start("threshold", g, args, true, |cfg| {
        apply_pathway(cfg, args.path, &args.benchmark);
        apply_bootstrap(cfg, &args.boot);
    })?;
    let spec = resolve_spec(&run.cfg, &run.ds)?;
    let horizon = Horizon {
        input: spec.input,
        values: Vec::new(),
    };
    let opts = bootstrap_options(&run.cfg);
    let (_, dist) = run_pathway(&run.ds, &spec, &horizon, Some(args.score), &opts)?;
    let dist = dist.expect("threshold requested");
    print_threshold(&dist);
    write_threshold(&mut run.writer, &dist)?;
    run.finish();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_selection_expands_all() {
        assert_eq!(
            PathSelection::from_str("all").unwrap().0,
            PathwayKind::ALL.to_vec()
        );
        let two = PathSelection::from_str("date-elo,logflop").unwrap().0;
        assert_eq!(two.len(), 2);
        assert!(PathSelection::from_str("date-bogus").is_err());
    }

    #[test]
    fn seed_is_recorded_in_canonical_config() {
        let mut cfg = RunConfig::default();
        cfg.bootstrap.seed = Some(7);
        assert!(cfg.canonical().contains("seed = 7"));
    }
}
