//! Model records, tabular loading and the complete-case views used by every
//! downstream fit.
//!
//! A dataset is immutable once constructed. Scores are stored per benchmark
//! with absent keys meaning "not measured"; there are no sentinel values.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Column prefix for benchmark score columns in CSV and JSON.
pub const BENCHMARK_PREFIX: &str = "benchmark:";

const FIXED_COLUMNS: [&str; 7] = [
    "model_id",
    "release_date",
    "elo",
    "parameter_count",
    "token_count",
    "raw_training_flop",
    "scaled_training_flop",
];

const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub model_id: String,
    pub release_date: NaiveDate,
    pub elo: Option<f64>,
    pub parameter_count: Option<f64>,
    pub token_count: Option<f64>,
    pub raw_training_flop: Option<f64>,
    pub scaled_training_flop: Option<f64>,
    /// Present scores only; a benchmark missing from the map is unmeasured.
    pub benchmark_scores: BTreeMap<String, f64>,
}

impl ModelRecord {
    pub fn new(model_id: impl Into<String>, release_date: NaiveDate) -> Self {
        Self {
            model_id: model_id.into(),
            release_date,
            elo: None,
            parameter_count: None,
            token_count: None,
            raw_training_flop: None,
            scaled_training_flop: None,
            benchmark_scores: BTreeMap::new(),
        }
    }

    pub fn with_elo(mut self, elo: f64) -> Self {
        self.elo = Some(elo);
        self
    }

    pub fn with_score(mut self, benchmark: impl Into<String>, score: f64) -> Self {
        self.benchmark_scores.insert(benchmark.into(), score);
        self
    }

    pub fn with_training(mut self, parameters: f64, tokens: f64) -> Self {
        self.parameter_count = Some(parameters);
        self.token_count = Some(tokens);
        self
    }

    pub fn score(&self, benchmark: &str) -> Option<f64> {
        self.benchmark_scores.get(benchmark).copied()
    }

    /// Release date as fractional years since 1970-01-01.
    pub fn date_numeric(&self) -> f64 {
        date_to_numeric(self.release_date)
    }

    /// Base-10 log of the scaled training FLOP, when known.
    pub fn log_flop(&self) -> Option<f64> {
        self.scaled_training_flop.map(f64::log10)
    }

    pub fn get(&self, field: &Field) -> Option<f64> {
        match field {
            Field::ReleaseDate => Some(self.date_numeric()),
            Field::Elo => self.elo,
            Field::ParameterCount => self.parameter_count,
            Field::TokenCount => self.token_count,
            Field::RawTrainingFlop => self.raw_training_flop,
            Field::ScaledTrainingFlop => self.scaled_training_flop,
            Field::Benchmark(name) => self.score(name),
        }
    }
}

/// A named column of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    ReleaseDate,
    Elo,
    ParameterCount,
    TokenCount,
    RawTrainingFlop,
    ScaledTrainingFlop,
    Benchmark(String),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::ReleaseDate => f.write_str("release_date"),
            Field::Elo => f.write_str("elo"),
            Field::ParameterCount => f.write_str("parameter_count"),
            Field::TokenCount => f.write_str("token_count"),
            Field::RawTrainingFlop => f.write_str("raw_training_flop"),
            Field::ScaledTrainingFlop => f.write_str("scaled_training_flop"),
            Field::Benchmark(name) => write!(f, "{BENCHMARK_PREFIX}{name}"),
        }
    }
}

/// Per-benchmark upper asymptotes. Benchmarks without an entry use 1.0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ceilings(pub BTreeMap<String, f64>);

impl Ceilings {
    pub fn get(&self, benchmark: &str) -> f64 {
        self.0.get(benchmark).copied().unwrap_or(1.0)
    }

    pub fn with(mut self, benchmark: impl Into<String>, ceiling: f64) -> Self {
        self.0.insert(benchmark.into(), ceiling);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<ModelRecord>,
    benchmarks: BTreeSet<String>,
    ceilings: Ceilings,
}

impl Dataset {
    /// Validates and wraps records. The benchmark set is the union of the
    /// `declared` names and every benchmark that appears in a record.
    pub fn new(
        records: Vec<ModelRecord>,
        declared: impl IntoIterator<Item = String>,
        ceilings: Ceilings,
    ) -> Result<Self> {
        let mut benchmarks: BTreeSet<String> = declared.into_iter().collect();
        let mut seen = HashSet::with_capacity(records.len());
        for rec in &records {
            validate_record(rec, &ceilings)?;
            if !seen.insert(rec.model_id.as_str()) {
                return Err(Error::DuplicateModel(rec.model_id.clone()));
            }
            benchmarks.extend(rec.benchmark_scores.keys().cloned());
        }
        for (name, &c) in &ceilings.0 {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "ceiling for `{name}` must be positive, got {c}"
                )));
            }
        }
        Ok(Self {
            records,
            benchmarks,
            ceilings,
        })
    }

    pub fn records(&self) -> &[ModelRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn benchmarks(&self) -> impl Iterator<Item = &str> {
        self.benchmarks.iter().map(String::as_str)
    }

    pub fn has_benchmark(&self, name: &str) -> bool {
        self.benchmarks.contains(name)
    }

    pub fn ceilings(&self) -> &Ceilings {
        &self.ceilings
    }

    pub fn ceiling(&self, benchmark: &str) -> f64 {
        self.ceilings.get(benchmark)
    }

    pub fn get(&self, model_id: &str) -> Option<&ModelRecord> {
        self.records.iter().find(|r| r.model_id == model_id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.model_id.clone()).collect()
    }

    /// Records ordered by release date, ties broken by `model_id`.
    pub fn sorted_by_date(&self) -> Vec<&ModelRecord> {
        let mut v: Vec<&ModelRecord> = self.records.iter().collect();
        v.sort_by(|a, b| {
            a.release_date
                .cmp(&b.release_date)
                .then_with(|| a.model_id.cmp(&b.model_id))
        });
        v
    }

    /// Resolve a column name. Benchmarks may be given bare or with the
    /// `benchmark:` prefix.
    pub fn field(&self, name: &str) -> Result<Field> {
        let f = match name {
            "release_date" | "date" => Field::ReleaseDate,
            "elo" => Field::Elo,
            "parameter_count" => Field::ParameterCount,
            "token_count" => Field::TokenCount,
            "raw_training_flop" => Field::RawTrainingFlop,
            "scaled_training_flop" | "log_flop" | "logflop" => Field::ScaledTrainingFlop,
            other => {
                let bare = other.strip_prefix(BENCHMARK_PREFIX).unwrap_or(other);
                if self.benchmarks.contains(bare) {
                    Field::Benchmark(bare.to_string())
                } else {
                    return Err(Error::UnknownField(name.to_string()));
                }
            }
        };
        Ok(f)
    }

    /// Keep only the records where every named field is present.
    pub fn complete_case<S: AsRef<str>>(&self, required: &[S]) -> Result<Dataset> {
        let fields = required
            .iter()
            .map(|n| self.field(n.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.complete_case_fields(&fields)
    }

    pub fn complete_case_fields(&self, required: &[Field]) -> Result<Dataset> {
        for f in required {
            if let Field::Benchmark(b) = f {
                if !self.benchmarks.contains(b) {
                    return Err(Error::UnknownField(f.to_string()));
                }
            }
        }
        Ok(self.filter(|r| required.iter().all(|f| r.get(f).is_some())))
    }

    /// Order-preserving subset; the benchmark set and ceilings are kept.
    pub fn filter(&self, mut keep: impl FnMut(&ModelRecord) -> bool) -> Dataset {
        Dataset {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            benchmarks: self.benchmarks.clone(),
            ceilings: self.ceilings.clone(),
        }
    }

    /// Subset by id, in the order of `self`.
    pub fn select(&self, ids: &[String]) -> Dataset {
        let wanted: HashSet<&str> = ids.iter().map(String::as_str).collect();
        self.filter(|r| wanted.contains(r.model_id.as_str()))
    }

    /// A new dataset over arbitrary records (possibly repeated, as in a
    /// bootstrap resample). Duplicate ids are permitted here.
    pub(crate) fn with_records_unchecked(&self, records: Vec<ModelRecord>) -> Dataset {
        Dataset {
            records,
            benchmarks: self.benchmarks.clone(),
            ceilings: self.ceilings.clone(),
        }
    }

    pub fn map_records(&self, f: impl FnMut(&ModelRecord) -> ModelRecord) -> Result<Dataset> {
        let records = self.records.iter().map(f).collect();
        Dataset::new(records, self.benchmarks.clone(), self.ceilings.clone())
    }

    pub fn with_ceilings(mut self, ceilings: Ceilings) -> Result<Dataset> {
        for r in &self.records {
            validate_record(r, &ceilings)?;
        }
        self.ceilings = ceilings;
        Ok(self)
    }

    fn columns(&self) -> Vec<String> {
        let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
        cols.extend(
            self.benchmarks
                .iter()
                .map(|b| format!("{BENCHMARK_PREFIX}{b}")),
        );
        cols
    }

    pub fn read_csv<R: Read>(reader: R, ceilings: Ceilings) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers: Vec<String> = rdr
            .headers()
            .map_err(|e| Error::Malformed(e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        for h in &headers {
            if !FIXED_COLUMNS.contains(&h.as_str()) && !h.starts_with(BENCHMARK_PREFIX) {
                return Err(Error::Malformed(format!("unknown column `{h}`")));
            }
        }
        for required in ["model_id", "release_date"] {
            if !headers.iter().any(|h| h == required) {
                return Err(Error::Malformed(format!("missing column `{required}`")));
            }
        }
        let declared: Vec<String> = headers
            .iter()
            .filter_map(|h| h.strip_prefix(BENCHMARK_PREFIX).map(str::to_string))
            .collect();

        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row_no = i + 1;
            let row = row.map_err(|e| Error::MalformedCell {
                row: row_no,
                column: "*".into(),
                message: e.to_string(),
            })?;
            let cells = headers
                .iter()
                .zip(row.iter())
                .map(|(h, v)| (h.as_str(), CellValue::Text(v)));
            records.push(parse_row(row_no, cells)?);
        }
        Dataset::new(records, declared, ceilings)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let cols = self.columns();
        w.write_record(&cols).map_err(csv_err)?;
        for r in &self.records {
            let mut row = vec![
                r.model_id.clone(),
                r.release_date.to_string(),
                fmt_opt(r.elo),
                fmt_opt(r.parameter_count),
                fmt_opt(r.token_count),
                fmt_opt(r.raw_training_flop),
                fmt_opt(r.scaled_training_flop),
            ];
            row.extend(self.benchmarks.iter().map(|b| fmt_opt(r.score(b))));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Malformed(e.to_string()))?;
        Ok(())
    }

    pub fn from_json_str(text: &str, ceilings: Ceilings) -> Result<Dataset> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let rows = value
            .as_array()
            .ok_or_else(|| Error::Malformed("expected a JSON array of records".into()))?;
        let mut records = Vec::with_capacity(rows.len());
        let mut declared = BTreeSet::new();
        for (i, row) in rows.iter().enumerate() {
            let row_no = i + 1;
            let obj = row.as_object().ok_or_else(|| Error::MalformedCell {
                row: row_no,
                column: "*".into(),
                message: "expected an object".into(),
            })?;
            for key in obj.keys() {
                if !FIXED_COLUMNS.contains(&key.as_str()) && !key.starts_with(BENCHMARK_PREFIX) {
                    return Err(Error::MalformedCell {
                        row: row_no,
                        column: key.clone(),
                        message: "unknown field".into(),
                    });
                }
            }
            declared.extend(
                obj.keys()
                    .filter_map(|k| k.strip_prefix(BENCHMARK_PREFIX))
                    .map(str::to_string),
            );
            let cells = obj.iter().map(|(k, v)| (k.as_str(), CellValue::Json(v)));
            records.push(parse_row(row_no, cells)?);
        }
        Dataset::new(records, declared, ceilings)
    }

    pub fn to_json_value(&self) -> Value {
        let rows = self
            .records
            .iter()
            .map(|r| {
                let mut m = Map::new();
                m.insert("model_id".into(), Value::from(r.model_id.clone()));
                m.insert(
                    "release_date".into(),
                    Value::from(r.release_date.to_string()),
                );
                m.insert("elo".into(), opt_json(r.elo));
                m.insert("parameter_count".into(), opt_json(r.parameter_count));
                m.insert("token_count".into(), opt_json(r.token_count));
                m.insert("raw_training_flop".into(), opt_json(r.raw_training_flop));
                m.insert(
                    "scaled_training_flop".into(),
                    opt_json(r.scaled_training_flop),
                );
                for b in &self.benchmarks {
                    m.insert(format!("{BENCHMARK_PREFIX}{b}"), opt_json(r.score(b)));
                }
                Value::Object(m)
            })
            .collect();
        Value::Array(rows)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("dataset serializes")
    }
}

/// Load a dataset from `path`, validating scores against `ceilings`.
pub fn load_records(path: &Path, format: Format, ceilings: Ceilings) -> Result<Dataset> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        Format::Csv => {
            let file = std::fs::File::open(path).map_err(io_err)?;
            Dataset::read_csv(file, ceilings)
        }
        Format::Json => {
            let text = std::fs::read_to_string(path).map_err(io_err)?;
            Dataset::from_json_str(&text, ceilings)
        }
    }
}

pub fn save_records(ds: &Dataset, path: &Path, format: Format) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        Format::Csv => {
            let file = std::fs::File::create(path).map_err(io_err)?;
            ds.write_csv(file)
        }
        Format::Json => std::fs::write(path, ds.to_json_string() + "\n").map_err(io_err),
    }
}

/// Days since 1970-01-01 divided by 365.25.
pub fn date_to_numeric(d: NaiveDate) -> f64 {
    f64::from(days_since_epoch(d)) / DAYS_PER_YEAR
}

/// Inverse of [`date_to_numeric`], rounded to the nearest day.
pub fn numeric_to_date(years: f64) -> Result<NaiveDate> {
    let days = (years * DAYS_PER_YEAR).round();
    if !days.is_finite() || days.abs() > 3.0e6 {
        return Err(Error::domain(format!(
            "{years} years is not a representable date"
        )));
    }
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch");
    epoch
        .checked_add_signed(chrono::Duration::days(days as i64))
        .ok_or_else(|| Error::domain(format!("{years} years is not a representable date")))
}

fn days_since_epoch(d: NaiveDate) -> i32 {
    // 719_163 = days from 0001-01-01 (CE day 1) to 1970-01-01.
    d.num_days_from_ce() - 719_163
}

enum CellValue<'a> {
    Text(&'a str),
    Json(&'a Value),
}

impl CellValue<'_> {
    fn as_text(&self) -> Option<String> {
        match self {
            CellValue::Text("") => None,
            CellValue::Text(s) => Some(s.to_string()),
            CellValue::Json(Value::Null) => None,
            CellValue::Json(Value::String(s)) if s.is_empty() => None,
            CellValue::Json(Value::String(s)) => Some(s.clone()),
            CellValue::Json(v) => Some(v.to_string()),
        }
    }

    fn as_number(&self) -> std::result::Result<Option<f64>, String> {
        match self {
            CellValue::Json(Value::Number(n)) => n
                .as_f64()
                .map(Some)
                .ok_or_else(|| format!("not a number: {n}")),
            CellValue::Json(Value::Bool(_))
            | CellValue::Json(Value::Array(_))
            | CellValue::Json(Value::Object(_)) => Err("expected a number".into()),
            _ => match self.as_text() {
                None => Ok(None),
                Some(s) => s
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| format!("`{s}` is not a number")),
            },
        }
    }
}

fn parse_row<'a>(
    row: usize,
    cells: impl Iterator<Item = (&'a str, CellValue<'a>)>,
) -> Result<ModelRecord> {
    let bad = |column: &str, message: String| Error::MalformedCell {
        row,
        column: column.to_string(),
        message,
    };
    let mut model_id = None;
    let mut release_date = None;
    let mut rec = ModelRecord::new(String::new(), NaiveDate::MIN);
    for (col, cell) in cells {
        match col {
            "model_id" => model_id = cell.as_text(),
            "release_date" => {
                let text = cell
                    .as_text()
                    .ok_or_else(|| bad(col, "missing release date".into()))?;
                let d = NaiveDate::parse_from_str(&text, "%Y-%m-%d")
                    .map_err(|e| bad(col, format!("`{text}` is not an ISO-8601 date ({e})")))?;
                release_date = Some(d);
            }
            _ => {
                let v = cell.as_number().map_err(|m| bad(col, m))?;
                match col {
                    "elo" => rec.elo = v,
                    "parameter_count" => rec.parameter_count = v,
                    "token_count" => rec.token_count = v,
                    "raw_training_flop" => rec.raw_training_flop = v,
                    "scaled_training_flop" => rec.scaled_training_flop = v,
                    other => {
                        let name = other
                            .strip_prefix(BENCHMARK_PREFIX)
                            .ok_or_else(|| bad(other, "unknown column".into()))?;
                        if name.is_empty() {
                            return Err(bad(other, "empty benchmark name".into()));
                        }
                        if let Some(v) = v {
                            rec.benchmark_scores.insert(name.to_string(), v);
                        }
                    }
                }
            }
        }
    }
    rec.model_id = model_id.ok_or_else(|| bad("model_id", "missing model_id".into()))?;
    rec.release_date =
        release_date.ok_or_else(|| bad("release_date", "missing release date".into()))?;
    Ok(rec)
}

fn validate_record(r: &ModelRecord, ceilings: &Ceilings) -> Result<()> {
    let invalid = |message: String| Error::InvalidRecord {
        model: r.model_id.clone(),
        message,
    };
    if r.model_id.trim().is_empty() {
        return Err(Error::InvalidRecord {
            model: String::new(),
            message: "empty model_id".into(),
        });
    }
    let positives = [
        ("elo", r.elo),
        ("parameter_count", r.parameter_count),
        ("token_count", r.token_count),
        ("raw_training_flop", r.raw_training_flop),
        ("scaled_training_flop", r.scaled_training_flop),
    ];
    for (name, v) in positives {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
    }
    for (b, &s) in &r.benchmark_scores {
        let c = ceilings.get(b);
        if !(s.is_finite() && (0.0..=c).contains(&s)) {
            return Err(invalid(format!("score {s} for `{b}` outside [0, {c}]")));
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_json(v: Option<f64>) -> Value {
    v.map(Value::from).unwrap_or(Value::Null)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Malformed(e.to_string())
}
