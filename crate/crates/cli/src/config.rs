//! Run configuration. One TOML document with a section per module; command
//! line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use capcast_core::HoffmannConstants;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// Environment variable that replaces the default seed of 0.
pub const SEED_ENV: &str = "CAPCAST_SEED";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub ceilings: BTreeMap<String, f64>,
    pub compute: ComputeConfig,
    pub pathway: PathwayConfig,
    pub horizon: HorizonConfig,
    pub bootstrap: BootstrapConfig,
    pub backtest: BacktestConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub path: Option<PathBuf>,
    /// Bundled dataset name, used when `path` is absent.
    pub fixture: Option<String>,
    /// `csv` or `json`; inferred from the extension when absent.
    pub format: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeConfig {
    pub preset: String,
    /// Explicit constants; take precedence over `preset`.
    pub constants: Option<HoffmannConstants>,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            preset: "chinchilla".into(),
            constants: None,
        }
    }
}

impl ComputeConfig {
    pub fn resolve(&self) -> Result<HoffmannConstants> {
        let k = match self.constants {
            Some(k) => k,
            None => HoffmannConstants::preset(&self.preset)
                .with_context(|| format!("unknown constants preset `{}`", self.preset))?,
        };
        k.validate()?;
        Ok(k)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathwayConfig {
    pub path: Option<String>,
    pub benchmark: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HorizonConfig {
    #[serde(deserialize_with = "toml_date::option")]
    pub start: Option<NaiveDate>,
    #[serde(deserialize_with = "toml_date::option")]
    pub end: Option<NaiveDate>,
    /// Explicit dates; replace the monthly grid when non-empty.
    #[serde(deserialize_with = "toml_date::list")]
    pub at: Vec<NaiveDate>,
    /// Log10 scaled-FLOP values for compute-input pathways.
    pub logflop: Vec<f64>,
}

/// Dates may be written as TOML date literals or as quoted strings.
mod toml_date {
    use chrono::NaiveDate;
    use serde::de::Error;
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Native(toml::value::Datetime),
        Text(String),
    }

    fn convert<E: Error>(raw: Raw) -> Result<NaiveDate, E> {
        let text = match raw {
            Raw::Native(d) => d.to_string(),
            Raw::Text(s) => s,
        };
        NaiveDate::parse_from_str(&text, "%Y-%m-%d")
            .map_err(|e| E::custom(format!("bad date `{text}`: {e}")))
    }

    pub fn option<'de, D: Deserializer<'de>>(d: D) -> Result<Option<NaiveDate>, D::Error> {
        Option::<Raw>::deserialize(d)?.map(convert).transpose()
    }

    pub fn list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<NaiveDate>, D::Error> {
        Vec::<Raw>::deserialize(d)?
            .into_iter()
            .map(convert)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub iterations: usize,
    pub seed: Option<u64>,
    pub percentiles: Vec<f64>,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            iterations: 0,
            seed: None,
            percentiles: vec![2.5, 50.0, 97.5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BacktestConfig {
    pub mode: String,
    pub metrics: Vec<String>,
    pub paths: Vec<String>,
    pub benchmarks: Vec<String>,
    pub frontier_reference: String,
    pub weighting: String,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            mode: "metric".into(),
            metrics: vec!["pc1".into(), "elo".into(), "logflop".into(), "date".into()],
            paths: vec!["all".into()],
            benchmarks: Vec::new(),
            frontier_reference: "full".into(),
            weighting: "unweighted".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Any of `json`, `csv`.
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: None,
            formats: vec!["json".into(), "csv".into()],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: &str) -> bool {
        self.formats.iter().any(|f| f == format)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        RunConfig::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    fn check(&self) -> Result<()> {
        for f in &self.output.formats {
            if f != "json" && f != "csv" {
                bail!("unknown output format `{f}`");
            }
        }
        for (b, c) in &self.ceilings {
            if !(c.is_finite() && *c > 0.0) {
                bail!("ceiling for `{b}` must be positive");
            }
        }
        Ok(())
    }

    /// Fill the seed from the environment or the default so the resolved
    /// configuration always carries one.
    pub fn resolve_seed(&mut self) -> Result<u64> {
        if self.bootstrap.seed.is_none() {
            let seed = match std::env::var(SEED_ENV) {
                Ok(v) => v
                    .trim()
                    .parse()
                    .with_context(|| format!("{SEED_ENV}={v} is not a seed"))?,
                Err(_) => 0,
            };
            self.bootstrap.seed = Some(seed);
        }
        Ok(self.bootstrap.seed.unwrap_or_default())
    }

    /// Canonical TOML rendering, the input of the config hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
