//! Datasets bundled with the crate.
//!
//! `agentic` holds low-elicitation agent scores on SWE-Bench Verified,
//! Cybench and RE-Bench for 17 models. `leaderboard` holds 38 models with
//! six Open LLM Leaderboard v2 scores and a Chatbot Arena rating; its
//! metadata records how the values were obtained.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::dataset::{Ceilings, Dataset};
use crate::error::{Error, Result};

const AGENTIC_CSV: &str = include_str!("../fixtures/agentic.csv");
const AGENTIC_META: &str = include_str!("../fixtures/agentic.toml");
const LEADERBOARD_CSV: &str = include_str!("../fixtures/leaderboard.csv");
const LEADERBOARD_META: &str = include_str!("../fixtures/leaderboard.toml");

/// Benchmarks of the leaderboard fixture.
pub const LEADERBOARD_BENCHMARKS: [&str; 6] =
    ["ifeval", "bbh", "math_lvl5", "gpqa", "musr", "mmlu_pro"];

/// Benchmarks of the agentic fixture.
pub const AGENTIC_BENCHMARKS: [&str; 3] = ["swebench", "cybench", "rebench"];

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FixtureInfo {
    pub name: String,
    pub description: String,
    pub source: String,
    pub elo_snapshot: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, toml::Value>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct FixtureMeta {
    pub fixture: FixtureInfo,
    #[serde(default)]
    pub ceilings: Ceilings,
}

impl FixtureMeta {
    pub fn parse(text: &str) -> Result<FixtureMeta> {
        toml::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }
}

fn load(csv: &str, meta: &str) -> (Dataset, FixtureMeta) {
    let meta = FixtureMeta::parse(meta).expect("bundled fixture metadata parses");
    let ds =
        Dataset::read_csv(csv.as_bytes(), meta.ceilings.clone()).expect("bundled fixture loads");
    (ds, meta)
}

pub fn agentic() -> Dataset {
    load(AGENTIC_CSV, AGENTIC_META).0
}

pub fn agentic_meta() -> FixtureMeta {
    load(AGENTIC_CSV, AGENTIC_META).1
}

pub fn leaderboard() -> Dataset {
    load(LEADERBOARD_CSV, LEADERBOARD_META).0
}

pub fn leaderboard_meta() -> FixtureMeta {
    load(LEADERBOARD_CSV, LEADERBOARD_META).1
}

/// Raw CSV text of a bundled fixture.
pub fn source_csv(name: &str) -> Option<&'static str> {
    match name {
        "agentic" => Some(AGENTIC_CSV),
        "leaderboard" => Some(LEADERBOARD_CSV),
        _ => None,
    }
}

/// Look up a bundled fixture by name (`agentic` or `leaderboard`).
pub fn by_name(name: &str) -> Option<(Dataset, FixtureMeta)> {
    match name {
        "agentic" => Some(load(AGENTIC_CSV, AGENTIC_META)),
        "leaderboard" => Some(load(LEADERBOARD_CSV, LEADERBOARD_META)),
        _ => None,
    }
}
