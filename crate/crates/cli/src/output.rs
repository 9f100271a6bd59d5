//! Report envelopes, file writers and plain-text tables.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::OutputConfig;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Where the records came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataSource {
    /// `fixture:<name>` or the file path as given.
    pub source: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elo_snapshot: Option<String>,
}

/// Identifies a run: embedded in every JSON document and CSV header.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub arguments: Value,
    pub config_sha256: String,
    pub data: DataSource,
}

impl Provenance {
    fn csv_header(&self) -> String {
        let mut s = format!(
            "# {} {} {}\n# config_sha256={}\n# data={} sha256={}\n",
            self.tool,
            self.version,
            self.command,
            self.config_sha256,
            self.data.source,
            self.data.sha256
        );
        if let Some(snap) = &self.data.elo_snapshot {
            s.push_str(&format!("# elo_snapshot={snap}\n"));
        }
        s
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    #[serde(flatten)]
    provenance: &'a Provenance,
    result: &'a T,
}

pub struct Writer {
    dir: Option<PathBuf>,
    config: OutputConfig,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl Writer {
    pub fn new(config: &OutputConfig, provenance: Provenance) -> Result<Writer> {
        if let Some(dir) = &config.dir {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        Ok(Writer {
            dir: config.dir.clone(),
            config: config.clone(),
            provenance,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn path(&self, name: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(name))
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, result: &T) -> Result<()> {
        if !self.config.wants("json") {
            return Ok(());
        }
        let Some(path) = self.path(&format!("{stem}.json")) else {
            return Ok(());
        };
        let env = Envelope {
            provenance: &self.provenance,
            result,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, stem: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        if !self.config.wants("csv") {
            return Ok(());
        }
        let Some(path) = self.path(&format!("{stem}.csv")) else {
            return Ok(());
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let body = w.into_inner().context("flushing csv")?;
        let mut bytes = self.provenance.csv_header().into_bytes();
        bytes.extend(body);
        write_file(&path, &bytes)?;
        self.written.push(path);
        Ok(())
    }

    /// Write a file verbatim, without provenance (e.g. a dataset copy that
    /// must stay loadable).
    pub fn raw(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        write_file(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

/// Render rows as an aligned plain-text table. The first column is left
/// aligned, the rest right aligned.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = line(header.to_vec());
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1)));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
        out.push('\n');
    }
    out
}
