//! Intermediate capability metrics: Elo as stored, or the first principal
//! component of the standardized model x benchmark table.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Field, ModelRecord};
use crate::error::{Error, Result};
use crate::linalg::symmetric_eigen;

/// First principal component of z-scored benchmark columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pc1Model {
    pub benchmark_names: Vec<String>,
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
    pub component: Vec<f64>,
    pub explained_variance_ratio: f64,
    /// Columns are divided by their population standard deviation before
    /// the decomposition (false would mean centering only).
    pub standardized: bool,
    /// Rows that contributed to the centering, scaling and component.
    pub fit_model_ids: Vec<String>,
}

impl Pc1Model {
    pub fn project(&self, record: &ModelRecord) -> Result<f64> {
        project_pc1(self, record)
    }
}

/// Fit PC-1 on the complete-case rows of `benchmarks`, excluding `holdout`.
pub fn fit_pc1(ds: &Dataset, benchmarks: &[String], holdout: Option<&str>) -> Result<Pc1Model> {
    let mut names: Vec<String> = Vec::with_capacity(benchmarks.len());
    for b in benchmarks {
        if Some(b.as_str()) == holdout || names.contains(b) {
            continue;
        }
        if !ds.has_benchmark(b) {
            return Err(Error::UnknownField(b.clone()));
        }
        names.push(b.clone());
    }
    if names.len() < 2 {
        return Err(Error::degenerate(format!(
            "PC-1 needs at least 2 benchmarks, got {}",
            names.len()
        )));
    }
    let fields: Vec<Field> = names.iter().map(|b| Field::Benchmark(b.clone())).collect();
    let rows = ds.complete_case_fields(&fields)?;
    let n = rows.len();
    if n < 3 {
        return Err(Error::degenerate(format!(
            "PC-1 needs at least 3 complete models, got {n}"
        )));
    }
    let p = names.len();
    let table: Vec<Vec<f64>> = rows
        .records()
        .iter()
        .map(|r| {
            names
                .iter()
                .map(|b| r.score(b).expect("complete case"))
                .collect()
        })
        .collect();

    let nf = n as f64;
    let mut center = vec![0.0; p];
    let mut scale = vec![0.0; p];
    for j in 0..p {
        center[j] = table.iter().map(|row| row[j]).sum::<f64>() / nf;
        let var = table
            .iter()
            .map(|row| (row[j] - center[j]).powi(2))
            .sum::<f64>()
            / nf;
        scale[j] = var.sqrt();
        if !(scale[j] > 1e-12 * center[j].abs().max(1.0)) {
            return Err(Error::ZeroVariance(names[j].clone()));
        }
    }
    let z: Vec<Vec<f64>> = table
        .iter()
        .map(|row| (0..p).map(|j| (row[j] - center[j]) / scale[j]).collect())
        .collect();

    let mut cov = vec![0.0; p * p];
    for row in &z {
        for a in 0..p {
            for b in a..p {
                cov[a * p + b] += row[a] * row[b];
            }
        }
    }
    for a in 0..p {
        for b in a..p {
            cov[a * p + b] /= nf;
            cov[b * p + a] = cov[a * p + b];
        }
    }
    let trace: f64 = (0..p).map(|j| cov[j * p + j]).sum();
    let (values, vectors) = symmetric_eigen(&cov, p);
    let mut component = vectors[0].clone();
    let norm = component.iter().map(|c| c * c).sum::<f64>().sqrt();
    component.iter_mut().for_each(|c| *c /= norm);

    // orient so scores agree with the row-mean of the standardized table
    let agreement: f64 = z
        .iter()
        .map(|row| {
            let score: f64 = row.iter().zip(&component).map(|(a, b)| a * b).sum();
            score * row.iter().sum::<f64>() / p as f64
        })
        .sum();
    let flip = if agreement.abs() > 1e-12 {
        agreement < 0.0
    } else {
        let lead = component
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        lead < 0.0
    };
    if flip {
        component.iter_mut().for_each(|c| *c = -*c);
    }

    Ok(Pc1Model {
        benchmark_names: names,
        center,
        scale,
        component,
        explained_variance_ratio: (values[0] / trace).clamp(0.0, 1.0),
        standardized: true,
        fit_model_ids: rows.ids(),
    })
}

pub fn project_pc1(m: &Pc1Model, record: &ModelRecord) -> Result<f64> {
    let mut acc = 0.0;
    for (j, b) in m.benchmark_names.iter().enumerate() {
        let s = record.score(b).ok_or_else(|| Error::MissingScore {
            model: record.model_id.clone(),
            benchmark: b.clone(),
        })?;
        acc += (s - m.center[j]) / m.scale[j] * m.component[j];
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CapabilityMetric {
    Elo,
    Pc1(Pc1Model),
}

impl CapabilityMetric {
    /// Metric value for one record, or `None` when its inputs are missing.
    pub fn value(&self, record: &ModelRecord) -> Option<f64> {
        match self {
            CapabilityMetric::Elo => record.elo,
            CapabilityMetric::Pc1(m) => project_pc1(m, record).ok(),
        }
    }
}

/// Metric values for every record that has the metric's inputs, in dataset
/// order.
pub fn capability_column(ds: &Dataset, metric: &CapabilityMetric) -> Result<Vec<(String, f64)>> {
    let rows = match metric {
        CapabilityMetric::Elo => ds.complete_case_fields(&[Field::Elo])?,
        CapabilityMetric::Pc1(m) => {
            let fields: Vec<Field> = m
                .benchmark_names
                .iter()
                .map(|b| ds.field(b))
                .collect::<Result<_>>()?;
            ds.complete_case_fields(&fields)?
        }
    };
    rows.records()
        .iter()
        .map(|r| {
            let v = match metric {
                CapabilityMetric::Elo => r.elo.expect("complete case"),
                CapabilityMetric::Pc1(m) => project_pc1(m, r)?,
            };
            Ok((r.model_id.clone(), v))
        })
        .collect()
}
