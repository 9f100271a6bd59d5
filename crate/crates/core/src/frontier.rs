//! Two-dimensional Pareto frontier in an (input, score) plane.
//!
//! A point is a member unless some other point has a strictly smaller `x`
//! *and* a strictly larger `y`. Points sharing an `x` never dominate each
//! other, so ties in `x` (or exact duplicates) can all be members.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub model_id: String,
    pub x: f64,
    pub y: f64,
}

impl FrontierPoint {
    pub fn new(model_id: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            model_id: model_id.into(),
            x,
            y,
        }
    }
}

/// Frontier members sorted by `x`, then `y`, then id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrontierSet {
    pub points: Vec<FrontierPoint>,
}

impl FrontierSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.points.iter().map(|p| p.model_id.clone()).collect()
    }

    pub fn contains(&self, model_id: &str) -> bool {
        self.points.iter().any(|p| p.model_id == model_id)
    }

    pub fn xy(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.x, p.y)).collect()
    }
}

fn canonical(a: &FrontierPoint, b: &FrontierPoint) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then_with(|| a.model_id.cmp(&b.model_id))
}

/// Sort-and-sweep extraction, O(n log n).
pub fn extract_frontier(points: &[FrontierPoint]) -> Result<FrontierSet> {
    if points.is_empty() {
        return Err(Error::Empty("frontier needs at least one point"));
    }
    if let Some(p) = points
        .iter()
        .find(|p| !(p.x.is_finite() && p.y.is_finite()))
    {
        return Err(Error::domain(format!(
            "non-finite point for `{}`: ({}, {})",
            p.model_id, p.x, p.y
        )));
    }
    let mut sorted: Vec<&FrontierPoint> = points.iter().collect();
    sorted.sort_by(|a, b| canonical(a, b));

    let mut members = Vec::new();
    // best y among points with strictly smaller x
    let mut best_before = f64::NEG_INFINITY;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i].x;
        let mut j = i;
        let mut group_max = f64::NEG_INFINITY;
        while j < sorted.len() && sorted[j].x == x {
            if sorted[j].y >= best_before {
                members.push(sorted[j].clone());
            }
            group_max = group_max.max(sorted[j].y);
            j += 1;
        }
        best_before = best_before.max(group_max);
        i = j;
    }
    Ok(FrontierSet { points: members })
}
