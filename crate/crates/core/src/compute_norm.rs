//! Scaled training compute under a Hoffmann-style loss model.
//!
//! A model trained with `N` parameters on `D` tokens has predicted loss
//! `L(N, D) = E + A / N^alpha + B / D^beta`. Its *scaled* FLOP is the
//! smallest `6 * N * D` that reaches the same loss, which puts overtrained
//! and compute-optimal models on a common axis.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, ModelRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoffmannConstants {
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl HoffmannConstants {
    /// Fit reported with the original Chinchilla scaling-law study.
    pub const CHINCHILLA: HoffmannConstants = HoffmannConstants {
        e: 1.69,
        a: 406.4,
        b: 410.7,
        alpha: 0.34,
        beta: 0.28,
    };

    /// Replication refit of the same parametric form (Besiroglu et al., 2024).
    pub const BESIROGLU: HoffmannConstants = HoffmannConstants {
        e: 1.8172,
        a: 482.01,
        b: 2085.43,
        alpha: 0.3478,
        beta: 0.3658,
    };

    pub fn preset(name: &str) -> Option<HoffmannConstants> {
        match name.to_ascii_lowercase().as_str() {
            "chinchilla" | "hoffmann" => Some(Self::CHINCHILLA),
            "besiroglu" | "epoch" => Some(Self::BESIROGLU),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.e > 0.0
            && self.a > 0.0
            && self.b > 0.0
            && self.alpha > 0.0
            && self.alpha < 1.0
            && self.beta > 0.0
            && self.beta < 1.0
            && [self.e, self.a, self.b].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "invalid Hoffmann constants {self:?}"
            )))
        }
    }
}

impl Default for HoffmannConstants {
    fn default() -> Self {
        Self::CHINCHILLA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComputeAllocation {
    pub n_opt: f64,
    pub d_opt: f64,
    pub c_opt: f64,
    pub loss: f64,
}

pub fn hoffmann_loss(n: f64, d: f64, k: &HoffmannConstants) -> Result<f64> {
    if !(n > 0.0 && d > 0.0) {
        return Err(Error::domain(format!(
            "parameter and token counts must be positive (n = {n}, d = {d})"
        )));
    }
    Ok(k.e + k.a * n.powf(-k.alpha) + k.b * d.powf(-k.beta))
}

/// Cheapest `(N, D)` reaching `target_loss`.
///
/// Stationarity of `6 N D` on the contour gives
/// `alpha * A / N^alpha = beta * B / D^beta`; with `l = target_loss - E`
/// this yields `N = [A (alpha + beta) / (l beta)]^(1/alpha)` and
/// `D = [B (alpha + beta) / (l alpha)]^(1/beta)`.
pub fn optimal_allocation(target_loss: f64, k: &HoffmannConstants) -> Result<ComputeAllocation> {
    k.validate()?;
    let l = target_loss - k.e;
    if !(l > 0.0) || !target_loss.is_finite() {
        return Err(Error::domain(format!(
            "target loss {target_loss} is not above the irreducible loss {}",
            k.e
        )));
    }
    let s = k.alpha + k.beta;
    let n_opt = (k.a * s / (l * k.beta)).powf(1.0 / k.alpha);
    let d_opt = (k.b * s / (l * k.alpha)).powf(1.0 / k.beta);
    Ok(ComputeAllocation {
        n_opt,
        d_opt,
        c_opt: 6.0 * n_opt * d_opt,
        loss: target_loss,
    })
}

pub fn scaled_flop(n_model: f64, d_model: f64, k: &HoffmannConstants) -> Result<f64> {
    let loss = hoffmann_loss(n_model, d_model, k)?;
    Ok(optimal_allocation(loss, k)?.c_opt)
}

/// Fill `raw_training_flop` (when absent) and `scaled_training_flop` for
/// every record with both a parameter and a token count.
///
/// Returns the updated dataset and the number of records touched.
pub fn normalize_dataset(ds: &Dataset, k: &HoffmannConstants) -> Result<(Dataset, usize)> {
    k.validate()?;
    let mut touched = 0usize;
    let mut failure = None;
    let out = ds.map_records(|r| {
        let mut r: ModelRecord = r.clone();
        if let (Some(n), Some(d)) = (r.parameter_count, r.token_count) {
            match scaled_flop(n, d, k) {
                Ok(c) => {
                    r.scaled_training_flop = Some(c);
                    r.raw_training_flop.get_or_insert(6.0 * n * d);
                    touched += 1;
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        r
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok((out, touched)),
    }
}
