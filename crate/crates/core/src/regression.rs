//! Least-squares lines and ceiling-scaled logistic curves.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;
const LOSS_TOLERANCE: f64 = 1e-12;
/// Fraction of the ceiling used to pull 0 and ceiling scores inside the
/// logit domain when building starting points.
pub(crate) const CLAMP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    pub fn invert(&self, z: f64) -> Result<f64> {
        if self.slope == 0.0 {
            return Err(Error::NotInvertible("linear stage has zero slope".into()));
        }
        Ok((z - self.intercept) / self.slope)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmoidFit {
    pub slope: f64,
    pub offset: f64,
    pub ceiling: f64,
    pub rmse_fit: f64,
    pub n_points: usize,
}

impl SigmoidFit {
    pub fn new(slope: f64, offset: f64, ceiling: f64) -> Self {
        Self {
            slope,
            offset,
            ceiling,
            rmse_fit: 0.0,
            n_points: 0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        sigmoid_eval(self, x)
    }

    pub fn invert(&self, y: f64) -> Result<f64> {
        sigmoid_invert(self, y)
    }
}

/// Numerically stable logistic function.
pub fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    p.ln() - (-p).ln_1p()
}

/// Ordinary least squares `z = slope * x + intercept`.
pub fn fit_linear(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::degenerate(format!(
            "linear fit needs 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mz = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxx, mut sxz, mut szz) = (0.0, 0.0, 0.0);
    for &(x, z) in points {
        let (dx, dz) = (x - mx, z - mz);
        sxx += dx * dx;
        sxz += dx * dz;
        szz += dz * dz;
    }
    if !(sxx > 0.0) {
        return Err(Error::degenerate("all x values are equal"));
    }
    let slope = sxz / sxx;
    let intercept = mz - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|&(x, z)| (z - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if szz > 0.0 {
        (1.0 - ss_res / szz).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        r_squared,
        n_points: n,
    })
}

pub fn sigmoid_eval(f: &SigmoidFit, x: f64) -> f64 {
    f.ceiling * logistic(f.slope * x + f.offset)
}

pub fn sigmoid_invert(f: &SigmoidFit, y: f64) -> Result<f64> {
    if f.slope == 0.0 {
        return Err(Error::NotInvertible("sigmoid has zero slope".into()));
    }
    if !(y > 0.0 && y < f.ceiling) {
        return Err(Error::NotInvertible(format!(
            "score {y} is outside (0, {})",
            f.ceiling
        )));
    }
    Ok((logit(y / f.ceiling) - f.offset) / f.slope)
}

/// Fit `y = ceiling * logistic(a x + b)` by least squares on the score scale.
///
/// Works in standardized `x`. Starts are the logit-linearized OLS solution
/// plus a small grid of slopes and midpoints; each is polished with
/// Levenberg-Marquardt and the lowest loss wins.
pub fn fit_sigmoid(points: &[(f64, f64)], ceiling: f64) -> Result<SigmoidFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::degenerate(format!(
            "sigmoid fit needs 2 points, got {n}"
        )));
    }
    if !(ceiling.is_finite() && ceiling > 0.0) {
        return Err(Error::domain(format!(
            "ceiling must be positive, got {ceiling}"
        )));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::domain(format!("non-finite point ({x}, {y})")));
        }
        if !(0.0..=ceiling).contains(&y) {
            return Err(Error::domain(format!("score {y} outside [0, {ceiling}]")));
        }
    }
    // canonical order makes the result independent of input order
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let nf = n as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let sd_x = (pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum::<f64>() / nf).sqrt();
    if !(sd_x > 0.0) {
        return Err(Error::degenerate("all x values are equal"));
    }
    let eps = CLAMP_FRACTION * ceiling;
    let clamped: Vec<f64> = pts.iter().map(|p| p.1.clamp(eps, ceiling - eps)).collect();
    if clamped.iter().all(|&y| y == clamped[0]) {
        return Err(Error::degenerate("all scores are equal"));
    }

    let std_pts: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| ((x - mean_x) / sd_x, y)).collect();

    let mut starts = Vec::with_capacity(25);
    let lin: Vec<(f64, f64)> = std_pts
        .iter()
        .zip(&clamped)
        .map(|(&(u, _), &y)| (u, logit(y / ceiling)))
        .collect();
    let init = fit_linear(&lin)?;
    starts.push((init.slope, init.intercept));
    for scale in [0.5, 1.0, 2.0, 4.0] {
        for sign in [1.0, -1.0] {
            for mid in [-1.0, 0.0, 1.0] {
                let a = sign * scale;
                starts.push((a, -a * mid));
            }
        }
    }

    let mut best: Option<(f64, f64, f64)> = None;
    for (a0, b0) in starts {
        let (a, b, loss) = levenberg_marquardt(&std_pts, ceiling, a0, b0);
        if !loss.is_finite() {
            continue;
        }
        match best {
            Some((_, _, l)) if loss.partial_cmp(&l) != Some(Ordering::Less) => {}
            _ => best = Some((a, b, loss)),
        }
    }
    let (a_std, b_std, loss) =
        best.ok_or_else(|| Error::degenerate("no sigmoid start converged"))?;
    let slope = a_std / sd_x;
    let offset = b_std - a_std * mean_x / sd_x;
    Ok(SigmoidFit {
        slope,
        offset,
        ceiling,
        rmse_fit: (loss / nf).sqrt(),
        n_points: n,
    })
}

fn sse(pts: &[(f64, f64)], c: f64, a: f64, b: f64) -> f64 {
    pts.iter()
        .map(|&(u, y)| (y - c * logistic(a * u + b)).powi(2))
        .sum()
}

/// Damped Gauss-Newton on (slope, offset). Returns the parameters and SSE.
fn levenberg_marquardt(pts: &[(f64, f64)], c: f64, mut a: f64, mut b: f64) -> (f64, f64, f64) {
    let mut loss = sse(pts, c, a, b);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITERATIONS {
        // J^T J and J^T r for residual r = y - model
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(u, y) in pts {
            let s = logistic(a * u + b);
            let r = y - c * s;
            let db = c * s * (1.0 - s);
            let da = db * u;
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        if ga.abs() + gb.abs() < 1e-300 {
            break;
        }
        let mut accepted = false;
        while lambda < 1e12 {
            let (maa, mbb) = (jaa * (1.0 + lambda) + 1e-300, jbb * (1.0 + lambda) + 1e-300);
            let det = maa * mbb - jab * jab;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let step_a = (mbb * ga - jab * gb) / det;
            let step_b = (maa * gb - jab * ga) / det;
            let (na, nb) = (a + step_a, b + step_b);
            let new_loss = sse(pts, c, na, nb);
            if new_loss.is_finite() && new_loss <= loss {
                let delta = loss - new_loss;
                a = na;
                b = nb;
                loss = new_loss;
                lambda = (lambda * 0.3).max(1e-12);
                accepted = true;
                // a heavily damped step can stall without being converged
                if delta < LOSS_TOLERANCE && step_a.abs() + step_b.abs() < 1e-6 {
                    return (a, b, loss);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (a, b, loss)
}
