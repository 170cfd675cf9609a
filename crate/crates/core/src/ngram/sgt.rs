//! Simple Good-Turing frequency correction (Gale & Sampson).
//!
//! The Turing estimate `(r+1) N_{r+1} / N_r` is used for small `r` until it
//! becomes indistinguishable from the log-log regression estimate (or
//! `N_{r+1}` is zero); from that point on every frequency uses the
//! regression.

use std::collections::BTreeMap;

use super::Spectrum;

/// Critical value for the Turing/regression switch (p < 0.05).
pub const SWITCH_CONFIDENCE: f64 = 1.96;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SmoothingError {
    #[error("no singleton types (N_1 = 0): unseen mass is undefined")]
    NoSingletons,
}

/// Least-squares fit of `log Z_r = intercept + slope * log r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub intercept: f64,
    pub slope: f64,
}

impl LogLogFit {
    /// A single distinct frequency fixes no slope. Slope -1 makes the
    /// regression estimate the identity `GT(r) = r`.
    pub const DEGENERATE: LogLogFit = LogLogFit {
        intercept: 0.0,
        slope: -1.0,
    };

    /// `(r+1) S(r+1) / S(r)` where `S` is the fitted `N_r` curve.
    pub fn estimate(&self, r: u64) -> f64 {
        let r = r as f64;
        (r + 1.0) * ((r + 1.0) / r).powf(self.slope)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoodTuring {
    /// Corrected frequency `GT(r)` for every observed `r`.
    pub estimates: BTreeMap<u64, f64>,
    /// `GT(0) = N_1 / N_0`.
    pub gt_zero: f64,
    pub fit: LogLogFit,
    /// First `r` that takes the regression estimate, if any.
    pub switched_at: Option<u64>,
}

impl GoodTuring {
    pub fn get(&self, r: u64) -> Option<f64> {
        self.estimates.get(&r).copied()
    }
}

/// The raw Turing estimator. `None` when `N_r` or `N_{r+1}` is zero.
pub fn turing_estimate(spec: &Spectrum, r: u64) -> Option<f64> {
    let nr = spec.n(r);
    let next = spec.n(r + 1);
    (nr > 0 && next > 0).then(|| (r + 1) as f64 * next as f64 / nr as f64)
}

/// Averaged `Z_r = N_r / (0.5 (t - q))` over neighbouring nonzero ranks.
pub fn z_transform(spec: &Spectrum) -> Vec<(u64, f64)> {
    let rows: Vec<(u64, u64)> = spec.iter().collect();
    rows.iter()
        .enumerate()
        .map(|(j, &(r, n))| {
            let q = if j == 0 { 0 } else { rows[j - 1].0 };
            let t = match rows.get(j + 1) {
                Some(&(next, _)) => next,
                None => 2 * r - q,
            };
            (r, 2.0 * n as f64 / (t - q) as f64)
        })
        .collect()
}

pub fn fit_log_log(points: &[(u64, f64)]) -> LogLogFit {
    if points.len() < 2 {
        return LogLogFit::DEGENERATE;
    }
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .map(|&(r, z)| ((r as f64).ln(), z.ln()))
        .unzip();
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let slope = sxy / sxx;
    LogLogFit {
        intercept: mean_y - slope * mean_x,
        slope,
    }
}

pub fn sgt_smooth(spec: &Spectrum) -> Result<GoodTuring, SmoothingError> {
    let n1 = spec.n(1);
    if n1 == 0 {
        return Err(SmoothingError::NoSingletons);
    }
    let gt_zero = n1 as f64 / spec.n0() as f64;
    let fit = fit_log_log(&z_transform(spec));

    let mut estimates = BTreeMap::new();
    let mut switched_at = None;
    for (r, nr) in spec.iter() {
        let y = fit.estimate(r);
        if switched_at.is_none() {
            let next = spec.n(r + 1);
            if next == 0 {
                switched_at = Some(r);
            } else {
                let (nr, next, r1) = (nr as f64, next as f64, (r + 1) as f64);
                let x = r1 * next / nr;
                let spread =
                    SWITCH_CONFIDENCE * (r1 * r1 * next / (nr * nr) * (1.0 + next / nr)).sqrt();
                if (x - y).abs() <= spread {
                    switched_at = Some(r);
                } else {
                    estimates.insert(r, x);
                    continue;
                }
            }
        }
        estimates.insert(r, y);
    }

    Ok(GoodTuring {
        estimates,
        gt_zero,
        fit,
        switched_at,
    })
}
