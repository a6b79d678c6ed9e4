use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Minimum number of raw samples inside the fit window.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Values are floored here before taking logarithms.
const LOG_FLOOR: f64 = 1e-300;

/// Time window for a rate fit. The envelope keeps the largest sample of
/// each consecutive sub-interval of length `period`; `period <= 0` fits the
/// raw samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub start: f64,
    pub end: f64,
    pub period: f64,
}

impl FitWindow {
    pub fn new(start: f64, end: f64, period: f64) -> Self {
        Self { start, end, period }
    }

    /// Second half of `[t0, t1]`.
    pub fn second_half(t0: f64, t1: f64, period: f64) -> Self {
        Self { start: 0.5 * (t0 + t1), end: t1, period }
    }
}

/// `value(t) ≈ amplitude · exp(-nu · t)` on the envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub nu: f64,
    pub r_squared: f64,
    pub window: FitWindow,
}

/// Per-period peak envelope of the samples inside `window`.
pub fn peak_envelope(series: &[(f64, f64)], window: &FitWindow) -> Vec<(f64, f64)> {
    let inside = series.iter().filter(|(t, _)| *t >= window.start && *t <= window.end);
    if window.period <= 0.0 {
        return inside.copied().collect();
    }
    let mut env: Vec<(usize, (f64, f64))> = Vec::new();
    for &(t, v) in inside {
        let bin = ((t - window.start) / window.period).floor() as usize;
        match env.last_mut() {
            Some((b, best)) if *b == bin => {
                if v > best.1 {
                    *best = (t, v);
                }
            }
            _ => env.push((bin, (t, v))),
        }
    }
    env.into_iter().map(|(_, p)| p).collect()
}

/// Least-squares line through `(t, ln value)` of the peak envelope.
pub fn fit_rate(series: &[(f64, f64)], window: FitWindow) -> Result<DecayFit> {
    let found = series.iter().filter(|(t, _)| *t >= window.start && *t <= window.end).count();
    if found < MIN_FIT_SAMPLES {
        return Err(LabError::InsufficientSamples { found, needed: MIN_FIT_SAMPLES });
    }
    let env = peak_envelope(series, &window);
    if env.len() < 2 {
        return Err(LabError::InsufficientSamples { found: env.len(), needed: 2 });
    }
    let pts: Vec<(f64, f64)> = env.iter().map(|&(t, v)| (t, v.max(LOG_FLOOR).ln())).collect();
    let count = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / count;
    let stt: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sty: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    if stt == 0.0 {
        return Err(LabError::InsufficientSamples { found: 1, needed: 2 });
    }
    let slope = sty / stt;
    let intercept = mean_y - slope * mean_t;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(DecayFit { amplitude: intercept.exp(), nu: 0.0 - slope, r_squared, window })
}
