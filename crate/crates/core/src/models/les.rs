use serde::{Deserialize, Serialize};

use super::{CompactSpec, SystemModel};
use crate::analysis::{fit_rate, FitWindow};
use crate::error::{LabError, Result};
use crate::integrate::integrate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesTrajectory {
    pub x0: Vec<f64>,
    /// `None` for the equilibrium, whose norm is identically zero.
    pub nu: Option<f64>,
    pub contained: bool,
    pub final_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LesReport {
    pub min_nu: Option<f64>,
    pub all_contained: bool,
    pub trajectories: Vec<LesTrajectory>,
}

/// Integrates `ẋ = f(x, λ(x))` from a `per_axis` grid over the inner box and
/// fits `|x(t)| ≈ M e^{-νt}` on the second half of `[0, horizon]`.
pub fn verify_state_feedback_les(
    system: &SystemModel,
    spec: &CompactSpec,
    horizon: f64,
    per_axis: usize,
    step: f64,
) -> Result<LesReport> {
    if !(horizon > 0.0) || !(step > 0.0) {
        return Err(LabError::Config("horizon and step must be positive".into()));
    }
    let rhs = |_t: f64, x: &[f64]| {
        let u = system.lambda(x);
        system.f(x, &u)
    };
    let mut trajectories = Vec::new();
    for x0 in spec.inner.grid(per_axis) {
        let traj = integrate(rhs, 0.0, &x0, horizon, step);
        let contained = traj.iter().all(|(_, x)| spec.outer.contains(x));
        let norms: Vec<(f64, f64)> = traj.iter().map(|(t, x)| (*t, norm(x))).collect();
        let final_norm = norms.last().map_or(f64::NAN, |p| p.1);
        let nu = if norms.iter().all(|p| p.1 == 0.0) {
            None
        } else {
            let window = FitWindow::second_half(0.0, horizon, horizon / 20.0);
            Some(fit_rate(&norms, window)?.nu)
        };
        trajectories.push(LesTrajectory { x0, nu, contained, final_norm });
    }
    let min_nu = trajectories.iter().filter_map(|t| t.nu).reduce(f64::min);
    let all_contained = trajectories.iter().all(|t| t.contained);
    Ok(LesReport { min_nu, all_contained, trajectories })
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
