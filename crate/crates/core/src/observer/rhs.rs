use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{ObserverConfig, PhiProblem, PhiResult};
use crate::error::{LabError, Result};
use crate::integrate::{aligned_steps, rk4_step};
use crate::jets::{cal_h, hk, scaled_input_jet};
use crate::models::{norm, SatMap};

/// `ż` of the high-gain observer at local time `s`.
///
/// The last block uses `H_{q+1}` at the saturated left inverse of `z`; the
/// estimate found is written back into `warm`.
#[allow(clippy::too_many_arguments)]
pub fn observer_rhs(
    y: &[f64],
    z: &[f64],
    s: f64,
    mu: f64,
    rot: &DMatrix<f64>,
    problem: &PhiProblem<'_>,
    cfg: &ObserverConfig,
    sat: &SatMap,
    warm: &mut Vec<f64>,
) -> Result<(Vec<f64>, PhiResult)> {
    let m = problem.system.m();
    let q = cfg.q;
    if y.len() != m || z.len() != m * (q + 1) || problem.q != q {
        return Err(LabError::Dimension("observer state does not match m(q+1)".into()));
    }
    let phi = problem.invert(z, s, mu, rot, warm)?;
    warm.clone_from(&phi.x);
    let x_hat = sat.apply(&phi.x);
    let sigma = scaled_input_jet(problem.input, s, mu, rot, q);
    let top = hk(problem.system, &x_hat, &sigma, q + 1)?;
    let mut dz = vec![0.0; z.len()];
    let mut gain = 1.0;
    for i in 0..=q {
        gain *= cfg.theta;
        for c in 0..m {
            let inject = gain * cfg.gains[i] * (y[c] - z[c]);
            let drift = if i < q { z[(i + 1) * m + c] } else { top[c] };
            dz[i * m + c] = drift + inject;
        }
    }
    Ok((dz, phi))
}

/// Plant and observer flowing together under a fixed `μ, R` with no jumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    /// `|z − 𝓗_q(x, t, μRv)|`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverRun {
    pub samples: Vec<ObserverSample>,
    pub phi_failures: usize,
    /// Set when the run stopped on a non-finite state.
    pub diverged: bool,
}

/// Integrates plant and observer from `(x0, z0)` over `[0, t_end]`.
#[allow(clippy::too_many_arguments)]
pub fn simulate_observer(
    problem: &PhiProblem<'_>,
    cfg: &ObserverConfig,
    sat: &SatMap,
    mu: f64,
    rot: &DMatrix<f64>,
    x0: &[f64],
    z0: &[f64],
    warm: &[f64],
    t_end: f64,
    step: f64,
) -> Result<ObserverRun> {
    let system = problem.system;
    let n = system.n();
    if x0.len() != n || z0.len() != system.m() * (cfg.q + 1) {
        return Err(LabError::Dimension("initial plant or observer state has the wrong length".into()));
    }
    let mut warm = warm.to_vec();
    let mut failures = 0;
    let sample = |t: f64, y: &[f64]| -> Result<ObserverSample> {
        let (x, z) = y.split_at(n);
        let target = cal_h(system, x, t, problem.input, mu, rot, cfg.q)?.values;
        let e: Vec<f64> = z.iter().zip(&target).map(|(a, b)| a - b).collect();
        Ok(ObserverSample { t, x: x.to_vec(), z: z.to_vec(), error: norm(&e) })
    };
    let mut y: Vec<f64> = x0.iter().chain(z0).copied().collect();
    let mut t = 0.0;
    let mut samples = vec![sample(t, &y)?];
    let steps = aligned_steps(0.0, t_end, step);
    let last = steps.len();
    for (k, dt) in steps.into_iter().enumerate() {
        let mut rhs = |s: f64, y: &[f64]| -> Vec<f64> {
            let (x, z) = y.split_at(n);
            let u: Vec<f64> = scaled_input_jet(problem.input, s, mu, rot, 0).coeffs()[0].clone();
            let mut out = system.f(x, &u);
            match observer_rhs(&system.h(x), z, s, mu, rot, problem, cfg, sat, &mut warm) {
                Ok((dz, phi)) => {
                    failures += usize::from(!phi.converged);
                    out.extend(dz);
                }
                Err(_) => out.extend(std::iter::repeat_n(f64::NAN, z.len())),
            }
            out
        };
        y = rk4_step(&mut rhs, t, &y, dt);
        t = if k + 1 == last { t_end } else { t + dt };
        if !y.iter().all(|v| v.is_finite()) {
            return Ok(ObserverRun { samples, phi_failures: failures, diverged: true });
        }
        samples.push(sample(t, &y)?);
    }
    Ok(ObserverRun { samples, phi_failures: failures, diverged: false })
}
