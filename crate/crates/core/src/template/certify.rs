//! Grid certification of control templates.
//!
//! Over sampled `(t, μ, R)` and a tensor grid of the outer box, the report
//! records
//!
//! * `rho2`: the smallest singular value of `∂𝓗_q/∂x` (immersion margin),
//! * `rho1`: the smallest ratio `|𝓗_q(x_a) − 𝓗_q(x_b)| / |x_a − x_b|` over grid
//!   pairs at distance at least `eta` (injectivity margin).
//!
//! Pairs closer than `eta` are left to the immersion margin. `eta` is twice
//! the diagonal of one grid cell.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{orthogonal_samples, ControlTemplate};
use crate::error::{LabError, Result};
use crate::jets::{cal_h_with_jacobian, MAX_JET_ORDER};
use crate::models::{linspace, CompactSpec, SystemModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridParams {
    pub x_per_axis: usize,
    pub t_count: usize,
    pub mu_count: usize,
    /// Additional scales in `[0, λ̄]` sampled on top of the uniform grid.
    pub extra_mu: Vec<f64>,
    /// Structured rotations for `p = 2` (each also taken with a reflection).
    pub rotations_structured: usize,
    /// Haar-random orthogonal samples.
    pub rotations_random: usize,
    pub seed: u64,
    /// Margins must exceed this to pass.
    pub tolerance: f64,
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            x_per_axis: 11,
            t_count: 5,
            mu_count: 6,
            extra_mu: Vec::new(),
            rotations_structured: 4,
            rotations_random: 4,
            seed: 0,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub x_points: usize,
    pub x_per_axis: usize,
    pub t_values: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub rotation_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    Injectivity,
    Immersion,
}

/// Grid location attaining a margin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: WitnessKind,
    pub value: f64,
    pub t: f64,
    pub mu: f64,
    pub rotation_index: usize,
    pub x_a: Vec<f64>,
    pub x_b: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub passed: bool,
    /// `None` when no grid pair is farther apart than `eta`.
    pub rho1: Option<f64>,
    pub rho2: f64,
    pub eta: f64,
    pub q: usize,
    pub grid: GridSummary,
    pub witnesses: Vec<Witness>,
    pub seed: u64,
}

impl CertificationReport {
    /// `(rho2, rho1)` compared lexicographically, vacuous `rho1` ranking highest.
    pub fn margin_key(&self) -> (f64, f64) {
        (self.rho2, self.rho1.unwrap_or(f64::INFINITY))
    }
}

struct CellResult {
    rho2: Option<Witness>,
    rho1: Option<Witness>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn mu_grid(lambda_bar: f64, count: usize, extra: &[f64]) -> Result<Vec<f64>> {
    let mut mus = linspace(0.0, lambda_bar, count.max(1));
    for &m in extra {
        if !(0.0..=lambda_bar).contains(&m) {
            return Err(LabError::Config(format!("extra mu {m} outside [0, {lambda_bar}]")));
        }
        mus.push(m);
    }
    mus.sort_by(f64::total_cmp);
    mus.dedup();
    Ok(mus)
}

pub fn certify_template(
    system: &SystemModel,
    spec: &CompactSpec,
    template: &ControlTemplate,
    q: usize,
    grid: &GridParams,
) -> Result<CertificationReport> {
    if q > MAX_JET_ORDER {
        return Err(LabError::Capability { requested: q, max: MAX_JET_ORDER });
    }
    let (n, m, p) = (system.n(), system.m(), system.p());
    if m * (q + 1) < n {
        return Err(LabError::Config(format!("m(q+1) = {} < n = {n}: 𝓗_q cannot be injective", m * (q + 1))));
    }
    if template.p() != p || spec.n() != n {
        return Err(LabError::Dimension("template/spec dimensions do not match the system".into()));
    }
    let outer = &spec.outer;
    let eta = 2.0 * outer.cell_diagonal(grid.x_per_axis);
    let diameter = outer.diameter();
    if diameter > 0.0 && eta >= diameter {
        return Err(LabError::Config(format!(
            "grid too coarse: eta = {eta} is not below the box diameter {diameter}"
        )));
    }
    let xs = outer.grid(grid.x_per_axis);
    let ts = linspace(0.0, template.horizon(), grid.t_count.max(1));
    let mus = mu_grid(spec.lambda_bar, grid.mu_count, &grid.extra_mu)?;
    let rots = orthogonal_samples(p, grid.rotations_structured, grid.rotations_random, grid.seed);

    let mut cells = Vec::with_capacity(ts.len() * mus.len() * rots.len());
    for &t in &ts {
        for &mu in &mus {
            for ri in 0..rots.len() {
                cells.push((t, mu, ri));
            }
        }
    }
    let results: Vec<Result<CellResult>> = cells
        .par_iter()
        .map(|&(t, mu, ri)| certify_cell(system, template, q, &xs, eta, t, mu, ri, &rots[ri]))
        .collect();

    let mut best2: Option<Witness> = None;
    let mut best1: Option<Witness> = None;
    for r in results {
        let r = r?;
        for (slot, cand) in [(&mut best2, r.rho2), (&mut best1, r.rho1)] {
            if let Some(c) = cand {
                if slot.as_ref().is_none_or(|b| c.value < b.value) {
                    *slot = Some(c);
                }
            }
        }
    }
    let rho2 = best2.as_ref().map_or(f64::INFINITY, |w| w.value);
    let rho1 = best1.as_ref().map(|w| w.value);
    let passed = rho2 > grid.tolerance && rho1.is_none_or(|r| r > grid.tolerance);
    let witnesses = best2.into_iter().chain(best1).collect();
    Ok(CertificationReport {
        passed,
        rho1,
        rho2,
        eta,
        q,
        grid: GridSummary {
            x_points: xs.len(),
            x_per_axis: grid.x_per_axis,
            t_values: ts,
            mu_values: mus,
            rotation_samples: rots.len(),
        },
        witnesses,
        seed: grid.seed,
    })
}

#[allow(clippy::too_many_arguments)]
fn certify_cell(
    system: &SystemModel,
    template: &ControlTemplate,
    q: usize,
    xs: &[Vec<f64>],
    eta: f64,
    t: f64,
    mu: f64,
    ri: usize,
    rot: &DMatrix<f64>,
) -> Result<CellResult> {
    let mut stacks = Vec::with_capacity(xs.len());
    let mut rho2: Option<Witness> = None;
    for x in xs {
        let (stack, jac) = cal_h_with_jacobian(system, x, t, template, mu, rot, q)?;
        let smin = jac.singular_values().min();
        if rho2.as_ref().is_none_or(|w| smin < w.value) {
            rho2 = Some(Witness {
                kind: WitnessKind::Immersion,
                value: smin,
                t,
                mu,
                rotation_index: ri,
                x_a: x.clone(),
                x_b: None,
            });
        }
        stacks.push(stack.values);
    }
    let mut rho1: Option<Witness> = None;
    for a in 0..xs.len() {
        for b in (a + 1)..xs.len() {
            let dx = dist(&xs[a], &xs[b]);
            if dx < eta {
                continue;
            }
            let ratio = dist(&stacks[a], &stacks[b]) / dx;
            if rho1.as_ref().is_none_or(|w| ratio < w.value) {
                rho1 = Some(Witness {
                    kind: WitnessKind::Injectivity,
                    value: ratio,
                    t,
                    mu,
                    rotation_index: ri,
                    x_a: xs[a].clone(),
                    x_b: Some(xs[b].clone()),
                });
            }
        }
    }
    Ok(CellResult { rho2, rho1 })
}
