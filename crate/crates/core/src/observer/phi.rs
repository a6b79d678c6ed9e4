use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jets::{cal_h_with_jacobian, InputSignal};
use crate::models::{norm, SystemModel};

pub const PHI_MAX_ITERATIONS: usize = 50;
pub const PHI_GRADIENT_TOL: f64 = 1e-10;
pub const PHI_RESIDUAL_TOL: f64 = 1e-9;

/// Above this residual the residual curvature enters the model Hessian.
const LARGE_RESIDUAL: f64 = 1e-6;

/// Outcome of the numerical left inverse of `𝓗_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiResult {
    pub x: Vec<f64>,
    pub residual: f64,
    /// Gradient norm of `½|r|²`, projected on the ball boundary.
    pub gradient: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Everything fixed across the left-inverse calls of one run.
pub struct PhiProblem<'a> {
    pub system: &'a SystemModel,
    pub input: &'a dyn InputSignal,
    pub q: usize,
    /// Iterates are kept in the closed ball of this radius.
    pub bound: f64,
}

fn project(mut x: Vec<f64>, bound: f64) -> Vec<f64> {
    let r = norm(&x);
    if r > bound {
        let s = bound / r;
        x.iter_mut().for_each(|v| *v *= s);
    }
    x
}

/// Gradient of `½|r|²` with the outward normal part removed on the ball
/// boundary, so constrained minimizers count as stationary.
fn projected_gradient(g: &DVector<f64>, x: &[f64], bound: f64) -> f64 {
    let r = norm(x);
    if !on_boundary(x, bound) {
        return g.norm();
    }
    let gx: f64 = g.iter().zip(x).map(|(a, b)| a * b).sum();
    if gx >= 0.0 {
        return g.norm();
    }
    let scale = gx / (r * r);
    g.iter().zip(x).map(|(a, b)| (a - scale * b).powi(2)).sum::<f64>().sqrt()
}

fn on_boundary(x: &[f64], bound: f64) -> bool {
    norm(x) >= bound * (1.0 - 1e-12)
}

fn project_onto_sphere(mut x: Vec<f64>, bound: f64) -> Vec<f64> {
    let r = norm(&x);
    if r > 0.0 {
        let s = bound / r;
        x.iter_mut().for_each(|v| *v *= s);
    }
    x
}

struct Eval {
    r: DVector<f64>,
    j: DMatrix<f64>,
}

impl PhiProblem<'_> {
    fn stationary(&self, e: &Eval, x: &[f64]) -> bool {
        e.r.norm() < PHI_RESIDUAL_TOL
            || projected_gradient(&(e.j.transpose() * &e.r), x, self.bound) < PHI_GRADIENT_TOL
    }

    /// Gradient of `½|r|²` at `x`.
    fn gradient(&self, x: &[f64], z: &[f64], t: f64, mu: f64, rot: &DMatrix<f64>) -> Option<DVector<f64>> {
        let e = self.eval(x, z, t, mu, rot)?;
        Some(e.j.transpose() * e.r)
    }

    /// Model Hessian: `JᵀJ`, plus the residual curvature from central
    /// differences of the gradient when the residual is not small.
    fn hessian(&self, cur: &Eval, x: &[f64], z: &[f64], t: f64, mu: f64, rot: &DMatrix<f64>) -> DMatrix<f64> {
        let jtj = cur.j.transpose() * &cur.j;
        if cur.r.norm() < LARGE_RESIDUAL {
            return jtj;
        }
        let n = x.len();
        let mut full = DMatrix::zeros(n, n);
        for k in 0..n {
            let h = 1e-5 * x[k].abs().max(1.0);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            match (self.gradient(&xp, z, t, mu, rot), self.gradient(&xm, z, t, mu, rot)) {
                (Some(gp), Some(gm)) => full.set_column(k, &((gp - gm) / (2.0 * h))),
                _ => return jtj,
            }
        }
        (&full + full.transpose()) * 0.5
    }

    /// Damped Newton or Gauss–Newton candidate. On the ball boundary with an
    /// outward step the model is restricted to the tangent space of the
    /// sphere and the result retracted onto it.
    #[allow(clippy::too_many_arguments)]
    fn step(
        &self,
        cur: &Eval,
        x: &[f64],
        g: &DVector<f64>,
        damping: f64,
        z: &[f64],
        t: f64,
        mu: f64,
        rot: &DMatrix<f64>,
    ) -> Option<Vec<f64>> {
        let n = x.len();
        let eye = DMatrix::<f64>::identity(n, n);
        let hess = self.hessian(cur, x, z, t, mu, rot);
        let descent = |a: DMatrix<f64>, rhs: DVector<f64>| -> Option<DVector<f64>> {
            let d = a.lu().solve(&rhs)?;
            (d.dot(&rhs) > 0.0 || rhs.norm() == 0.0).then_some(d)
        };
        let d = descent(&hess + &eye * damping, -g)?;
        let raw: Vec<f64> = x.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
        if !(on_boundary(x, self.bound) && norm(&raw) > self.bound) {
            return Some(project(raw, self.bound));
        }
        let xv = DVector::from_column_slice(x);
        let radius = xv.norm();
        let nrm = &xv / radius;
        let proj = &eye - &nrm * nrm.transpose();
        // Riemannian Hessian of the sphere of radius `radius`.
        let curvature = -nrm.dot(g) / radius;
        let a = &proj * &hess * &proj + &proj * curvature + &eye * damping;
        let dt = descent(a, -(&proj * g))?;
        Some(project_onto_sphere(x.iter().zip(dt.iter()).map(|(a, b)| a + b).collect(), self.bound))
    }
    /// Strict decrease of `|r|`, or, once the decrease is below rounding,
    /// equal cost (up to rounding at the magnitude `scale` of the target) with
    /// a smaller projected gradient.
    fn accepts(&self, cur: &Eval, x: &[f64], next: &Eval, cand: &[f64], scale: f64) -> bool {
        let (c0, c1) = (cur.r.norm(), next.r.norm());
        if c1 < c0 {
            return true;
        }
        let pg0 = projected_gradient(&(cur.j.transpose() * &cur.r), x, self.bound);
        let pg1 = projected_gradient(&(next.j.transpose() * &next.r), cand, self.bound);
        c1 <= c0 + 16.0 * f64::EPSILON * (c0 + scale) && pg1 < pg0
    }

    fn eval(&self, x: &[f64], z: &[f64], t: f64, mu: f64, rot: &DMatrix<f64>) -> Option<Eval> {
        let (stack, j) = cal_h_with_jacobian(self.system, x, t, self.input, mu, rot, self.q).ok()?;
        let r = DVector::from_iterator(z.len(), stack.values.iter().zip(z).map(|(h, z)| h - z));
        (r.iter().all(|v| v.is_finite()) && j.iter().all(|v| v.is_finite())).then_some(Eval { r, j })
    }

    /// Least-squares solution of `𝓗_q(x, t, μRv) = z` by Levenberg–Marquardt
    /// started from `warm`, projected into the ball. Converged means the
    /// residual or the projected gradient of `½|r|²` is below tolerance; a final
    /// Gauss–Newton step polishes converged iterates.
    pub fn invert(&self, z: &[f64], t: f64, mu: f64, rot: &DMatrix<f64>, warm: &[f64]) -> Result<PhiResult> {
        let n = self.system.n();
        if z.len() != self.system.m() * (self.q + 1) || warm.len() != n {
            return Err(LabError::Dimension(format!(
                "left inverse expects z of length {} and warm start of length {n}",
                self.system.m() * (self.q + 1)
            )));
        }
        let zscale = norm(z);
        let mut x = project(warm.to_vec(), self.bound);
        let Some(mut cur) = self.eval(&x, z, t, mu, rot) else {
            return Ok(PhiResult { x, residual: f64::INFINITY, gradient: f64::INFINITY, iterations: 0, converged: false });
        };
        let jtj0 = cur.j.transpose() * &cur.j;
        let mut damping = 1e-3 * jtj0.diagonal().max().max(1e-12);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < PHI_MAX_ITERATIONS {
            let g = cur.j.transpose() * &cur.r;
            if self.stationary(&cur, &x) {
                converged = true;
                break;
            }
            iterations += 1;
            let Some(cand) = self.step(&cur, &x, &g, damping, z, t, mu, rot) else {
                damping *= 10.0;
                continue;
            };
            match self.eval(&cand, z, t, mu, rot) {
                Some(next) if self.accepts(&cur, &x, &next, &cand, zscale) => {
                    x = cand;
                    cur = next;
                    damping = (damping / 3.0).max(1e-15);
                }
                _ => {
                    damping *= 4.0;
                    if damping > 1e16 {
                        break;
                    }
                }
            }
        }
        converged |= self.stationary(&cur, &x);
        if converged {
            if let Ok(step) = cur.j.clone().svd(true, true).solve(&(-&cur.r), 1e-14) {
                let cand = project(x.iter().zip(step.iter()).map(|(a, b)| a + b).collect(), self.bound);
                if let Some(next) = self.eval(&cand, z, t, mu, rot) {
                    if next.r.norm() <= cur.r.norm() && self.stationary(&next, &cand) {
                        x = cand;
                        cur = next;
                    }
                }
            }
        }
        let gradient = projected_gradient(&(cur.j.transpose() * &cur.r), &x, self.bound);
        Ok(PhiResult { x, residual: cur.r.norm(), gradient, iterations, converged })
    }
}

/// `φ(z, t, μ, R)` with the given warm start.
#[allow(clippy::too_many_arguments)]
pub fn phi_invert(
    system: &SystemModel,
    input: &dyn InputSignal,
    q: usize,
    bound: f64,
    z: &[f64],
    t: f64,
    mu: f64,
    rot: &DMatrix<f64>,
    warm: &[f64],
) -> Result<PhiResult> {
    PhiProblem { system, input, q, bound }.invert(z, t, mu, rot, warm)
}
