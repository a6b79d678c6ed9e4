//! Flow/jump simulation of the three closed loops.
//!
//! Jump times are known in advance (`τ_i = Δ − s₀ + iΔ`), so each flow
//! interval is integrated with fixed RK4 steps whose last step lands on
//! `s = Δ` exactly.

use nalgebra::DMatrix;

use super::arc::{jump_time, ArcFlags, HybridArc, HybridState, IntegratorParams, JumpRecord, LoopVariant, Sample, Segment};
use crate::error::{LabError, Result};
use crate::integrate::{aligned_steps, rk4_step};
use crate::jets::{cal_h, scaled_input_jet, ConstantInput, InputSignal};
use crate::models::{norm, CompactSpec, SatMap, SystemModel};
use crate::observer::{observer_rhs, ObserverConfig, PhiProblem};
use crate::template::{isometry_from, isometry_update, ControlTemplate};

/// `μ_max = λ̄ · MU_MAX_FACTOR`.
pub const MU_MAX_FACTOR: f64 = 1.1;

/// Input law between jumps.
#[derive(Debug, Clone)]
enum Drive {
    Scaled { mu: f64, r: DMatrix<f64> },
    Held { v: Vec<f64> },
}

struct Engine<'a> {
    variant: LoopVariant,
    system: &'a SystemModel,
    spec: &'a CompactSpec,
    template: Option<&'a ControlTemplate>,
    cfg: Option<&'a ObserverConfig>,
    delta: f64,
    sat: SatMap,
    mu_max: f64,
    integ: IntegratorParams,
}

/// Outcome of one jump.
pub struct JumpOutcome {
    pub post: HybridState,
    pub x_hat: Vec<f64>,
    pub target_input: Vec<f64>,
    pub applied_input: Vec<f64>,
    pub phi_converged: bool,
    pub clamped: bool,
}

impl<'a> Engine<'a> {
    fn p(&self) -> usize {
        self.system.p()
    }

    fn eye(&self) -> DMatrix<f64> {
        DMatrix::identity(self.p(), self.p())
    }

    /// Input signal, scale and isometry seen by the plant and the observer.
    fn signal<'d>(&'d self, drive: &'d Drive) -> (Box<dyn InputSignal + 'd>, f64, DMatrix<f64>) {
        match drive {
            Drive::Scaled { mu, r } => {
                let tpl = self.template.expect("scaled drive needs a template");
                (Box::new(tpl.clone()), *mu, r.clone())
            }
            Drive::Held { v } => (Box::new(ConstantInput(v.clone())), 1.0, self.eye()),
        }
    }

    fn state_of(&self, x: &[f64], z: &[f64], s: f64, drive: &Drive) -> HybridState {
        let (mu, r) = match drive {
            Drive::Scaled { mu, r } => (*mu, r.clone()),
            Drive::Held { v } => (norm(v), isometry_from(v)),
        };
        HybridState { x: x.to_vec(), z: z.to_vec(), s, mu, r }
    }

    fn e_norm(&self, x: &[f64], z: &[f64], s: f64, drive: &Drive) -> Option<f64> {
        let cfg = self.cfg?;
        let (input, mu, r) = self.signal(drive);
        let target = cal_h(self.system, x, s, input.as_ref(), mu, &r, cfg.q).ok()?.values;
        Some(norm(&z.iter().zip(&target).map(|(a, b)| a - b).collect::<Vec<_>>()))
    }

    fn clamp(&self, u: &[f64]) -> (f64, bool) {
        let size = norm(u);
        if size > self.mu_max {
            (self.mu_max, true)
        } else {
            (size, false)
        }
    }

    fn jump(&self, state: &HybridState, drive: &Drive, warm: &mut Vec<f64>) -> Result<(JumpOutcome, Drive)> {
        let mut phi_converged = true;
        let x_hat = match (self.variant, self.cfg) {
            (LoopVariant::StateFeedback, _) => self.sat.apply(&state.x),
            (_, Some(cfg)) => {
                let (input, mu, r) = self.signal(drive);
                let problem =
                    PhiProblem { system: self.system, input: input.as_ref(), q: cfg.q, bound: self.sat.bound() };
                let phi = problem.invert(&state.z, self.delta, mu, &r, warm)?;
                warm.clone_from(&phi.x);
                phi_converged = phi.converged;
                self.sat.apply(&phi.x)
            }
            _ => unreachable!("observer loops carry a configuration"),
        };
        let target = self.system.lambda(&x_hat);
        let (mu_new, clamped) = self.clamp(&target);
        let (drive_new, applied) = match (self.variant, drive) {
            (LoopVariant::SampleHold, _) => {
                let size = norm(&target);
                let v: Vec<f64> =
                    if clamped { target.iter().map(|u| u * mu_new / size).collect() } else { target.clone() };
                (Drive::Held { v: v.clone() }, v)
            }
            (_, Drive::Scaled { mu, r }) => {
                let prev: Vec<f64> = r.column(0).iter().map(|v| mu * v).collect();
                let r_new = isometry_update(&prev, r, &target);
                let applied = r_new.column(0).iter().map(|v| mu_new * v).collect();
                (Drive::Scaled { mu: mu_new, r: r_new }, applied)
            }
            _ => unreachable!("held drive only occurs in the sample-and-hold loop"),
        };
        let z_new = match self.cfg {
            Some(cfg) if self.variant.uses_observer() => {
                let (input, mu, r) = self.signal(&drive_new);
                cal_h(self.system, &x_hat, 0.0, input.as_ref(), mu, &r, cfg.q)?.values
            }
            _ => Vec::new(),
        };
        let post = self.state_of(&state.x, &z_new, 0.0, &drive_new);
        Ok((
            JumpOutcome { post, x_hat, target_input: target, applied_input: applied, phi_converged, clamped },
            drive_new,
        ))
    }

    fn run(&self, init: HybridState, t_end: f64) -> Result<HybridArc> {
        let n = self.system.n();
        let s0 = init.s;
        let mut drive = match self.variant {
            LoopVariant::SampleHold => Drive::Held { v: init.base_input() },
            _ => Drive::Scaled { mu: init.mu, r: init.r.clone() },
        };
        let mut x = init.x.clone();
        let mut z = init.z.clone();
        let mut s = s0;
        let mut t = 0.0;
        let mut warm = self.spec.inner.center();
        let mut flags = ArcFlags::default();
        let mut segments = Vec::new();
        let mut jumps = Vec::new();
        let mut phi_ok = true;

        for i in 0.. {
            let tau = jump_time(self.delta, s0, i);
            let (s_stop, t_stop) = if tau <= t_end { (self.delta, tau) } else { (s + (t_end - t), t_end) };
            let mut seg = Segment { i, t_start: t, t_end: t_stop, samples: Vec::new() };
            seg.samples.push(Sample {
                t,
                i,
                state: self.state_of(&x, &z, s, &drive),
                e_norm: self.e_norm(&x, &z, s, &drive),
                phi_converged: phi_ok,
            });

            let (t_seg, s_seg) = (t, s);
            let steps = aligned_steps(s_seg, s_stop, self.integ.step);
            let last = steps.len();
            let mut y: Vec<f64> = x.iter().chain(&z).copied().collect();
            for (k, h) in steps.into_iter().enumerate() {
                let mut step_ok = true;
                {
                    let (input, mu, r) = self.signal(&drive);
                    let problem = self.cfg.map(|cfg| PhiProblem {
                        system: self.system,
                        input: input.as_ref(),
                        q: cfg.q,
                        bound: self.sat.bound(),
                    });
                    let mut rhs = |sl: f64, y: &[f64]| -> Vec<f64> {
                        let (xs, zs) = y.split_at(n);
                        let u = scaled_input_jet(input.as_ref(), sl, mu, &r, 0).coeffs()[0].clone();
                        let mut out = self.system.f(xs, &u);
                        if let (Some(problem), Some(cfg)) = (&problem, self.cfg) {
                            match observer_rhs(&self.system.h(xs), zs, sl, mu, &r, problem, cfg, &self.sat, &mut warm) {
                                Ok((dz, phi)) => {
                                    step_ok &= phi.converged;
                                    out.extend(dz);
                                }
                                Err(_) => out.extend(std::iter::repeat_n(f64::NAN, zs.len())),
                            }
                        }
                        out
                    };
                    y = rk4_step(&mut rhs, s, &y, h);
                }
                let final_step = k + 1 == last;
                s = if final_step { s_stop } else { s + h };
                t = if final_step { t_stop } else { t_seg + (s - s_seg) };
                flags.phi_failures += usize::from(!step_ok);
                phi_ok = step_ok;
                if !y.iter().all(|v| v.is_finite()) {
                    flags.escape_time = Some(t);
                    segments.push(seg);
                    return Ok(self.finish(s0, t_end, segments, jumps, flags));
                }
                if final_step || (k + 1) % self.integ.stride == 0 {
                    let (xs, zs) = y.split_at(n);
                    seg.samples.push(Sample {
                        t,
                        i,
                        state: self.state_of(xs, zs, s, &drive),
                        e_norm: self.e_norm(xs, zs, s, &drive),
                        phi_converged: phi_ok,
                    });
                }
            }
            let (xs, zs) = y.split_at(n);
            x = xs.to_vec();
            z = zs.to_vec();
            t = t_stop;
            segments.push(seg);
            if tau > t_end {
                break;
            }

            let pre = self.state_of(&x, &z, s, &drive);
            let outcome = self.jump(&pre, &drive, &mut warm);
            let Ok((jump, drive_new)) = outcome else {
                flags.escape_time = Some(t);
                break;
            };
            if jump.post.z.iter().chain(&jump.post.x).any(|v| !v.is_finite()) {
                flags.escape_time = Some(t);
                break;
            }
            flags.phi_failures += usize::from(!jump.phi_converged);
            flags.clamp_events += usize::from(jump.clamped);
            if jump.clamped {
                log::debug!("scale clamped at t = {t}: |λ(x̂)| = {}", norm(&jump.target_input));
            }
            phi_ok = jump.phi_converged;
            z = jump.post.z.clone();
            s = 0.0;
            drive = drive_new;
            jumps.push(JumpRecord {
                t,
                i,
                pre,
                post: jump.post,
                x_hat: jump.x_hat,
                target_input: jump.target_input,
                applied_input: jump.applied_input,
                phi_converged: jump.phi_converged,
                clamped: jump.clamped,
            });
        }
        Ok(self.finish(s0, t_end, segments, jumps, flags))
    }

    fn finish(
        &self,
        s0: f64,
        t_end: f64,
        segments: Vec<Segment>,
        jumps: Vec<JumpRecord>,
        flags: ArcFlags,
    ) -> HybridArc {
        HybridArc {
            variant: self.variant,
            n: self.system.n(),
            p: self.p(),
            q: self.cfg.filter(|_| self.variant.uses_observer()).map(|c| c.q),
            delta: self.delta,
            s0,
            t_end,
            mu_max: self.mu_max,
            segments,
            jumps,
            flags,
        }
    }

    fn validate(&self, init: &HybridState, t_end: f64) -> Result<()> {
        self.integ.validate()?;
        let (n, p, m) = (self.system.n(), self.system.p(), self.system.m());
        if self.spec.n() != n {
            return Err(LabError::Dimension("spec and system dimensions differ".into()));
        }
        if !(t_end > 0.0) || !t_end.is_finite() {
            return Err(LabError::Config(format!("t_end must be positive, got {t_end}")));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(LabError::Config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(0.0..=self.delta).contains(&init.s) {
            return Err(LabError::Config(format!("initial timer {} outside [0, {}]", init.s, self.delta)));
        }
        if init.mu < 0.0 || !init.mu.is_finite() {
            return Err(LabError::Config(format!("initial scale must be non-negative, got {}", init.mu)));
        }
        if init.x.len() != n || init.r.nrows() != p || init.r.ncols() != p {
            return Err(LabError::Dimension("initial state does not match the system".into()));
        }
        if let Some(tpl) = self.template {
            if tpl.p() != p {
                return Err(LabError::Dimension("template and system input dimensions differ".into()));
            }
            if self.delta > tpl.horizon() {
                return Err(LabError::Config(format!(
                    "delta {} exceeds the template horizon {}",
                    self.delta,
                    tpl.horizon()
                )));
            }
        }
        if let Some(cfg) = self.cfg {
            let want = m * (cfg.q + 1);
            if init.z.len() != want {
                return Err(LabError::Dimension(format!("observer state must have length {want}")));
            }
            if m * (cfg.q + 1) < n {
                return Err(LabError::Config(format!("m(q+1) = {want} < n = {n}")));
            }
            if self.integ.step > cfg.max_step() {
                log::warn!("integrator step {} exceeds 0.1/θ = {}", self.integ.step, cfg.max_step());
            }
        } else if !init.z.is_empty() {
            return Err(LabError::Dimension("the state-feedback loop has no observer state".into()));
        }
        Ok(())
    }
}

fn engine<'a>(
    variant: LoopVariant,
    system: &'a SystemModel,
    spec: &'a CompactSpec,
    template: Option<&'a ControlTemplate>,
    cfg: Option<&'a ObserverConfig>,
    delta: f64,
    integ: IntegratorParams,
) -> Engine<'a> {
    Engine {
        variant,
        system,
        spec,
        template,
        cfg,
        delta,
        sat: SatMap::for_box(&spec.outer),
        mu_max: spec.lambda_bar * MU_MAX_FACTOR,
        integ,
    }
}

/// The templated output-feedback loop.
pub fn simulate(
    system: &SystemModel,
    spec: &CompactSpec,
    template: &ControlTemplate,
    cfg: &ObserverConfig,
    init: HybridState,
    t_end: f64,
    integ: IntegratorParams,
) -> Result<HybridArc> {
    let e = engine(LoopVariant::Templated, system, spec, Some(template), Some(cfg), cfg.delta, integ);
    e.validate(&init, t_end)?;
    e.run(init, t_end)
}

/// Output feedback with the input held constant between jumps. The initial
/// held input is `μ₀ R₀ e₁`.
pub fn simulate_sample_hold(
    system: &SystemModel,
    spec: &CompactSpec,
    cfg: &ObserverConfig,
    init: HybridState,
    t_end: f64,
    integ: IntegratorParams,
) -> Result<HybridArc> {
    let e = engine(LoopVariant::SampleHold, system, spec, None, Some(cfg), cfg.delta, integ);
    e.validate(&init, t_end)?;
    e.run(init, t_end)
}

/// The templated loop with the true state in the jump map and no observer.
pub fn simulate_state_feedback(
    system: &SystemModel,
    spec: &CompactSpec,
    template: &ControlTemplate,
    delta: f64,
    init: HybridState,
    t_end: f64,
    integ: IntegratorParams,
) -> Result<HybridArc> {
    let e = engine(LoopVariant::StateFeedback, system, spec, Some(template), None, delta, integ);
    e.validate(&init, t_end)?;
    e.run(init, t_end)
}

/// One application of the templated jump map at `s = Δ`, warm-starting the
/// left inverse at `warm`.
pub fn jump_map(
    system: &SystemModel,
    spec: &CompactSpec,
    template: &ControlTemplate,
    cfg: &ObserverConfig,
    state: &HybridState,
    warm: &[f64],
) -> Result<JumpOutcome> {
    let e = engine(LoopVariant::Templated, system, spec, Some(template), Some(cfg), cfg.delta, IntegratorParams::default());
    let drive = Drive::Scaled { mu: state.mu, r: state.r.clone() };
    let mut warm = warm.to_vec();
    Ok(e.jump(state, &drive, &mut warm)?.0)
}
