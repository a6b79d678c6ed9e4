use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopVariant {
    Templated,
    SampleHold,
    StateFeedback,
}

impl LoopVariant {
    pub const ALL: [LoopVariant; 3] = [LoopVariant::Templated, LoopVariant::SampleHold, LoopVariant::StateFeedback];

    pub fn name(self) -> &'static str {
        match self {
            LoopVariant::Templated => "templated",
            LoopVariant::SampleHold => "sample_hold",
            LoopVariant::StateFeedback => "state_feedback",
        }
    }

    pub fn uses_observer(self) -> bool {
        self != LoopVariant::StateFeedback
    }
}

/// Fixed-step RK4 settings; every `stride`-th step is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorParams {
    pub step: f64,
    pub stride: usize,
}

impl Default for IntegratorParams {
    fn default() -> Self {
        Self { step: 1e-3, stride: 10 }
    }
}

impl IntegratorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(LabError::Config(format!("integrator step must be positive, got {}", self.step)));
        }
        if self.stride == 0 {
            return Err(LabError::Config("output stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Plant, observer, timer, scale and isometry. The state-feedback loop
/// leaves `z` empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub s: f64,
    pub mu: f64,
    pub r: DMatrix<f64>,
}

impl HybridState {
    /// `(x, z, s, 0, I)`.
    pub fn new(x: Vec<f64>, z: Vec<f64>, s: f64, p: usize) -> Self {
        Self { x, z, s, mu: 0.0, r: DMatrix::identity(p, p) }
    }

    /// Input at the start of the current period, `μ R e₁`.
    pub fn base_input(&self) -> Vec<f64> {
        self.r.column(0).iter().map(|v| self.mu * v).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub i: usize,
    pub state: HybridState,
    /// `|z − 𝓗_q(x, s, ·)|` under the input actually driving the flow.
    pub e_norm: Option<f64>,
    pub phi_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub i: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpRecord {
    pub t: f64,
    /// Hybrid index before the jump.
    pub i: usize,
    pub pre: HybridState,
    pub post: HybridState,
    pub x_hat: Vec<f64>,
    /// `λ(x̂)`.
    pub target_input: Vec<f64>,
    /// Input right after the jump, `μ⁺ R⁺ v*(0)`.
    pub applied_input: Vec<f64>,
    pub phi_converged: bool,
    pub clamped: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArcFlags {
    /// Integrator steps or jumps whose left inverse did not converge.
    pub phi_failures: usize,
    pub clamp_events: usize,
    /// Time of the first non-finite state, if the arc was truncated.
    pub escape_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridArc {
    pub variant: LoopVariant,
    pub n: usize,
    pub p: usize,
    pub q: Option<usize>,
    pub delta: f64,
    pub s0: f64,
    pub t_end: f64,
    pub mu_max: f64,
    pub segments: Vec<Segment>,
    pub jumps: Vec<JumpRecord>,
    pub flags: ArcFlags,
}

impl HybridArc {
    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.segments.iter().flat_map(|s| s.samples.iter())
    }

    pub fn last_sample(&self) -> Option<&Sample> {
        self.segments.iter().rev().find_map(|s| s.samples.last())
    }

    pub fn escaped(&self) -> bool {
        self.flags.escape_time.is_some()
    }

    /// `τ_i = Δ − s₀ + iΔ`.
    pub fn jump_time(&self, i: usize) -> f64 {
        jump_time(self.delta, self.s0, i)
    }
}

pub(crate) fn jump_time(delta: f64, s0: f64, i: usize) -> f64 {
    (delta - s0) + i as f64 * delta
}
