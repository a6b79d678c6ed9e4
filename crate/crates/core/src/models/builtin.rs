//! Benchmark instances.
//!
//! * `linear2d`: double integrator `ẋ₁ = x₂, ẋ₂ = u`, `y = x₁`, with
//!   `λ = -2x₁ - 3x₂` (closed-loop poles -1, -2).
//! * `bilinear2d`: `ẋ₁ = x₂, ẋ₂ = -x₁ - x₂ + u(1 + x₁)`, `y = x₁`,
//!   `λ = -x₁ - x₂`. Observable from `(y, ẏ)` for every input.
//! * `bilinear_unobservable`: `ẋ = (A + uB)x`, `y = x₁` with
//!   `A = [[-1, 1], [-1, -1]]`, `B = [[0, -1], [0, 0]]` and `λ = -x₁ - x₂`.
//!   The constant input `u = 1` makes `(C; C(A+B); …)` rank one at every
//!   order, while any input with `u' ≠ 0` where `u = 1` keeps `𝓗₂` injective.

use serde::{Deserialize, Serialize};

use super::{BoxSet, CompactSpec, Expr, SystemModel};
use crate::error::{LabError, Result};

pub const BUILTIN_NAMES: [&str; 3] = ["linear2d", "bilinear2d", "bilinear_unobservable"];

/// Tuning that works for a builtin out of the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommended {
    pub q: usize,
    pub delta: f64,
    pub theta: f64,
    /// Template horizon `T`.
    pub horizon: f64,
    /// Template polynomial per channel in normalized time `t / T`.
    pub template: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct BuiltinInstance {
    pub system: SystemModel,
    pub spec: CompactSpec,
    pub recommended: Recommended,
    /// Constant input that destroys observability, when the instance has one.
    pub bad_input: Option<Vec<f64>>,
}

fn parse_all(src: &[&str]) -> Vec<Expr> {
    src.iter().map(|s| Expr::parse(s).expect("builtin expression parses")).collect()
}

fn with_quadratic_lyapunov(system: SystemModel) -> SystemModel {
    match system.quadratic_lyapunov() {
        Some(v) => system.clone().with_lyapunov(v).unwrap_or(system),
        None => system,
    }
}

pub fn builtin_system(name: &str) -> Result<BuiltinInstance> {
    let (system, inner, outer, recommended, bad_input) = match name {
        "linear2d" => (
            SystemModel::new("linear2d", 2, 1, parse_all(&["x2", "u1"]), parse_all(&["x1"]), parse_all(&["-2*x1 - 3*x2"]))?,
            BoxSet::symmetric(&[1.0, 1.0])?,
            BoxSet::symmetric(&[2.0, 2.0])?,
            Recommended { q: 1, delta: 0.05, theta: 10.0, horizon: 1.0, template: vec![vec![1.0]] },
            None,
        ),
        "bilinear2d" => (
            SystemModel::new(
                "bilinear2d",
                2,
                1,
                parse_all(&["x2", "-x1 - x2 + u1*(1 + x1)"]),
                parse_all(&["x1"]),
                parse_all(&["-x1 - x2"]),
            )?,
            BoxSet::symmetric(&[0.5, 0.5])?,
            BoxSet::symmetric(&[1.0, 1.0])?,
            Recommended { q: 1, delta: 0.1, theta: 10.0, horizon: 1.0, template: vec![vec![1.0, -0.5]] },
            None,
        ),
        "bilinear_unobservable" => (
            SystemModel::new(
                "bilinear_unobservable",
                2,
                1,
                parse_all(&["-x1 + (1 - u1)*x2", "-x1 - x2"]),
                parse_all(&["x1"]),
                parse_all(&["-x1 - x2"]),
            )?,
            BoxSet::symmetric(&[0.5, 0.5])?,
            BoxSet::symmetric(&[1.0, 1.0])?,
            Recommended { q: 2, delta: 0.1, theta: 10.0, horizon: 1.0, template: vec![vec![1.0, -0.5]] },
            Some(vec![1.0]),
        ),
        other => return Err(LabError::UnknownSystem(other.to_string())),
    };
    let system = with_quadratic_lyapunov(system);
    let spec = CompactSpec::new(&system, inner, outer)?;
    Ok(BuiltinInstance { system, spec, recommended, bad_input })
}
