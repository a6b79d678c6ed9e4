use serde::{Deserialize, Serialize};

use super::isometry_from;
use crate::error::{LabError, Result};
use crate::jets::{InputSignal, VecJet};
use crate::models::Recommended;

/// Polynomial input on `[0, T]`, one polynomial per channel in the
/// normalized time `τ = t / T` (ascending powers). Derivatives are exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyInput {
    pub horizon: f64,
    pub coeffs: Vec<Vec<f64>>,
}

impl PolyInput {
    pub fn new(horizon: f64, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(LabError::Config(format!("template horizon must be positive, got {horizon}")));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| c.is_empty()) {
            return Err(LabError::Config("template needs at least one coefficient per channel".into()));
        }
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(LabError::Config("template coefficients must be finite".into()));
        }
        Ok(Self { horizon, coeffs })
    }

    /// Constant `(2λ̄, 0, …, 0)`, the centre of the template search.
    pub fn reference(lambda_bar: f64, p: usize, horizon: f64) -> Result<Self> {
        let mut coeffs = vec![vec![0.0]; p];
        coeffs[0][0] = 2.0 * lambda_bar;
        Self::new(horizon, coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(Vec::len).max().unwrap_or(1) - 1
    }

    /// k-th derivative of one channel at time `t`.
    fn derivative(&self, channel: usize, t: f64, k: usize) -> f64 {
        let c = &self.coeffs[channel];
        if k >= c.len() {
            return 0.0;
        }
        let tau = t / self.horizon;
        // Horner on the k-times differentiated polynomial.
        let mut acc = 0.0;
        for j in (k..c.len()).rev() {
            let falling: f64 = ((j - k + 1)..=j).map(|i| i as f64).product();
            acc = acc * tau + c[j] * falling;
        }
        acc / self.horizon.powi(k as i32)
    }
}

impl InputSignal for PolyInput {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn jet_at(&self, t: f64, order: usize) -> VecJet {
        VecJet::new((0..=order).map(|k| (0..self.dim()).map(|c| self.derivative(c, t, k)).collect()).collect())
    }
}

/// Polynomial control template: a [`PolyInput`] with `v*(0) = e₁` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTemplate {
    input: PolyInput,
    /// Order at which the template was certified, if it was.
    pub order: Option<usize>,
}

impl ControlTemplate {
    /// Checks `v*(0) = e₁` bit-for-bit.
    pub fn new(input: PolyInput) -> Result<Self> {
        let ok = input.coeffs.iter().enumerate().all(|(c, poly)| poly[0] == if c == 0 { 1.0 } else { 0.0 });
        if !ok {
            return Err(LabError::Config("control template must start at (1, 0, …, 0)".into()));
        }
        Ok(Self { input, order: None })
    }

    /// The constant template `e₁` on `[0, horizon]`.
    pub fn constant(p: usize, horizon: f64) -> Result<Self> {
        let mut coeffs = vec![vec![0.0]; p];
        coeffs[0][0] = 1.0;
        Self::new(PolyInput::new(horizon, coeffs)?)
    }

    pub fn horizon(&self) -> f64 {
        self.input.horizon
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.input.coeffs
    }

    pub fn input(&self) -> &PolyInput {
        &self.input
    }

    pub fn p(&self) -> usize {
        self.input.coeffs.len()
    }

    /// The suggested template of a benchmark.
    pub fn recommended(rec: &Recommended) -> Result<Self> {
        Self::new(PolyInput::new(rec.horizon, rec.template.clone())?)
    }

    /// Every derivative vanishes.
    pub fn is_constant(&self) -> bool {
        self.input.coeffs.iter().all(|c| c[1..].iter().all(|v| *v == 0.0))
    }
}

impl InputSignal for ControlTemplate {
    fn dim(&self) -> usize {
        self.input.dim()
    }

    fn jet_at(&self, t: f64, order: usize) -> VecJet {
        self.input.jet_at(t, order)
    }
}

/// `v* = μ_ref R_ref v` with `μ_ref = 1/|v(0)|` and `R_ref⁻¹ ∈ 𝓡₀(v(0))`, so
/// that `v*(0) = e₁`; the constant terms are then set to `e₁` exactly.
pub fn normalize_template(v: &PolyInput) -> Result<ControlTemplate> {
    let v0 = v.value_at(0.0);
    let norm0 = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm0 == 0.0 || !norm0.is_finite() {
        return Err(LabError::ZeroTemplate);
    }
    let mu_ref = 1.0 / norm0;
    let r_ref = isometry_from(&v0).transpose();
    let p = v.dim();
    let len = v.coeffs.iter().map(Vec::len).max().unwrap_or(1);
    let coeffs: Vec<Vec<f64>> = (0..p)
        .map(|c| {
            (0..len)
                .map(|j| {
                    if j == 0 {
                        return if c == 0 { 1.0 } else { 0.0 };
                    }
                    mu_ref * (0..p).map(|k| r_ref[(c, k)] * v.coeffs[k].get(j).copied().unwrap_or(0.0)).sum::<f64>()
                })
                .collect()
        })
        .collect();
    ControlTemplate::new(PolyInput::new(v.horizon, coeffs)?)
}
