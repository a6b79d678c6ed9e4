use serde::{Deserialize, Serialize};

use super::SystemModel;
use crate::error::{LabError, Result};

/// Safety factor applied to the grid maximum of `|λ|`.
pub const LAMBDA_BAR_MARGIN: f64 = 0.10;

/// Total grid budget used when maximizing `|λ|` over the outer box.
const LAMBDA_GRID_BUDGET: usize = 40_000;

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_n, hi_n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSet {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(LabError::Dimension("box bounds must be non-empty and of equal length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(LabError::Config(format!("box bounds out of order: lo={lo:?} hi={hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(half_widths: &[f64]) -> Result<Self> {
        Self::new(half_widths.iter().map(|w| -w).collect(), half_widths.to_vec())
    }

    pub fn point(x: &[f64]) -> Self {
        Self { lo: x.to_vec(), hi: x.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).collect()
    }

    pub fn diameter(&self) -> f64 {
        self.widths().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// `max_{x ∈ box} |x|`, attained at a corner.
    pub fn max_norm(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<f64>().sqrt()
    }

    /// Largest `|x_i| / half-width_i` measured from the center; `<= 1` inside.
    pub fn relative_excursion(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| {
                let half = 0.5 * (b - a);
                let off = (v - 0.5 * (a + b)).abs();
                if half > 0.0 {
                    off / half
                } else if off == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .fold(0.0, f64::max)
    }

    /// `inner` lies in the interior of `self` along every axis of positive
    /// width; degenerate axes only require equality.
    pub fn strictly_contains(&self, inner: &BoxSet) -> bool {
        self.dim() == inner.dim()
            && (0..self.dim()).all(|i| {
                if self.hi[i] > self.lo[i] {
                    self.lo[i] < inner.lo[i] && inner.hi[i] < self.hi[i]
                } else {
                    inner.lo[i] == self.lo[i] && inner.hi[i] == self.hi[i]
                }
            })
    }

    /// Tensor grid with `per_axis` points per non-degenerate axis, in
    /// lexicographic order (last axis fastest).
    pub fn grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let ticks: Vec<Vec<f64>> = (0..self.dim())
            .map(|i| {
                if self.hi[i] == self.lo[i] || per_axis < 2 {
                    vec![0.5 * (self.lo[i] + self.hi[i])]
                } else {
                    linspace(self.lo[i], self.hi[i], per_axis)
                }
            })
            .collect();
        tensor(&ticks)
    }

    /// Diagonal of one grid cell at `per_axis` points per axis.
    pub fn cell_diagonal(&self, per_axis: usize) -> f64 {
        if per_axis < 2 {
            return self.diameter();
        }
        self.diameter() / (per_axis - 1) as f64
    }
}

pub fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    b
                } else {
                    a + (b - a) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn tensor(ticks: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::with_capacity(ticks.len())];
    for axis in ticks {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

/// Working compacts: initial conditions in `inner`, trajectories confined to
/// `outer`, and `λ̄ = max_{outer} |λ|` (grid estimate with safety margin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompactSpec {
    pub inner: BoxSet,
    pub outer: BoxSet,
    pub lambda_bar: f64,
}

impl CompactSpec {
    /// Builds the spec and computes `λ̄` on the default grid.
    pub fn new(system: &SystemModel, inner: BoxSet, outer: BoxSet) -> Result<Self> {
        let per_axis = default_lambda_grid(outer.dim());
        let lambda_bar = lambda_grid_max(system, &outer, per_axis) * (1.0 + LAMBDA_BAR_MARGIN);
        Self::with_lambda_bar(inner, outer, lambda_bar)
    }

    pub fn with_lambda_bar(inner: BoxSet, outer: BoxSet, lambda_bar: f64) -> Result<Self> {
        if !outer.strictly_contains(&inner) {
            return Err(LabError::Config(format!(
                "inner box {inner:?} is not inside the interior of the outer box {outer:?}"
            )));
        }
        if !(lambda_bar >= 0.0) || !lambda_bar.is_finite() {
            return Err(LabError::Config(format!("lambda_bar must be finite and non-negative, got {lambda_bar}")));
        }
        Ok(Self { inner, outer, lambda_bar })
    }

    pub fn n(&self) -> usize {
        self.outer.dim()
    }
}

pub fn default_lambda_grid(n: usize) -> usize {
    ((LAMBDA_GRID_BUDGET as f64).powf(1.0 / n as f64).floor() as usize).max(3)
}

/// `max |λ(x)|` over a `per_axis` tensor grid of `outer` (no margin).
pub fn lambda_grid_max(system: &SystemModel, outer: &BoxSet, per_axis: usize) -> f64 {
    outer
        .grid(per_axis)
        .iter()
        .map(|x| system.lambda(x).iter().map(|v: &f64| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_geometry() {
        let b = BoxSet::new(vec![-1.0, 0.0], vec![1.0, 2.0]).unwrap();
        let g = b.grid(3);
        assert_eq!(g.len(), 9);
        assert_eq!(g[0], vec![-1.0, 0.0]);
        assert_eq!(g[8], vec![1.0, 2.0]);
        assert_eq!(b.center(), vec![0.0, 1.0]);
        assert!((b.max_norm() - 5f64.sqrt()).abs() < 1e-15);
        assert!((b.cell_diagonal(3) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(BoxSet::point(&[1.0, 2.0]).grid(5).len(), 1);
    }

    #[test]
    fn containment_rules() {
        let outer = BoxSet::symmetric(&[1.0, 1.0]).unwrap();
        let inner = BoxSet::symmetric(&[0.5, 0.5]).unwrap();
        assert!(outer.strictly_contains(&inner));
        assert!(!inner.strictly_contains(&outer));
        assert!(!outer.strictly_contains(&outer));
        assert!(BoxSet::new(vec![1.0], vec![0.0]).is_err());
        assert!(CompactSpec::with_lambda_bar(outer.clone(), inner, 1.0).is_err());
        assert!(CompactSpec::with_lambda_bar(BoxSet::point(&[0.0]), BoxSet::point(&[0.0]), 0.0).is_ok());
        assert!(outer.relative_excursion(&[0.5, -1.0]) == 1.0);
    }
}
