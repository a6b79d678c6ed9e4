use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::jets::binomial;

/// Largest real part a gain polynomial root may have.
const HURWITZ_MARGIN: f64 = -1e-9;

/// Coefficients of `(s + 1)^{q+1}` without the leading one: all observer
/// poles at `-θ` once scaled.
pub fn hurwitz_gains(q: usize) -> Vec<f64> {
    (0..=q).map(|i| binomial(q + 1, i + 1)).collect()
}

/// Largest real part among the roots of `s^{q+1} + c_0 s^q + … + c_q`.
pub fn max_root_real_part(gains: &[f64]) -> f64 {
    let d = gains.len();
    if d == 0 {
        return f64::NEG_INFINITY;
    }
    let companion = DMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -gains[j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    companion.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

pub fn is_hurwitz(gains: &[f64]) -> bool {
    max_root_real_part(gains) < HURWITZ_MARGIN
}

/// High-gain observer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverConfig {
    pub q: usize,
    pub gains: Vec<f64>,
    pub theta: f64,
    /// Sampling period Δ.
    pub delta: f64,
}

impl ObserverConfig {
    pub fn new(q: usize, gains: Vec<f64>, theta: f64, delta: f64) -> Result<Self> {
        if gains.len() != q + 1 {
            return Err(LabError::Config(format!("expected {} observer gains, got {}", q + 1, gains.len())));
        }
        if !is_hurwitz(&gains) {
            return Err(LabError::Config(format!("observer gains {gains:?} are not Hurwitz")));
        }
        if !(theta >= 1.0) || !theta.is_finite() {
            return Err(LabError::Config(format!("theta must be at least 1, got {theta}")));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(LabError::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { q, gains, theta, delta })
    }

    pub fn with_default_gains(q: usize, theta: f64, delta: f64) -> Result<Self> {
        Self::new(q, hurwitz_gains(q), theta, delta)
    }

    /// Δ must not exceed the template horizon.
    pub fn check_horizon(&self, horizon: f64) -> Result<()> {
        if self.delta > horizon {
            return Err(LabError::Config(format!("delta {} exceeds the template horizon {horizon}", self.delta)));
        }
        Ok(())
    }

    /// Largest integrator step the observer stiffness heuristic allows.
    pub fn max_step(&self) -> f64 {
        0.1 / self.theta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_gains() {
        assert_eq!(hurwitz_gains(0), vec![1.0]);
        assert_eq!(hurwitz_gains(2), vec![3.0, 3.0, 1.0]);
        assert_eq!(hurwitz_gains(4), vec![5.0, 10.0, 10.0, 5.0, 1.0]);
        for q in 0..8 {
            assert!(is_hurwitz(&hurwitz_gains(q)), "q = {q}");
        }
    }

    #[test]
    fn rejects_unstable_gains_and_bad_parameters() {
        assert!(!is_hurwitz(&[-1.0, 1.0]));
        assert!(!is_hurwitz(&[0.0, 1.0]));
        assert!(ObserverConfig::new(1, vec![1.0, -2.0], 2.0, 0.1).is_err());
        assert!(ObserverConfig::new(1, vec![2.0], 2.0, 0.1).is_err());
        assert!(ObserverConfig::with_default_gains(1, 0.5, 0.1).is_err());
        assert!(ObserverConfig::with_default_gains(1, 2.0, 0.0).is_err());
        let cfg = ObserverConfig::with_default_gains(1, 2.0, 0.5).unwrap();
        assert!(cfg.check_horizon(0.4).is_err());
        assert!((cfg.max_step() - 0.05).abs() < 1e-15);
    }
}
