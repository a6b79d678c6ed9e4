use serde::{Deserialize, Serialize};

use super::BoxSet;
use crate::jets::Scalar;

/// Smooth radial saturation.
///
/// With `ρ = max_{outer} |x|`, the map is the identity on the ball of radius
/// `ρ` (hence on the outer box), blends towards the radial projection onto the
/// sphere of radius `2ρ` across the band `ρ ≤ |x| ≤ 2ρ`, and is that
/// projection beyond. The blend uses the `C^∞` step built from `exp(-1/t)`,
/// so `|sat(x)| ≤ 2ρ` everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatMap {
    radius: f64,
}

impl SatMap {
    pub fn new(radius: f64) -> Self {
        assert!(radius >= 0.0 && radius.is_finite());
        Self { radius }
    }

    pub fn for_box(outer: &BoxSet) -> Self {
        Self::new(outer.max_norm())
    }

    /// Start of the transition band.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Global bound `2ρ` on `|sat(x)|`.
    pub fn bound(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn apply<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let rho = self.radius;
        let r2 = x.iter().fold(S::from_f64(0.0), |acc, v| acc + v.clone() * v.clone());
        let r2v = r2.value();
        if r2v <= rho * rho {
            return x.to_vec();
        }
        let r = r2.sqrt();
        let target = S::from_f64(2.0 * rho) / r.clone();
        let tau = (r - S::from_f64(rho)).scale(1.0 / rho.max(f64::MIN_POSITIVE));
        let weight = if tau.value() >= 1.0 {
            target
        } else {
            let beta = smooth_step(&tau);
            (S::from_f64(1.0) - beta.clone()) + beta * target
        };
        x.iter().map(|v| v.clone() * weight.clone()).collect()
    }
}

fn flat<S: Scalar>(t: &S) -> S {
    if t.value() <= 0.0 {
        S::from_f64(0.0)
    } else {
        (-(S::from_f64(1.0) / t.clone())).exp()
    }
}

/// `C^∞` step: 0 for `t ≤ 0`, 1 for `t ≥ 1`.
fn smooth_step<S: Scalar>(t: &S) -> S {
    let a = flat(t);
    let b = flat(&(S::from_f64(1.0) - t.clone()));
    a.clone() / (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet;

    #[test]
    fn identity_inside_and_bounded_outside() {
        let outer = BoxSet::symmetric(&[1.0, 2.0]).unwrap();
        let sat = SatMap::for_box(&outer);
        for x in outer.grid(9) {
            assert_eq!(sat.apply(&x), x);
        }
        let bound = sat.bound();
        for k in 0..400 {
            let ang = k as f64 * 0.1;
            let r = 0.05 * k as f64;
            let y = sat.apply(&[r * ang.cos(), r * ang.sin()]);
            let norm = (y[0] * y[0] + y[1] * y[1]).sqrt();
            assert!(norm <= bound * (1.0 + 1e-14), "r={r} norm={norm}");
        }
        let far = sat.apply(&[1e6, 0.0]);
        assert!((far[0] - bound).abs() < 1e-9);
    }

    #[test]
    fn jets_agree_with_finite_differences_in_band() {
        let sat = SatMap::new(1.0);
        let x0 = [1.1, 0.6];
        let d = [0.3, -0.2];
        let jx: Vec<Jet<f64>> = (0..2).map(|i| Jet::new(vec![x0[i], d[i], 0.0, 0.0])).collect();
        let out = sat.apply(&jx);
        let eval = |t: f64| sat.apply(&[x0[0] + t * d[0], x0[1] + t * d[1]]);
        let h = 1e-2;
        for c in 0..2 {
            let g = |t: f64| eval(t)[c];
            let d1 = (g(h) - g(-h)) / (2.0 * h);
            let d2 = (g(h) - 2.0 * g(0.0) + g(-h)) / (h * h);
            let d3 = (g(2.0 * h) - 2.0 * g(h) + 2.0 * g(-h) - g(-2.0 * h)) / (2.0 * h * h * h);
            let jc = out[c].coeffs();
            assert!((jc[1] - d1).abs() < 1e-3 * (1.0 + d1.abs()));
            assert!((jc[2] - d2).abs() < 1e-2 * (1.0 + d2.abs()));
            assert!((jc[3] - d3).abs() < 5e-2 * (1.0 + d3.abs()));
        }
    }
}
