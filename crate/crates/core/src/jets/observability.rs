//! Output-derivative maps `H_k` and the stacked map `𝓗_q`.
//!
//! `H_k(x, σ)` is the k-th time derivative at 0 of the output of the system
//! started at `x` under an input whose jet at 0 is `σ`. It is computed in
//! Taylor mode: the state jet is grown one coefficient at a time from
//! `ẋ = f(x, u)`, then composed with `h`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{Dual, Jet, Scalar, VecJet};
use crate::error::{LabError, Result};
use crate::models::SystemModel;

/// Deepest output derivative the maps will compute.
pub const MAX_JET_ORDER: usize = 8;

/// A time signal with exact derivatives.
pub trait InputSignal {
    fn dim(&self) -> usize;

    /// Raw derivatives `0..=order` at time `t`.
    fn jet_at(&self, t: f64, order: usize) -> VecJet;

    fn value_at(&self, t: f64) -> Vec<f64> {
        self.jet_at(t, 0).coeffs()[0].clone()
    }
}

/// Constant input, all derivatives zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantInput(pub Vec<f64>);

impl InputSignal for ConstantInput {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn jet_at(&self, _t: f64, order: usize) -> VecJet {
        VecJet::constant(&self.0, order)
    }
}

/// Blocks `H_0 .. H_k` of an output jet, each of dimension `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityStack {
    pub k: usize,
    pub m: usize,
    pub values: Vec<f64>,
}

impl ObservabilityStack {
    pub fn block(&self, j: usize) -> &[f64] {
        &self.values[j * self.m..(j + 1) * self.m]
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_JET_ORDER {
        return Err(LabError::Capability { requested: order, max: MAX_JET_ORDER });
    }
    Ok(())
}

/// Output jets `h(X(x, t, u))` up to `order`, one per output channel.
///
/// `sigma` must carry at least `order - 1` input derivatives.
pub fn output_jet<S: Scalar>(system: &SystemModel, x: &[S], sigma: &VecJet, order: usize) -> Result<Vec<Jet<S>>> {
    check_order(order)?;
    if x.len() != system.n() {
        return Err(LabError::Dimension(format!("state has {} entries, system expects {}", x.len(), system.n())));
    }
    if sigma.dim() != system.p() {
        return Err(LabError::Dimension(format!("input has {} channels, system expects {}", sigma.dim(), system.p())));
    }
    if order >= 1 && sigma.order() + 1 < order {
        return Err(LabError::Dimension(format!(
            "H_{order} needs {} input derivatives, jet has order {}",
            order - 1,
            sigma.order()
        )));
    }
    let input: Vec<Jet<S>> = sigma.channels(order.saturating_sub(1));
    let mut state: Vec<Vec<S>> = x.iter().map(|xi| vec![xi.clone()]).collect();
    for k in 0..order {
        let xj: Vec<Jet<S>> = state.iter().map(|c| Jet::new(c.clone())).collect();
        let uj: Vec<Jet<S>> = input.iter().map(|c| c.clone().truncated(k)).collect();
        let rate = system.f(&xj, &uj);
        for (coeffs, r) in state.iter_mut().zip(rate) {
            coeffs.push(r.coeff(k));
        }
    }
    let xj: Vec<Jet<S>> = state.into_iter().map(Jet::new).collect();
    let out = system.h(&xj);
    if !out.iter().all(Scalar::all_finite) {
        return Err(LabError::Numerical("output jet".into()));
    }
    Ok(out)
}

/// `H_k(x, σ_0, …, σ_{k-1})`.
pub fn hk(system: &SystemModel, x: &[f64], sigma: &VecJet, k: usize) -> Result<Vec<f64>> {
    let jets = output_jet::<f64>(system, x, sigma, k)?;
    Ok(jets.iter().map(|j| j.coeff(k)).collect())
}

/// Jet of the applied input `mu * R * v(t + ·)` at `t`.
pub fn scaled_input_jet(input: &dyn InputSignal, t: f64, mu: f64, rot: &DMatrix<f64>, order: usize) -> VecJet {
    let raw = input.jet_at(t, order);
    let coeffs = raw
        .coeffs()
        .iter()
        .map(|c| {
            (0..rot.nrows())
                .map(|i| mu * (0..rot.ncols()).map(|j| rot[(i, j)] * c[j]).sum::<f64>())
                .collect()
        })
        .collect();
    VecJet::new(coeffs)
}

/// `𝓗_q(x, t, μRv)`: stacked `H_0..H_q` evaluated on the jet of `μRv` at `t`.
pub fn cal_h(
    system: &SystemModel,
    x: &[f64],
    t: f64,
    input: &dyn InputSignal,
    mu: f64,
    rot: &DMatrix<f64>,
    q: usize,
) -> Result<ObservabilityStack> {
    check_order(q)?;
    let sigma = scaled_input_jet(input, t, mu, rot, q.saturating_sub(1));
    let jets = output_jet::<f64>(system, x, &sigma, q)?;
    Ok(stack_from(system.m(), q, &jets, |c| *c))
}

/// Jacobian of `x ↦ 𝓗_q(x, t, μRv)`, shape `m(q+1) × n`, by forward
/// sensitivities carried through the Taylor recurrence.
pub fn cal_h_jacobian(
    system: &SystemModel,
    x: &[f64],
    t: f64,
    input: &dyn InputSignal,
    mu: f64,
    rot: &DMatrix<f64>,
    q: usize,
) -> Result<DMatrix<f64>> {
    Ok(cal_h_with_jacobian(system, x, t, input, mu, rot, q)?.1)
}

/// Stack and Jacobian from a single dual-number pass.
pub fn cal_h_with_jacobian(
    system: &SystemModel,
    x: &[f64],
    t: f64,
    input: &dyn InputSignal,
    mu: f64,
    rot: &DMatrix<f64>,
    q: usize,
) -> Result<(ObservabilityStack, DMatrix<f64>)> {
    check_order(q)?;
    let n = system.n();
    let sigma = scaled_input_jet(input, t, mu, rot, q.saturating_sub(1));
    let xd: Vec<Dual> = x.iter().enumerate().map(|(i, v)| Dual::variable(*v, i, n)).collect();
    let jets = output_jet::<Dual>(system, &xd, &sigma, q)?;
    let m = system.m();
    let stack = stack_from(m, q, &jets, |d| d.value);
    let jac = DMatrix::from_fn(m * (q + 1), n, |row, col| jets[row % m].coeff(row / m).partial(col));
    Ok((stack, jac))
}

fn stack_from<S: Scalar>(m: usize, q: usize, jets: &[Jet<S>], value: impl Fn(&S) -> f64) -> ObservabilityStack {
    let mut values = Vec::with_capacity(m * (q + 1));
    for j in 0..=q {
        values.extend(jets.iter().map(|jet| value(&jet.coeff(j))));
    }
    ObservabilityStack { k: q, m, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Expr, SystemModel};

    fn oscillator() -> SystemModel {
        SystemModel::new(
            "oscillator",
            2,
            1,
            vec![Expr::parse("x2").unwrap(), Expr::parse("-x1").unwrap()],
            vec![Expr::parse("x1").unwrap()],
            vec![Expr::constant(0.0)],
        )
        .unwrap()
    }

    #[test]
    fn harmonic_oscillator_derivatives() {
        let sys = oscillator();
        let sigma = VecJet::constant(&[0.0], 3);
        let h: Vec<f64> = (0..=4).map(|k| hk(&sys, &[1.0, 0.0], &sigma, k).unwrap()[0]).collect();
        assert_eq!(h, vec![1.0, 0.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn base_case_and_first_step() {
        let sys = SystemModel::new(
            "generic",
            2,
            1,
            vec![Expr::parse("sin(x2) + u1*x1").unwrap(), Expr::parse("x1^2 - u1").unwrap()],
            vec![Expr::parse("x1*x2 + exp(x1)").unwrap()],
            vec![Expr::constant(0.0)],
        )
        .unwrap();
        let x = [0.3, -0.7];
        let sigma = VecJet::new(vec![vec![0.4]]);
        let h0 = hk(&sys, &x, &sigma, 0).unwrap()[0];
        assert_eq!(h0, 0.3 * -0.7 + 0.3f64.exp());
        // H_1 = dh/dx · f(x, σ_0)
        let f = [(-0.7f64).sin() + 0.4 * 0.3, 0.09 - 0.4];
        let grad = [-0.7 + 0.3f64.exp(), 0.3];
        let h1 = hk(&sys, &x, &sigma, 1).unwrap()[0];
        assert!((h1 - (grad[0] * f[0] + grad[1] * f[1])).abs() < 1e-15);
    }

    #[test]
    fn order_limits() {
        let sys = oscillator();
        let sigma = VecJet::constant(&[0.0], MAX_JET_ORDER + 2);
        assert!(matches!(
            hk(&sys, &[1.0, 0.0], &sigma, MAX_JET_ORDER + 1),
            Err(LabError::Capability { requested: 9, max: 8 })
        ));
        let short = VecJet::constant(&[0.0], 1);
        assert!(matches!(hk(&sys, &[1.0, 0.0], &short, 4), Err(LabError::Dimension(_))));
    }

    #[test]
    fn non_finite_is_numerical_error() {
        let sys = SystemModel::new(
            "blowup",
            1,
            1,
            vec![Expr::parse("1/x1").unwrap()],
            vec![Expr::parse("x1").unwrap()],
            vec![Expr::constant(0.0)],
        )
        .unwrap();
        let sigma = VecJet::constant(&[0.0], 2);
        assert!(matches!(hk(&sys, &[0.0], &sigma, 2), Err(LabError::Numerical(_))));
    }
}
