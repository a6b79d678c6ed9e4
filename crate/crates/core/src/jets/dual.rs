use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

/// Forward-mode dual number with a dense tangent vector.
///
/// A missing tangent entry is zero, so constants are stored with an empty
/// tangent and combine with seeded variables of any width.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Dual {
    pub fn constant(value: f64) -> Self {
        Self { value, grad: Vec::new() }
    }

    /// Independent variable `index` out of `width`.
    pub fn variable(value: f64, index: usize, width: usize) -> Self {
        let mut grad = vec![0.0; width];
        grad[index] = 1.0;
        Self { value, grad }
    }

    /// Tangent component, zero when not stored.
    pub fn partial(&self, index: usize) -> f64 {
        self.grad.get(index).copied().unwrap_or(0.0)
    }

    fn chain(&self, value: f64, slope: f64) -> Self {
        Self { value, grad: self.grad.iter().map(|g| g * slope).collect() }
    }
}

fn zip_grad(a: &[f64], b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| op(a.get(i).copied().unwrap_or(0.0), b.get(i).copied().unwrap_or(0.0)))
        .collect()
}

impl Add for Dual {
    type Output = Dual;

    fn add(self, rhs: Dual) -> Dual {
        Dual { value: self.value + rhs.value, grad: zip_grad(&self.grad, &rhs.grad, |a, b| a + b) }
    }
}

impl Sub for Dual {
    type Output = Dual;

    fn sub(self, rhs: Dual) -> Dual {
        Dual { value: self.value - rhs.value, grad: zip_grad(&self.grad, &rhs.grad, |a, b| a - b) }
    }
}

impl Mul for Dual {
    type Output = Dual;

    fn mul(self, rhs: Dual) -> Dual {
        let (a, b) = (self.value, rhs.value);
        Dual { value: a * b, grad: zip_grad(&self.grad, &rhs.grad, |da, db| da * b + a * db) }
    }
}

impl Div for Dual {
    type Output = Dual;

    fn div(self, rhs: Dual) -> Dual {
        let q = self.value / rhs.value;
        let b = rhs.value;
        Dual { value: q, grad: zip_grad(&self.grad, &rhs.grad, |da, db| (da - q * db) / b) }
    }
}

impl Neg for Dual {
    type Output = Dual;

    fn neg(self) -> Dual {
        Dual { value: -self.value, grad: self.grad.into_iter().map(|g| -g).collect() }
    }
}

impl Scalar for Dual {
    fn from_f64(v: f64) -> Self {
        Dual::constant(v)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn scale(&self, k: f64) -> Self {
        self.chain(self.value * k, k)
    }

    fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }

    fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }

    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }

    fn all_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}
