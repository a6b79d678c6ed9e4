use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Scalar;

/// Binomial coefficient as a float. Orders here stay far below the range
/// where the product loses exactness.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Truncated univariate Taylor jet with raw derivative coefficients:
/// `coeffs[j]` is the j-th time derivative at the expansion point (not divided
/// by `j!`).
///
/// A jet of order `K` stores `K + 1` coefficients. Operands of different
/// orders are combined by treating missing coefficients as zero, which is
/// exact for constants and truncates consistently otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a jet holds at least its value");
        Self { coeffs }
    }

    pub fn constant(value: T) -> Self {
        Self { coeffs: vec![value] }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient `k`, zero when beyond the stored order.
    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(|| T::from_f64(0.0))
    }

    /// Keep at most `order + 1` coefficients.
    pub fn truncated(mut self, order: usize) -> Self {
        self.coeffs.truncate(order + 1);
        self
    }

    fn zip(self, rhs: Self, op: impl Fn(T, T) -> T) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let mut a = self.coeffs.into_iter();
        let mut b = rhs.coeffs.into_iter();
        let zero = || T::from_f64(0.0);
        let coeffs = (0..len)
            .map(|_| op(a.next().unwrap_or_else(zero), b.next().unwrap_or_else(zero)))
            .collect();
        Self { coeffs }
    }

    /// Shared recurrence for `g = F(a)` with `g' = a' * w`, where `w` is
    /// another jet whose coefficients up to `k - 1` are already known.
    fn chain_coeff(&self, w: &[T], k: usize) -> T {
        let mut acc = T::from_f64(0.0);
        for j in 0..k {
            let term = self.coeff(j + 1) * w[k - 1 - j].clone();
            acc = acc + term.scale(binomial(k - 1, j));
        }
        acc
    }
}

impl<T: Scalar> Add for Jet<T> {
    type Output = Jet<T>;

    fn add(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<T: Scalar> Sub for Jet<T> {
    type Output = Jet<T>;

    fn sub(self, rhs: Self) -> Self {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<T: Scalar> Mul for Jet<T> {
    type Output = Jet<T>;

    // Leibniz rule on raw derivatives.
    fn mul(self, rhs: Self) -> Self {
        let (la, lb) = (self.coeffs.len(), rhs.coeffs.len());
        let len = la.max(lb);
        let coeffs = (0..len)
            .map(|k| {
                let mut acc = T::from_f64(0.0);
                for j in k.saturating_sub(lb - 1)..=k.min(la - 1) {
                    let term = self.coeffs[j].clone() * rhs.coeffs[k - j].clone();
                    acc = acc + term.scale(binomial(k, j));
                }
                acc
            })
            .collect();
        Self { coeffs }
    }
}

impl<T: Scalar> Div for Jet<T> {
    type Output = Jet<T>;

    fn div(self, rhs: Self) -> Self {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        let b0 = rhs.coeffs[0].clone();
        let mut q: Vec<T> = Vec::with_capacity(len);
        for k in 0..len {
            let mut acc = self.coeff(k);
            for j in 1..=k.min(rhs.coeffs.len() - 1) {
                let term = rhs.coeffs[j].clone() * q[k - j].clone();
                acc = acc - term.scale(binomial(k, j));
            }
            q.push(acc / b0.clone());
        }
        Self { coeffs: q }
    }
}

impl<T: Scalar> Neg for Jet<T> {
    type Output = Jet<T>;

    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.into_iter().map(|c| -c).collect() }
    }
}

impl<T: Scalar> Scalar for Jet<T> {
    fn from_f64(v: f64) -> Self {
        Jet::constant(T::from_f64(v))
    }

    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn scale(&self, k: f64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect() }
    }

    fn exp(&self) -> Self {
        let mut e = vec![self.coeffs[0].exp()];
        for k in 1..self.coeffs.len() {
            let next = self.chain_coeff(&e, k);
            e.push(next);
        }
        Self { coeffs: e }
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn sqrt(&self) -> Self {
        let r0 = self.coeffs[0].sqrt();
        let two_r0 = r0.scale(2.0);
        let mut r = vec![r0];
        for k in 1..self.coeffs.len() {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                let term = r[j].clone() * r[k - j].clone();
                acc = acc - term.scale(binomial(k, j));
            }
            r.push(acc / two_r0.clone());
        }
        Self { coeffs: r }
    }

    fn all_finite(&self) -> bool {
        self.coeffs.iter().all(Scalar::all_finite)
    }
}

impl<T: Scalar> Jet<T> {
    pub fn sin_cos(&self) -> (Self, Self) {
        let mut s = vec![self.coeffs[0].sin()];
        let mut c = vec![self.coeffs[0].cos()];
        for k in 1..self.coeffs.len() {
            let sk = self.chain_coeff(&c, k);
            let ck = -self.chain_coeff(&s, k);
            s.push(sk);
            c.push(ck);
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }
}

/// Vector-valued jet of a time signal: `coeffs[j]` is the j-th derivative
/// of every channel at the expansion point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VecJet {
    coeffs: Vec<Vec<f64>>,
}

impl VecJet {
    /// All coefficient vectors must share one dimension.
    pub fn new(coeffs: Vec<Vec<f64>>) -> Self {
        assert!(!coeffs.is_empty(), "a jet holds at least its value");
        let dim = coeffs[0].len();
        assert!(coeffs.iter().all(|c| c.len() == dim), "jet coefficients differ in dimension");
        Self { coeffs }
    }

    /// Constant signal: value plus `order` zero derivatives.
    pub fn constant(value: &[f64], order: usize) -> Self {
        let mut coeffs = vec![value.to_vec()];
        coeffs.extend((0..order).map(|_| vec![0.0; value.len()]));
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.coeffs[0].len()
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// Per-channel scalar jets truncated to `order`, lifted into `T`.
    pub fn channels<T: Scalar>(&self, order: usize) -> Vec<Jet<T>> {
        let top = order.min(self.order());
        (0..self.dim())
            .map(|c| Jet::new((0..=top).map(|j| T::from_f64(self.coeffs[j][c])).collect()))
            .collect()
    }
}
