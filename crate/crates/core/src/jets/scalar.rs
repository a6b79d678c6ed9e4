use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Numeric type the model expressions can be evaluated on.
///
/// Implemented for plain `f64`, for [`Dual`](super::Dual) (first-order
/// sensitivities) and for [`Jet`](super::Jet) over any scalar. Constants built
/// with [`Scalar::from_f64`] carry no higher-order information; binary
/// operations zero-pad the shorter operand so constants mix freely with full
/// jets and duals.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Primal value (order-zero coefficient).
    fn value(&self) -> f64;

    fn scale(&self, k: f64) -> Self;

    fn sin(&self) -> Self;

    fn cos(&self) -> Self;

    fn exp(&self) -> Self;

    fn sqrt(&self) -> Self;

    /// Every stored component is finite.
    fn all_finite(&self) -> bool;

    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::from_f64(1.0);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn scale(&self, k: f64) -> Self {
        self * k
    }

    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }

    fn all_finite(&self) -> bool {
        self.is_finite()
    }

    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
}
