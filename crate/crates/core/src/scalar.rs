//! The number types a model right-hand side can be evaluated on.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::field::{Field, C64};
use crate::poly::Poly;

/// Arithmetic carrier for generic model evaluation: plain `f64`, real jets,
/// or complex truncated series.
pub trait Scalar:
    Clone
    + core::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(x: f64) -> Self;
    /// Real part of the constant term; used for domain checks.
    fn base(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tanh(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, r: f64) -> Self;
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn base(&self) -> f64 {
        *self
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn sin(&self) -> Self {
        libm::sin(*self)
    }
    fn cos(&self) -> Self {
        libm::cos(*self)
    }
    fn tanh(&self) -> Self {
        libm::tanh(*self)
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        let mut r = 1.0;
        let mut b = if n < 0 { 1.0 / *self } else { *self };
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                r *= b;
            }
            b *= b;
            e >>= 1;
        }
        r
    }
    fn powf(&self, r: f64) -> Self {
        libm::pow(*self, r)
    }
}

impl<T: Field> Scalar for Poly<T> {
    fn from_f64(x: f64) -> Self {
        Poly::constant(T::from_f64(x))
    }
    fn base(&self) -> f64 {
        self.value().real()
    }
    fn is_finite(&self) -> bool {
        Poly::is_finite(self)
    }
    fn exp(&self) -> Self {
        Poly::exp(self)
    }
    fn ln(&self) -> Self {
        Poly::ln(self)
    }
    fn sin(&self) -> Self {
        Poly::sin(self)
    }
    fn cos(&self) -> Self {
        Poly::cos(self)
    }
    fn tanh(&self) -> Self {
        Poly::tanh(self)
    }
    fn sqrt(&self) -> Self {
        Poly::sqrt(self)
    }
    fn powi(&self, n: i32) -> Self {
        Poly::powi(self, n)
    }
    fn powf(&self, r: f64) -> Self {
        Poly::powf(self, r)
    }
}

/// Complex truncated series in (w, w̄, β₁, β₂) or any other variables.
pub type Series = Poly<C64>;
