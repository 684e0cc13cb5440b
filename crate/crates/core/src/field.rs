use core::fmt::Debug;
use core::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use num_complex::Complex64;
use num_traits::{Float, One, Zero};

pub type C64 = Complex64;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Coefficient field of truncated series and dense matrices: `f64` or `Complex64`.
pub trait Field:
    Copy
    + PartialEq
    + Debug
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + Mul<f64, Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_f64(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn real(self) -> f64;
    fn imag(self) -> f64;
    fn conj(self) -> Self;
    fn is_finite(self) -> bool;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, r: f64) -> Self;
}

impl Field for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        Float::abs(self)
    }
    fn real(self) -> f64 {
        self
    }
    fn imag(self) -> f64 {
        0.0
    }
    fn conj(self) -> Self {
        self
    }
    fn is_finite(self) -> bool {
        Float::is_finite(self)
    }
    fn exp(self) -> Self {
        Float::exp(self)
    }
    fn ln(self) -> Self {
        Float::ln(self)
    }
    fn sin(self) -> Self {
        Float::sin(self)
    }
    fn cos(self) -> Self {
        Float::cos(self)
    }
    fn tanh(self) -> Self {
        Float::tanh(self)
    }
    fn sqrt(self) -> Self {
        Float::sqrt(self)
    }
    fn powf(self, r: f64) -> Self {
        Float::powf(self, r)
    }
}

impl Field for C64 {
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn real(self) -> f64 {
        self.re
    }
    fn imag(self) -> f64 {
        self.im
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn is_finite(self) -> bool {
        Float::is_finite(self.re) && Float::is_finite(self.im)
    }
    fn exp(self) -> Self {
        C64::exp(self)
    }
    fn ln(self) -> Self {
        C64::ln(self)
    }
    fn sin(self) -> Self {
        C64::sin(self)
    }
    fn cos(self) -> Self {
        C64::cos(self)
    }
    fn tanh(self) -> Self {
        C64::tanh(self)
    }
    fn sqrt(self) -> Self {
        C64::sqrt(self)
    }
    fn powf(self, r: f64) -> Self {
        C64::powf(self, r)
    }
}
