//! Small dense matrices over `f64` or `Complex64` with an LU factorization.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::field::{Field, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

pub type CMat = Mat<C64>;
pub type RMat = Mat<f64>;

impl<T: Field> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `xᵀ M` (no conjugation).
    pub fn vec_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![T::zero(); self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[j] += x[i] * self[(i, j)];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Mat { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v.modulus() * v.modulus()).sum::<f64>())
    }

    pub fn lu(&self) -> Result<Lu<T>> {
        Lu::new(self)
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        self.lu()?.solve(b)
    }

    pub fn det(&self) -> T {
        match Lu::new(self) {
            Ok(lu) => lu.det(),
            Err(_) => T::zero(),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        self.lu()?.inverse()
    }

    /// 1-norm condition number; `inf` for a numerically singular matrix.
    pub fn cond1(&self) -> f64 {
        match self.inverse() {
            Ok(inv) => self.norm1() * inv.norm1(),
            Err(_) => f64::INFINITY,
        }
    }
}

impl Mat<f64> {
    pub fn to_complex(&self) -> CMat {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| C64::new(v, 0.0)).collect() }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    piv: Vec<usize>,
    sign: f64,
}

impl<T: Field> Lu<T> {
    pub fn new(a: &Mat<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Invalid("LU of a non-square matrix".into()));
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.data.iter().map(|v| v.modulus()).fold(0.0, f64::max);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].modulus();
            for i in k + 1..n {
                let v = lu[i * n + k].modulus();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || best <= 1e-300 || (scale > 0.0 && best <= scale * 1e-15 * f64::EPSILON) {
                return Err(Error::Degenerate("singular matrix in LU".into()));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Lu { n, lu, piv, sign })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        if b.len() != n {
            return Err(Error::Invalid("right-hand side length mismatch".into()));
        }
        let mut x: Vec<T> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Solves `xᵀ A = bᵀ` (no conjugation).
    pub fn solve_transpose(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        // Aᵀ = Uᵀ Lᵀ P
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![T::zero(); n];
        for (k, &p) in self.piv.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }

    pub fn det(&self) -> T {
        let mut d = T::from_f64(self.sign);
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        d
    }

    pub fn inverse(&self) -> Result<Mat<T>> {
        let n = self.n;
        let mut inv = Mat::zeros(n, n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// Unconjugated product `aᵀ b`.
pub fn dotu<T: Field>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Conjugated product `āᵀ b`.
pub fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |s, (x, y)| s + x.conj() * y)
}

pub fn norm2<T: Field>(a: &[T]) -> f64 {
    libm::sqrt(a.iter().map(|v| v.modulus() * v.modulus()).sum::<f64>())
}

pub fn norm_inf<T: Field>(a: &[T]) -> f64 {
    a.iter().map(|v| v.modulus()).fold(0.0, f64::max)
}

pub fn axpy<T: Field>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled<T: Field>(alpha: T, x: &[T]) -> Vec<T> {
    x.iter().map(|&v| alpha * v).collect()
}

pub fn sub<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn add<T: Field>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn conj_vec(a: &[C64]) -> Vec<C64> {
    a.iter().map(|v| v.conj()).collect()
}

pub fn to_complex(a: &[f64]) -> Vec<C64> {
    a.iter().map(|&v| C64::new(v, 0.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::c;

    #[test]
    fn lu_solves_and_transposes() {
        let a = CMat::from_rows(&[
            &[c(2.0, 1.0), c(0.5, 0.0), c(0.0, -1.0)],
            &[c(1.0, 0.0), c(-3.0, 0.2), c(1.0, 1.0)],
            &[c(0.0, 2.0), c(1.0, 0.0), c(4.0, 0.0)],
        ]);
        let b = [c(1.0, 0.0), c(0.0, 1.0), c(2.0, -1.0)];
        let lu = a.lu().unwrap();
        let x = lu.solve(&b).unwrap();
        let r = sub(&a.mul_vec(&x), &b);
        assert!(norm2(&r) < 1e-14);
        let y = lu.solve_transpose(&b).unwrap();
        let r = sub(&a.vec_mul(&y), &b);
        assert!(norm2(&r) < 1e-14);
        let det = a.det();
        let inv = a.inverse().unwrap();
        let id = a.matmul(&inv);
        assert!(id.sub(&CMat::identity(3)).norm_fro() < 1e-14);
        assert!(det.norm() > 1.0);
    }

    #[test]
    fn singular_is_reported() {
        let a = RMat::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(a.lu().is_err());
        assert!(a.cond1().is_infinite());
    }
}
