//! Truncated multivariate power series over a downward-closed monomial set.
//!
//! A [`Poly`] stores one coefficient per monomial of its [`IndexSet`]. Products and
//! elementary functions are truncated to the set, which is exact because every
//! divisor of a member is itself a member.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::field::Field;

/// Downward-closed set of exponent vectors, sorted by total degree.
#[derive(Debug)]
pub struct IndexSet {
    nvars: usize,
    exps: Vec<u8>,
    degree: Vec<u32>,
    lookup: BTreeMap<Vec<u8>, usize>,
    /// For each monomial `i`, all `(j, k)` with `e_j + e_k = e_i`.
    pairs: Vec<Vec<(u32, u32)>>,
}

impl IndexSet {
    /// All monomials in `nvars` variables of total degree at most `degree`.
    pub fn total_degree(nvars: usize, degree: usize) -> Arc<Self> {
        let mut gens = Vec::new();
        let mut cur = vec![0u8; nvars];
        fn rec(v: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
            if v == cur.len() {
                out.push(cur.clone());
                return;
            }
            for e in 0..=left {
                cur[v] = e as u8;
                rec(v + 1, left - e, cur, out);
            }
            cur[v] = 0;
        }
        rec(0, degree, &mut cur, &mut gens);
        Self::from_members(nvars, gens)
    }

    /// Smallest downward-closed set containing `generators`.
    pub fn downward_closure(nvars: usize, generators: &[Vec<u8>]) -> Arc<Self> {
        let mut all = BTreeMap::new();
        for g in generators {
            assert_eq!(g.len(), nvars);
            let mut cur = vec![0u8; nvars];
            fn rec(v: usize, g: &[u8], cur: &mut Vec<u8>, all: &mut BTreeMap<Vec<u8>, ()>) {
                if v == g.len() {
                    all.insert(cur.clone(), ());
                    return;
                }
                for e in 0..=g[v] {
                    cur[v] = e;
                    rec(v + 1, g, cur, all);
                }
                cur[v] = 0;
            }
            rec(0, g, &mut cur, &mut all);
        }
        if all.is_empty() {
            all.insert(vec![0u8; nvars], ());
        }
        Self::from_members(nvars, all.into_keys().collect())
    }

    fn from_members(nvars: usize, mut members: Vec<Vec<u8>>) -> Arc<Self> {
        members.sort_by(|a, b| {
            let da: u32 = a.iter().map(|&e| e as u32).sum();
            let db: u32 = b.iter().map(|&e| e as u32).sum();
            da.cmp(&db).then_with(|| b.cmp(a))
        });
        let mut exps = Vec::with_capacity(members.len() * nvars);
        let mut degree = Vec::with_capacity(members.len());
        let mut lookup = BTreeMap::new();
        for (i, m) in members.iter().enumerate() {
            exps.extend_from_slice(m);
            degree.push(m.iter().map(|&e| e as u32).sum());
            lookup.insert(m.clone(), i);
        }
        let mut pairs = Vec::with_capacity(members.len());
        let mut j = vec![0u8; nvars];
        let mut k = vec![0u8; nvars];
        for m in &members {
            let mut list = Vec::new();
            // enumerate all j <= m
            j.iter_mut().for_each(|e| *e = 0);
            loop {
                for v in 0..nvars {
                    k[v] = m[v] - j[v];
                }
                if let (Some(&a), Some(&b)) = (lookup.get(&j), lookup.get(&k)) {
                    list.push((a as u32, b as u32));
                }
                let mut v = 0;
                while v < nvars {
                    if j[v] < m[v] {
                        j[v] += 1;
                        break;
                    }
                    j[v] = 0;
                    v += 1;
                }
                if v == nvars {
                    break;
                }
            }
            pairs.push(list);
        }
        Arc::new(IndexSet { nvars, exps, degree, lookup, pairs })
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn exponent(&self, i: usize) -> &[u8] {
        &self.exps[i * self.nvars..(i + 1) * self.nvars]
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.degree[i]
    }

    pub fn max_degree(&self) -> u32 {
        self.degree.last().copied().unwrap_or(0)
    }

    pub fn position(&self, e: &[u8]) -> Option<usize> {
        self.lookup.get(e).copied()
    }

    /// Index of the monomial consisting of the single variable `v`, if present.
    pub fn variable(&self, v: usize) -> Option<usize> {
        let mut e = vec![0u8; self.nvars];
        e[v] = 1;
        self.position(&e)
    }

    pub fn pairs(&self, i: usize) -> &[(u32, u32)] {
        &self.pairs[i]
    }
}

/// Truncated series; `set == None` marks a plain constant.
#[derive(Debug, Clone)]
pub struct Poly<T> {
    set: Option<Arc<IndexSet>>,
    c: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn constant(v: T) -> Self {
        Poly { set: None, c: vec![v] }
    }

    pub fn zero_on(set: &Arc<IndexSet>) -> Self {
        Poly { set: Some(set.clone()), c: vec![T::zero(); set.len()] }
    }

    pub fn from_coeffs(set: &Arc<IndexSet>, c: Vec<T>) -> Self {
        assert_eq!(c.len(), set.len());
        Poly { set: Some(set.clone()), c }
    }

    /// The series `value + x_var`.
    pub fn variable(set: &Arc<IndexSet>, value: T, var: usize) -> Self {
        let mut p = Self::zero_on(set);
        p.c[0] = value;
        if let Some(i) = set.variable(var) {
            p.c[i] = T::one();
        }
        p
    }

    pub fn set(&self) -> Option<&Arc<IndexSet>> {
        self.set.as_ref()
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.c
    }

    pub fn coeff(&self, e: &[u8]) -> T {
        match &self.set {
            None => {
                if e.iter().all(|&x| x == 0) {
                    self.c[0]
                } else {
                    T::zero()
                }
            }
            Some(s) => s.position(e).map(|i| self.c[i]).unwrap_or_else(T::zero),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    fn broadcast(&self, set: &Arc<IndexSet>) -> Vec<T> {
        match &self.set {
            Some(_) => self.c.clone(),
            None => {
                let mut v = vec![T::zero(); set.len()];
                v[0] = self.c[0];
                v
            }
        }
    }

    fn joint(&self, other: &Self) -> Option<Arc<IndexSet>> {
        match (&self.set, &other.set) {
            (Some(a), Some(b)) => {
                debug_assert!(Arc::ptr_eq(a, b) || a.len() == b.len(), "mixing series over different index sets");
                Some(a.clone())
            }
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    fn map_unary(&self, f0: T, rec: impl FnOnce(&IndexSet, &[T], &mut Vec<T>)) -> Self {
        match &self.set {
            None => Poly::constant(f0),
            Some(s) => {
                let mut out = vec![T::zero(); s.len()];
                out[0] = f0;
                rec(s, &self.c, &mut out);
                Poly { set: Some(s.clone()), c: out }
            }
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Poly { set: self.set.clone(), c: self.c.iter().map(|&v| v * k).collect() }
    }

    pub fn exp(&self) -> Self {
        let a0 = self.c[0];
        self.map_unary(a0.exp(), |s, a, f| {
            for i in 1..s.len() {
                let mut acc = T::zero();
                for &(j, k) in s.pairs(i) {
                    let dk = s.degree_of(k as usize);
                    if dk != 0 {
                        acc += a[k as usize] * f[j as usize] * (dk as f64);
                    }
                }
                f[i] = acc * (1.0 / s.degree_of(i) as f64);
            }
        })
    }

    pub fn ln(&self) -> Self {
        let a0 = self.c[0];
        self.map_unary(a0.ln(), |s, a, f| {
            for i in 1..s.len() {
                let di = s.degree_of(i) as f64;
                let mut acc = a[i] * di;
                for &(j, k) in s.pairs(i) {
                    let (j, k) = (j as usize, k as usize);
                    let dj = s.degree_of(j);
                    if dj != 0 && k != 0 {
                        acc -= a[k] * f[j] * (dj as f64);
                    }
                }
                f[i] = acc / (a0 * di);
            }
        })
    }

    pub fn sin_cos(&self) -> (Self, Self) {
        let a0 = self.c[0];
        match &self.set {
            None => (Poly::constant(a0.sin()), Poly::constant(a0.cos())),
            Some(set) => {
                let n = set.len();
                let mut s = vec![T::zero(); n];
                let mut co = vec![T::zero(); n];
                s[0] = a0.sin();
                co[0] = a0.cos();
                for i in 1..n {
                    let mut as_ = T::zero();
                    let mut ac = T::zero();
                    for &(j, k) in set.pairs(i) {
                        let dk = set.degree_of(k as usize);
                        if dk != 0 {
                            let w = self.c[k as usize] * (dk as f64);
                            as_ += w * co[j as usize];
                            ac -= w * s[j as usize];
                        }
                    }
                    let inv = 1.0 / set.degree_of(i) as f64;
                    s[i] = as_ * inv;
                    co[i] = ac * inv;
                }
                (Poly { set: Some(set.clone()), c: s }, Poly { set: Some(set.clone()), c: co })
            }
        }
    }

    pub fn sin(&self) -> Self {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Self {
        self.sin_cos().1
    }

    pub fn tanh(&self) -> Self {
        let a0 = self.c[0];
        self.map_unary(a0.tanh(), |s, a, t| {
            let n = s.len();
            // u = 1 - t^2, filled in degree order alongside t
            let mut u = vec![T::zero(); n];
            u[0] = T::one() - t[0] * t[0];
            for i in 1..n {
                let mut acc = T::zero();
                for &(j, k) in s.pairs(i) {
                    let dk = s.degree_of(k as usize);
                    if dk != 0 {
                        acc += a[k as usize] * u[j as usize] * (dk as f64);
                    }
                }
                t[i] = acc * (1.0 / s.degree_of(i) as f64);
                let mut sq = T::zero();
                for &(p, q) in s.pairs(i) {
                    sq += t[p as usize] * t[q as usize];
                }
                u[i] = -sq;
            }
        })
    }

    pub fn sqrt(&self) -> Self {
        let a0 = self.c[0];
        let s0 = a0.sqrt();
        self.map_unary(s0, |s, a, r| {
            for i in 1..s.len() {
                let mut acc = a[i];
                for &(p, q) in s.pairs(i) {
                    if p != 0 && q != 0 {
                        acc -= r[p as usize] * r[q as usize];
                    }
                }
                r[i] = acc / (s0 * 2.0);
            }
        })
    }

    pub fn powf(&self, r: f64) -> Self {
        let a0 = self.c[0];
        self.map_unary(a0.powf(r), |s, a, f| {
            for i in 1..s.len() {
                let mut acc = T::zero();
                for &(j, k) in s.pairs(i) {
                    let dk = s.degree_of(k as usize);
                    if dk != 0 {
                        let dj = s.degree_of(j as usize) as f64;
                        acc += a[k as usize] * f[j as usize] * (r * dk as f64 - dj);
                    }
                }
                f[i] = acc / (a0 * s.degree_of(i) as f64);
            }
        })
    }

    pub fn powi(&self, n: i32) -> Self {
        if n < 0 {
            return Poly::constant(T::one()).div_ref(&self.powi(-n));
        }
        let mut result = Poly::constant(T::one());
        let mut base = self.clone();
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        result
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        match self.joint(o) {
            None => Poly::constant(self.c[0] + o.c[0]),
            Some(s) => {
                let mut a = self.broadcast(&s);
                if o.set.is_some() {
                    for (x, &y) in a.iter_mut().zip(&o.c) {
                        *x += y;
                    }
                } else {
                    a[0] += o.c[0];
                }
                Poly { set: Some(s), c: a }
            }
        }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    pub fn neg_ref(&self) -> Self {
        Poly { set: self.set.clone(), c: self.c.iter().map(|&v| -v).collect() }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        match (&self.set, &o.set) {
            (None, _) => o.scale(self.c[0]),
            (_, None) => self.scale(o.c[0]),
            (Some(s), Some(_)) => {
                let n = s.len();
                let mut out = vec![T::zero(); n];
                for (i, slot) in out.iter_mut().enumerate() {
                    let mut acc = T::zero();
                    for &(j, k) in s.pairs(i) {
                        acc += self.c[j as usize] * o.c[k as usize];
                    }
                    *slot = acc;
                }
                Poly { set: Some(s.clone()), c: out }
            }
        }
    }

    pub fn div_ref(&self, b: &Self) -> Self {
        match (&self.set, &b.set) {
            (_, None) => self.scale(T::one() / b.c[0]),
            (_, Some(s)) => {
                let a = self.broadcast(s);
                let b0 = b.c[0];
                let mut q = vec![T::zero(); s.len()];
                for i in 0..s.len() {
                    let mut acc = a[i];
                    for &(j, k) in s.pairs(i) {
                        if k != 0 {
                            acc -= b.c[k as usize] * q[j as usize];
                        }
                    }
                    q[i] = acc / b0;
                }
                Poly { set: Some(s.clone()), c: q }
            }
        }
    }
}

macro_rules! poly_binop {
    ($tr:ident, $f:ident, $imp:ident) => {
        impl<T: Field> $tr for Poly<T> {
            type Output = Poly<T>;
            fn $f(self, o: Poly<T>) -> Poly<T> {
                self.$imp(&o)
            }
        }
        impl<'a, T: Field> $tr<&'a Poly<T>> for &'a Poly<T> {
            type Output = Poly<T>;
            fn $f(self, o: &Poly<T>) -> Poly<T> {
                self.$imp(o)
            }
        }
    };
}

poly_binop!(Add, add, add_ref);
poly_binop!(Sub, sub, sub_ref);
poly_binop!(Mul, mul, mul_ref);
poly_binop!(Div, div, div_ref);

impl<T: Field> Neg for Poly<T> {
    type Output = Poly<T>;
    fn neg(self) -> Poly<T> {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{c, C64};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn univariate_elementary_series() {
        let s = IndexSet::total_degree(1, 6);
        let x = Poly::<f64>::variable(&s, 0.0, 0);
        let e = x.exp();
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];
        for k in 0..=6u8 {
            assert!(close(e.coeff(&[k]), 1.0 / fact[k as usize], 1e-15));
        }
        let sn = x.sin();
        assert!(close(sn.coeff(&[3]), -1.0 / 6.0, 1e-15));
        assert!(close(sn.coeff(&[5]), 1.0 / 120.0, 1e-15));
        let th = x.tanh();
        // tanh x = x - x^3/3 + 2x^5/15
        assert!(close(th.coeff(&[3]), -1.0 / 3.0, 1e-15));
        assert!(close(th.coeff(&[5]), 2.0 / 15.0, 1e-15));
        let one = Poly::constant(1.0);
        let l = (&one + &x).ln();
        assert!(close(l.coeff(&[4]), -0.25, 1e-15));
        let sq = (&one + &x).sqrt();
        // (1+x)^{1/2}: 1, 1/2, -1/8, 1/16, -5/128
        assert!(close(sq.coeff(&[3]), 1.0 / 16.0, 1e-15));
        assert!(close(sq.coeff(&[4]), -5.0 / 128.0, 1e-15));
        let p = (&one + &x).powf(-0.5);
        assert!(close(p.coeff(&[2]), 3.0 / 8.0, 1e-15));
        let q = one.div_ref(&(&one - &x));
        for k in 0..=6u8 {
            assert!(close(q.coeff(&[k]), 1.0, 1e-15));
        }
    }

    #[test]
    fn bivariate_product_and_division_roundtrip() {
        let s = IndexSet::total_degree(2, 5);
        let x = Poly::<C64>::variable(&s, c(0.3, 0.1), 0);
        let y = Poly::<C64>::variable(&s, c(-0.2, 0.5), 1);
        let z = &(&x * &y).exp() + &x.powi(3);
        let back = &(&z * &y) / &y;
        for (a, b) in back.coeffs().iter().zip(z.coeffs()) {
            assert!((a - b).norm() < 1e-13);
        }
        let (sn, cs) = x.add_ref(&y).sin_cos();
        let one = &(&sn * &sn) + &(&cs * &cs);
        assert!((one.value() - c(1.0, 0.0)).norm() < 1e-14);
        for v in &one.coeffs()[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn closure_is_downward_closed() {
        let s = IndexSet::downward_closure(4, &[vec![2, 1, 1, 1], vec![4, 3, 0, 0]]);
        for i in 0..s.len() {
            let e = s.exponent(i).to_vec();
            for v in 0..4 {
                if e[v] > 0 {
                    let mut d = e.clone();
                    d[v] -= 1;
                    assert!(s.position(&d).is_some());
                }
            }
        }
        assert_eq!(s.len(), 3 * 2 * 2 * 2 + 5 * 4 - 3 * 2);
    }
}
