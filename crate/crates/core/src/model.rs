//! Model interface and the three built-in example systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::poly::{IndexSet, Poly};
use crate::scalar::Scalar;

/// Right-hand side `ẋ = F(x(t), x(t−τ₁), …, x(t−τ_m), α)` with `α ∈ ℝ²`.
///
/// `states[0]` is the current state, `states[j]` the state delayed by `delays()[j-1]`.
pub trait VectorField {
    fn dim(&self) -> usize;

    /// Strictly positive delays in ascending order; empty for ODEs.
    fn delays(&self) -> &[f64] {
        &[]
    }

    fn eval<S: Scalar>(&self, states: &[&[S]], params: &[S]) -> Result<Vec<S>>;

    fn is_dde(&self) -> bool {
        !self.delays().is_empty()
    }
}

impl<M: VectorField + ?Sized> VectorField for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn delays(&self) -> &[f64] {
        (**self).delays()
    }
    fn eval<S: Scalar>(&self, states: &[&[S]], params: &[S]) -> Result<Vec<S>> {
        (**self).eval(states, params)
    }
}

/// Evaluates at a constant history `x(t−τ) = x`.
pub fn eval_steady<M: VectorField>(model: &M, x: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let m = model.delays().len();
    let states: Vec<&[f64]> = (0..=m).map(|_| x).collect();
    let out = model.eval(&states, alpha)?;
    check_finite(&out)?;
    Ok(out)
}

pub fn check_finite<S: Scalar>(v: &[S]) -> Result<()> {
    if v.iter().all(|s| s.is_finite()) {
        Ok(())
    } else {
        Err(Error::Evaluation("non-finite model output".into()))
    }
}

/// Partial Jacobians `M_j = D_{1,j}F` for j = 0..m and `J₁ = D₂F` at a steady state.
pub fn linearize<M: VectorField>(model: &M, x: &[f64], alpha: &[f64]) -> Result<(Vec<RMat>, RMat)> {
    let n = model.dim();
    let m = model.delays().len();
    let nv = n * (m + 1) + 2;
    let set = IndexSet::total_degree(nv, 1);
    let states: Vec<Vec<Poly<f64>>> = (0..=m)
        .map(|j| (0..n).map(|i| Poly::variable(&set, x[i], j * n + i)).collect())
        .collect();
    let params: Vec<Poly<f64>> = (0..2).map(|k| Poly::variable(&set, alpha[k], n * (m + 1) + k)).collect();
    let refs: Vec<&[Poly<f64>]> = states.iter().map(|v| v.as_slice()).collect();
    let out = model.eval(&refs, &params)?;
    check_finite(&out)?;
    let mut e = vec![0u8; nv];
    let mut coef = |v: usize, p: &Poly<f64>| {
        e[v] = 1;
        let r = p.coeff(&e);
        e[v] = 0;
        r
    };
    let mut ms = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut mj = RMat::zeros(n, n);
        for r in 0..n {
            for cidx in 0..n {
                mj[(r, cidx)] = coef(j * n + cidx, &out[r]);
            }
        }
        ms.push(mj);
    }
    let mut j1 = RMat::zeros(n, 2);
    for r in 0..n {
        for k in 0..2 {
            j1[(r, k)] = coef(n * (m + 1) + k, &out[r]);
        }
    }
    Ok((ms, j1))
}

/// Jacobian `A = Σ_j M_j` of the steady-state map.
pub fn steady_jacobian<M: VectorField>(model: &M, x: &[f64], alpha: &[f64]) -> Result<RMat> {
    let (ms, _) = linearize(model, x, alpha)?;
    let mut a = ms[0].clone();
    for mj in &ms[1..] {
        a = a.add(mj);
    }
    Ok(a)
}

/// Newton solve of `F(x, x, …, x, α) = 0` from `x_guess`.
pub fn equilibrium<M: VectorField>(model: &M, x_guess: &[f64], alpha: &[f64]) -> Result<Vec<f64>> {
    let mut x = x_guess.to_vec();
    for _ in 0..50 {
        let f = eval_steady(model, &x, alpha)?;
        let a = steady_jacobian(model, &x, alpha)?;
        let dx = a.solve(&f)?;
        let mut step = 0.0f64;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
            step = step.max(di.abs());
        }
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if step <= 1e-14 * scale {
            return Ok(x);
        }
    }
    let f = eval_steady(model, &x, alpha)?;
    if f.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-10 {
        Ok(x)
    } else {
        Err(Error::Convergence("equilibrium Newton iteration".into()))
    }
}

/// Bazykin–Khibnik predator–prey model, parameters `(m, n)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BazykinKhibnik;

impl VectorField for BazykinKhibnik {
    fn dim(&self) -> usize {
        2
    }
    fn eval<S: Scalar>(&self, states: &[&[S]], p: &[S]) -> Result<Vec<S>> {
        let (x, y) = (states[0][0].clone(), states[0][1].clone());
        let (m, n) = (p[0].clone(), p[1].clone());
        let one = S::from_f64(1.0);
        let dx = x.clone() * x.clone() * (one - x.clone()) / (n + x.clone()) - x.clone() * y.clone();
        let dy = -(y * (m - x));
        Ok(vec![dx, dy])
    }
}

/// Extended Lorenz-84 model with parameters `(F, T)`.
#[derive(Debug, Clone, Copy)]
pub struct Lorenz84 {
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
    pub delta: f64,
    pub gamma: f64,
}

impl Default for Lorenz84 {
    fn default() -> Self {
        Lorenz84 { alpha: 0.25, beta: 1.0, g: 0.25, delta: 1.04, gamma: 0.987 }
    }
}

impl VectorField for Lorenz84 {
    fn dim(&self) -> usize {
        4
    }
    fn eval<S: Scalar>(&self, states: &[&[S]], p: &[S]) -> Result<Vec<S>> {
        let s = states[0];
        let (x, y, z, u) = (s[0].clone(), s[1].clone(), s[2].clone(), s[3].clone());
        let (f, t) = (p[0].clone(), p[1].clone());
        let k = S::from_f64;
        let dx = -(y.clone() * y.clone()) - z.clone() * z.clone() - k(self.alpha) * x.clone()
            + k(self.alpha) * f
            - k(self.gamma) * u.clone() * u.clone();
        let dy = x.clone() * y.clone() - k(self.beta) * x.clone() * z.clone() - y.clone() + k(self.g);
        let dz = k(self.beta) * x.clone() * y + x.clone() * z.clone() - z;
        let du = -(k(self.delta) * u.clone()) + k(self.gamma) * u * x + t;
        Ok(vec![dx, dy, dz, du])
    }
}

/// FitzHugh–Nagumo neuron with delayed tanh self-coupling, parameters `(β, α)`.
#[derive(Debug, Clone)]
pub struct FhnDde {
    pub b: f64,
    pub eps: f64,
    pub c: f64,
    pub d: f64,
    delays: [f64; 1],
}

impl FhnDde {
    pub fn new(b: f64, eps: f64, c: f64, d: f64, tau: f64) -> Self {
        FhnDde { b, eps, c, d, delays: [tau] }
    }

    pub fn tau(&self) -> f64 {
        self.delays[0]
    }
}

impl Default for FhnDde {
    fn default() -> Self {
        FhnDde::new(0.9, 0.08, 2.0528, -3.2135, 1.7722)
    }
}

impl VectorField for FhnDde {
    fn dim(&self) -> usize {
        2
    }
    fn delays(&self) -> &[f64] {
        &self.delays
    }
    fn eval<S: Scalar>(&self, states: &[&[S]], p: &[S]) -> Result<Vec<S>> {
        let (u1, u2) = (states[0][0].clone(), states[0][1].clone());
        let u1d = states[1][0].clone();
        let (beta, alpha) = (p[0].clone(), p[1].clone());
        let k = S::from_f64;
        let du1 = -(k(1.0 / 3.0) * u1.powi(3)) + (k(self.c) + alpha) * u1.powi(2) + k(self.d) * u1.clone() - u2.clone()
            + k(2.0) * beta * u1d.tanh();
        let du2 = k(self.eps) * (u1 - k(self.b) * u2);
        Ok(vec![du1, du2])
    }
}

/// An ODE viewed as a DDE with one extra delay that the right-hand side ignores.
#[derive(Debug, Clone)]
pub struct WithIdleDelay<M> {
    pub inner: M,
    delays: [f64; 1],
}

impl<M> WithIdleDelay<M> {
    pub fn new(inner: M, tau: f64) -> Self {
        WithIdleDelay { inner, delays: [tau] }
    }
}

impl<M: VectorField> VectorField for WithIdleDelay<M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn delays(&self) -> &[f64] {
        &self.delays
    }
    fn eval<S: Scalar>(&self, states: &[&[S]], params: &[S]) -> Result<Vec<S>> {
        let n = self.inner.delays().len();
        self.inner.eval(&states[..=n], params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bazykin_equilibrium_and_jacobian() {
        let f = eval_steady(&BazykinKhibnik, &[0.25, 0.5], &[0.25, 0.125]).unwrap();
        assert!(f.iter().all(|v| v.abs() < 1e-15));
        let a = steady_jacobian(&BazykinKhibnik, &[0.25, 0.5], &[0.25, 0.125]).unwrap();
        // trace zero at the Hopf point, det = ω0² = 1/8
        assert!((a[(0, 0)] + a[(1, 1)]).abs() < 1e-15);
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        assert!((det - 0.125).abs() < 1e-15);
    }

    #[test]
    fn lorenz_at_origin() {
        let l = Lorenz84::default();
        let f = eval_steady(&l, &[0.0; 4], &[0.0, 0.0]).unwrap();
        assert_eq!(f, vec![0.0, 0.25, 0.0, 0.0]);
        let f = eval_steady(&l, &[0.0; 4], &[2.0, 0.5]).unwrap();
        assert_eq!(f, vec![0.5, 0.25, 0.0, 0.5]);
    }

    #[test]
    fn fhn_linearization() {
        let m = FhnDde::default();
        let (ms, j1) = linearize(&m, &[0.0, 0.0], &[1.9, -1.0429]).unwrap();
        assert_eq!(ms.len(), 2);
        assert!((ms[0][(0, 0)] - m.d).abs() < 1e-15);
        assert!((ms[1][(0, 0)] - 3.8).abs() < 1e-15);
        assert_eq!(j1[(0, 0)], 0.0);
    }
}
