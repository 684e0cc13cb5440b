//! Dormand–Prince 5(4) integration of ODE models with the variational equation.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::model::{check_finite, VectorField};
use crate::poly::{IndexSet, Poly};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-11, atol: 1e-13, max_steps: 200_000 }
    }
}

/// End state of a flow, with the fundamental matrix when requested.
#[derive(Debug, Clone)]
pub struct Flow {
    pub x: Vec<f64>,
    pub fundamental: Option<RMat>,
    /// Accepted `(t, x)` pairs, starting with the initial state.
    pub trajectory: Vec<(f64, Vec<f64>)>,
    pub steps: usize,
}

/// `F(·, α)` and its state Jacobian for an ODE model.
pub struct OdeRhs<'a, M> {
    model: &'a M,
    alpha: [f64; 2],
    set: Arc<IndexSet>,
}

impl<'a, M: VectorField> OdeRhs<'a, M> {
    pub fn new(model: &'a M, alpha: [f64; 2]) -> Result<Self> {
        if model.is_dde() {
            return Err(Error::Invalid("the integrator handles ODE models only".into()));
        }
        Ok(OdeRhs { model, alpha, set: IndexSet::total_degree(model.dim(), 1) })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let out = self.model.eval(&[x], &self.alpha)?;
        check_finite(&out)?;
        Ok(out)
    }

    pub fn eval_with_jacobian(&self, x: &[f64]) -> Result<(Vec<f64>, RMat)> {
        let n = x.len();
        let xs: Vec<Poly<f64>> = (0..n).map(|i| Poly::variable(&self.set, x[i], i)).collect();
        let params = [Poly::constant(self.alpha[0]), Poly::constant(self.alpha[1])];
        let out = self.model.eval(&[&xs], &params)?;
        check_finite(&out)?;
        let mut a = RMat::zeros(n, n);
        let mut f = Vec::with_capacity(n);
        for (r, p) in out.iter().enumerate() {
            f.push(p.value());
            for j in 0..n {
                let pos = self.set.variable(j).expect("degree-one set has every variable");
                a[(r, j)] = p.coeffs().get(pos).copied().unwrap_or(0.0);
            }
        }
        Ok((f, a))
    }

    /// Right-hand side of the state, or of state and fundamental matrix (row-major).
    fn augmented(&self, y: &[f64], n: usize, variational: bool) -> Result<Vec<f64>> {
        if !variational {
            return self.eval(y);
        }
        let (f, a) = self.eval_with_jacobian(&y[..n])?;
        let mut out = f;
        out.resize(n + n * n, 0.0);
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += a[(i, k)] * y[n + k * n + j];
                }
                out[n + i * n + j] = s;
            }
        }
        Ok(out)
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `ẋ = F(x, α)` from `t = 0` to `t_end`.
pub fn integrate<M: VectorField>(
    model: &M,
    x0: &[f64],
    alpha: [f64; 2],
    t_end: f64,
    with_variational: bool,
    tol: Tolerances,
) -> Result<Flow> {
    let rhs = OdeRhs::new(model, alpha)?;
    let n = model.dim();
    if x0.len() != n {
        return Err(Error::Invalid(alloc::format!("state has length {}, model dimension is {n}", x0.len())));
    }
    let mut y = x0.to_vec();
    if with_variational {
        y.resize(n + n * n, 0.0);
        for i in 0..n {
            y[n + i * n + i] = 1.0;
        }
    }
    let dim = y.len();
    let dir = if t_end < 0.0 { -1.0 } else { 1.0 };
    let span = t_end.abs();
    let mut traj = alloc::vec![(0.0, x0.to_vec())];
    if span == 0.0 {
        return Ok(Flow { x: x0.to_vec(), fundamental: with_variational.then(|| RMat::identity(n)), trajectory: traj, steps: 0 });
    }
    let mut k: [Vec<f64>; 7] = Default::default();
    k[0] = rhs.augmented(&y, n, with_variational)?;
    let scale0 = y.iter().fold(0.0f64, |m, v| m.max(v.abs())) + tol.atol;
    let f0 = k[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut h = (0.01 * scale0 / f0.max(1e-300)).min(span).min(libm::pow(tol.rtol, 0.2) * span);
    let mut t = 0.0;
    let mut steps = 0;
    let mut tmp = alloc::vec![0.0; dim];
    let mut ynew = alloc::vec![0.0; dim];
    while t < span {
        if steps >= tol.max_steps {
            return Err(Error::Convergence("integrator step limit reached".into()));
        }
        let last = t + h >= span;
        if last {
            h = span - t;
        }
        for s in 1..7 {
            for i in 0..dim {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                tmp[i] = y[i] + dir * h * acc;
            }
            k[s] = rhs.augmented(&tmp, n, with_variational)?;
            if s == 6 {
                ynew.copy_from_slice(&tmp);
            }
        }
        let mut err = 0.0;
        for i in 0..dim {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            let sc = tol.atol + tol.rtol * y[i].abs().max(ynew[i].abs());
            let r = h * e / sc;
            err += r * r;
        }
        let err = libm::sqrt(err / dim as f64);
        if !err.is_finite() {
            return Err(Error::Evaluation("non-finite state during integration".into()));
        }
        if err <= 1.0 {
            t = if last { span } else { t + h };
            core::mem::swap(&mut y, &mut ynew);
            k[0] = k[6].clone();
            steps += 1;
            traj.push((dir * t, y[..n].to_vec()));
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
        h *= if err <= 1.0 { fac } else { fac.min(1.0) };
        if h < 1e-14 * span.max(1.0) {
            return Err(Error::Convergence("integrator step size underflow".into()));
        }
    }
    let fundamental = with_variational.then(|| RMat::from_fn(n, n, |i, j| y[n + i * n + j]));
    Ok(Flow { x: y[..n].to_vec(), fundamental, trajectory: traj, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use core::f64::consts::PI;

    struct Harmonic;
    impl VectorField for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn eval<S: Scalar>(&self, s: &[&[S]], _p: &[S]) -> Result<Vec<S>> {
            Ok(alloc::vec![s[0][1].clone(), -s[0][0].clone()])
        }
    }

    #[test]
    fn harmonic_period() {
        let f = integrate(&Harmonic, &[1.0, 0.5], [0.0; 2], 2.0 * PI, true, Tolerances::default()).unwrap();
        assert!((f.x[0] - 1.0).abs() < 1e-9 && (f.x[1] - 0.5).abs() < 1e-9);
        let m = f.fundamental.unwrap();
        assert!(m.sub(&RMat::identity(2)).norm_fro() < 1e-9);
        let q = integrate(&Harmonic, &[1.0, 0.0], [0.0; 2], PI / 2.0, true, Tolerances::default()).unwrap();
        let m = q.fundamental.unwrap();
        let rot = RMat::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(m.sub(&rot).norm_fro() < 1e-9);
    }
}
