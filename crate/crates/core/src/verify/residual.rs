use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::model::{check_finite, VectorField};
use crate::normal_form::{Coeff, Tables};
use crate::predictor::PredictorSample;

/// Trigonometric interpolant of samples at `ψ_j = 2πj/N`.
struct Fourier {
    /// `(k, c_k)` for `|k| ≤ K`.
    coeffs: Vec<(i32, Vec<C64>)>,
}

impl Fourier {
    fn new(samples: &[Vec<f64>]) -> Result<Self> {
        let n = samples.len();
        let dim = samples[0].len();
        let kmax = ((n - 1) / 2) as i32;
        let mut coeffs = Vec::new();
        for k in -kmax..=kmax {
            let mut ck = alloc::vec![c(0.0, 0.0); dim];
            for (j, x) in samples.iter().enumerate() {
                let e = C64::from_polar(1.0 / n as f64, -2.0 * PI * (k as f64) * (j as f64) / n as f64);
                for (a, b) in ck.iter_mut().zip(x) {
                    *a += e * b;
                }
            }
            coeffs.push((k, ck));
        }
        let energy = |f: &dyn Fn(i32) -> bool| -> f64 {
            coeffs.iter().filter(|(k, _)| f(*k)).flat_map(|(_, v)| v.iter()).map(|z| z.norm_sqr()).sum()
        };
        let total = energy(&|k| k != 0);
        let top = energy(&|k| 2 * k.abs() > kmax);
        if n < 8 || top > 1e-20 * total.max(1e-300) {
            return Err(Error::Invalid(alloc::format!(
                "psi grid of {n} points is too coarse for the orbit (upper-band energy {:.3e})",
                libm::sqrt(top / total.max(1e-300))
            )));
        }
        Ok(Fourier { coeffs })
    }

    /// Value and `d/dψ` at `ψ`.
    fn eval(&self, psi: f64) -> (Vec<f64>, Vec<f64>) {
        let dim = self.coeffs[0].1.len();
        let (mut x, mut dx) = (alloc::vec![0.0; dim], alloc::vec![0.0; dim]);
        for (k, ck) in &self.coeffs {
            let e = C64::from_polar(1.0, *k as f64 * psi);
            for i in 0..dim {
                let z = ck[i] * e;
                x[i] += z.re;
                dx[i] += (z * c(0.0, *k as f64)).re;
            }
        }
        (x, dx)
    }
}

/// Sup over a fine time grid of `‖ẋ(t) − F(x(t), x(t − τ₁), …, α)‖` for the `T`-periodic
/// interpolant of a predicted orbit.
pub fn dde_residual<M: VectorField>(model: &M, sample: &PredictorSample) -> Result<f64> {
    let mut pts: Vec<Vec<f64>> = sample.orbit.clone();
    let psi = &sample.psi;
    if psi.len() != pts.len() || psi.len() < 3 {
        return Err(Error::Invalid("orbit and psi grid lengths differ".into()));
    }
    if (psi[psi.len() - 1] - 2.0 * PI).abs() < 1e-12 {
        pts.pop();
    }
    let n = pts.len();
    for (j, p) in psi.iter().take(n).enumerate() {
        if (p - 2.0 * PI * j as f64 / n as f64).abs() > 1e-9 {
            return Err(Error::Invalid("dde_residual needs a uniform psi grid".into()));
        }
    }
    let f = Fourier::new(&pts)?;
    let t = sample.period;
    let w = 2.0 * PI / t;
    let lags = model.delays();
    let fine = 4 * n;
    let mut worst = 0.0f64;
    for i in 0..fine {
        let ti = t * i as f64 / fine as f64;
        let (x, dx) = f.eval(w * ti);
        let mut states = alloc::vec![x];
        for tau in lags {
            states.push(f.eval(w * (ti - tau)).0);
        }
        let refs: Vec<&[f64]> = states.iter().map(|v| v.as_slice()).collect();
        let rhs = model.eval(&refs, &sample.alpha)?;
        check_finite(&rhs)?;
        let r: f64 = rhs.iter().zip(&dx).map(|(a, d)| (w * d - a) * (w * d - a)).sum();
        worst = worst.max(libm::sqrt(r));
    }
    Ok(worst)
}

/// `‖D_wH·G + D_w̄H·Ḡ − F(x₀ + H, α₀ + K)‖` at `(w, β)` for the computed truncations; for DDEs
/// the `θ = 0` component, with delayed states taken from `H(−τ_j)`.
pub fn homological_residual<M: VectorField, V: Coeff>(
    model: &M,
    x0: &[f64],
    alpha0: [f64; 2],
    tables: &Tables<V>,
    w: C64,
    beta: [f64; 2],
) -> Result<f64> {
    let n = x0.len();
    let wb = w.conj();
    let mono = |i: &[u8; 4], dn: u8, dm: u8| -> C64 {
        let (a, b) = (i[0] as i32 - dn as i32, i[1] as i32 - dm as i32);
        if a < 0 || b < 0 {
            return c(0.0, 0.0);
        }
        w.powi(a) * wb.powi(b) * libm::pow(beta[0], i[2] as f64) * libm::pow(beta[1], i[3] as f64)
    };
    let mut g = c(0.0, 0.0);
    for (i, gi) in &tables.g {
        g += gi * mono(i, 0, 0);
    }
    let mut lhs = alloc::vec![c(0.0, 0.0); n];
    let mut states: Vec<Vec<f64>> = Vec::new();
    let thetas: Vec<f64> = core::iter::once(0.0).chain(model.delays().iter().map(|t| -t)).collect();
    for &theta in &thetas {
        let mut x: Vec<C64> = x0.iter().map(|v| c(*v, 0.0)).collect();
        for (i, h) in &tables.h {
            let hv = h.value_at(theta);
            let m = mono(i, 0, 0);
            for (a, b) in x.iter_mut().zip(&hv) {
                *a += m * b;
            }
            if theta == 0.0 {
                let d = mono(i, 1, 0) * i[0] as f64 * g + mono(i, 0, 1) * i[1] as f64 * g.conj();
                for (a, b) in lhs.iter_mut().zip(&hv) {
                    *a += d * b;
                }
            }
        }
        states.push(x.iter().map(|z| z.re).collect());
    }
    let mut alpha = alpha0;
    for (mu, k) in &tables.k {
        let m = libm::pow(beta[0], mu[0] as f64) * libm::pow(beta[1], mu[1] as f64);
        alpha[0] += k[0] * m;
        alpha[1] += k[1] * m;
    }
    let refs: Vec<&[f64]> = states.iter().map(|v| v.as_slice()).collect();
    let rhs = model.eval(&refs, &alpha)?;
    check_finite(&rhs)?;
    Ok(libm::sqrt(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()))
}
