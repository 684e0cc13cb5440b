//! First- and higher-order predictors for the fold-of-cycles (LPC) curve
//! emanating from a generalized Hopf point.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::ghode::CriticalCoeffs;
use crate::ghode_params::ParamCoeffs;
use crate::normal_form::{required_set, Coeff, Idx, Mu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    First,
    Higher,
}

impl Order {
    pub fn name(self) -> &'static str {
        match self {
            Order::First => "first",
            Order::Higher => "higher",
        }
    }
}

/// LPC parameters `(β₁, β₂)` at amplitude `ε`.
pub fn beta_of_eps(d2: f64, d3: f64, a3201: f64, eps: f64, order: Order) -> [f64; 2] {
    let e2 = eps * eps;
    let e4 = e2 * e2;
    match order {
        Order::First => [d2 * e4, -2.0 * d2 * e2],
        Order::Higher => [
            d2 * e4 + 2.0 * (d3 - a3201 * d2) * e4 * e2,
            -2.0 * d2 * e2 + (4.0 * a3201 * d2 - 3.0 * d3) * e4,
        ],
    }
}

/// `dβ/dε`.
pub fn beta_tangent(d2: f64, d3: f64, a3201: f64, eps: f64, order: Order) -> [f64; 2] {
    let e = eps;
    let e3 = e * e * e;
    match order {
        Order::First => [4.0 * d2 * e3, -4.0 * d2 * e],
        Order::Higher => [
            4.0 * d2 * e3 + 12.0 * (d3 - a3201 * d2) * e3 * e * e,
            -4.0 * d2 * e + 4.0 * (4.0 * a3201 * d2 - 3.0 * d3) * e3,
        ],
    }
}

/// The coefficient data a predictor needs, with history functions evaluated at `θ = 0`.
#[derive(Debug, Clone)]
pub struct Predictor {
    pub x0: Vec<f64>,
    pub alpha0: [f64; 2],
    pub omega0: f64,
    pub c1: C64,
    pub c2: C64,
    pub d2: f64,
    pub d3: f64,
    pub a3201: f64,
    pub b1: BTreeMap<Mu, f64>,
    pub b2: BTreeMap<Mu, f64>,
    /// Normalized `K_μ`.
    pub k: BTreeMap<Mu, [f64; 2]>,
    /// Raw center-manifold coefficients (multiplying `w^n w̄^m β₁^k β₂^l`).
    pub h: BTreeMap<Idx, Vec<C64>>,
}

/// One point of a predicted LPC branch.
#[derive(Debug, Clone)]
pub struct PredictorSample {
    pub eps: f64,
    pub beta: [f64; 2],
    pub alpha: [f64; 2],
    /// `dα/dε`, the predicted tangent of the branch in parameter space.
    pub alpha_tangent: [f64; 2],
    pub period: f64,
    pub period_tangent: f64,
    /// `d/dε` of the first orbit point.
    pub x0_tangent: Vec<f64>,
    pub psi: Vec<f64>,
    pub orbit: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct PredictorCurve {
    pub order: Order,
    pub eps_grid: Vec<f64>,
    pub samples: Vec<PredictorSample>,
}

pub const DEFAULT_PSI_POINTS: usize = 64;

/// `n` uniform points on `[0, 2π]`, both ends included.
pub fn psi_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|j| 2.0 * PI * j as f64 / (n - 1) as f64).collect()
}

/// `count` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return alloc::vec![lo];
    }
    let (a, b) = (libm::log(lo), libm::log(hi));
    let mut g: Vec<f64> = (0..count).map(|j| libm::exp(a + (b - a) * j as f64 / (count - 1) as f64)).collect();
    g[0] = lo;
    g[count - 1] = hi;
    g
}

impl Predictor {
    pub fn new<V: Coeff>(x0: &[f64], alpha0: [f64; 2], crit: &CriticalCoeffs<V>, pc: &ParamCoeffs<V>) -> Result<Self> {
        let a3201 = pc.a3201.ok_or_else(|| Error::Incomplete("a3201".into()))?;
        let h = pc.tables.h.iter().map(|(i, v)| (*i, v.value0())).collect();
        Ok(Predictor {
            x0: x0.to_vec(),
            alpha0,
            omega0: crit.omega0,
            c1: crit.c1,
            c2: crit.c2,
            d2: crit.d2,
            d3: crit.d3,
            a3201,
            b1: pc.b1.clone(),
            b2: pc.b2.clone(),
            k: pc.k.clone(),
            h,
        })
    }

    fn b1(&self, mu: Mu) -> Result<f64> {
        self.b1.get(&mu).copied().ok_or_else(|| Error::Incomplete(format!("b1,{}{}", mu[0], mu[1])))
    }

    fn kmu(&self, mu: Mu) -> Result<[f64; 2]> {
        self.k.get(&mu).copied().ok_or_else(|| Error::Incomplete(format!("K{}{}", mu[0], mu[1])))
    }

    pub fn beta(&self, eps: f64, order: Order) -> [f64; 2] {
        beta_of_eps(self.d2, self.d3, self.a3201, eps, order)
    }

    /// `K(β)`: linear for the first-order predictor, through `K₀₃` otherwise.
    pub fn k_of_beta(&self, beta: [f64; 2], order: Order) -> Result<[f64; 2]> {
        let [b1, b2] = beta;
        let mut terms = alloc::vec![([1, 0], b1), ([0, 1], b2)];
        if order == Order::Higher {
            terms.extend([([0, 2], 0.5 * b2 * b2), ([1, 1], b1 * b2), ([0, 3], b2 * b2 * b2 / 6.0)]);
        }
        let mut out = [0.0; 2];
        for (mu, w) in terms {
            let k = self.kmu(mu)?;
            out[0] += w * k[0];
            out[1] += w * k[1];
        }
        Ok(out)
    }

    pub fn alpha(&self, eps: f64, order: Order) -> Result<[f64; 2]> {
        let k = self.k_of_beta(self.beta(eps, order), order)?;
        Ok([self.alpha0[0] + k[0], self.alpha0[1] + k[1]])
    }

    pub fn alpha_tangent(&self, eps: f64, order: Order) -> Result<[f64; 2]> {
        let [b1, b2] = self.beta(eps, order);
        let [db1, db2] = beta_tangent(self.d2, self.d3, self.a3201, eps, order);
        let mut terms = alloc::vec![([1, 0], db1), ([0, 1], db2)];
        if order == Order::Higher {
            terms.extend([([0, 2], b2 * db2), ([1, 1], db1 * b2 + b1 * db2), ([0, 3], 0.5 * b2 * b2 * db2)]);
        }
        let mut out = [0.0; 2];
        for (mu, w) in terms {
            let k = self.kmu(mu)?;
            out[0] += w * k[0];
            out[1] += w * k[1];
        }
        Ok(out)
    }

    /// Period along the LPC curve; the first-order version stops at `ε²`.
    pub fn period(&self, eps: f64, order: Order) -> Result<f64> {
        let (d2, d3, a) = (self.d2, self.d3, self.a3201);
        let e2 = eps * eps;
        let mut den = self.omega0 + (self.c1.im - 2.0 * d2 * self.b1([0, 1])?) * e2;
        if order == Order::Higher {
            let b2_01 = self.b2.get(&[0, 1]).copied().ok_or_else(|| Error::Incomplete("b2,01".into()))?;
            let q = d2 * self.b1([1, 0])? + (4.0 * a * d2 - 3.0 * d3) * self.b1([0, 1])? + 2.0 * d2 * d2 * self.b1([0, 2])?
                - 2.0 * d2 * b2_01
                + self.c2.im;
            den += q * e2 * e2;
        }
        if !(den > 0.0) {
            return Err(Error::Invalid(format!("eps = {eps} too large: period denominator {den:.3e} is not positive")));
        }
        Ok(2.0 * PI / den)
    }

    /// `dT/dε`.
    pub fn period_tangent(&self, eps: f64, order: Order) -> Result<f64> {
        let t = self.period(eps, order)?;
        let (d2, d3, a) = (self.d2, self.d3, self.a3201);
        let mut dden = 2.0 * (self.c1.im - 2.0 * d2 * self.b1([0, 1])?) * eps;
        if order == Order::Higher {
            let b2_01 = self.b2.get(&[0, 1]).copied().ok_or_else(|| Error::Incomplete("b2,01".into()))?;
            let q = d2 * self.b1([1, 0])? + (4.0 * a * d2 - 3.0 * d3) * self.b1([0, 1])? + 2.0 * d2 * d2 * self.b1([0, 2])?
                - 2.0 * d2 * b2_01
                + self.c2.im;
            dden += 4.0 * q * eps * eps * eps;
        }
        Ok(-t * t * dden / (2.0 * PI))
    }

    /// `d/dε` of the orbit point at phase `psi`.
    pub fn orbit_tangent(&self, eps: f64, psi: f64, order: Order) -> Result<Vec<f64>> {
        let beta = self.beta(eps, order);
        let db = beta_tangent(self.d2, self.d3, self.a3201, eps, order);
        let pw = |x: f64, k: i32| if k < 0 { 0.0 } else { libm::pow(x, k as f64) };
        let mut out = alloc::vec![0.0; self.x0.len()];
        for i in Self::orbit_indices(order) {
            let h = self.h.get(&i).ok_or_else(|| Error::Incomplete(format!("H{}{}{}{}", i[0], i[1], i[2], i[3])))?;
            let (nm, k, l) = ((i[0] + i[1]) as i32, i[2] as i32, i[3] as i32);
            let rot = C64::from_polar(1.0, (i[0] as f64 - i[1] as f64) * psi);
            let bmu = pw(beta[0], k) * pw(beta[1], l);
            let dbmu = k as f64 * pw(beta[0], k - 1) * pw(beta[1], l) * db[0]
                + l as f64 * pw(beta[0], k) * pw(beta[1], l - 1) * db[1];
            let m = rot * (nm as f64 * pw(eps, nm - 1) * bmu + pw(eps, nm) * dbmu);
            for (o, hi) in out.iter_mut().zip(h) {
                *o += (m * hi).re;
            }
        }
        Ok(out)
    }

    /// Indices of `H` included in the orbit approximation.
    pub fn orbit_indices(order: Order) -> Vec<Idx> {
        match order {
            Order::Higher => required_set().into_iter().collect(),
            Order::First => required_set()
                .into_iter()
                .filter(|i| {
                    let nm = i[0] + i[1];
                    let mu = [i[2], i[3]];
                    (mu == [0, 0] && nm <= 3) || ((mu == [1, 0] || mu == [0, 1]) && nm <= 1)
                })
                .collect(),
        }
    }

    /// `x₀ + H(w, w̄, β)` before taking the real part.
    pub fn orbit_point_complex(&self, w: C64, beta: [f64; 2], order: Order) -> Result<Vec<C64>> {
        let mut x: Vec<C64> = self.x0.iter().map(|v| c(*v, 0.0)).collect();
        let wb = w.conj();
        for i in Self::orbit_indices(order) {
            let h = self.h.get(&i).ok_or_else(|| Error::Incomplete(format!("H{}{}{}{}", i[0], i[1], i[2], i[3])))?;
            let m = w.powu(i[0] as u32)
                * wb.powu(i[1] as u32)
                * libm::pow(beta[0], i[2] as f64)
                * libm::pow(beta[1], i[3] as f64);
            for (xi, hi) in x.iter_mut().zip(h) {
                *xi += m * hi;
            }
        }
        Ok(x)
    }

    pub fn orbit(&self, eps: f64, psi: &[f64], order: Order) -> Result<Vec<Vec<f64>>> {
        let beta = self.beta(eps, order);
        psi.iter()
            .map(|&p| {
                let w = C64::from_polar(eps, p);
                Ok(self.orbit_point_complex(w, beta, order)?.iter().map(|z| z.re).collect())
            })
            .collect()
    }

    pub fn sample(&self, eps: f64, psi: &[f64], order: Order) -> Result<PredictorSample> {
        Ok(PredictorSample {
            eps,
            beta: self.beta(eps, order),
            alpha: self.alpha(eps, order)?,
            alpha_tangent: self.alpha_tangent(eps, order)?,
            period: self.period(eps, order)?,
            period_tangent: self.period_tangent(eps, order)?,
            x0_tangent: self.orbit_tangent(eps, psi.first().copied().unwrap_or(0.0), order)?,
            psi: psi.to_vec(),
            orbit: self.orbit(eps, psi, order)?,
        })
    }

    pub fn predict(&self, eps_grid: &[f64], psi_points: usize, order: Order) -> Result<PredictorCurve> {
        let psi = psi_grid(psi_points);
        let samples = eps_grid.iter().map(|&e| self.sample(e, &psi, order)).collect::<Result<Vec<_>>>()?;
        Ok(PredictorCurve { order, eps_grid: eps_grid.to_vec(), samples })
    }
}
