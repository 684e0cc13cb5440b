//! Discrete delay equations `ẋ(t) = f(x(t), x(t−τ₁), …, x(t−τ_m), α)`.
//!
//! Center-manifold coefficients are functions on `[−h, 0]`; every one produced
//! here is an exponential polynomial, so they are stored symbolically as
//! [`HistoryFn`] values and all integrals are done in closed form.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::ghode::{critical_stage, with_nonlinearity, CriticalCoeffs};
use crate::ghode_params::{param_stage, ParamCoeffs, HIGHER, LINEAR};
use crate::jets::{multilinear, MultilinearQuery};
use crate::linalg::{dotu, norm2, scaled, CMat, Lu, RMat};
use crate::linode::{gh_newton, phase_fix, GhResidual};
use crate::model::{equilibrium, linearize, VectorField};
use crate::normal_form::{Backend, Coeff, Derivatives, SeriesComposition};

/// `e^{λθ} Σ_k c_k θ^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub rate: C64,
    pub coeffs: Vec<Vec<C64>>,
}

/// A function on `[−h, 0]` given as a finite sum of exponential polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryFn {
    pub dim: usize,
    pub terms: Vec<ExpPoly>,
}

fn same_rate(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm())
}

impl HistoryFn {
    pub fn zero(dim: usize) -> Self {
        HistoryFn { dim, terms: Vec::new() }
    }

    pub fn exp_poly(rate: C64, coeffs: Vec<Vec<C64>>) -> Self {
        let dim = coeffs.first().map(|v| v.len()).unwrap_or(0);
        HistoryFn { dim, terms: vec![ExpPoly { rate, coeffs }] }
    }

    /// `e^{λθ} v`.
    pub fn exponential(rate: C64, v: Vec<C64>) -> Self {
        Self::exp_poly(rate, vec![v])
    }

    pub fn eval(&self, theta: f64) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); self.dim];
        for t in &self.terms {
            let e = (t.rate * theta).exp();
            let mut pw = e;
            for ck in &t.coeffs {
                for (o, x) in out.iter_mut().zip(ck) {
                    *o += pw * x;
                }
                pw *= theta;
            }
        }
        out
    }

    /// Termwise derivative in `θ`.
    pub fn derivative(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let deg = t.coeffs.len();
                let coeffs = (0..deg)
                    .map(|k| {
                        let mut v = scaled(t.rate, &t.coeffs[k]);
                        if k + 1 < deg {
                            for (a, b) in v.iter_mut().zip(&t.coeffs[k + 1]) {
                                *a += b * (k as f64 + 1.0);
                            }
                        }
                        v
                    })
                    .collect();
                ExpPoly { rate: t.rate, coeffs }
            })
            .collect();
        HistoryFn { dim: self.dim, terms }
    }

    /// `self += a·x`.
    pub fn add_scaled(&mut self, a: C64, x: &HistoryFn) {
        if self.dim == 0 {
            self.dim = x.dim;
        }
        for t in &x.terms {
            let pos = self.terms.iter().position(|s| same_rate(s.rate, t.rate));
            let dst = match pos {
                Some(i) => &mut self.terms[i],
                None => {
                    self.terms.push(ExpPoly { rate: t.rate, coeffs: Vec::new() });
                    self.terms.last_mut().unwrap()
                }
            };
            while dst.coeffs.len() < t.coeffs.len() {
                dst.coeffs.push(vec![c(0.0, 0.0); x.dim]);
            }
            for (d, s) in dst.coeffs.iter_mut().zip(&t.coeffs) {
                for (u, v) in d.iter_mut().zip(s) {
                    *u += a * v;
                }
            }
        }
    }

    pub fn scale_c(&self, a: C64) -> Self {
        let mut out = HistoryFn::zero(self.dim);
        out.add_scaled(a, self);
        out
    }

    pub fn conj(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpPoly { rate: t.rate.conj(), coeffs: t.coeffs.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect() })
            .collect();
        HistoryFn { dim: self.dim, terms }
    }

    /// Polynomial coefficients of the term with rate `rate` (empty if absent).
    pub fn part(&self, rate: C64) -> &[Vec<C64>] {
        self.terms.iter().find(|t| same_rate(t.rate, rate)).map(|t| t.coeffs.as_slice()).unwrap_or(&[])
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.coeffs.len().saturating_sub(1)).max().unwrap_or(0)
    }

    /// Values at `θ = 0, −τ₁, …, −τ_m`, stacked.
    pub fn sample(&self, delays: &[f64]) -> Vec<C64> {
        let mut out = self.eval(0.0);
        for &t in delays {
            out.extend(self.eval(-t));
        }
        out
    }
}

impl Coeff for HistoryFn {
    fn scale(&self, s: f64) -> Self {
        self.scale_c(c(s, 0.0))
    }
    fn value0(&self) -> Vec<C64> {
        self.eval(0.0)
    }
    fn value_at(&self, theta: f64) -> Vec<C64> {
        self.eval(theta)
    }
}

/// `Δ(z) = zI − Σ_j M_j e^{−zτ_j}` with `τ₀ = 0`.
#[derive(Debug, Clone)]
pub struct CharMatrix {
    pub m: Vec<RMat>,
    /// `τ₀ = 0, τ₁, …, τ_m`.
    pub delays: Vec<f64>,
}

impl CharMatrix {
    pub fn new(m: Vec<RMat>, delays: &[f64]) -> Result<Self> {
        if m.len() != delays.len() + 1 {
            return Err(Error::Invalid("one matrix per delay plus the undelayed one".into()));
        }
        let mut d = vec![0.0];
        d.extend_from_slice(delays);
        Ok(CharMatrix { m, delays: d })
    }

    /// Linearization of `model` at a steady state.
    pub fn from_model<M: VectorField>(model: &M, x0: &[f64], alpha0: [f64; 2]) -> Result<Self> {
        let (ms, _) = linearize(model, x0, &alpha0)?;
        CharMatrix::new(ms, model.delays())
    }

    pub fn dim(&self) -> usize {
        self.m[0].rows
    }

    /// Extra delays only.
    pub fn lags(&self) -> &[f64] {
        &self.delays[1..]
    }
}

/// `Δ⁽ᵏ⁾(z)`.
pub fn delta(ch: &CharMatrix, z: C64, k: usize) -> CMat {
    let n = ch.dim();
    let mut out = match k {
        0 => CMat::identity(n).scale(z),
        1 => CMat::identity(n),
        _ => CMat::zeros(n, n),
    };
    for (mj, &tau) in ch.m.iter().zip(&ch.delays) {
        let e = (-z * tau).exp();
        let w = match k {
            0 => -e,
            _ => {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                e * (sign * libm::pow(tau, k as f64))
            }
        };
        if w == c(0.0, 0.0) {
            continue;
        }
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += w * mj[(i, j)];
            }
        }
    }
    out
}

/// Newton on `det Δ(z) = 0` from `z0`, using `det′/det = tr(Δ⁻¹Δ′)`.
pub fn char_root(ch: &CharMatrix, z0: C64) -> Result<C64> {
    let mut z = z0;
    for _ in 0..60 {
        let lu = Lu::new(&delta(ch, z, 0)).map_err(|_| Error::Eigen("Δ(z) singular during root search".into()))?;
        let dd = delta(ch, z, 1);
        let n = ch.dim();
        let mut tr = c(0.0, 0.0);
        for j in 0..n {
            let col: Vec<C64> = (0..n).map(|i| dd[(i, j)]).collect();
            tr += lu.solve(&col)?[j];
        }
        if tr.norm() == 0.0 || !tr.is_finite() {
            return Err(Error::Eigen("characteristic Newton step undefined".into()));
        }
        let step = c(1.0, 0.0) / tr;
        z -= step;
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Ok(z);
        }
    }
    // Newton with an exactly singular Δ lands here with a tiny step
    let d = delta(ch, z, 0);
    if d.cond1() > 1e12 {
        Ok(z)
    } else {
        Err(Error::Eigen(format!("no characteristic root found near {}{:+}i", z0.re, z0.im)))
    }
}

/// Null vectors `(q, p)` of `Δ(λ)`: `Δq = 0`, `pᵀΔ = 0`, `q̄ᵀq = 1`, `pᵀΔ′(λ)q = 1`, phase-fixed `q`.
pub(crate) fn char_vectors(ch: &CharMatrix, lam: C64) -> Result<(Vec<C64>, Vec<C64>)> {
    let d = delta(ch, lam, 0);
    let mut q = null_vec(&d)?;
    q = scaled(phase_fix(&q), &q);
    let nq = norm2(&q);
    q = scaled(c(1.0 / nq, 0.0), &q);
    let p0 = null_vec(&d.transpose())?;
    let s = dotu(&p0, &delta(ch, lam, 1).mul_vec(&q));
    if s.norm() < 1e-10 * norm2(&p0) {
        return Err(Error::Degenerate("characteristic root is not simple (pᵀΔ′q ≈ 0)".into()));
    }
    let p = scaled(c(1.0, 0.0) / s, &p0);
    Ok((q, p))
}

fn null_vec(m: &CMat) -> Result<Vec<C64>> {
    let n = m.rows;
    let shift = c(1e-10 * m.norm1().max(1e-300), 0.0);
    let lu = Lu::new(&m.add(&CMat::identity(n).scale(shift)))?;
    let mut v: Vec<C64> = (0..n).map(|i| c(1.0, 0.1 * (i as f64 + 1.0))).collect();
    for _ in 0..3 {
        v = lu.solve(&v)?;
        let nv = norm2(&v);
        v = scaled(c(1.0 / nv, 0.0), &v);
    }
    Ok(v)
}

/// `(ω₀, q, p)` for the simple root `iω₀` nearest `i·omega_guess`.
pub fn dde_eigenpair(ch: &CharMatrix, omega_guess: f64) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let z = char_root(ch, c(0.0, omega_guess))?;
    let scale = 1.0 + ch.m.iter().map(|m| m.norm1()).sum::<f64>();
    if z.re.abs() > 1e-6 * scale {
        return Err(Error::Eigen(format!("root {}{:+}i is not on the imaginary axis", z.re, z.im)));
    }
    if z.im <= 0.0 {
        return Err(Error::Eigen("root found has nonpositive frequency".into()));
    }
    let (q, p) = char_vectors(ch, c(0.0, z.im))?;
    Ok((z.im, q, p))
}

/// Equilibrium data at a generalized Hopf point of a DDE.
#[derive(Debug, Clone)]
pub struct GHPointDDE {
    pub x0: Vec<f64>,
    pub alpha0: [f64; 2],
    pub omega0: f64,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub char: CharMatrix,
}

impl GHPointDDE {
    pub fn new<M: VectorField>(model: &M, x0: Vec<f64>, alpha0: [f64; 2], omega_guess: f64) -> Result<Self> {
        let ch = CharMatrix::from_model(model, &x0, alpha0)?;
        let (omega0, q, p) = dde_eigenpair(&ch, omega_guess)?;
        Ok(GHPointDDE { x0, alpha0, omega0, q, p, char: ch })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// `φ(θ) = e^{iω₀θ} q`.
    pub fn phi(&self) -> HistoryFn {
        HistoryFn::exponential(c(0.0, self.omega0), self.q.clone())
    }

    pub fn rotated(&self, theta: f64) -> Self {
        let r = C64::from_polar(1.0, theta);
        // pᵀΔ′q = 1 is kept by rotating p the opposite way
        GHPointDDE { q: scaled(r, &self.q), p: scaled(r.conj(), &self.p), ..self.clone() }
    }
}

/// `Δ(λ)v₀` right-hand side of the sun-star resolvent for `(w₀, e^{λθ}Σξ_kθ^k)`.
fn bracket(ch: &CharMatrix, lam: C64, w0: &[C64], xi: &[Vec<C64>]) -> Vec<C64> {
    let mut b = w0.to_vec();
    for (k, x) in xi.iter().enumerate() {
        let dk = delta(ch, lam, k + 1).mul_vec(x);
        for (bi, di) in b.iter_mut().zip(dk) {
            *bi += di / (k as f64 + 1.0);
        }
    }
    b
}

/// `v(θ) = e^{λθ}(v₀ − Σ ξ_k θ^{k+1}/(k+1))`.
fn assemble(lam: C64, v0: Vec<C64>, xi: &[Vec<C64>]) -> HistoryFn {
    let n = v0.len();
    let mut coeffs = vec![v0];
    for (k, x) in xi.iter().enumerate() {
        coeffs.push(scaled(c(-1.0 / (k as f64 + 1.0), 0.0), x));
    }
    let mut h = HistoryFn::exp_poly(lam, coeffs);
    h.dim = n;
    h
}

/// Resonance guard for `Δ(λ)`.
fn check_char_resonance(ch: &CharMatrix, lam: C64, d: &CMat) -> Result<()> {
    let cond = d.cond1();
    if !(cond < 1e10) {
        let root = char_root(ch, lam).unwrap_or(lam);
        return Err(Error::Resonance { shift: (lam.re, lam.im), eigenvalue: (root.re, root.im) });
    }
    Ok(())
}

/// Solves `(λ − A^{⊙*}) v = ℓw₀ + jψ`, `ψ(θ) = e^{λθ}Σ ξ_k θ^k`, for `λ` off the spectrum.
pub fn resolvent_case(ch: &CharMatrix, lam: C64, w0: &[C64], xi: &[Vec<C64>]) -> Result<HistoryFn> {
    let d = delta(ch, lam, 0);
    check_char_resonance(ch, lam, &d)?;
    let v0 = d.solve(&bracket(ch, lam, w0, xi))?;
    Ok(assemble(lam, v0, xi))
}

/// Bordered inverse at the critical root, for the rhs `ℓw₀ + jψ` with `ψ(θ) = e^{iω₀θ}Σξ_kθ^k`
/// (`ℓ` puts a vector in the first component, `j` embeds a history function).
///
/// The result is normalized so that its pairing with the adjoint eigenfunction
/// vanishes. With `checked`, rhs violating the solvability condition are rejected.
pub fn bordered_inv_dde(gh: &GHPointDDE, w0: &[C64], xi: &[Vec<C64>], checked: bool) -> Result<HistoryFn> {
    DdeBackend::new(gh)?.bordered(w0, xi, checked)
}

/// `⟨ψ, v⟩` with `ψ(s) = p e^{−iω₀s}` the adjoint eigenfunction, integrated exactly.
pub fn pairing(gh: &GHPointDDE, v: &HistoryFn) -> C64 {
    let ch = &gh.char;
    let lam = c(0.0, gh.omega0);
    let mut s = dotu(&gh.p, &v.eval(0.0));
    for (mj, &tau) in ch.m.iter().zip(&ch.delays).skip(1) {
        let pm = mj.to_complex().vec_mul(&gh.p);
        let e = (-lam * tau).exp();
        for t in &v.terms {
            let a = t.rate - lam;
            for (k, ck) in t.coeffs.iter().enumerate() {
                s += e * dotu(&pm, ck) * moment(a, k, tau);
            }
        }
    }
    s
}

/// `∫_{−τ}^0 σ^k e^{aσ} dσ`.
pub fn moment(a: C64, k: usize, tau: f64) -> C64 {
    if (a * tau).norm() < 0.5 {
        // Σ_n a^n/n! ∫ σ^{k+n}
        let mut s = c(0.0, 0.0);
        let mut an = c(1.0, 0.0);
        for n in 0..60 {
            let p = (k + n + 1) as f64;
            let int = -libm::pow(-tau, p) / p;
            let term = an * int;
            s += term;
            if term.norm() < 1e-18 * s.norm().max(1e-300) && n > 2 {
                break;
            }
            an = an * a / (n as f64 + 1.0);
        }
        s
    } else {
        // I_k = [σ^k e^{aσ}/a]_{−τ}^0 − (k/a) I_{k−1}
        let e = (-a * tau).exp();
        let mut ik = (c(1.0, 0.0) - e) / a;
        for j in 1..=k {
            let boundary = -(e * libm::pow(-tau, j as f64)) / a;
            ik = boundary - ik * (j as f64) / a;
        }
        ik
    }
}

/// DDE side of the homological equation.
pub struct DdeBackend {
    ch: CharMatrix,
    omega0: f64,
    q: Vec<C64>,
    p: Vec<C64>,
    bordered: Lu<C64>,
}

impl DdeBackend {
    pub fn new(gh: &GHPointDDE) -> Result<Self> {
        let n = gh.dim();
        let d = delta(&gh.char, c(0.0, gh.omega0), 0);
        let mut m = CMat::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = d[(i, j)];
            }
            m[(i, n)] = gh.q[i];
            m[(n, i)] = gh.p[i];
        }
        let bordered = Lu::new(&m).map_err(|_| Error::Degenerate("bordered characteristic matrix is singular".into()))?;
        Ok(DdeBackend { ch: gh.char.clone(), omega0: gh.omega0, q: gh.q.clone(), p: gh.p.clone(), bordered })
    }

    fn bordered(&self, w0: &[C64], xi: &[Vec<C64>], checked: bool) -> Result<HistoryFn> {
        let lam = c(0.0, self.omega0);
        let b = bracket(&self.ch, lam, w0, xi);
        let kappa = dotu(&self.p, &b);
        if checked && kappa.norm() > 1e-9 * (norm2(&b) + 1e-300) {
            return Err(Error::Invalid(format!("right-hand side violates the solvability condition ({:.3e})", kappa.norm())));
        }
        // subtract ⟨φ^⊙, rhs⟩ jφ
        let mut xi = xi.to_vec();
        if xi.is_empty() {
            xi.push(vec![c(0.0, 0.0); self.q.len()]);
        }
        for (x, qi) in xi[0].iter_mut().zip(&self.q) {
            *x -= kappa * qi;
        }
        let xi = &xi[..];
        let b = bracket(&self.ch, lam, w0, xi);
        let mut rhs = b;
        rhs.push(c(0.0, 0.0));
        let mut x = self.bordered.solve(&rhs)?;
        x.pop();
        let mut gamma = -dotu(&self.p, &delta(&self.ch, lam, 1).mul_vec(&x));
        for (k, xk) in xi.iter().enumerate() {
            let dk = delta(&self.ch, lam, k + 2).mul_vec(xk);
            gamma += dotu(&self.p, &dk) / ((k as f64 + 1.0) * (k as f64 + 2.0));
        }
        for (xi_, qi) in x.iter_mut().zip(&self.q) {
            *xi_ += gamma * qi;
        }
        Ok(assemble(lam, x, xi))
    }
}

impl Backend for DdeBackend {
    type Val = HistoryFn;

    fn omega0(&self) -> f64 {
        self.omega0
    }
    fn phi(&self) -> HistoryFn {
        HistoryFn::exponential(c(0.0, self.omega0), self.q.clone())
    }
    fn zero(&self, _rate: C64) -> HistoryFn {
        HistoryFn::zero(self.q.len())
    }
    fn conj(&self, v: &HistoryFn) -> HistoryFn {
        v.conj()
    }
    fn axpy(&self, a: C64, x: &HistoryFn, y: &mut HistoryFn) {
        y.add_scaled(a, x)
    }
    fn sample(&self, v: &HistoryFn) -> Vec<C64> {
        v.sample(self.ch.lags())
    }
    fn size(&self, eta: &[C64], f: &HistoryFn) -> f64 {
        norm2(eta) + f.terms.iter().flat_map(|t| t.coeffs.iter()).map(|v| norm2(v)).sum::<f64>()
    }
    fn fredholm(&self, lam: C64, eta: &[C64], f: &HistoryFn) -> C64 {
        dotu(&self.p, &bracket(&self.ch, lam, eta, f.part(lam)))
    }
    fn solve_regular(&self, lam: C64, eta: &[C64], f: &HistoryFn) -> Result<HistoryFn> {
        resolvent_case(&self.ch, lam, eta, f.part(lam))
    }
    fn solve_bordered(&self, _lam: C64, eta: &[C64], f: &HistoryFn) -> Result<HistoryFn> {
        self.bordered(eta, f.part(c(0.0, self.omega0)), false)
    }
}

/// `D₁ʳD₂ˢf[u₁..u_r; v₁..v_s]` with history-function state directions.
pub fn dde_multilinear<M: VectorField>(
    model: &M,
    gh: &GHPointDDE,
    state_dirs: &[HistoryFn],
    param_dirs: &[[f64; 2]],
) -> Result<Vec<C64>> {
    let lags = gh.char.lags();
    let y0: Vec<f64> = (0..=lags.len()).flat_map(|_| gh.x0.iter().copied()).collect();
    let sd = state_dirs.iter().map(|h| h.sample(lags)).collect();
    multilinear(model, &y0, &gh.alpha0, &MultilinearQuery::new(sd, param_dirs.to_vec()))
}

/// Critical and parameter-dependent coefficients of a DDE.
pub fn dde_coeffs<M: VectorField>(
    model: &M,
    gh: &GHPointDDE,
) -> Result<(CriticalCoeffs<HistoryFn>, ParamCoeffs<HistoryFn>)> {
    dde_coeffs_with(model, gh, Derivatives::Exact)
}

pub fn dde_coeffs_with<M: VectorField>(
    model: &M,
    gh: &GHPointDDE,
    d: Derivatives,
) -> Result<(CriticalCoeffs<HistoryFn>, ParamCoeffs<HistoryFn>)> {
    let backend = DdeBackend::new(gh)?;
    with_nonlinearity(model, &gh.x0, gh.alpha0, d, |nl| {
        let crit = critical_stage(&backend, nl, 7)?;
        let lin = param_stage(&backend, nl, &crit, None, LINEAR)?;
        let full = param_stage(&backend, nl, &crit, Some(&lin), HIGHER)?;
        Ok((crit, full))
    })
}

/// Critical coefficients only.
pub fn dde_critical_coeffs<M: VectorField>(model: &M, gh: &GHPointDDE) -> Result<CriticalCoeffs<HistoryFn>> {
    let backend = DdeBackend::new(gh)?;
    with_nonlinearity(model, &gh.x0, gh.alpha0, Derivatives::Exact, |nl| critical_stage(&backend, nl, 7))
}

/// Outcome of [`refine_gh_dde`].
#[derive(Debug, Clone)]
pub struct RefinedDde {
    pub point: GHPointDDE,
    pub iterations: usize,
    pub residual: f64,
}

/// Generalized Hopf point of a DDE near the guess; see [`crate::linode::refine_gh`].
pub fn refine_gh_dde<M: VectorField>(
    model: &M,
    x_guess: &[f64],
    alpha_guess: [f64; 2],
    omega_guess: f64,
) -> Result<RefinedDde> {
    let eval = |x0: &[f64], alpha: [f64; 2], lam0: C64| -> Result<GhResidual> {
        let x = equilibrium(model, x0, &alpha)?;
        let ch = CharMatrix::from_model(model, &x, alpha)?;
        let lam = char_root(&ch, lam0)?;
        if lam.im <= 0.0 {
            return Err(Error::Eigen("lost track of the critical root".into()));
        }
        let (q, p) = char_vectors(&ch, lam)?;
        let gh = GHPointDDE { x0: x.clone(), alpha0: alpha, omega0: lam.im, q, p, char: ch };
        let backend = DdeBackend::new(&gh)?;
        let nl = SeriesComposition::new(model, &x, alpha);
        let l1 = critical_stage(&backend, &nl, 3)?.l1;
        Ok(GhResidual { x, lam, r: [lam.re, l1] })
    };
    let (st, alpha, iterations) = gh_newton(x_guess, alpha_guess, c(0.0, omega_guess), eval)?;
    let residual = libm::hypot(st.r[0], st.r[1]);
    let point = GHPointDDE::new(model, st.x, alpha, st.lam.im)?;
    Ok(RefinedDde { point, iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ghode::critical_coeffs;
    use crate::ghode_params::param_coeffs;
    use crate::linode::GHPointODE;
    use crate::model::{steady_jacobian, BazykinKhibnik, FhnDde, WithIdleDelay};

    fn scalar(k: f64, tau: f64) -> CharMatrix {
        CharMatrix::new(vec![RMat::zeros(1, 1), RMat::from_rows(&[&[-k]])], &[tau]).unwrap()
    }

    #[test]
    fn scalar_characteristic_matrix() {
        let ch = scalar(1.0, 1.0);
        assert!((delta(&ch, c(0.0, 0.0), 0)[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        let z = c(0.3, -0.7);
        let h = 1e-5;
        for k in 1..=4 {
            let fd = (delta(&ch, z + h, k - 1)[(0, 0)] - delta(&ch, z - h, k - 1)[(0, 0)]) / (2.0 * h);
            let ex = delta(&ch, z, k)[(0, 0)];
            assert!((fd - ex).norm() < 1e-7 * ex.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn classical_root() {
        let ch = scalar(core::f64::consts::FRAC_PI_2, 1.0);
        let (w, q, p) = dde_eigenpair(&ch, 1.4).unwrap();
        assert!((w - core::f64::consts::FRAC_PI_2).abs() < 1e-12);
        let s = dotu(&p, &delta(&ch, c(0.0, w), 1).mul_vec(&q));
        assert!((s - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn moments_match_both_branches() {
        for &(a, k) in &[(c(0.3, 0.1), 0usize), (c(0.49, 0.0), 3), (c(0.0, 0.0), 2)] {
            let tau = 1.0;
            // midpoint rule as a crude independent check
            let n = 20000;
            let mut s = c(0.0, 0.0);
            for i in 0..n {
                let x = -tau + (i as f64 + 0.5) * tau / n as f64;
                s += (a * x).exp() * libm::pow(x, k as f64) * (tau / n as f64);
            }
            assert!((moment(a, k, tau) - s).norm() < 1e-8);
        }
        let a = c(0.6, 0.2);
        let big = moment(a, 2, 1.0);
        let mut s = c(0.0, 0.0);
        let n = 20000;
        for i in 0..n {
            let x = -1.0 + (i as f64 + 0.5) / n as f64;
            s += (a * x).exp() * x * x / n as f64;
        }
        assert!((big - s).norm() < 1e-8);
    }

    fn bazykin_pair() -> (GHPointODE, GHPointDDE, WithIdleDelay<BazykinKhibnik>) {
        let x = vec![0.25, 0.5];
        let a = steady_jacobian(&BazykinKhibnik, &x, &[0.25, 0.125]).unwrap();
        let ode = GHPointODE::new(x.clone(), [0.25, 0.125], a, 0.35).unwrap();
        let m = WithIdleDelay::new(BazykinKhibnik, 0.7);
        let dde = GHPointDDE::new(&m, x, [0.25, 0.125], 0.35).unwrap();
        (ode, dde, m)
    }

    #[test]
    fn idle_delay_matches_ode() {
        let (ode, dde, m) = bazykin_pair();
        let cc = critical_coeffs(&BazykinKhibnik, &ode).unwrap();
        let pc = param_coeffs(&BazykinKhibnik, &ode, &cc).unwrap();
        let (dc, dp) = dde_coeffs(&m, &dde).unwrap();
        let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(1e-300);
        assert!(rel(cc.c1, dc.c1) < 1e-9 || (cc.c1 - dc.c1).norm() < 1e-12);
        assert!(rel(cc.c2, dc.c2) < 1e-9);
        assert!(rel(cc.c3, dc.c3) < 1e-9);
        assert!(rel(pc.g3201.unwrap(), dp.g3201.unwrap()) < 1e-9);
        for (mu, k) in &pc.k {
            let d = dp.k[mu];
            assert!((k[0] - d[0]).abs() + (k[1] - d[1]).abs() < 1e-9 * (1.0 + k[0].abs() + k[1].abs()), "{mu:?}");
        }
        for (i, h) in &pc.hp {
            let d = dp.hp[i].value0();
            assert!(norm2(&crate::linalg::sub(h, &d)) < 1e-9 * (1.0 + norm2(h)), "{i:?}");
        }
    }

    #[test]
    fn fhn_second_lyapunov() {
        let m = FhnDde::default();
        let r = refine_gh_dde(&m, &[0.0, 0.0], [1.9, -1.0429], 0.072).unwrap();
        assert!((r.point.alpha0[0] - 1.9).abs() < 1e-3 && (r.point.alpha0[1] + 1.0429).abs() < 1e-3);
        let cc = dde_critical_coeffs(&m, &r.point).unwrap();
        assert!((cc.l2 + 15.6733).abs() < 1e-4, "{}", cc.l2);
    }

    #[test]
    fn bordered_solution_is_normalized() {
        let m = FhnDde::default();
        let r = refine_gh_dde(&m, &[0.0, 0.0], [1.9, -1.0429], 0.072).unwrap();
        let gh = &r.point;
        let (cc, pc) = dde_coeffs(&m, gh).unwrap();
        for i in [[2u8, 1u8, 0u8, 0u8], [3, 2, 0, 0], [4, 3, 0, 0], [1, 0, 1, 0], [1, 0, 0, 1], [2, 1, 0, 1], [3, 2, 0, 1]] {
            let h = &pc.tables.h[&i];
            let s = pairing(gh, h);
            assert!(s.norm() < 1e-9 * (1.0 + h.value0().iter().map(|z| z.norm()).sum::<f64>()), "{i:?} {s}");
        }
        assert!(pairing(gh, &gh.phi()).norm() > 0.99);
        assert!(cc.diag.fredholm < 1e-10);
    }
}
