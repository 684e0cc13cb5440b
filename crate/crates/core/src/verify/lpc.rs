//! Newton correction of a predicted point onto the fold-of-cycles curve by single shooting.

use alloc::vec::Vec;

use super::flow::{integrate, Flow, OdeRhs, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::model::VectorField;
use crate::predictor::PredictorSample;

/// Starting data for [`correct_lpc`].
#[derive(Debug, Clone)]
pub struct LpcSeed {
    pub x0: Vec<f64>,
    pub period: f64,
    pub alpha: [f64; 2],
    /// Pseudo-arclength hyperplane `⟨u − anchor, tangent⟩ = 0` with `u = (α₁, α₂, T, x₀)`.
    pub anchor: Vec<f64>,
    pub tangent: Vec<f64>,
    /// Rough cycle size, used to reject collapse onto the equilibrium.
    pub amplitude: f64,
    /// Fold null vector `(v, s)` if known.
    pub fold: Option<(Vec<f64>, f64)>,
}

impl From<&PredictorSample> for LpcSeed {
    fn from(s: &PredictorSample) -> Self {
        let x0 = s.orbit[0].clone();
        let amplitude = s
            .orbit
            .iter()
            .map(|x| libm::sqrt(x.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
            .fold(0.0, f64::max);
        let mut anchor = alloc::vec![s.alpha[0], s.alpha[1], s.period];
        anchor.extend_from_slice(&x0);
        let mut tangent = alloc::vec![s.alpha_tangent[0], s.alpha_tangent[1], s.period_tangent];
        tangent.extend_from_slice(&s.x0_tangent);
        LpcSeed { x0, period: s.period, alpha: s.alpha, anchor, tangent, amplitude, fold: None }
    }
}

impl LpcSeed {
    /// Seed from `s` constrained to the hyperplane of `reference`.
    pub fn anchored(s: &PredictorSample, reference: &PredictorSample) -> Self {
        let r = LpcSeed::from(reference);
        LpcSeed { anchor: r.anchor, tangent: r.tangent, ..LpcSeed::from(s) }
    }

    /// Restart from a corrected point with the anchor of `self`.
    pub fn restart(&self, c: &CorrectedLPC) -> Self {
        LpcSeed {
            x0: c.x0_cycle.clone(),
            period: c.period,
            alpha: c.alpha,
            fold: Some((c.v.clone(), c.s)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CorrectorOptions {
    pub integration: Tolerances,
    pub newton_tol: f64,
    pub max_iter: usize,
    /// Newton steps taken even when the seed already meets the tolerance.
    pub min_iter: usize,
    /// Smallest accepted ratio of corrected to seed amplitude.
    pub min_amplitude_ratio: f64,
}

impl Default for CorrectorOptions {
    fn default() -> Self {
        CorrectorOptions { integration: Tolerances::default(), newton_tol: 1e-10, max_iter: 12, min_iter: 0, min_amplitude_ratio: 0.1 }
    }
}

/// A point on the fold-of-cycles curve.
///
/// `v` and `s` span the kernel of the shooting Jacobian: `(M − I)v + sF(x₀) = 0`.
#[derive(Debug, Clone)]
pub struct CorrectedLPC {
    pub x0_cycle: Vec<f64>,
    pub period: f64,
    pub alpha: [f64; 2],
    pub v: Vec<f64>,
    pub s: f64,
    pub monodromy: RMat,
    pub newton_residual: f64,
    pub iterations: usize,
    pub amplitude: f64,
}

impl CorrectedLPC {
    /// `(α₁, α₂, T, x₀)` stacked, the vector the relative errors are measured on.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = alloc::vec![self.alpha[0], self.alpha[1], self.period];
        v.extend_from_slice(&self.x0_cycle);
        v
    }
}

struct System<'a, M> {
    model: &'a M,
    n: usize,
    x_seed: Vec<f64>,
    f_seed: Vec<f64>,
    anchor: Vec<f64>,
    tangent: Vec<f64>,
    tol: Tolerances,
}

struct Eval {
    r: Vec<f64>,
    flow: Flow,
    m: RMat,
    f_end: Vec<f64>,
    f_x0: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a, M: VectorField> System<'a, M> {
    fn eval(&self, u: &[f64]) -> Result<Eval> {
        let n = self.n;
        let (x, t, alpha) = (&u[..n], u[n], [u[n + 1], u[n + 2]]);
        let (v, s) = (&u[n + 3..2 * n + 3], u[2 * n + 3]);
        if !(t > 0.0) {
            return Err(Error::Convergence("period became non-positive".into()));
        }
        let flow = integrate(self.model, x, alpha, t, true, self.tol)?;
        let m = flow.fundamental.clone().expect("variational flow");
        let rhs = OdeRhs::new(self.model, alpha)?;
        let f_x0 = rhs.eval(x)?;
        let f_end = rhs.eval(&flow.x)?;
        let mut r = Vec::with_capacity(2 * n + 4);
        r.extend(flow.x.iter().zip(x).map(|(a, b)| a - b));
        r.push(dot(&self.f_seed, &x.iter().zip(&self.x_seed).map(|(a, b)| a - b).collect::<Vec<_>>()));
        let mv = m.mul_vec(v);
        r.extend((0..n).map(|i| mv[i] - v[i] + s * f_x0[i]));
        r.push(dot(&self.f_seed, v));
        r.push(dot(v, v) - 1.0);
        let here = [alpha[0], alpha[1], t].into_iter().chain(x.iter().copied());
        r.push(here.zip(&self.anchor).zip(&self.tangent).map(|((u, a), t)| (u - a) * t).sum());
        Ok(Eval { r, flow, m, f_end, f_x0 })
    }

    fn jacobian(&self, u: &[f64], e: &Eval) -> Result<RMat> {
        let n = self.n;
        let dim = 2 * n + 4;
        let mut j = RMat::zeros(dim, dim);
        let v = &u[n + 3..2 * n + 3];
        // periodicity
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] = e.m[(r, c)] - if r == c { 1.0 } else { 0.0 };
            }
            j[(r, n)] = e.f_end[r];
        }
        // phase
        for c in 0..n {
            j[(n, c)] = self.f_seed[c];
        }
        // fold rows: exact in (v, s), central differences in (x, T, α)
        for r in 0..n {
            for c in 0..n {
                j[(n + 1 + r, n + 3 + c)] = e.m[(r, c)] - if r == c { 1.0 } else { 0.0 };
            }
            j[(n + 1 + r, 2 * n + 3)] = e.f_x0[r];
        }
        for c in 0..n + 3 {
            let h = 1e-6 * (1.0 + u[c].abs());
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[c] += h;
            dn[c] -= h;
            let (rp, rm) = (self.eval(&up)?.r, self.eval(&dn)?.r);
            let rows: Vec<usize> = if c >= n + 1 { (0..n).chain(n + 1..2 * n + 1).collect() } else { (n + 1..2 * n + 1).collect() };
            for r in rows {
                j[(r, c)] = (rp[r] - rm[r]) / (2.0 * h);
            }
        }
        for c in 0..n {
            j[(2 * n + 1, n + 3 + c)] = self.f_seed[c];
            j[(2 * n + 2, n + 3 + c)] = 2.0 * v[c];
        }
        j[(2 * n + 3, n + 1)] = self.tangent[0];
        j[(2 * n + 3, n + 2)] = self.tangent[1];
        j[(2 * n + 3, n)] = self.tangent[2];
        for c in 0..n {
            j[(2 * n + 3, c)] = self.tangent[3 + c];
        }
        Ok(j)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Kernel direction of `[[M − I, F], [f̂ᵀ, 0]]`, from its smallest singular vector.
fn fold_guess(m: &RMat, f: &[f64], f_seed: &[f64]) -> (Vec<f64>, f64) {
    let n = f.len();
    let mut b = nalgebra::DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = m[(i, j)] - if i == j { 1.0 } else { 0.0 };
        }
        b[(i, n)] = f[i];
        b[(n, i)] = f_seed[i];
    }
    let svd = b.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let k = (0..n + 1).min_by(|&a, &c| svd.singular_values[a].total_cmp(&svd.singular_values[c])).unwrap_or(n);
    let mut z: Vec<f64> = (0..n + 1).map(|i| vt[(k, i)]).collect();
    let nv = libm::sqrt(dot(&z[..n], &z[..n])).max(1e-300);
    let big = (0..n).max_by(|&a, &c| z[a].abs().total_cmp(&z[c].abs())).unwrap_or(0);
    let sign = if z[big] < 0.0 { -1.0 } else { 1.0 };
    for x in z.iter_mut() {
        *x *= sign / nv;
    }
    let s = z[n];
    z.truncate(n);
    (z, s)
}

/// Newton iteration on the extended shooting system
/// (periodicity, phase section, fold kernel, kernel section, normalization, anchor).
pub fn correct_lpc<M: VectorField>(model: &M, seed: &LpcSeed, opts: &CorrectorOptions) -> Result<CorrectedLPC> {
    let n = model.dim();
    let rhs = OdeRhs::new(model, seed.alpha)?;
    let f = rhs.eval(&seed.x0)?;
    let fnorm = libm::sqrt(dot(&f, &f));
    if fnorm == 0.0 {
        return Err(Error::Invalid("seed lies on an equilibrium".into()));
    }
    let f_seed: Vec<f64> = f.iter().map(|x| x / fnorm).collect();
    let tn = libm::sqrt(dot(&seed.tangent, &seed.tangent));
    if !(tn > 0.0) || seed.tangent.len() != n + 3 || seed.anchor.len() != n + 3 {
        return Err(Error::Invalid("anchor tangent must be a nonzero vector of length n + 3".into()));
    }
    let sys = System {
        model,
        n,
        x_seed: seed.x0.clone(),
        f_seed,
        anchor: seed.anchor.clone(),
        tangent: seed.tangent.iter().map(|t| t / tn).collect(),
        tol: opts.integration,
    };
    let mut u = seed.x0.clone();
    u.extend([seed.period, seed.alpha[0], seed.alpha[1]]);
    let (v0, s0) = match &seed.fold {
        Some((v, s)) => {
            // (M − I)F = 0 on a cycle, so removing the F component keeps the fold equation
            let c = dot(v, &sys.f_seed);
            let v: Vec<f64> = v.iter().zip(&sys.f_seed).map(|(a, b)| a - c * b).collect();
            let k = libm::sqrt(dot(&v, &v));
            if !(k > 0.0) {
                return Err(Error::Invalid("fold vector is parallel to the flow".into()));
            }
            (v.iter().map(|a| a / k).collect(), s / k)
        }
        None => {
            let fl = integrate(model, &seed.x0, seed.alpha, seed.period, true, opts.integration)?;
            fold_guess(fl.fundamental.as_ref().expect("variational flow"), &f, &sys.f_seed)
        }
    };
    u.extend(v0);
    u.push(s0);
    let mut e = sys.eval(&u)?;
    let r0 = inf_norm(&e.r);
    let mut iterations = 0;
    loop {
        let res = inf_norm(&e.r);
        if !res.is_finite() || res > 1e6 * r0.max(1e-6) {
            return Err(Error::Convergence("LPC Newton iteration diverged".into()));
        }
        if res <= opts.newton_tol && iterations >= opts.min_iter {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::Convergence(alloc::format!(
                "LPC Newton iteration: residual {res:.3e} after {iterations} iterations"
            )));
        }
        let j = sys.jacobian(&u, &e)?;
        let rhs: Vec<f64> = e.r.iter().map(|x| -x).collect();
        let du = j.solve(&rhs).map_err(|_| Error::Convergence("singular LPC Jacobian".into()))?;
        for (ui, d) in u.iter_mut().zip(&du) {
            *ui += d;
        }
        iterations += 1;
        e = sys.eval(&u).map_err(|err| match err {
            Error::Convergence(_) | Error::Evaluation(_) => Error::Convergence("LPC Newton iteration diverged".into()),
            other => other,
        })?;
    }
    let x0 = u[..n].to_vec();
    let amplitude = e
        .flow
        .trajectory
        .iter()
        .map(|(_, x)| libm::sqrt(x.iter().zip(&x0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()))
        .fold(0.0, f64::max);
    if amplitude < opts.min_amplitude_ratio * seed.amplitude {
        return Err(Error::Convergence(alloc::format!(
            "LPC Newton iteration collapsed onto the equilibrium (cycle size {amplitude:.3e})"
        )));
    }
    Ok(CorrectedLPC {
        x0_cycle: x0,
        period: u[n],
        alpha: [u[n + 1], u[n + 2]],
        v: u[n + 3..2 * n + 3].to_vec(),
        s: u[2 * n + 3],
        monodromy: e.m,
        newton_residual: inf_norm(&e.r),
        iterations,
        amplitude,
    })
}
