//! Linear algebra at an ODE Hopf point: eigenpairs, resolvents, bordered inverse.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::linalg::{dotc, norm2, scaled, CMat, Lu, RMat};
use crate::model::{equilibrium, steady_jacobian, VectorField};

/// Full spectrum of a real matrix.
pub fn eigenvalues(a: &RMat) -> Vec<C64> {
    let n = a.rows;
    let m = nalgebra::DMatrix::from_row_slice(n, n, &a.data);
    m.complex_eigenvalues().iter().map(|z| c(z.re, z.im)).collect()
}

/// Equilibrium data at a generalized Hopf point of an ODE.
#[derive(Debug, Clone)]
pub struct GHPointODE {
    pub x0: Vec<f64>,
    pub alpha0: [f64; 2],
    pub omega0: f64,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    pub a: RMat,
}

impl GHPointODE {
    /// Builds the point data from an equilibrium and its Jacobian.
    pub fn new(x0: Vec<f64>, alpha0: [f64; 2], a: RMat, omega_guess: f64) -> Result<Self> {
        let (omega0, q, p) = hopf_eigenpair(&a, omega_guess)?;
        Ok(GHPointODE { x0, alpha0, omega0, q, p, a })
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    /// Same point with `(q, p)` replaced by `(e^{iθ}q, e^{iθ}p)`.
    pub fn rotated(&self, theta: f64) -> Self {
        let r = C64::from_polar(1.0, theta);
        GHPointODE { q: scaled(r, &self.q), p: scaled(r, &self.p), ..self.clone() }
    }
}

/// Eigenvalue of `a` closest to `i·ω_guess` in the upper half plane, with the
/// remaining spectrum for isolation checks.
pub(crate) fn critical_eigenvalue(a: &RMat, omega_guess: f64) -> Result<(C64, Vec<C64>)> {
    let eig = eigenvalues(a);
    let target = c(0.0, omega_guess);
    let (idx, lam) = eig
        .iter()
        .enumerate()
        .filter(|(_, z)| z.im > 0.0)
        .min_by(|x, y| (x.1 - target).norm().partial_cmp(&(y.1 - target).norm()).unwrap())
        .map(|(i, z)| (i, *z))
        .ok_or_else(|| Error::Eigen("no complex eigenvalue pair".into()))?;
    if (lam - target).norm() > 0.5 * omega_guess.abs().max(1e-3) + 0.5 * lam.re.abs() {
        return Err(Error::Eigen(format!(
            "no eigenvalue near i*{omega_guess}; closest is {}{:+}i",
            lam.re, lam.im
        )));
    }
    let mut rest = eig.clone();
    rest.remove(idx);
    if let Some(j) = rest.iter().position(|z| (z - lam.conj()).norm() < 1e-9 * (1.0 + lam.norm())) {
        rest.remove(j);
    }
    Ok((lam, rest))
}

/// Null vector of `m` by two steps of shifted inverse iteration.
fn null_vector(m: &CMat) -> Result<Vec<C64>> {
    let n = m.rows;
    let scale = m.norm1().max(1e-300);
    let shift = c(1e-10 * scale, 0.0);
    let shifted = m.add(&CMat::identity(n).scale(shift));
    let lu = Lu::new(&shifted)?;
    let mut v: Vec<C64> = (0..n).map(|i| c(1.0, 0.1 * (i as f64 + 1.0))).collect();
    for _ in 0..3 {
        v = lu.solve(&v)?;
        let nv = norm2(&v);
        v = scaled(c(1.0 / nv, 0.0), &v);
    }
    Ok(v)
}

/// Rotates `q` so that its largest component is real and positive.
pub(crate) fn phase_fix(q: &[C64]) -> C64 {
    let mx = q.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let k = q.iter().position(|z| z.norm() >= mx * (1.0 - 1e-12)).unwrap_or(0);
    let z = q[k];
    c(z.norm(), 0.0) / z
}

/// `(ω₀, q, p)` with `Aq = iω₀q`, `Aᵀp = −iω₀p`, `q̄ᵀq = p̄ᵀq = 1`, phase-fixed `q`.
pub fn hopf_eigenpair(a: &RMat, omega_guess: f64) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let (lam, rest) = critical_eigenvalue(a, omega_guess)?;
    let tol = 1e-6 * (1.0 + a.norm1());
    if lam.re.abs() > tol {
        return Err(Error::Eigen(format!("eigenvalue {}{:+}i is not on the imaginary axis", lam.re, lam.im)));
    }
    let crit_tol = 1e-8 * (1.0 + a.norm1());
    if let Some(z) = rest.iter().find(|z| z.re.abs() <= crit_tol) {
        return Err(Error::Eigen(format!("second critical eigenvalue {}{:+}i in the exclusion window", z.re, z.im)));
    }
    let (q, p) = eigvecs(a, lam)?;
    Ok((lam.im, q, p))
}

/// Right/left eigenvectors for eigenvalue `lam` (not necessarily on the axis),
/// normalized `q̄ᵀq = 1`, `p̄ᵀq = 1`.
pub(crate) fn eigvecs(a: &RMat, lam: C64) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = a.rows;
    let ac = a.to_complex();
    let m = ac.sub(&CMat::identity(n).scale(lam));
    let mut q = null_vector(&m)?;
    let r = phase_fix(&q);
    q = scaled(r, &q);
    let nq = norm2(&q);
    q = scaled(c(1.0 / nq, 0.0), &q);
    // Aᵀp = λ̄ p
    let mt = ac.transpose().sub(&CMat::identity(n).scale(lam.conj()));
    let p0 = null_vector(&mt)?;
    let s = dotc(&p0, &q);
    if s.norm() < 1e-10 {
        return Err(Error::Degenerate("eigenvalue is not simple (p̄ᵀq ≈ 0)".into()));
    }
    let p = scaled(c(1.0, 0.0) / s.conj(), &p0);
    Ok((q, p))
}

/// Distance check of a shift against a spectrum.
pub(crate) fn check_resonance(sigma: C64, spectrum: &[C64], anorm: f64) -> Result<()> {
    let tol = 1e-8 * anorm.max(1e-300);
    for &z in spectrum {
        if (sigma - z).norm() < tol {
            return Err(Error::Resonance { shift: (sigma.re, sigma.im), eigenvalue: (z.re, z.im) });
        }
    }
    Ok(())
}

/// `(σI − A)⁻¹ rhs`, rejecting shifts on the spectrum.
pub fn resolvent_solve(a: &RMat, sigma: C64, rhs: &[C64]) -> Result<Vec<C64>> {
    check_resonance(sigma, &eigenvalues(a), a.norm1())?;
    shifted(a, sigma).solve(rhs)
}

fn shifted(a: &RMat, sigma: C64) -> CMat {
    CMat::identity(a.rows).scale(sigma).sub(&a.to_complex())
}

/// Bordered solve of `[[iω₀I − A, q], [p̄ᵀ, 0]] (w, s) = (rhs, 0)`; returns `(w, s)`.
///
/// `s = 0` exactly when `rhs` is consistent (`p̄ᵀ rhs = 0` in exact arithmetic);
/// otherwise `w` is the termwise (Inv) object.
pub fn bordered_solve(a: &RMat, omega0: f64, q: &[C64], p: &[C64], rhs: &[C64]) -> Result<(Vec<C64>, C64)> {
    let n = a.rows;
    let inner = shifted(a, c(0.0, omega0));
    let mut m = CMat::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = inner[(i, j)];
        }
        m[(i, n)] = q[i];
        m[(n, i)] = p[i].conj();
    }
    let lu = Lu::new(&m).map_err(|_| Error::Degenerate("bordered matrix is singular".into()))?;
    let mut b = rhs.to_vec();
    b.push(c(0.0, 0.0));
    let mut x = lu.solve(&b)?;
    let s = x.pop().unwrap();
    Ok((x, s))
}

/// `A^{INV}_{iω₀} rhs` (the `w` part of the bordered solve).
pub fn bordered_inv(a: &RMat, omega0: f64, q: &[C64], p: &[C64], rhs: &[C64]) -> Result<Vec<C64>> {
    Ok(bordered_solve(a, omega0, q, p, rhs)?.0)
}

/// Cached factorizations at a Hopf point for repeated solves.
#[derive(Debug, Clone)]
pub struct OdeSolver {
    pub a: RMat,
    pub spectrum: Vec<C64>,
    pub omega0: f64,
    pub q: Vec<C64>,
    pub p: Vec<C64>,
    anorm: f64,
    bordered: Lu<C64>,
}

impl OdeSolver {
    pub fn new(gh: &GHPointODE) -> Result<Self> {
        let n = gh.dim();
        let inner = shifted(&gh.a, c(0.0, gh.omega0));
        let mut m = CMat::zeros(n + 1, n + 1);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = inner[(i, j)];
            }
            m[(i, n)] = gh.q[i];
            m[(n, i)] = gh.p[i].conj();
        }
        let bordered = Lu::new(&m).map_err(|_| Error::Degenerate("bordered matrix is singular".into()))?;
        Ok(OdeSolver {
            a: gh.a.clone(),
            spectrum: eigenvalues(&gh.a),
            omega0: gh.omega0,
            q: gh.q.clone(),
            p: gh.p.clone(),
            anorm: gh.a.norm1(),
            bordered,
        })
    }

    pub fn resolvent(&self, sigma: C64, rhs: &[C64]) -> Result<Vec<C64>> {
        check_resonance(sigma, &self.spectrum, self.anorm)?;
        shifted(&self.a, sigma).solve(rhs)
    }

    pub fn bordered(&self, rhs: &[C64]) -> Result<(Vec<C64>, C64)> {
        let mut b = rhs.to_vec();
        b.push(c(0.0, 0.0));
        let mut x = self.bordered.solve(&b)?;
        let s = x.pop().unwrap();
        Ok((x, s))
    }
}

/// Residual helper: `‖(iω₀I − A)w − rhs‖`.
pub fn bordered_residual(a: &RMat, omega0: f64, w: &[C64], rhs: &[C64]) -> f64 {
    let r = shifted(a, c(0.0, omega0)).mul_vec(w);
    let d: Vec<C64> = r.iter().zip(rhs).map(|(x, y)| x - y).collect();
    norm2(&d)
}

/// Outcome of [`refine_gh_detailed`].
#[derive(Debug, Clone)]
pub struct Refined {
    pub point: GHPointODE,
    pub iterations: usize,
    pub residual: f64,
}

pub const REFINE_TOL: f64 = 1e-10;
pub const REFINE_MAX_ITER: usize = 30;

/// Locates a generalized Hopf point near the guess: Newton in `α` on
/// `(Re λ(α), l₁(α)) = 0`, with the equilibrium re-solved at every `α`.
pub fn refine_gh<M: VectorField>(model: &M, x_guess: &[f64], alpha_guess: [f64; 2], omega_guess: f64) -> Result<GHPointODE> {
    Ok(refine_gh_detailed(model, x_guess, alpha_guess, omega_guess)?.point)
}

pub fn refine_gh_detailed<M: VectorField>(
    model: &M,
    x_guess: &[f64],
    alpha_guess: [f64; 2],
    omega_guess: f64,
) -> Result<Refined> {
    let eval = |x0: &[f64], alpha: [f64; 2], lam0: C64| -> Result<GhResidual> {
        let x = equilibrium(model, x0, &alpha)?;
        let a = steady_jacobian(model, &x, &alpha)?;
        let (lam, _) = critical_eigenvalue(&a, lam0.im)?;
        let (q, p) = eigvecs(&a, lam)?;
        let gh = GHPointODE { x0: x.clone(), alpha0: alpha, omega0: lam.im, q, p, a };
        let l1 = crate::ghode::first_lyapunov(model, &gh)?;
        Ok(GhResidual { x, lam, r: [lam.re, l1] })
    };
    let (st, alpha, iterations) = gh_newton(x_guess, alpha_guess, c(0.0, omega_guess), eval)?;
    let a = steady_jacobian(model, &st.x, &alpha)?;
    let residual = libm::hypot(st.r[0], st.r[1]);
    let point = GHPointODE::new(st.x, alpha, a, st.lam.im)?;
    Ok(Refined { point, iterations, residual })
}

/// State of the generalized Hopf residual `(Re λ, l₁)` at one parameter value.
pub(crate) struct GhResidual {
    pub x: Vec<f64>,
    pub lam: C64,
    pub r: [f64; 2],
}

/// Damped Newton in `α` with a central-difference Jacobian.
pub(crate) fn gh_newton(
    x_guess: &[f64],
    alpha_guess: [f64; 2],
    lam_guess: C64,
    eval: impl Fn(&[f64], [f64; 2], C64) -> Result<GhResidual>,
) -> Result<(GhResidual, [f64; 2], usize)> {
    let norm = |r: &[f64; 2]| libm::hypot(r[0], r[1]);
    let mut alpha = alpha_guess;
    let mut st = eval(x_guess, alpha, lam_guess)?;
    let mut iterations = 0;
    while norm(&st.r) > REFINE_TOL {
        if iterations == REFINE_MAX_ITER {
            return Err(Error::Convergence(format!(
                "generalized Hopf refinement: residual {:.3e} after {REFINE_MAX_ITER} iterations",
                norm(&st.r)
            )));
        }
        iterations += 1;
        let mut jac = RMat::zeros(2, 2);
        for k in 0..2 {
            let h = 1e-6 * (1.0 + alpha[k].abs());
            let mut ap = alpha;
            let mut am = alpha;
            ap[k] += h;
            am[k] -= h;
            let rp = eval(&st.x, ap, st.lam)?.r;
            let rm = eval(&st.x, am, st.lam)?.r;
            for i in 0..2 {
                jac[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let d = jac.solve(&st.r)?;
        let mut t = 1.0;
        loop {
            let trial = [alpha[0] - t * d[0], alpha[1] - t * d[1]];
            match eval(&st.x, trial, st.lam) {
                Ok(next) if norm(&next.r) < norm(&st.r) || t < 1e-3 => {
                    alpha = trial;
                    st = next;
                    break;
                }
                Err(e) if t < 1e-3 => return Err(e),
                _ => t *= 0.5,
            }
        }
    }
    Ok((st, alpha, iterations))
}

#[cfg(test)]
pub(crate) fn zeros(n: usize) -> Vec<C64> {
    alloc::vec![c(0.0, 0.0); n]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dotc;

    #[test]
    fn rotation_matrix_pair() {
        let a = RMat::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let (w, q, p) = hopf_eigenpair(&a, 0.9).unwrap();
        assert!((w - 1.0).abs() < 1e-14);
        let s = 1.0 / 2f64.sqrt();
        // largest component real positive: both equal modulus, first wins
        assert!((q[0] - c(s, 0.0)).norm() < 1e-13);
        assert!((q[1] - c(0.0, -s)).norm() < 1e-13);
        assert!((dotc(&p, &q) - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn resolvent_identity_and_resonance() {
        let a = RMat::from_rows(&[&[-1.0, 0.0], &[0.0, -1.0]]);
        let x = resolvent_solve(&a, c(0.0, 0.0), &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((x[0] - c(1.0, 0.0)).norm() < 1e-15 && x[1].norm() < 1e-15);
        assert!(matches!(resolvent_solve(&a, c(-1.0, 0.0), &x), Err(Error::Resonance { .. })));
    }

    #[test]
    fn bordered_inverse_properties() {
        let a = RMat::from_rows(&[&[0.1, -2.0, 0.3], &[1.5, -0.1, 0.0], &[0.2, 0.4, -1.0]]);
        // shift the matrix so that it has an exact imaginary pair: use the pair of a itself
        let (lam, _) = critical_eigenvalue(&a, 1.7).unwrap();
        let a = a.sub(&RMat::identity(3).scale(lam.re));
        let (w0, q, p) = hopf_eigenpair(&a, 1.7).unwrap();
        let inv_q = bordered_inv(&a, w0, &q, &p, &q).unwrap();
        assert!(norm2(&inv_q) < 1e-14);
        let z = bordered_inv(&a, w0, &q, &p, &zeros(3)).unwrap();
        assert!(norm2(&z) == 0.0);
        let mut r = alloc::vec![c(0.3, 1.0), c(-1.0, 0.2), c(0.5, 0.5)];
        let k = dotc(&p, &r);
        for (ri, qi) in r.iter_mut().zip(&q) {
            *ri -= k * qi;
        }
        let w = bordered_inv(&a, w0, &q, &p, &r).unwrap();
        assert!(bordered_residual(&a, w0, &w, &r) < 1e-12);
        assert!(dotc(&p, &w).norm() < 1e-13);
    }
}
