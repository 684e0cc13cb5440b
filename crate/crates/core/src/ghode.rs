//! Critical normal-form coefficients `c₁(0), c₂(0), c₃(0)` of an ODE and the
//! parameter-free part of the center manifold.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::Result;
use crate::field::C64;
use crate::linalg::{add, axpy, conj_vec, dotc, norm2};
use crate::linode::{GHPointODE, OdeSolver};
use crate::model::VectorField;
use crate::normal_form::{
    idx_factorial, stage_indices, Backend, Coeff, Derivatives, Diagnostics, Engine, Nonlinearity, SeriesComposition,
    Tables, TermList,
};

/// Critical coefficients and the `H_{nm00}` table (normalized, `2 ≤ n+m ≤ 7`).
#[derive(Debug, Clone)]
pub struct CriticalCoeffs<V = Vec<C64>> {
    pub omega0: f64,
    pub c1: C64,
    pub c2: C64,
    pub c3: C64,
    pub d2: f64,
    pub d3: f64,
    pub l1: f64,
    pub l2: f64,
    pub h: BTreeMap<(u8, u8), V>,
    /// Raw tables, the starting point of the parameter stages.
    pub tables: Tables<V>,
    pub diag: Diagnostics,
}

impl<V: Coeff> CriticalCoeffs<V> {
    /// The same coefficients with every history function replaced by its value at `θ = 0`.
    pub fn at_zero(&self) -> CriticalCoeffs<Vec<C64>> {
        CriticalCoeffs {
            omega0: self.omega0,
            c1: self.c1,
            c2: self.c2,
            c3: self.c3,
            d2: self.d2,
            d3: self.d3,
            l1: self.l1,
            l2: self.l2,
            h: self.h.iter().map(|(k, v)| (*k, v.value0())).collect(),
            tables: Tables {
                h: self.tables.h.iter().map(|(k, v)| (*k, v.value0())).collect(),
                g: self.tables.g.clone(),
                k: self.tables.k.clone(),
            },
            diag: self.diag.clone(),
        }
    }
}

/// ODE side of the homological equation: plain vectors, `L = A`.
pub struct OdeBackend {
    solver: OdeSolver,
}

impl OdeBackend {
    pub fn new(gh: &GHPointODE) -> Result<Self> {
        Ok(OdeBackend { solver: OdeSolver::new(gh)? })
    }
}

impl Backend for OdeBackend {
    type Val = Vec<C64>;

    fn omega0(&self) -> f64 {
        self.solver.omega0
    }
    fn phi(&self) -> Vec<C64> {
        self.solver.q.clone()
    }
    fn zero(&self, _rate: C64) -> Vec<C64> {
        alloc::vec![C64::new(0.0, 0.0); self.solver.q.len()]
    }
    fn conj(&self, v: &Vec<C64>) -> Vec<C64> {
        conj_vec(v)
    }
    fn axpy(&self, a: C64, x: &Vec<C64>, y: &mut Vec<C64>) {
        axpy(a, x, y)
    }
    fn sample(&self, v: &Vec<C64>) -> Vec<C64> {
        v.clone()
    }
    fn size(&self, eta: &[C64], f: &Vec<C64>) -> f64 {
        norm2(eta) + norm2(f)
    }
    fn fredholm(&self, _lam: C64, eta: &[C64], f: &Vec<C64>) -> C64 {
        dotc(&self.solver.p, &add(eta, f))
    }
    fn solve_regular(&self, lam: C64, eta: &[C64], f: &Vec<C64>) -> Result<Vec<C64>> {
        self.solver.resolvent(lam, &add(eta, f))
    }
    fn solve_bordered(&self, _lam: C64, eta: &[C64], f: &Vec<C64>) -> Result<Vec<C64>> {
        Ok(self.solver.bordered(&add(eta, f))?.0)
    }
}

/// Runs `f` with the requested Taylor-coefficient route for `model` at `(x0, α0)`.
pub(crate) fn with_nonlinearity<M: VectorField, R>(
    model: &M,
    x0: &[f64],
    alpha0: [f64; 2],
    d: Derivatives,
    f: impl FnOnce(&dyn Nonlinearity) -> R,
) -> R {
    match d {
        Derivatives::Exact => f(&SeriesComposition::new(model, x0, alpha0)),
        Derivatives::Jets => f(&TermList::new(model, x0, alpha0)),
    }
}

/// Critical stage on any backend, up to `|w|`-order `max_order`.
pub(crate) fn critical_stage<B: Backend>(
    backend: &B,
    nl: &dyn Nonlinearity,
    max_order: u8,
) -> Result<CriticalCoeffs<B::Val>> {
    let mut eng = Engine::new(backend, nl);
    eng.run(&stage_indices([0, 0], 2, max_order))?;
    let g = &eng.tables.g;
    let get = |i: [u8; 4]| g.get(&i).copied().unwrap_or(C64::new(0.0, 0.0));
    let (c1, c2, c3) = (get([2, 1, 0, 0]), get([3, 2, 0, 0]), get([4, 3, 0, 0]));
    let omega0 = backend.omega0();
    let mut h = BTreeMap::new();
    for (i, v) in &eng.tables.h {
        if i[2] == 0 && i[3] == 0 && i[0] + i[1] >= 2 {
            h.insert((i[0], i[1]), v.scale(idx_factorial(*i)));
        }
    }
    let mut diag = eng.diag.clone();
    let scale = 1.0 + c1.norm();
    if c1.re.abs() > 1e-8 * scale {
        diag.warnings.push(format!("Re c1 = {:.3e} is not zero: the point is not a generalized Hopf point", c1.re));
    }
    if max_order >= 5 && c2.re.abs() < 1e-8 * omega0 {
        diag.warnings.push(format!("Re c2 = {:.3e}: degenerate generalized Hopf point (l2 = 0)", c2.re));
    }
    Ok(CriticalCoeffs {
        omega0,
        c1,
        c2,
        c3,
        d2: c2.re,
        d3: c3.re,
        l1: c1.re / omega0,
        l2: c2.re / omega0,
        h,
        tables: eng.tables,
        diag,
    })
}

/// `c₁(0), c₂(0), c₃(0)` and `H_{nm00}` at a generalized Hopf point, by series composition.
pub fn critical_coeffs<M: VectorField>(model: &M, gh: &GHPointODE) -> Result<CriticalCoeffs> {
    critical_coeffs_with(model, gh, Derivatives::Exact)
}

/// As [`critical_coeffs`] with a chosen derivative route.
pub fn critical_coeffs_with<M: VectorField>(model: &M, gh: &GHPointODE, d: Derivatives) -> Result<CriticalCoeffs> {
    let backend = OdeBackend::new(gh)?;
    with_nonlinearity(model, &gh.x0, gh.alpha0, d, |nl| critical_stage(&backend, nl, 7))
}

/// First Lyapunov coefficient `Re c₁/ω` at a point whose Jacobian has the eigenvalue
/// pair nearest `i·omega_guess` (not necessarily on the imaginary axis).
pub fn first_lyapunov<M: VectorField>(model: &M, gh: &GHPointODE) -> Result<f64> {
    let backend = OdeBackend::new(gh)?;
    let nl = SeriesComposition::new(model, &gh.x0, gh.alpha0);
    let cc = critical_stage(&backend, &nl, 3)?;
    Ok(cc.l1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linode::refine_gh_detailed;
    use crate::model::{steady_jacobian, BazykinKhibnik, Lorenz84};

    fn bazykin() -> GHPointODE {
        let x = alloc::vec![0.25, 0.5];
        let a = steady_jacobian(&BazykinKhibnik, &x, &[0.25, 0.125]).unwrap();
        GHPointODE::new(x, [0.25, 0.125], a, 0.35).unwrap()
    }

    #[test]
    fn bazykin_second_lyapunov() {
        let cc = critical_coeffs(&BazykinKhibnik, &bazykin()).unwrap();
        let exact = -1024.0 * libm::sqrt(2.0) / 729.0;
        assert!((cc.l2 - exact).abs() < 1e-9, "{} vs {}", cc.l2, exact);
        assert!(cc.c1.re.abs() < 1e-12);
        assert!(cc.diag.fredholm < 1e-12);
    }

    #[test]
    fn routes_agree() {
        let gh = bazykin();
        let a = critical_coeffs_with(&BazykinKhibnik, &gh, Derivatives::Exact).unwrap();
        let b = critical_coeffs_with(&BazykinKhibnik, &gh, Derivatives::Jets).unwrap();
        for (x, y) in [(a.c1, b.c1), (a.c2, b.c2), (a.c3, b.c3)] {
            assert!((x - y).norm() < 1e-8 * (1.0 + x.norm()), "{x} {y}");
        }
    }

    #[test]
    fn lorenz_refine_and_l2() {
        let r = refine_gh_detailed(&Lorenz84::default(), &[1.15, -0.03, 0.21, -0.51], [2.4, 0.05], 0.69).unwrap();
        let gh = &r.point;
        assert!((gh.alpha0[0] - 2.3763).abs() < 1e-4 && (gh.alpha0[1] - 0.05019).abs() < 1e-5, "{:?}", gh.alpha0);
        let cc = critical_coeffs(&Lorenz84::default(), gh).unwrap();
        assert!((cc.l2 - 0.22567).abs() < 1e-5, "{}", cc.l2);
    }
}
