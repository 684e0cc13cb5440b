//! Parameter-dependent coefficients: `K_μ`, `b₁,μ`, `b₂,μ`, `a₃₂₀₁` and the
//! `H_{nmkl}` table with `(k, l) ≠ 0`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::Result;
use crate::field::C64;
use crate::ghode::{with_nonlinearity, CriticalCoeffs, OdeBackend};
use crate::linode::GHPointODE;
use crate::model::VectorField;
use crate::normal_form::{
    grey_helpers, idx_factorial, mu_factorial, required_set, stage_indices, Backend, Coeff, Derivatives, Diagnostics,
    Engine, Idx, Mu, Nonlinearity, Tables,
};

/// The 2×2 matrix shared by all `K_μ` systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransversalityMatrix {
    pub p: [[f64; 2]; 2],
    pub cond: f64,
}

/// Parameter-dependent coefficients, normalized as in the expansions of `H` and `K`.
#[derive(Debug, Clone)]
pub struct ParamCoeffs<V = Vec<C64>> {
    /// `K_μ`.
    pub k: BTreeMap<Mu, [f64; 2]>,
    /// `(γ₁,μ, γ₂,μ)` with `K_μ = γ₁,μ e₁ + γ₂,μ e₂`.
    pub gamma: BTreeMap<Mu, [f64; 2]>,
    /// Right-hand sides `Q_μ`.
    pub q: BTreeMap<Mu, [f64; 2]>,
    pub b1: BTreeMap<Mu, f64>,
    pub b2: BTreeMap<Mu, f64>,
    pub g3201: Option<C64>,
    pub a3201: Option<f64>,
    /// `H_{nmkl}` with `(k, l) ≠ 0` over the required indices and grey helpers.
    pub hp: BTreeMap<Idx, V>,
    pub transversality: Option<TransversalityMatrix>,
    /// Raw tables including the critical entries and intermediates.
    pub tables: Tables<V>,
    pub diag: Diagnostics,
}

impl<V: Coeff> ParamCoeffs<V> {
    pub fn b2_01(&self) -> Option<f64> {
        self.b2.get(&[0, 1]).copied()
    }

    /// Values at `θ = 0` of every stored function.
    pub fn at_zero(&self) -> ParamCoeffs<Vec<C64>> {
        ParamCoeffs {
            k: self.k.clone(),
            gamma: self.gamma.clone(),
            q: self.q.clone(),
            b1: self.b1.clone(),
            b2: self.b2.clone(),
            g3201: self.g3201,
            a3201: self.a3201,
            hp: self.hp.iter().map(|(k, v)| (*k, v.value0())).collect(),
            transversality: self.transversality,
            tables: Tables {
                h: self.tables.h.iter().map(|(k, v)| (*k, v.value0())).collect(),
                g: self.tables.g.clone(),
                k: self.tables.k.clone(),
            },
            diag: self.diag.clone(),
        }
    }
}

/// `(μ, lowest n+m, highest n+m)` per stage.
pub(crate) type Plan = &'static [(Mu, u8, u8)];

pub(crate) const LINEAR: Plan = &[([1, 0], 0, 3), ([0, 1], 0, 3)];
pub(crate) const A3201: Plan = &[([0, 1], 4, 5)];
pub(crate) const HIGHER: Plan = &[([0, 1], 4, 5), ([0, 2], 0, 3), ([1, 1], 0, 3), ([0, 3], 0, 3)];

/// Runs parameter stages on top of earlier results.
pub(crate) fn param_stage<B: Backend>(
    backend: &B,
    nl: &dyn Nonlinearity,
    crit: &CriticalCoeffs<B::Val>,
    prev: Option<&ParamCoeffs<B::Val>>,
    plan: Plan,
) -> Result<ParamCoeffs<B::Val>> {
    let (tables, p0) = match prev {
        Some(pc) => (pc.tables.clone(), pc.transversality.map(|t| t.p)),
        None => (crit.tables.clone(), None),
    };
    let mut out_gamma = prev.map(|p| p.gamma.clone()).unwrap_or_default();
    let mut out_q = prev.map(|p| p.q.clone()).unwrap_or_default();
    let mut cond = prev.and_then(|p| p.transversality).map(|t| t.cond);
    let mut eng = Engine::resume(backend, nl, tables, p0);
    for &(mu, lo, hi) in plan {
        if !eng.tables.k.contains_key(&mu) {
            let ks = eng.solve_k(mu)?;
            out_gamma.insert(mu, ks.gamma);
            out_q.insert(mu, ks.q);
            cond.get_or_insert(ks.cond);
        }
        eng.run(&stage_indices(mu, lo, hi))?;
        eng.check_targets(mu);
    }
    let mut diag = eng.diag.clone();
    for d in [Some(&crit.diag), prev.map(|p| &p.diag)].into_iter().flatten() {
        diag.fredholm = diag.fredholm.max(d.fredholm);
        diag.reality = diag.reality.max(d.reality);
        diag.k_target = diag.k_target.max(d.k_target);
        diag.p_drift = diag.p_drift.max(d.p_drift);
    }
    if let Some(pc) = prev {
        diag.warnings = pc.diag.warnings.clone();
    }
    let pmat = eng.transversality_matrix();
    let t = eng.tables;
    let k: BTreeMap<Mu, [f64; 2]> =
        t.k.iter().map(|(mu, v)| (*mu, [v[0] * mu_factorial(*mu), v[1] * mu_factorial(*mu)])).collect();
    let mut b1 = BTreeMap::new();
    let mut b2 = BTreeMap::new();
    for (i, g) in &t.g {
        let mu = [i[2], i[3]];
        if mu == [0, 0] {
            continue;
        }
        match (i[0], i[1]) {
            (1, 0) => {
                b1.insert(mu, g.im * mu_factorial(mu));
            }
            (2, 1) => {
                b2.insert(mu, g.im * mu_factorial(mu));
            }
            _ => {}
        }
    }
    let g3201 = t.g.get(&[3, 2, 0, 1]).copied();
    let exposed: Vec<Idx> = required_set().into_iter().chain(grey_helpers()).filter(|i| i[2] + i[3] > 0).collect();
    let hp = exposed.iter().filter_map(|i| t.h.get(i).map(|v| (*i, v.scale(idx_factorial(*i))))).collect();
    let transversality = match (pmat, cond) {
        (Some(p), Some(cond)) => Some(TransversalityMatrix { p, cond }),
        _ => None,
    };
    Ok(ParamCoeffs {
        k: k.clone(),
        gamma: out_gamma,
        q: out_q,
        b1,
        b2,
        g3201,
        a3201: g3201.map(|g| g.re),
        hp,
        transversality,
        tables: t,
        diag,
    })
}

fn ode_stage<M: VectorField>(
    model: &M,
    gh: &GHPointODE,
    crit: &CriticalCoeffs,
    prev: Option<&ParamCoeffs>,
    plan: Plan,
    d: Derivatives,
) -> Result<ParamCoeffs> {
    let backend = OdeBackend::new(gh)?;
    with_nonlinearity(model, &gh.x0, gh.alpha0, d, |nl| param_stage(&backend, nl, crit, prev, plan))
}

/// `K₁₀, K₀₁`, the linear `b`-coefficients, `b₂,₀₁` and the `H_{nm10}, H_{nm01}` entries up to `n+m = 3`.
pub fn linear_param_coeffs<M: VectorField>(model: &M, gh: &GHPointODE, crit: &CriticalCoeffs) -> Result<ParamCoeffs> {
    ode_stage(model, gh, crit, None, LINEAR, Derivatives::Exact)
}

/// Adds `g₃₂₀₁` and the `H_{nm01}` entries with `n+m ∈ {4, 5}`.
pub fn a3201_coeff<M: VectorField>(
    model: &M,
    gh: &GHPointODE,
    crit: &CriticalCoeffs,
    lin: &ParamCoeffs,
) -> Result<ParamCoeffs> {
    ode_stage(model, gh, crit, Some(lin), A3201, Derivatives::Exact)
}

/// Adds `K₀₂, K₁₁, K₀₃`, their `b`-coefficients and the remaining `H_{nmkl}`.
pub fn higher_param_coeffs<M: VectorField>(
    model: &M,
    gh: &GHPointODE,
    crit: &CriticalCoeffs,
    lin: &ParamCoeffs,
) -> Result<ParamCoeffs> {
    ode_stage(model, gh, crit, Some(lin), HIGHER, Derivatives::Exact)
}

/// All parameter stages at once.
pub fn param_coeffs<M: VectorField>(model: &M, gh: &GHPointODE, crit: &CriticalCoeffs) -> Result<ParamCoeffs> {
    param_coeffs_with(model, gh, crit, Derivatives::Exact)
}

pub fn param_coeffs_with<M: VectorField>(
    model: &M,
    gh: &GHPointODE,
    crit: &CriticalCoeffs,
    d: Derivatives,
) -> Result<ParamCoeffs> {
    let lin = ode_stage(model, gh, crit, None, LINEAR, d)?;
    ode_stage(model, gh, crit, Some(&lin), HIGHER, d)
}
