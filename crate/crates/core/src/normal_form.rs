//! Index-by-index solution of the homological equation
//! `H_w G + H_w̄ Ḡ = F(H, K)` for the generalized Hopf normal form.
//!
//! Coefficients are stored raw: `h_I` multiplies `w^n w̄^m β₁^k β₂^l` directly, so
//! the normalized `H_I = n!m!k!l!·h_I`. The linear-algebra side is
//! supplied by a [`Backend`] (ODE vectors or DDE history functions), the Taylor
//! coefficients of the composition by a [`Nonlinearity`].

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::jets::{factorial, multilinear, MultilinearQuery};
use crate::model::{check_finite, VectorField};
use crate::poly::{IndexSet, Poly};
use crate::scalar::Series;

/// Exponent `(n, m, k, l)` of `w^n w̄^m β₁^k β₂^l`.
pub type Idx = [u8; 4];
/// Parameter exponent `(k, l)`.
pub type Mu = [u8; 2];

pub const STAGES: [Mu; 6] = [[0, 0], [1, 0], [0, 1], [0, 2], [1, 1], [0, 3]];

pub fn swap(i: Idx) -> Idx {
    [i[1], i[0], i[2], i[3]]
}

pub fn idx_factorial(i: Idx) -> f64 {
    i.iter().map(|&e| factorial(e as usize)).product()
}

pub fn mu_factorial(mu: Mu) -> f64 {
    factorial(mu[0] as usize) * factorial(mu[1] as usize)
}

/// Stored coefficient objects (complex vectors or history functions).
pub trait Coeff: Clone + core::fmt::Debug {
    fn scale(&self, s: f64) -> Self;
    /// Value at `θ = 0`.
    fn value0(&self) -> Vec<C64>;
    /// Value at `θ ≤ 0`; constant for plain vectors.
    fn value_at(&self, theta: f64) -> Vec<C64>;
}

impl Coeff for Vec<C64> {
    fn scale(&self, s: f64) -> Self {
        self.iter().map(|z| z * s).collect()
    }
    fn value0(&self) -> Vec<C64> {
        self.clone()
    }
    fn value_at(&self, _theta: f64) -> Vec<C64> {
        self.clone()
    }
}

/// Linear operators of the homological equation at one index.
///
/// For index `I` with `λ = (n−m)iω₀` the unknown `v` solves
/// `(λ − L) v = η + f − g φ`, where `η` is the nonlinear coefficient at `I` and
/// `f` collects the known normal-form terms.
pub trait Backend {
    type Val: Coeff;
    fn omega0(&self) -> f64;
    /// Critical eigenfunction.
    fn phi(&self) -> Self::Val;
    fn zero(&self, rate: C64) -> Self::Val;
    fn conj(&self, v: &Self::Val) -> Self::Val;
    fn axpy(&self, a: C64, x: &Self::Val, y: &mut Self::Val);
    /// Values fed to the model, stacked over `θ = 0, −τ₁, …, −τ_m`.
    fn sample(&self, v: &Self::Val) -> Vec<C64>;
    /// Scale of a right-hand side, for relative residuals.
    fn size(&self, eta: &[C64], f: &Self::Val) -> f64;
    /// Solvability functional; `g` with `η + f − gφ` consistent.
    fn fredholm(&self, lam: C64, eta: &[C64], f: &Self::Val) -> C64;
    fn solve_regular(&self, lam: C64, eta: &[C64], f: &Self::Val) -> Result<Self::Val>;
    /// Normalized solution of a consistent resonant system.
    fn solve_bordered(&self, lam: C64, eta: &[C64], f: &Self::Val) -> Result<Self::Val>;
}

/// Coefficient at `I` of `F(y₀ + Σ h_J z^J, α₀ + Σ k_μ β^μ)` over the stored entries.
///
/// The unknown `h_I` is not stored when this is called, so the term `L h_I` is absent.
pub trait Nonlinearity {
    fn coeff(&self, idx: Idx, h: &BTreeMap<Idx, Vec<C64>>, k: &BTreeMap<Mu, [f64; 2]>) -> Result<Vec<C64>>;
}

/// How Taylor coefficients of the right-hand side are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Derivatives {
    /// Direct series composition of the model.
    #[default]
    Exact,
    /// Sums of multilinear forms, each extracted from real jets by polarization.
    Jets,
}

/// Composes the model with complex truncated series in `(w, w̄, β₁, β₂)`.
pub struct SeriesComposition<'a, M> {
    model: &'a M,
    x0: Vec<f64>,
    alpha0: [f64; 2],
    sets: RefCell<BTreeMap<Idx, Arc<IndexSet>>>,
}

impl<'a, M: VectorField> SeriesComposition<'a, M> {
    pub fn new(model: &'a M, x0: &[f64], alpha0: [f64; 2]) -> Self {
        SeriesComposition { model, x0: x0.to_vec(), alpha0, sets: RefCell::new(BTreeMap::new()) }
    }

    fn set_for(&self, idx: Idx) -> Arc<IndexSet> {
        self.sets
            .borrow_mut()
            .entry(idx)
            .or_insert_with(|| IndexSet::downward_closure(4, &[idx.to_vec()]))
            .clone()
    }
}

impl<M: VectorField> Nonlinearity for SeriesComposition<'_, M> {
    fn coeff(&self, idx: Idx, h: &BTreeMap<Idx, Vec<C64>>, k: &BTreeMap<Mu, [f64; 2]>) -> Result<Vec<C64>> {
        let set = self.set_for(idx);
        let n = self.model.dim();
        let m = self.model.delays().len();
        let keys: Vec<Idx> = (0..set.len()).map(|p| to_idx(set.exponent(p))).collect();
        let states: Vec<Vec<Series>> = (0..=m)
            .map(|j| {
                (0..n)
                    .map(|i| {
                        let mut cf = vec![c(0.0, 0.0); set.len()];
                        for (p, key) in keys.iter().enumerate() {
                            if p == 0 {
                                cf[0] = c(self.x0[i], 0.0);
                            } else if let Some(v) = h.get(key) {
                                cf[p] = v[j * n + i];
                            }
                        }
                        Poly::from_coeffs(&set, cf)
                    })
                    .collect()
            })
            .collect();
        let params: Vec<Series> = (0..2)
            .map(|r| {
                let mut cf = vec![c(0.0, 0.0); set.len()];
                cf[0] = c(self.alpha0[r], 0.0);
                for (p, key) in keys.iter().enumerate().skip(1) {
                    if key[0] == 0 && key[1] == 0 {
                        if let Some(v) = k.get(&[key[2], key[3]]) {
                            cf[p] = c(v[r], 0.0);
                        }
                    }
                }
                Poly::from_coeffs(&set, cf)
            })
            .collect();
        let refs: Vec<&[Series]> = states.iter().map(|v| v.as_slice()).collect();
        let out = self.model.eval(&refs, &params)?;
        check_finite(&out)?;
        let pos = set.position(&idx).expect("generator lies in its closure");
        Ok(out.iter().map(|s| s.coeffs().get(pos).copied().unwrap_or(c(0.0, 0.0))).collect())
    }
}

fn to_idx(e: &[u8]) -> Idx {
    [e[0], e[1], e[2], e[3]]
}

/// The same coefficient written as a sum of multilinear forms
/// `D₁ʳD₂ˢF[h_{J₁},…,h_{J_r}; k_{μ₁},…,k_{μ_s}] / Π mult!` over all
/// multisets of stored exponents adding up to `I`.
pub struct TermList<'a, M> {
    model: &'a M,
    y0: Vec<f64>,
    alpha0: [f64; 2],
}

impl<'a, M: VectorField> TermList<'a, M> {
    pub fn new(model: &'a M, x0: &[f64], alpha0: [f64; 2]) -> Self {
        let m = model.delays().len();
        let y0 = (0..=m).flat_map(|_| x0.iter().copied()).collect();
        TermList { model, y0, alpha0 }
    }
}

/// One summand of a [`TermList`] expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    /// State arguments with multiplicities.
    pub states: Vec<(Idx, u8)>,
    /// Parameter arguments with multiplicities.
    pub params: Vec<(Mu, u8)>,
}


impl Term {
    pub fn order(&self) -> usize {
        let r: usize = self.states.iter().map(|(_, m)| *m as usize).sum();
        let s: usize = self.params.iter().map(|(_, m)| *m as usize).sum();
        r + s
    }

    /// `1 / Π mult!`.
    pub fn weight(&self) -> f64 {
        let d: f64 = self
            .states
            .iter()
            .map(|(_, m)| factorial(*m as usize))
            .chain(self.params.iter().map(|(_, m)| factorial(*m as usize)))
            .product();
        1.0 / d
    }
}

/// All multisets of state exponents (nonzero) and parameter exponents adding up to `idx`.
pub fn terms_for(idx: Idx, states: &[Idx], params: &[Mu]) -> Vec<Term> {
    let le = |a: &Idx| a.iter().zip(&idx).all(|(x, y)| x <= y);
    let mut parts: Vec<(bool, Idx)> = Vec::new();
    for s in states {
        if *s != [0; 4] && le(s) {
            parts.push((true, *s));
        }
    }
    for p in params {
        let e = [0, 0, p[0], p[1]];
        if e != [0; 4] && le(&e) {
            parts.push((false, e));
        }
    }
    let mut out = Vec::new();
    let mut counts = vec![0u8; parts.len()];
    fn rec(i: usize, rem: Idx, parts: &[(bool, Idx)], counts: &mut Vec<u8>, out: &mut Vec<Term>) {
        if rem == [0; 4] {
            let mut t = Term { states: Vec::new(), params: Vec::new() };
            for (k, &n) in counts.iter().enumerate() {
                if n == 0 {
                    continue;
                }
                let (is_state, e) = parts[k];
                if is_state {
                    t.states.push((e, n));
                } else {
                    t.params.push(([e[2], e[3]], n));
                }
            }
            out.push(t);
            return;
        }
        if i == parts.len() {
            return;
        }
        // skip part i
        rec(i + 1, rem, parts, counts, out);
        let e = parts[i].1;
        let mut r = rem;
        loop {
            if !r.iter().zip(&e).all(|(x, y)| x >= y) {
                break;
            }
            for v in 0..4 {
                r[v] -= e[v];
            }
            counts[i] += 1;
            rec(i + 1, r, parts, counts, out);
        }
        counts[i] = 0;
    }
    rec(0, idx, &parts, &mut counts, &mut out);
    out
}

impl<M: VectorField> Nonlinearity for TermList<'_, M> {
    fn coeff(&self, idx: Idx, h: &BTreeMap<Idx, Vec<C64>>, k: &BTreeMap<Mu, [f64; 2]>) -> Result<Vec<C64>> {
        let skeys: Vec<Idx> = h.keys().copied().filter(|j| *j != idx).collect();
        let pkeys: Vec<Mu> = k.keys().copied().collect();
        let n = self.model.dim();
        let mut acc = vec![c(0.0, 0.0); n];
        for t in terms_for(idx, &skeys, &pkeys) {
            let mut sd = Vec::new();
            for (j, mult) in &t.states {
                for _ in 0..*mult {
                    sd.push(h[j].clone());
                }
            }
            let mut pd = Vec::new();
            for (mu, mult) in &t.params {
                for _ in 0..*mult {
                    pd.push(k[mu]);
                }
            }
            let v = multilinear(self.model, &self.y0, &self.alpha0, &MultilinearQuery::new(sd, pd))?;
            let w = t.weight();
            for (a, b) in acc.iter_mut().zip(v) {
                *a += b * w;
            }
        }
        Ok(acc)
    }
}

/// Center-manifold indices needed by the orbit and parameter predictors, both orientations.
pub fn required_set() -> BTreeSet<Idx> {
    let mut s = BTreeSet::new();
    let mut add = |nm: u8, mu: Mu| {
        for n in 0..=nm {
            let i = [n, nm - n, mu[0], mu[1]];
            s.insert(i);
        }
    };
    for d in 1..=7 {
        add(d, [0, 0]);
    }
    for d in 0..=1 {
        for mu in [[1, 0], [0, 1], [0, 2], [1, 1], [0, 3]] {
            add(d, mu);
        }
    }
    for d in 2..=3 {
        for mu in [[1, 0], [0, 1], [0, 2]] {
            add(d, mu);
        }
    }
    for d in 4..=5 {
        add(d, [0, 1]);
    }
    s
}

/// Helpers solved only to close the cubic parameter system.
pub fn grey_helpers() -> BTreeSet<Idx> {
    [[1, 1, 0, 3], [2, 0, 0, 3], [0, 2, 0, 3], [2, 1, 0, 3], [1, 2, 0, 3]].into_iter().collect()
}

/// Entries of the mixed quadratic stage that its solvability condition needs.
pub fn mixed_intermediates() -> BTreeSet<Idx> {
    [[2, 0, 1, 1], [0, 2, 1, 1], [1, 1, 1, 1], [2, 1, 1, 1], [1, 2, 1, 1]].into_iter().collect()
}

/// Downward closure of the required, grey and intermediate indices.
pub fn working_set() -> BTreeSet<Idx> {
    let gens: Vec<Vec<u8>> =
        required_set().into_iter().chain(grey_helpers()).chain(mixed_intermediates()).map(|i| i.to_vec()).collect();
    let set = IndexSet::downward_closure(4, &gens);
    (0..set.len()).map(|p| to_idx(set.exponent(p))).filter(|i| *i != [0; 4]).collect()
}

/// Representatives (`n ≥ m`) of the working set at parameter exponent `mu`,
/// with `lo ≤ n+m ≤ hi`, in solution order.
pub fn stage_indices(mu: Mu, lo: u8, hi: u8) -> Vec<Idx> {
    let mut v: Vec<Idx> = working_set()
        .into_iter()
        .filter(|i| i[2] == mu[0] && i[3] == mu[1] && i[0] >= i[1])
        .filter(|i| (lo..=hi).contains(&(i[0] + i[1])))
        .collect();
    v.sort_by_key(|i| (i[0] + i[1], core::cmp::Reverse(i[0])));
    v
}

/// Raw coefficient tables of `H`, `G` and `K`.
#[derive(Debug, Clone)]
pub struct Tables<V> {
    pub h: BTreeMap<Idx, V>,
    pub g: BTreeMap<Idx, C64>,
    pub k: BTreeMap<Mu, [f64; 2]>,
}

/// Runtime checks gathered while solving.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Largest relative Fredholm residual before a bordered solve.
    pub fredholm: f64,
    /// Largest imaginary part of a self-conjugate entry, relative.
    pub reality: f64,
    /// Largest violation of the normal-form targets after a parameter stage.
    pub k_target: f64,
    /// Largest difference between the transversality matrix recomputed per stage and the first one.
    pub p_drift: f64,
    pub warnings: Vec<String>,
}

/// Result of the 2×2 system for `K_μ`, in normalized (`K_μ = μ!·k_μ`) units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSolve {
    pub p: [[f64; 2]; 2],
    pub q: [f64; 2],
    pub gamma: [f64; 2],
    pub cond: f64,
}

pub const TRANSVERSALITY_COND_MAX: f64 = 1e8;

/// Incremental solver over a growing coefficient table.
pub struct Engine<'a, B: Backend> {
    backend: &'a B,
    nl: &'a dyn Nonlinearity,
    pub tables: Tables<B::Val>,
    sampled: BTreeMap<Idx, Vec<C64>>,
    p_matrix: Option<[[f64; 2]; 2]>,
    pub diag: Diagnostics,
}

impl<'a, B: Backend> Engine<'a, B> {
    pub fn new(backend: &'a B, nl: &'a dyn Nonlinearity) -> Self {
        let phi = backend.phi();
        let mut e = Engine {
            backend,
            nl,
            tables: Tables { h: BTreeMap::new(), g: BTreeMap::new(), k: BTreeMap::new() },
            sampled: BTreeMap::new(),
            p_matrix: None,
            diag: Diagnostics::default(),
        };
        e.insert([1, 0, 0, 0], phi);
        e.tables.g.insert([1, 0, 0, 0], c(0.0, backend.omega0()));
        e
    }

    /// Resumes from previously computed tables.
    pub fn resume(backend: &'a B, nl: &'a dyn Nonlinearity, tables: Tables<B::Val>, p: Option<[[f64; 2]; 2]>) -> Self {
        let sampled = tables.h.iter().map(|(i, v)| (*i, backend.sample(v))).collect();
        Engine { backend, nl, tables, sampled, p_matrix: p, diag: Diagnostics::default() }
    }

    pub fn transversality_matrix(&self) -> Option<[[f64; 2]; 2]> {
        self.p_matrix
    }

    fn insert(&mut self, idx: Idx, v: B::Val) {
        if idx[0] != idx[1] {
            let cv = self.backend.conj(&v);
            self.sampled.insert(swap(idx), self.backend.sample(&cv));
            self.tables.h.insert(swap(idx), cv);
        }
        self.sampled.insert(idx, self.backend.sample(&v));
        self.tables.h.insert(idx, v);
    }

    fn remove(&mut self, idx: Idx) {
        for i in [idx, swap(idx)] {
            self.tables.h.remove(&i);
            self.sampled.remove(&i);
        }
        self.tables.g.remove(&idx);
    }

    fn rate(&self, idx: Idx) -> C64 {
        c(0.0, (idx[0] as f64 - idx[1] as f64) * self.backend.omega0())
    }

    /// `(λ, η, f)` at `idx` from the current tables.
    fn rhs(&self, idx: Idx) -> Result<(C64, Vec<C64>, B::Val)> {
        let lam = self.rate(idx);
        let eta = self.nl.coeff(idx, &self.sampled, &self.tables.k)?;
        let mut f = self.backend.zero(lam);
        for (l, gl) in &self.tables.g {
            // J − e₁ + L = I
            if let Some(j) = sub_add(idx, [1, 0, 0, 0], *l) {
                if let Some(hj) = self.tables.h.get(&j) {
                    self.backend.axpy(-(*gl) * j[0] as f64, hj, &mut f);
                }
            }
            // J − e₂ + swap(L) = I
            if let Some(j) = sub_add(idx, [0, 1, 0, 0], swap(*l)) {
                if let Some(hj) = self.tables.h.get(&j) {
                    self.backend.axpy(-gl.conj() * j[1] as f64, hj, &mut f);
                }
            }
        }
        Ok((lam, eta, f))
    }

    fn solve(&mut self, idx: Idx) -> Result<()> {
        let (lam, eta, mut f) = self.rhs(idx)?;
        let v = if idx[0] == idx[1] + 1 {
            let g = self.backend.fredholm(lam, &eta, &f);
            let phi = self.backend.phi();
            self.backend.axpy(-g, &phi, &mut f);
            let res = self.backend.fredholm(lam, &eta, &f).norm() / self.backend.size(&eta, &f).max(1e-300);
            self.diag.fredholm = self.diag.fredholm.max(res);
            self.tables.g.insert(idx, g);
            self.backend.solve_bordered(lam, &eta, &f)?
        } else {
            self.backend.solve_regular(lam, &eta, &f)?
        };
        if idx[0] == idx[1] {
            let s = self.backend.sample(&v);
            let im: f64 = libm::sqrt(s.iter().map(|z| z.im * z.im).sum::<f64>());
            let all: f64 = libm::sqrt(s.iter().map(|z| z.norm_sqr()).sum::<f64>());
            self.diag.reality = self.diag.reality.max(im / (1.0 + all));
        }
        self.insert(idx, v);
        Ok(())
    }

    /// Solves every listed index (representatives `n ≥ m`) not yet in the table.
    pub fn run(&mut self, idxs: &[Idx]) -> Result<()> {
        for &i in idxs {
            if !self.tables.h.contains_key(&i) {
                self.solve(i)?;
            }
        }
        Ok(())
    }

    /// `(Re g_{10μ}, Re g_{21μ})` with trial `k_μ = gamma`; the table is left unchanged.
    fn probe(&mut self, mu: Mu, gamma: [f64; 2]) -> Result<[f64; 2]> {
        let low = [[0, 0, mu[0], mu[1]], [1, 0, mu[0], mu[1]], [1, 1, mu[0], mu[1]], [2, 0, mu[0], mu[1]]];
        self.tables.k.insert(mu, gamma);
        let mut out = self.run(&low).and_then(|_| {
            let top = [2, 1, mu[0], mu[1]];
            let (lam, eta, f) = self.rhs(top)?;
            let g21 = self.backend.fredholm(lam, &eta, &f);
            Ok([self.tables.g[&low[1]].re, g21.re])
        });
        for i in low {
            self.remove(i);
        }
        self.tables.k.remove(&mu);
        if let Ok(r) = &mut out {
            if !r.iter().all(|x| x.is_finite()) {
                return Err(Error::Evaluation("non-finite solvability value".into()));
            }
        }
        out
    }

    /// Solves for `k_μ` so that `Re g_{10μ} = δ^{10}_μ` and `Re g_{21μ} = δ^{01}_μ`, and stores it.
    ///
    /// Both conditions are affine in `k_μ` with the same linear part at every stage.
    pub fn solve_k(&mut self, mu: Mu) -> Result<KSolve> {
        let target = [if mu == [1, 0] { 1.0 } else { 0.0 }, if mu == [0, 1] { 1.0 } else { 0.0 }];
        let r0 = self.probe(mu, [0.0, 0.0])?;
        let r1 = self.probe(mu, [1.0, 0.0])?;
        let r2 = self.probe(mu, [0.0, 1.0])?;
        let here = [[r1[0] - r0[0], r2[0] - r0[0]], [r1[1] - r0[1], r2[1] - r0[1]]];
        let p = match self.p_matrix {
            Some(p) => {
                let scale = p.iter().flatten().fold(0.0f64, |a, x| a.max(x.abs()));
                let d = (0..4).map(|k| (p[k / 2][k % 2] - here[k / 2][k % 2]).abs()).fold(0.0, f64::max);
                self.diag.p_drift = self.diag.p_drift.max(d / scale.max(1e-300));
                p
            }
            None => {
                self.p_matrix = Some(here);
                here
            }
        };
        let q = [target[0] - r0[0], target[1] - r0[1]];
        let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
        let n1 = (p[0][0].abs() + p[1][0].abs()).max(p[0][1].abs() + p[1][1].abs());
        let inv = [[p[1][1] / det, -p[0][1] / det], [-p[1][0] / det, p[0][0] / det]];
        let ninv = (inv[0][0].abs() + inv[1][0].abs()).max(inv[0][1].abs() + inv[1][1].abs());
        let cond = n1 * ninv;
        if !cond.is_finite() || cond > TRANSVERSALITY_COND_MAX {
            return Err(Error::Transversality { cond: if cond.is_finite() { cond } else { f64::INFINITY } });
        }
        let gamma = [inv[0][0] * q[0] + inv[0][1] * q[1], inv[1][0] * q[0] + inv[1][1] * q[1]];
        self.tables.k.insert(mu, gamma);
        let f = mu_factorial(mu);
        Ok(KSolve { p, q: [q[0] * f, q[1] * f], gamma: [gamma[0] * f, gamma[1] * f], cond })
    }

    /// Records how well the stage-`mu` targets hold after its final run.
    pub fn check_targets(&mut self, mu: Mu) {
        let target = [if mu == [1, 0] { 1.0 } else { 0.0 }, if mu == [0, 1] { 1.0 } else { 0.0 }];
        for (i, t) in [([1, 0, mu[0], mu[1]], target[0]), ([2, 1, mu[0], mu[1]], target[1])] {
            if let Some(g) = self.tables.g.get(&i) {
                self.diag.k_target = self.diag.k_target.max((g.re - t).abs());
            }
        }
    }
}

/// `I + a − b` if nonnegative.
fn sub_add(i: Idx, a: Idx, b: Idx) -> Option<Idx> {
    let mut r = [0u8; 4];
    for v in 0..4 {
        let x = i[v] as i32 + a[v] as i32 - b[v] as i32;
        if x < 0 {
            return None;
        }
        r[v] = x as u8;
    }
    Some(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn working_set_is_required_plus_helpers() {
        let w = working_set();
        let mut expect = required_set();
        expect.extend(grey_helpers());
        expect.extend(mixed_intermediates());
        assert_eq!(w, expect);
        for i in &w {
            assert!(w.contains(&swap(*i)));
        }
    }

    #[test]
    fn term_lists_count_partitions() {
        // w²w̄ with q, q̄ and the quadratic entries available
        let states = [[1, 0, 0, 0], [0, 1, 0, 0], [2, 0, 0, 0], [1, 1, 0, 0], [0, 2, 0, 0]];
        let t = terms_for([2, 1, 0, 0], &states, &[]);
        // C(q,q,q̄)/2, B(q,h11), B(q̄,h20)
        assert_eq!(t.len(), 3);
        let cubic = t.iter().find(|t| t.order() == 3).unwrap();
        assert_eq!(cubic.weight(), 0.5);
    }

    #[test]
    fn stage_order_is_by_degree() {
        let s = stage_indices([0, 1], 0, 5);
        assert_eq!(s.first(), Some(&[0, 0, 0, 1]));
        assert!(s.windows(2).all(|w| w[0][0] + w[0][1] <= w[1][0] + w[1][1]));
        assert_eq!(s.len(), 12);
    }
}
