//! Real jets and multilinear-form extraction by polarization.
//!
//! Complex directions are split into real and imaginary parts, the real span is
//! seeded as jet variables, and the mixed derivative is recovered by contracting
//! the jet coefficients with the product of the direction coordinates.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{c, C64};
use crate::model::{check_finite, VectorField};
use crate::poly::{IndexSet, Poly};

pub const MAX_DEGREE: usize = 7;
pub const MAX_DIRS: usize = 8;

/// Real truncated Taylor polynomial in the seeded directions.
pub type Jet = Poly<f64>;

/// One seeded direction in the product space (state, parameter).
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub state: Vec<C64>,
    pub param: [f64; 2],
}

impl Direction {
    pub fn state(v: Vec<C64>) -> Self {
        Direction { state: v, param: [0.0; 2] }
    }
    pub fn param(n: usize, v: [f64; 2]) -> Self {
        Direction { state: vec![c(0.0, 0.0); n], param: v }
    }
}

/// Jet seeds `x0 + Σ_k t_k r_k`, `α0 + Σ_k t_k s_k` over a real basis `(r_k, s_k)`
/// spanning the requested directions, plus each direction's complex coordinates.
#[derive(Debug, Clone)]
pub struct Seeds {
    pub set: Arc<IndexSet>,
    pub states: Vec<Jet>,
    pub params: Vec<Jet>,
    pub coords: Vec<Vec<C64>>,
}

/// Builds jet seeds for the given directions at `(x0, α0)`.
pub fn seed_jet(x0: &[f64], alpha0: &[f64], dirs: &[Direction], degree: usize) -> Result<Seeds> {
    if degree > MAX_DEGREE {
        return Err(Error::Capability(alloc::format!("jet degree {degree} exceeds {MAX_DEGREE}")));
    }
    if dirs.len() > MAX_DIRS {
        return Err(Error::Capability(alloc::format!("{} directions exceed {MAX_DIRS}", dirs.len())));
    }
    let n = x0.len();
    let dim = n + 2;
    // real vectors of the product space
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for d in dirs {
        let re: Vec<f64> = d.state.iter().map(|z| z.re).chain(d.param.iter().copied()).collect();
        let im: Vec<f64> = d.state.iter().map(|z| z.im).chain([0.0, 0.0]).collect();
        raw.push(re);
        raw.push(im);
    }
    let basis = orthonormal_basis(&raw, dim);
    if basis.len() > MAX_DIRS {
        return Err(Error::Capability(alloc::format!("direction span {} exceeds {MAX_DIRS}", basis.len())));
    }
    let nb = basis.len();
    let set = IndexSet::total_degree(nb, degree);
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let mut p = Jet::zero_on(&set);
        p.coeffs_mut()[0] = x0[i];
        for (k, b) in basis.iter().enumerate() {
            if let Some(pos) = set.variable(k) {
                p.coeffs_mut()[pos] = b[i];
            }
        }
        states.push(p);
    }
    let mut params = Vec::with_capacity(2);
    for j in 0..2 {
        let mut p = Jet::zero_on(&set);
        p.coeffs_mut()[0] = alpha0[j];
        for (k, b) in basis.iter().enumerate() {
            if let Some(pos) = set.variable(k) {
                p.coeffs_mut()[pos] = b[n + j];
            }
        }
        params.push(p);
    }
    let coords = dirs
        .iter()
        .map(|d| {
            basis
                .iter()
                .map(|b| {
                    let mut re = 0.0;
                    let mut im = 0.0;
                    for i in 0..n {
                        re += b[i] * d.state[i].re;
                        im += b[i] * d.state[i].im;
                    }
                    re += b[n] * d.param[0] + b[n + 1] * d.param[1];
                    c(re, im)
                })
                .collect()
        })
        .collect();
    Ok(Seeds { set, states, params, coords })
}

fn orthonormal_basis(vs: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let scale = vs.iter().flat_map(|v| v.iter()).fold(0.0f64, |m, &x| m.max(x.abs()));
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        // two passes of Gram–Schmidt
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= d * bi;
                }
            }
        }
        let nrm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if nrm > 1e-12 * scale.max(1e-300) && basis.len() < dim {
            basis.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    basis
}

/// `D₁ʳ D₂ˢ F(x0, α0)[u₁..u_r; v₁..v_s]`.
#[derive(Debug, Clone)]
pub struct MultilinearQuery {
    pub state_dirs: Vec<Vec<C64>>,
    pub param_dirs: Vec<[f64; 2]>,
}

impl MultilinearQuery {
    pub fn new(state_dirs: Vec<Vec<C64>>, param_dirs: Vec<[f64; 2]>) -> Self {
        MultilinearQuery { state_dirs, param_dirs }
    }

    pub fn order(&self) -> usize {
        self.state_dirs.len() + self.param_dirs.len()
    }
}

/// A flat evaluation `y ↦ F(y, α)` with the state stacked as one vector.
/// For DDEs `y = (x(0), x(−τ₁), …, x(−τ_m))`.
pub struct Flat<'a, M> {
    pub model: &'a M,
}

impl<'a, M: VectorField> Flat<'a, M> {
    pub fn new(model: &'a M) -> Self {
        Flat { model }
    }

    pub fn width(&self) -> usize {
        self.model.dim() * (self.model.delays().len() + 1)
    }

    pub fn eval(&self, y: &[Jet], alpha: &[Jet]) -> Result<Vec<Jet>> {
        let n = self.model.dim();
        let m = self.model.delays().len();
        let parts: Vec<&[Jet]> = (0..=m).map(|j| &y[j * n..(j + 1) * n]).collect();
        let out = self.model.eval(&parts, alpha)?;
        check_finite(&out)?;
        Ok(out)
    }
}

/// Mixed derivative of the model at the point, on stacked state directions.
pub fn multilinear<M: VectorField>(model: &M, y0: &[f64], alpha0: &[f64], q: &MultilinearQuery) -> Result<Vec<C64>> {
    let flat = Flat::new(model);
    let width = flat.width();
    let order = q.order();
    if order == 0 || order > MAX_DEGREE {
        return Err(Error::Capability(alloc::format!("multilinear order {order} outside 1..=7")));
    }
    if q.state_dirs.iter().any(|d| d.len() != width) || y0.len() != width {
        return Err(Error::Invalid("direction length does not match the model state".into()));
    }
    // distinct directions and their multiplicities
    let mut dirs: Vec<Direction> = Vec::new();
    let mut slot_dir: Vec<usize> = Vec::new();
    for s in &q.state_dirs {
        let d = Direction::state(s.clone());
        slot_dir.push(find_or_push(&mut dirs, d));
    }
    for p in &q.param_dirs {
        let d = Direction::param(width, *p);
        slot_dir.push(find_or_push(&mut dirs, d));
    }
    let n_out = model.dim();
    match seed_jet(y0, alpha0, &dirs, order) {
        Ok(seeds) => Ok(contract(&flat, &seeds, &slot_dir, order, n_out)?),
        Err(Error::Capability(_)) => sign_polarization(&flat, y0, alpha0, &dirs, &slot_dir, order, n_out),
        Err(e) => Err(e),
    }
}

fn find_or_push(dirs: &mut Vec<Direction>, d: Direction) -> usize {
    if let Some(i) = dirs.iter().position(|x| *x == d) {
        i
    } else {
        dirs.push(d);
        dirs.len() - 1
    }
}

fn contract<M: VectorField>(
    flat: &Flat<'_, M>,
    seeds: &Seeds,
    slot_dir: &[usize],
    order: usize,
    n_out: usize,
) -> Result<Vec<C64>> {
    let out = flat.eval(&seeds.states, &seeds.params)?;
    let set = &seeds.set;
    let nb = set.nvars();
    // P(x) = Π_slots Σ_k coord_k x_k
    let mut p = Poly::<C64>::constant(c(1.0, 0.0));
    for &d in slot_dir {
        let mut lin = Poly::<C64>::zero_on(set);
        for k in 0..nb {
            if let Some(pos) = set.variable(k) {
                lin.coeffs_mut()[pos] = seeds.coords[d][k];
            }
        }
        p = p.mul_ref(&lin);
    }
    let mut res = vec![c(0.0, 0.0); n_out];
    for i in 0..set.len() {
        if set.degree_of(i) as usize != order {
            continue;
        }
        let pa = p.coeffs()[i];
        if pa == c(0.0, 0.0) {
            continue;
        }
        let mf: f64 = set.exponent(i).iter().map(|&e| factorial(e as usize)).product();
        for (r, o) in res.iter_mut().zip(&out) {
            *r += pa * (mf * o.coeffs()[i]);
        }
    }
    Ok(res)
}

/// Fallback for wide direction spans: polarization over sign patterns, each diagonal
/// derivative read off a two-direction jet.
fn sign_polarization<M: VectorField>(
    flat: &Flat<'_, M>,
    y0: &[f64],
    alpha0: &[f64],
    dirs: &[Direction],
    slot_dir: &[usize],
    order: usize,
    n_out: usize,
) -> Result<Vec<C64>> {
    let width = y0.len();
    let set = IndexSet::total_degree(2, order);
    let mut res = vec![c(0.0, 0.0); n_out];
    let patterns = 1usize << (order - 1);
    for mask in 0..patterns {
        let mut sign = 1.0;
        let mut v = Direction::param(width, [0.0, 0.0]);
        for (slot, &d) in slot_dir.iter().enumerate() {
            let s = if slot > 0 && (mask >> (slot - 1)) & 1 == 1 { -1.0 } else { 1.0 };
            sign *= s;
            for i in 0..width {
                v.state[i] += dirs[d].state[i] * s;
            }
            v.param[0] += s * dirs[d].param[0];
            v.param[1] += s * dirs[d].param[1];
        }
        let ys: Vec<Jet> = (0..width)
            .map(|i| {
                let mut p = Jet::zero_on(&set);
                p.coeffs_mut()[0] = y0[i];
                p.coeffs_mut()[set.variable(0).unwrap()] = v.state[i].re;
                p.coeffs_mut()[set.variable(1).unwrap()] = v.state[i].im;
                p
            })
            .collect();
        let al: Vec<Jet> = (0..2)
            .map(|j| {
                let mut p = Jet::zero_on(&set);
                p.coeffs_mut()[0] = alpha0[j];
                p.coeffs_mut()[set.variable(0).unwrap()] = v.param[j];
                p
            })
            .collect();
        let out = flat.eval(&ys, &al)?;
        // D^N F[v^N] = N! Σ_k i^k coef[t^{N-k} s^k]
        let mut ik = c(1.0, 0.0);
        for k in 0..=order {
            let e = [(order - k) as u8, k as u8];
            let pos = set.position(&e).unwrap();
            for (r, o) in res.iter_mut().zip(&out) {
                *r += ik * (sign * o.coeffs()[pos]);
            }
            ik *= c(0.0, 1.0);
        }
    }
    // 1/(2^{N-1} N!) from polarization times N! from the diagonal
    let scale = 1.0 / (patterns as f64);
    for r in res.iter_mut() {
        *r *= scale;
    }
    Ok(res)
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}
