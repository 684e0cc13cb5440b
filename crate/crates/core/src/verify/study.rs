use alloc::vec::Vec;

use super::lpc::{correct_lpc, CorrectorOptions, LpcSeed};
use super::residual::dde_residual;
use crate::error::{Error, Result};
use crate::model::VectorField;
use crate::predictor::{psi_grid, Order, Predictor, DEFAULT_PSI_POINTS};

/// Least-squares line through `(log x, log y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the fit residuals in log space.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Invalid("slope fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| libm::log(*x)).collect();
    let ly: Vec<f64> = ys.iter().map(|y| libm::log(*y)).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx.iter().zip(&ly).map(|(x, y)| { let r = y - intercept - slope * x; r * r }).sum();
    Ok(SlopeFit { slope, intercept, residual: libm::sqrt(ss / n), points: xs.len() })
}

/// Fit over the points with `floor < y < ceiling`; at least four are required.
pub fn fit_window(xs: &[f64], ys: &[f64], floor: f64, ceiling: f64) -> Result<SlopeFit> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        xs.iter().zip(ys).filter(|(_, y)| y.is_finite() && **y > floor && **y < ceiling).map(|(a, b)| (*a, *b)).unzip();
    if x.len() < 4 {
        return Err(Error::Invalid(alloc::format!("only {} usable points in the fit window", x.len())));
    }
    fit_slope(&x, &y)
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub eps_grid: Vec<f64>,
    /// Errors per ε; NaN where the reference could not be computed.
    pub errors_first: Vec<f64>,
    pub errors_higher: Vec<f64>,
    pub slope_first: f64,
    pub slope_higher: f64,
    pub fit_first: SlopeFit,
    pub fit_higher: SlopeFit,
    /// Error window `(floor, ceiling)` used by the fits.
    pub window: [f64; 2],
    /// Newton iterations of the reference correction per ε (ODE studies only).
    pub iterations: Vec<Option<usize>>,
}

fn stacked(alpha: [f64; 2], t: f64, x: &[f64]) -> Vec<f64> {
    let mut v = alloc::vec![alpha[0], alpha[1], t];
    v.extend_from_slice(x);
    v
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let r: f64 = b.iter().map(|y| y * y).sum();
    libm::sqrt(d / r)
}

fn report(eps: &[f64], e1: Vec<f64>, eh: Vec<f64>, window: [f64; 2], iterations: Vec<Option<usize>>) -> Result<ConvergenceReport> {
    let f1 = fit_window(eps, &e1, window[0], window[1])?;
    let fh = fit_window(eps, &eh, window[0], window[1])?;
    Ok(ConvergenceReport {
        eps_grid: eps.to_vec(),
        errors_first: e1,
        errors_higher: eh,
        slope_first: f1.slope,
        slope_higher: fh.slope,
        fit_first: f1,
        fit_higher: fh,
        window,
        iterations,
    })
}

/// Relative error of both predictors on `(α, T, x₀)` against one reference point per ε.
///
/// The reference is the Newton correction of the higher-order seed onto the
/// pseudo-arclength hyperplane through that seed, so the two orders are measured
/// against the same fold point.
pub fn ode_convergence_study<M: VectorField>(
    model: &M,
    pred: &Predictor,
    eps_grid: &[f64],
    opts: &CorrectorOptions,
) -> Result<ConvergenceReport> {
    let psi = psi_grid(DEFAULT_PSI_POINTS);
    let opts = CorrectorOptions { min_iter: opts.min_iter.max(1), ..*opts };
    let (mut e1, mut eh) = (Vec::new(), Vec::new());
    let mut iterations = Vec::new();
    for &eps in eps_grid {
        let sh = pred.sample(eps, &psi, Order::Higher)?;
        let s1 = pred.sample(eps, &psi, Order::First)?;
        match correct_lpc(model, &LpcSeed::from(&sh), &opts) {
            Ok(c) => {
                let r = c.stacked();
                e1.push(rel_err(&stacked(s1.alpha, s1.period, &s1.orbit[0]), &r));
                eh.push(rel_err(&stacked(sh.alpha, sh.period, &sh.orbit[0]), &r));
                iterations.push(Some(c.iterations));
            }
            Err(Error::Convergence(_)) => {
                e1.push(f64::NAN);
                eh.push(f64::NAN);
                iterations.push(None);
            }
            Err(e) => return Err(e),
        }
    }
    report(eps_grid, e1, eh, [10.0 * opts.newton_tol, 0.1], iterations)
}

/// Residual-order study for models with delays: the error is [`dde_residual`] of each predicted orbit.
pub fn dde_convergence_study<M: VectorField>(
    model: &M,
    pred: &Predictor,
    eps_grid: &[f64],
    psi_points: usize,
) -> Result<ConvergenceReport> {
    let psi = psi_grid(psi_points);
    let mut errs = [Vec::new(), Vec::new()];
    for &eps in eps_grid {
        for (k, order) in [Order::First, Order::Higher].into_iter().enumerate() {
            errs[k].push(dde_residual(model, &pred.sample(eps, &psi, order)?)?);
        }
    }
    let [e1, eh] = errs;
    report(eps_grid, e1, eh, [1e-12, 0.1], alloc::vec![None; eps_grid.len()])
}
