//! Serialized forms of coefficient reports, predictor curves and studies.

use std::collections::BTreeMap;

use ghlpc_core::dde::HistoryFn;
use ghlpc_core::ghode::CriticalCoeffs;
use ghlpc_core::ghode_params::ParamCoeffs;
use ghlpc_core::normal_form::{Coeff, Diagnostics, Mu};
use ghlpc_core::verify::{ConvergenceReport, SlopeFit};
use ghlpc_core::C64;
use serde::Serialize;

use crate::analysis::Analysis;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for Complex {
    fn from(z: C64) -> Self {
        Complex { re: z.re, im: z.im }
    }
}

fn cvec(v: &[C64]) -> Vec<Complex> {
    v.iter().map(|z| (*z).into()).collect()
}

fn mu_key(mu: &Mu) -> String {
    format!("{}{}", mu[0], mu[1])
}

#[derive(Debug, Serialize)]
pub struct GhPointJson {
    pub x: Vec<f64>,
    pub alpha: [f64; 2],
    pub omega0: f64,
    pub q: Vec<Complex>,
    pub p: Vec<Complex>,
}

#[derive(Debug, Serialize)]
pub struct TermJson {
    pub rate: Complex,
    /// `coeffs[k]` multiplies `θ^k e^{rate·θ}`.
    pub coeffs: Vec<Vec<Complex>>,
}

#[derive(Debug, Serialize)]
pub struct HEntry {
    /// Value at `θ = 0` (the vector itself for ODEs).
    pub value: Vec<Complex>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermJson>>,
}

trait Entry {
    fn entry(&self) -> HEntry;
}

impl Entry for Vec<C64> {
    fn entry(&self) -> HEntry {
        HEntry { value: cvec(self), terms: None }
    }
}

impl Entry for HistoryFn {
    fn entry(&self) -> HEntry {
        let terms = self
            .terms
            .iter()
            .map(|t| TermJson { rate: t.rate.into(), coeffs: t.coeffs.iter().map(|c| cvec(c)).collect() })
            .collect();
        HEntry { value: cvec(&self.eval(0.0)), terms: Some(terms) }
    }
}

#[derive(Debug, Serialize)]
pub struct DiagnosticsJson {
    pub fredholm: f64,
    pub reality: f64,
    pub k_target: f64,
    pub p_drift: f64,
    pub warnings: Vec<String>,
}

impl From<&Diagnostics> for DiagnosticsJson {
    fn from(d: &Diagnostics) -> Self {
        DiagnosticsJson {
            fredholm: d.fredholm,
            reality: d.reality,
            k_target: d.k_target,
            p_drift: d.p_drift,
            warnings: d.warnings.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CoeffReport {
    pub schema: u32,
    pub model: String,
    pub kind: &'static str,
    pub backend: &'static str,
    pub gh_point: GhPointJson,
    pub omega0: f64,
    pub c1: Complex,
    pub c2: Complex,
    pub c3: Complex,
    pub l1: f64,
    pub l2: f64,
    pub d2: f64,
    pub d3: f64,
    pub a3201: Option<f64>,
    pub g3201: Option<Complex>,
    /// Normalized `K_μ`, keyed by `μ₁μ₂`.
    #[serde(rename = "K")]
    pub k: BTreeMap<String, [f64; 2]>,
    pub b1: BTreeMap<String, f64>,
    pub b2: BTreeMap<String, f64>,
    /// Normalized `H_{nmkl}`, keyed by `nmkl`.
    #[serde(rename = "H")]
    pub h: BTreeMap<String, HEntry>,
    pub diagnostics: DiagnosticsJson,
}

fn coeff_report<V: Coeff + Entry>(
    model: &str,
    backend: &'static str,
    gh: GhPointJson,
    crit: &CriticalCoeffs<V>,
    params: &ParamCoeffs<V>,
    kind: &'static str,
) -> CoeffReport {
    let mut h: BTreeMap<String, HEntry> =
        crit.h.iter().map(|((n, m), v)| (format!("{n}{m}00"), v.entry())).collect();
    h.extend(params.hp.iter().map(|(i, v)| (format!("{}{}{}{}", i[0], i[1], i[2], i[3]), v.entry())));
    let mut diag = DiagnosticsJson::from(&params.diag);
    diag.fredholm = diag.fredholm.max(crit.diag.fredholm);
    diag.warnings.extend(crit.diag.warnings.iter().cloned());
    CoeffReport {
        schema: SCHEMA,
        model: model.to_string(),
        kind,
        backend,
        gh_point: gh,
        omega0: crit.omega0,
        c1: crit.c1.into(),
        c2: crit.c2.into(),
        c3: crit.c3.into(),
        l1: crit.l1,
        l2: crit.l2,
        d2: crit.d2,
        d3: crit.d3,
        a3201: params.a3201,
        g3201: params.g3201.map(Into::into),
        k: params.k.iter().map(|(m, v)| (mu_key(m), *v)).collect(),
        b1: params.b1.iter().map(|(m, v)| (mu_key(m), *v)).collect(),
        b2: params.b2.iter().map(|(m, v)| (mu_key(m), *v)).collect(),
        h,
        diagnostics: diag,
    }
}

impl CoeffReport {
    pub fn new(model: &str, backend: &'static str, a: &Analysis) -> Self {
        match a {
            Analysis::Ode { gh, crit, params } => {
                let g = GhPointJson { x: gh.x0.clone(), alpha: gh.alpha0, omega0: gh.omega0, q: cvec(&gh.q), p: cvec(&gh.p) };
                coeff_report(model, backend, g, crit, params, "ode")
            }
            Analysis::Dde { gh, crit, params } => {
                let g = GhPointJson { x: gh.x0.clone(), alpha: gh.alpha0, omega0: gh.omega0, q: cvec(&gh.q), p: cvec(&gh.p) };
                coeff_report(model, backend, g, crit, params, "dde")
            }
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FitJson {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub points: usize,
}

impl From<&SlopeFit> for FitJson {
    fn from(f: &SlopeFit) -> Self {
        FitJson { slope: f.slope, intercept: f.intercept, residual: f.residual, points: f.points }
    }
}

fn finite(v: &[f64]) -> Vec<Option<f64>> {
    v.iter().map(|x| x.is_finite().then_some(*x)).collect()
}

#[derive(Debug, Serialize)]
pub struct StudyReport {
    pub schema: u32,
    pub model: String,
    pub kind: &'static str,
    pub metric: &'static str,
    pub eps: Vec<f64>,
    /// `null` where the reference correction failed.
    pub errors_first: Vec<Option<f64>>,
    pub errors_higher: Vec<Option<f64>>,
    pub slope_first: f64,
    pub slope_higher: f64,
    pub fit_first: FitJson,
    pub fit_higher: FitJson,
    pub window: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<Vec<Option<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub all_converged: Option<bool>,
}

impl StudyReport {
    pub fn new(model: &str, dde: bool, r: &ConvergenceReport) -> Self {
        StudyReport {
            schema: SCHEMA,
            model: model.to_string(),
            kind: if dde { "dde" } else { "ode" },
            metric: if dde {
                "sup-norm residual of the predicted orbit"
            } else {
                "relative error of (alpha, T, x0) against the Newton-corrected LPC point"
            },
            eps: r.eps_grid.clone(),
            errors_first: finite(&r.errors_first),
            errors_higher: finite(&r.errors_higher),
            slope_first: r.slope_first,
            slope_higher: r.slope_higher,
            fit_first: (&r.fit_first).into(),
            fit_higher: (&r.fit_higher).into(),
            window: r.window,
            iterations: (!dde).then(|| r.iterations.clone()),
            all_converged: (!dde).then(|| r.iterations.iter().all(Option::is_some)),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResidualFamily {
    pub name: &'static str,
    pub h: Vec<f64>,
    pub residual: Vec<f64>,
    /// `null` when some residual is exactly zero (e.g. a parameter-independent equilibrium).
    pub slope: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ResidualReport {
    pub schema: u32,
    pub model: String,
    pub families: Vec<ResidualFamily>,
}

#[derive(Debug, Serialize)]
pub struct PredictFile {
    pub order: &'static str,
    pub table: String,
    pub orbit: String,
}

#[derive(Debug, Serialize)]
pub struct PredictReport {
    pub schema: u32,
    pub model: String,
    pub x0: Vec<f64>,
    pub alpha0: [f64; 2],
    pub omega0: f64,
    pub d2: f64,
    pub d3: f64,
    pub a3201: f64,
    pub eps: Vec<f64>,
    pub files: Vec<PredictFile>,
}
