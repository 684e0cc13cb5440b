//! Locating the GH point and computing every coefficient for either model kind.

use ghlpc_core::dde::{dde_coeffs_with, refine_gh_dde, GHPointDDE, HistoryFn};
use ghlpc_core::ghode::{critical_coeffs_with, CriticalCoeffs};
use ghlpc_core::ghode_params::{param_coeffs_with, ParamCoeffs};
use ghlpc_core::linode::{refine_gh, GHPointODE};
use ghlpc_core::model::VectorField;
use ghlpc_core::normal_form::Derivatives;
use ghlpc_core::predictor::Predictor;
use ghlpc_core::Result;

use crate::builtin::GhGuess;

pub enum Analysis {
    Ode { gh: GHPointODE, crit: CriticalCoeffs, params: ParamCoeffs },
    Dde { gh: GHPointDDE, crit: CriticalCoeffs<HistoryFn>, params: ParamCoeffs<HistoryFn> },
}

impl Analysis {
    pub fn run<M: VectorField>(model: &M, guess: &GhGuess, backend: Derivatives) -> Result<Self> {
        if model.is_dde() {
            let gh = refine_gh_dde(model, &guess.x, guess.alpha, guess.omega)?.point;
            let (crit, params) = dde_coeffs_with(model, &gh, backend)?;
            Ok(Analysis::Dde { gh, crit, params })
        } else {
            let gh = refine_gh(model, &guess.x, guess.alpha, guess.omega)?;
            let crit = critical_coeffs_with(model, &gh, backend)?;
            let params = param_coeffs_with(model, &gh, &crit, backend)?;
            Ok(Analysis::Ode { gh, crit, params })
        }
    }

    pub fn x0(&self) -> &[f64] {
        match self {
            Analysis::Ode { gh, .. } => &gh.x0,
            Analysis::Dde { gh, .. } => &gh.x0,
        }
    }

    pub fn alpha0(&self) -> [f64; 2] {
        match self {
            Analysis::Ode { gh, .. } => gh.alpha0,
            Analysis::Dde { gh, .. } => gh.alpha0,
        }
    }

    pub fn predictor(&self) -> Result<Predictor> {
        match self {
            Analysis::Ode { gh, crit, params } => Predictor::new(&gh.x0, gh.alpha0, crit, params),
            Analysis::Dde { gh, crit, params } => Predictor::new(&gh.x0, gh.alpha0, crit, params),
        }
    }
}
