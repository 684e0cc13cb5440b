#![allow(dead_code)]

use ghlpc_core::dde::{dde_coeffs, refine_gh_dde, GHPointDDE};
use ghlpc_core::ghode::critical_coeffs;
use ghlpc_core::ghode_params::{param_coeffs, ParamCoeffs};
use ghlpc_core::linode::{refine_gh, GHPointODE};
use ghlpc_core::model::{steady_jacobian, BazykinKhibnik, FhnDde, Lorenz84};
use ghlpc_core::predictor::Predictor;

pub fn bazykin_gh() -> GHPointODE {
    let x = vec![0.25, 0.5];
    let a = steady_jacobian(&BazykinKhibnik, &x, &[0.25, 0.125]).unwrap();
    GHPointODE::new(x, [0.25, 0.125], a, 0.35).unwrap()
}

pub fn lorenz_gh() -> GHPointODE {
    refine_gh(&Lorenz84::default(), &[1.15, -0.03, 0.21, -0.51], [2.4, 0.05], 0.69).unwrap()
}

pub fn fhn_gh() -> GHPointDDE {
    refine_gh_dde(&FhnDde::default(), &[0.0, 0.0], [1.9, -1.0429], 0.072).unwrap().point
}

pub fn ode_setup<M: ghlpc_core::model::VectorField>(m: &M, gh: &GHPointODE) -> (ParamCoeffs, Predictor) {
    let cc = critical_coeffs(m, gh).unwrap();
    let pc = param_coeffs(m, gh, &cc).unwrap();
    let p = Predictor::new(&gh.x0, gh.alpha0, &cc, &pc).unwrap();
    (pc, p)
}

pub fn fhn_predictor(gh: &GHPointDDE) -> Predictor {
    let (cc, pc) = dde_coeffs(&FhnDde::default(), gh).unwrap();
    Predictor::new(&gh.x0, gh.alpha0, &cc, &pc).unwrap()
}
