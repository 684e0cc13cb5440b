mod common;

use common::*;
use ghlpc_core::dde::{bordered_inv_dde, dde_coeffs};
use ghlpc_core::ghode::critical_coeffs;
use ghlpc_core::ghode_params::param_coeffs;
use ghlpc_core::linode::{bordered_inv, GHPointODE};
use ghlpc_core::model::{BazykinKhibnik, FhnDde, Lorenz84, VectorField};
use ghlpc_core::normal_form::Coeff;
use ghlpc_core::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: C64, b: C64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300)
}

fn scalars(cc: (C64, C64, C64), g3201: Option<C64>) -> [C64; 4] {
    [cc.0, cc.1, cc.2, g3201.unwrap()]
}

fn ode_rotation<M: VectorField>(m: &M, gh: &GHPointODE) {
    let cc = critical_coeffs(m, gh).unwrap();
    let pc = param_coeffs(m, gh, &cc).unwrap();
    let base = scalars((cc.c1, cc.c2, cc.c3), pc.g3201);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let theta = rng.gen_range(0.0..core::f64::consts::TAU);
        let r = gh.rotated(theta);
        let cr = critical_coeffs(m, &r).unwrap();
        let pr = param_coeffs(m, &r, &cr).unwrap();
        for (a, b) in scalars((cr.c1, cr.c2, cr.c3), pr.g3201).iter().zip(&base) {
            assert!(close(*a, *b, 1e-9), "θ={theta}: {a} vs {b}");
        }
    }
}

#[test]
fn coefficients_are_phase_invariant() {
    ode_rotation(&BazykinKhibnik, &bazykin_gh());
    ode_rotation(&Lorenz84::default(), &lorenz_gh());
    let gh = fhn_gh();
    let m = FhnDde::default();
    let (cc, pc) = dde_coeffs(&m, &gh).unwrap();
    let base = scalars((cc.c1, cc.c2, cc.c3), pc.g3201);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..8 {
        let theta = rng.gen_range(0.0..core::f64::consts::TAU);
        let (cr, pr) = dde_coeffs(&m, &gh.rotated(theta)).unwrap();
        for (a, b) in scalars((cr.c1, cr.c2, cr.c3), pr.g3201).iter().zip(&base) {
            assert!(close(*a, *b, 1e-9), "θ={theta}: {a} vs {b}");
        }
    }
}

fn conj_symmetric<V: Coeff>(h: &std::collections::BTreeMap<[u8; 4], V>, thetas: &[f64]) {
    for (i, v) in h {
        let j = [i[1], i[0], i[2], i[3]];
        let w = h.get(&j).unwrap_or_else(|| panic!("{j:?} missing"));
        for &t in thetas {
            for (a, b) in v.value_at(t).iter().zip(w.value_at(t)) {
                assert!((a - b.conj()).norm() <= 1e-10 * (1.0 + a.norm()), "{i:?} at θ={t}");
            }
        }
    }
}

#[test]
fn center_manifold_table_is_conjugate_symmetric() {
    conj_symmetric(&ode_setup(&BazykinKhibnik, &bazykin_gh()).0.tables.h, &[0.0]);
    conj_symmetric(&ode_setup(&Lorenz84::default(), &lorenz_gh()).0.tables.h, &[0.0]);
    let gh = fhn_gh();
    let (_, pc) = dde_coeffs(&FhnDde::default(), &gh).unwrap();
    conj_symmetric(&pc.tables.h, &[0.0, -0.5, -gh.char.lags()[0]]);
}

#[test]
fn bordered_inverse_annihilates_eigenvector() {
    for gh in [bazykin_gh(), lorenz_gh()] {
        let z = bordered_inv(&gh.a, gh.omega0, &gh.q, &gh.p, &gh.q).unwrap();
        assert!(z.iter().map(|v| v.norm()).sum::<f64>() < 1e-12);
    }
    let gh = fhn_gh();
    let zero = vec![C64::new(0.0, 0.0); gh.q.len()];
    let z = bordered_inv_dde(&gh, &zero, &[gh.q.clone()], false).unwrap();
    for t in [0.0, -0.9, -gh.char.lags()[0]] {
        assert!(z.eval(t).iter().map(|v| v.norm()).sum::<f64>() < 1e-12, "θ={t}");
    }
}

fn ode_fredholm<M: VectorField>(m: &M, gh: &GHPointODE) -> (f64, f64) {
    let cc = critical_coeffs(m, gh).unwrap();
    let pc = param_coeffs(m, gh, &cc).unwrap();
    (cc.diag.fredholm, pc.diag.fredholm)
}

#[test]
fn fredholm_residuals_stay_small() {
    let (cc, pc) = dde_coeffs(&FhnDde::default(), &fhn_gh()).unwrap();
    for (a, b) in [
        ode_fredholm(&BazykinKhibnik, &bazykin_gh()),
        ode_fredholm(&Lorenz84::default(), &lorenz_gh()),
        (cc.diag.fredholm, pc.diag.fredholm),
    ] {
        assert!(a <= 1e-9 && b <= 1e-9, "{a} {b}");
    }
}
