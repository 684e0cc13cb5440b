mod common;

use common::*;
use ghlpc_core::field::c;
use ghlpc_core::model::{BazykinKhibnik, FhnDde, Lorenz84, WithIdleDelay};
use ghlpc_core::predictor::{beta_of_eps, log_grid, psi_grid, Order};
use ghlpc_core::verify::*;
use ghlpc_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn lorenz_trajectory_self_converges() {
    let gh = lorenz_gh();
    let x0: Vec<f64> = gh.x0.iter().map(|v| v + 0.05).collect();
    let tol = Tolerances::default();
    let a = integrate(&Lorenz84::default(), &x0, gh.alpha0, 5.0, false, tol).unwrap();
    let half = Tolerances { rtol: tol.rtol / 2.0, atol: tol.atol / 2.0, ..tol };
    let b = integrate(&Lorenz84::default(), &x0, gh.alpha0, 5.0, false, half).unwrap();
    let d = a.x.iter().zip(&b.x).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn variational_flow_matches_differences() {
    let gh = lorenz_gh();
    let m = Lorenz84::default();
    let x0: Vec<f64> = gh.x0.iter().map(|v| v + 0.1).collect();
    let tol = Tolerances::default();
    let f = integrate(&m, &x0, gh.alpha0, 3.0, true, tol).unwrap();
    let phi = f.fundamental.unwrap();
    let h = 1e-6;
    for j in 0..4 {
        let (mut xp, mut xm) = (x0.clone(), x0.clone());
        xp[j] += h;
        xm[j] -= h;
        let p = integrate(&m, &xp, gh.alpha0, 3.0, false, tol).unwrap().x;
        let q = integrate(&m, &xm, gh.alpha0, 3.0, false, tol).unwrap().x;
        for i in 0..4 {
            let fd = (p[i] - q[i]) / (2.0 * h);
            assert!((fd - phi[(i, j)]).abs() < 1e-5, "({i},{j}) {fd} vs {}", phi[(i, j)]);
        }
    }
}

#[test]
fn corrector_converges_from_higher_seed() {
    let gh = bazykin_gh();
    let (_, p) = ode_setup(&BazykinKhibnik, &gh);
    let s = p.sample(0.1, &psi_grid(64), Order::Higher).unwrap();
    let seed = LpcSeed::from(&s);
    let c = correct_lpc(&BazykinKhibnik, &seed, &CorrectorOptions::default()).unwrap();
    assert!(c.iterations <= 6, "{}", c.iterations);
    assert!(c.newton_residual <= 1e-10);
    let again = correct_lpc(&BazykinKhibnik, &seed.restart(&c), &CorrectorOptions::default()).unwrap();
    assert!(again.iterations <= 1, "{}", again.iterations);
    let d = again.stacked().iter().zip(c.stacked()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(d < 1e-8, "{d}");
}

#[test]
fn corrector_reports_divergence() {
    let gh = bazykin_gh();
    let (_, p) = ode_setup(&BazykinKhibnik, &gh);
    let s = p.sample(0.3, &psi_grid(64), Order::Higher).unwrap();
    match correct_lpc(&BazykinKhibnik, &LpcSeed::from(&s), &CorrectorOptions::default()) {
        Err(Error::Convergence(_)) => {}
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn synthetic_cubic_slope() {
    let xs = log_grid(1e-3, 1e-1, 9);
    let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x * x * x).collect();
    let f = fit_slope(&xs, &ys).unwrap();
    assert!((f.slope - 3.0).abs() <= 1e-6);
    assert!(fit_window(&xs, &ys, 1e-6, 1e-4).is_err());
}

#[test]
fn amplitude_oracle_orders() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rho = log_grid(1e-3, 5e-2, 8);
    for _ in 0..20 {
        let d2 = rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let d3 = rng.gen_range(-3.0..3.0);
        let a = rng.gen_range(-3.0..3.0);
        let (mut e1, mut e2) = (vec![], vec![]);
        for &r in &rho {
            let o = amplitude_oracle(d2, d3, a, r).unwrap();
            let f = beta_of_eps(d2, d3, a, r, Order::Higher);
            e1.push((o[0] - f[0]).abs());
            e2.push((o[1] - f[1]).abs());
        }
        let (s1, s2) = (fit_slope(&rho, &e1).unwrap().slope, fit_slope(&rho, &e2).unwrap().slope);
        assert!(s1 >= 6.5 && s2 >= 4.5, "d2={d2} d3={d3} a={a}: {s1} {s2}");
    }
}

fn residual_slopes<M: ghlpc_core::model::VectorField>(m: &M, gh: &ghlpc_core::linode::GHPointODE) -> (f64, f64) {
    let (pc, _) = ode_setup(m, gh);
    let res = |w, b| homological_residual(m, &gh.x0, gh.alpha0, &pc.tables, w, b).unwrap();
    let ws = log_grid(1e-2, 1e-1, 6);
    let rw: Vec<f64> = ws.iter().map(|&h| res(c(h, 0.3 * h), [0.0, 0.0])).collect();
    let bs = log_grid(1e-3, 1.6e-2, 6);
    let rb: Vec<f64> = bs.iter().map(|&h| res(c(0.0, 0.0), [0.0, h])).collect();
    (fit_slope(&ws, &rw).unwrap().slope, fit_slope(&bs, &rb).unwrap().slope)
}

#[test]
fn homological_residual_orders() {
    let (w, b) = residual_slopes(&BazykinKhibnik, &bazykin_gh());
    assert!(w >= 7.5 && b >= 3.5, "bazykin {w} {b}");
    let (w, b) = residual_slopes(&Lorenz84::default(), &lorenz_gh());
    assert!(w >= 7.5 && b >= 3.5, "lorenz {w} {b}");
}

#[test]
fn dde_residual_of_ode_ignores_idle_delay() {
    let gh = bazykin_gh();
    let (_, p) = ode_setup(&BazykinKhibnik, &gh);
    for order in [Order::First, Order::Higher] {
        let s = p.sample(0.05, &psi_grid(64), order).unwrap();
        let a = dde_residual(&BazykinKhibnik, &s).unwrap();
        let b = dde_residual(&WithIdleDelay::new(BazykinKhibnik, 0.7), &s).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1e-300), "{a} {b}");
    }
}

#[test]
fn dde_residual_rejects_coarse_grid() {
    let gh = fhn_gh();
    let p = fhn_predictor(&gh);
    let s = p.sample(0.1, &psi_grid(5), Order::Higher).unwrap();
    assert!(dde_residual(&FhnDde::default(), &s).is_err());
}

#[test]
fn fhn_residual_study_separates_orders() {
    let gh = fhn_gh();
    let p = fhn_predictor(&gh);
    let r = dde_convergence_study(&FhnDde::default(), &p, &log_grid(0.01, 0.15, 12), 128).unwrap();
    assert!(r.slope_higher > r.slope_first + 1.5, "{} {}", r.slope_first, r.slope_higher);
    assert!(r.errors_first.iter().zip(&r.errors_higher).all(|(a, b)| b < a));
}

#[test]
fn ode_study_on_bazykin() {
    let gh = bazykin_gh();
    let (_, p) = ode_setup(&BazykinKhibnik, &gh);
    let r = ode_convergence_study(&BazykinKhibnik, &p, &log_grid(0.01, 0.15, 8), &CorrectorOptions::default()).unwrap();
    assert!(r.iterations.iter().all(|i| i.is_some()));
    assert!((r.slope_first - 4.0).abs() < 0.3, "{}", r.slope_first);
    assert!(r.slope_higher > r.slope_first, "{} {}", r.slope_first, r.slope_higher);
}
