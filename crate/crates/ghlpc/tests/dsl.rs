use ghlpc::analysis::Analysis;
use ghlpc::builtin::{Builtin, Model};
use ghlpc::dsl::{parse_model, DslError};
use ghlpc_core::jets::Jet;
use ghlpc_core::model::{eval_steady, VectorField};
use ghlpc_core::normal_form::Derivatives;
use proptest::prelude::*;

const HEADER: &str = "state x y\nparam a b\nconst k = 1.5\ndelay tau = 0.75\n";

fn atom() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("a".to_string()),
        Just("b".to_string()),
        Just("k".to_string()),
        Just("x(t - tau)".to_string()),
        Just("y(t - 0.5)".to_string()),
        (0.1f64..10.0).prop_map(|v| format!("{v}")),
    ]
}

fn expr() -> impl Strategy<Value = String> {
    atom().prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone(), prop::sample::select(vec!["+", "-", "*"]))
                .prop_map(|(l, r, op)| format!("({l}) {op} ({r})")),
            inner.clone().prop_map(|e| format!("-({e})")),
            inner.clone().prop_map(|e| format!("({e})^2")),
            inner.clone().prop_map(|e| format!("sin({e})")),
            inner.clone().prop_map(|e| format!("tanh({e})")),
            inner.prop_map(|e| format!("({e}) / (2 + cos(x))")),
        ]
    })
}

fn model_text(e1: &str, e2: &str) -> String {
    format!("{HEADER}dx = {e1}\ndy = {e2}\n")
}

fn sample_eval<M: VectorField>(m: &M, s: &[f64]) -> Vec<f64> {
    let states: Vec<&[f64]> = [&s[0..2], &s[2..4], &s[4..6]][..m.delays().len() + 1].to_vec();
    m.eval::<f64>(&states, &[s[6], s[7]]).unwrap()
}

proptest! {
    #[test]
    fn printing_round_trips(e1 in expr(), e2 in expr(), s in prop::array::uniform8(-1.0f64..1.0)) {
        let m = parse_model(&model_text(&e1, &e2)).unwrap();
        let printed = m.to_string();
        let m2 = parse_model(&printed).unwrap();
        prop_assert_eq!(&printed, &m2.to_string());
        prop_assert_eq!(&m.equations, &m2.equations);
        prop_assert_eq!(sample_eval(&m, &s), sample_eval(&m2, &s));
    }

    #[test]
    fn jet_constant_term_matches_scalar(e1 in expr(), e2 in expr(), s in prop::array::uniform8(-1.0f64..1.0)) {
        let m = parse_model(&model_text(&e1, &e2)).unwrap();
        let plain = sample_eval(&m, &s);
        let j: Vec<Jet> = s.iter().map(|v| Jet::constant(*v)).collect();
        let states: Vec<&[Jet]> = vec![&j[0..2], &j[2..4], &j[4..6]];
        let jets = m.eval::<Jet>(&states[..m.delays().len() + 1], &j[6..8]).unwrap();
        for (p, q) in plain.iter().zip(&jets) {
            prop_assert!((p - q.value()).abs() <= 1e-14 * p.abs().max(1.0), "{} vs {}", p, q.value());
        }
    }
}

#[test]
fn builtin_sources_match_native_right_hand_sides() {
    let pts = [[0.3, -0.2, 0.7, 0.1, 0.5, -0.4, 1.1, 0.2], [-0.8, 0.4, 0.0, 0.9, -0.1, 0.3, 2.3, -1.0]];
    for b in Builtin::ALL {
        let dsl = parse_model(b.source()).unwrap();
        let native = b.native();
        assert_eq!(dsl.dim(), native.dim(), "{}", b.name());
        assert_eq!(dsl.delays(), native.delays(), "{}", b.name());
        for s in &pts {
            let n = native.dim();
            let x: Vec<f64> = (0..n).map(|i| s[i % 8]).collect();
            let xd: Vec<f64> = (0..n).map(|i| s[(i + 3) % 8]).collect();
            let states: Vec<&[f64]> = if native.is_dde() { vec![&x, &xd] } else { vec![&x] };
            let p = [s[6], s[7]];
            let a = dsl.eval::<f64>(&states, &p).unwrap();
            let c = native.eval::<f64>(&states, &p).unwrap();
            for (u, v) in a.iter().zip(&c) {
                assert!((u - v).abs() <= 1e-14 * v.abs().max(1.0), "{}: {a:?} vs {c:?}", b.name());
            }
        }
    }
}

#[test]
fn bazykin_source_vanishes_at_its_equilibrium() {
    let m = parse_model(Builtin::BazykinKhibnik.source()).unwrap();
    let r = eval_steady(&m, &[0.25, 0.5], &[0.25, 0.125]).unwrap();
    assert!(r.iter().all(|v| v.abs() <= 1e-14), "{r:?}");
}

#[test]
fn lorenz_source_at_the_origin() {
    let m = parse_model(Builtin::Lorenz84.source()).unwrap();
    let r = eval_steady(&m, &[0.0; 4], &[2.0, 0.05]).unwrap();
    assert_eq!(r, vec![0.25 * 2.0, 0.25, 0.0, 0.05]);
}

#[test]
fn fhn_source_has_one_delay() {
    let m = parse_model(Builtin::FhnDde.source()).unwrap();
    assert_eq!(m.delays(), &[1.7722]);
    assert!(m.is_dde());
}

#[test]
fn dsl_models_reproduce_native_coefficients() {
    for b in Builtin::ALL {
        let g = b.guess();
        let dsl = Model::Dsl(parse_model(b.source()).unwrap());
        let native = b.native();
        for d in [Derivatives::Exact, Derivatives::Jets] {
            let (x, y) = (Analysis::run(&dsl, &g, d).unwrap(), Analysis::run(&native, &g, d).unwrap());
            let (px, py) = (x.predictor().unwrap(), y.predictor().unwrap());
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            assert!(rel(px.omega0, py.omega0) < 1e-12, "{}", b.name());
            assert!(rel(px.d2, py.d2) < 1e-10 && rel(px.d3, py.d3) < 1e-10, "{} {d:?}", b.name());
            assert!(rel(px.a3201, py.a3201) < 1e-10, "{} {d:?}", b.name());
            for (mu, k) in &py.k {
                let kx = px.k[mu];
                assert!((kx[0] - k[0]).abs() + (kx[1] - k[1]).abs() < 1e-10 * (1.0 + k[0].abs() + k[1].abs()));
            }
        }
    }
}

#[test]
fn diagnostics_carry_positions() {
    match parse_model("state x\nparam a b\ndx = x + q\n") {
        Err(DslError::UnknownIdentifier { line, col, .. }) => assert_eq!((line, col), (3, 10)),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_model("state x\nparam a\ndx = x\n"), Err(DslError::ParamCount { found: 1 })));
    assert!(matches!(parse_model("state x\nparam a b\ndelay s = -1\ndx = x\n"), Err(DslError::NonpositiveDelay { .. })));
    assert!(matches!(parse_model("state x y\nparam a b\ndx = x\n"), Err(DslError::MissingEquation { .. })));
}
