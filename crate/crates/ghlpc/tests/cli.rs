use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn ghlpc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ghlpc")).args(args).output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let i = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[i].parse().unwrap()).collect()
}

#[test]
fn coeffs_report_for_each_builtin() {
    let dir = tempfile::tempdir().unwrap();
    for (name, l2, tol) in [("bazykin-khibnik", -1.986494770740791, 1e-9), ("lorenz84", 0.22567, 1e-4), ("fhn-dde", -15.6733, 1e-3)] {
        let out = dir.path().join(name);
        let o = ghlpc(&["coeffs", "--builtin", name, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let v = json(&out.join("coeffs.json"));
        assert_eq!(v["schema"], 1);
        assert!((v["l2"].as_f64().unwrap() - l2).abs() <= tol, "{name}: {}", v["l2"]);
        assert!(v["c1"]["re"].is_f64() && v["c1"]["im"].is_f64());
        for key in ["2100", "3200", "4300", "1010", "0001", "2101"] {
            assert!(v["H"][key]["value"].is_array(), "{name}: H{key}");
        }
        assert_eq!(v["H"]["2100"]["terms"].is_array(), name == "fhn-dde");
        for mu in ["10", "01", "11", "02", "03"] {
            assert!(v["K"][mu].is_array(), "{name}: K{mu}");
        }
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(ghlpc(&["coeffs", "--builtin", "lorenz84", "--out", d.to_str().unwrap()]).status.success());
        assert!(ghlpc(&["predict", "--builtin", "lorenz84", "--out", d.to_str().unwrap()]).status.success());
    }
    for f in ["coeffs.json", "predict.json", "predict_higher.csv", "predict_first_orbit.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn predict_both_orders_share_the_eps_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = ghlpc(&["predict", "--builtin", "bazykin-khibnik", "--order", "both", "--eps-count", "9", "--psi-points", "16", "--out", out]);
    assert!(o.status.success());
    let e1 = column(&dir.path().join("predict_first.csv"), "eps");
    let eh = column(&dir.path().join("predict_higher.csv"), "eps");
    assert_eq!(e1, eh);
    assert_eq!(e1.len(), 9);
    assert_eq!((e1[0], e1[8]), (0.01, 0.15));
    assert!(e1.windows(2).all(|w| w[0] < w[1]));
    for f in ["predict_first.csv", "predict_higher.csv"] {
        for c in ["alpha1", "alpha2", "T"] {
            assert!(column(&dir.path().join(f), c).iter().all(|v| v.is_finite()));
        }
    }
    assert_eq!(column(&dir.path().join("predict_higher_orbit.csv"), "eps").len(), 9 * 16);
    let v = json(&dir.path().join("predict.json"));
    assert_eq!(v["files"].as_array().unwrap().len(), 2);
}

#[test]
fn predicted_lpc_curve_leaves_the_hopf_curve_on_one_side() {
    // Near the GH point the LPC curve is tangent to the Hopf curve n = m²/(1 − 2m),
    // separating from it at fourth order in ε.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(ghlpc(&["predict", "--builtin", "bazykin-khibnik", "--order", "higher", "--out", out]).status.success());
    let f = dir.path().join("predict_higher.csv");
    let (m, n, eps) = (column(&f, "alpha1"), column(&f, "alpha2"), column(&f, "eps"));
    let gap: Vec<f64> = m.iter().zip(&n).map(|(m, n)| n - m * m / (1.0 - 2.0 * m)).collect();
    assert!(gap.iter().all(|g| g.signum() == gap[0].signum() && *g != 0.0));
    let slope = ghlpc_core::verify::fit_slope(&eps, &gap.iter().map(|g| g.abs()).collect::<Vec<_>>()).unwrap().slope;
    assert!((slope - 4.0).abs() < 0.3, "{slope}");
}

#[test]
fn verify_reports_converged_corrections() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(ghlpc(&["verify", "--builtin", "bazykin-khibnik", "--out", out]).status.success());
    let v = json(&dir.path().join("verify.json"));
    assert_eq!(v["all_converged"], true);
    assert_eq!(v["eps"].as_array().unwrap().len(), 12);
    assert!(v["slope_higher"].as_f64().unwrap() > v["slope_first"].as_f64().unwrap());
    assert_eq!(column(&dir.path().join("verify.csv"), "iterations").len(), 12);
}

#[test]
fn verify_dde_separates_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(ghlpc(&["verify", "--builtin", "fhn-dde", "--out", out]).status.success());
    let v = json(&dir.path().join("verify.json"));
    assert!(v["slope_higher"].as_f64().unwrap() - v["slope_first"].as_f64().unwrap() >= 1.5);
    assert!(v.get("all_converged").is_none());
}

#[test]
fn model_file_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bk.ghm");
    fs::write(&path, ghlpc::builtin::Builtin::BazykinKhibnik.source()).unwrap();
    let out = dir.path().join("out");
    let o = ghlpc(&[
        "coeffs",
        "--model",
        path.to_str().unwrap(),
        "--gh-guess",
        "x=0.25:0.5,alpha=0.25:0.125,omega=0.35",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l2 = json(&out.join("coeffs.json"))["l2"].as_f64().unwrap();
    assert!((l2 + 1024.0 * 2f64.sqrt() / 729.0).abs() < 1e-9);
}

#[test]
fn residual_command_writes_both_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert!(ghlpc(&["residual", "--builtin", "lorenz84", "--out", out]).status.success());
    let v = json(&dir.path().join("residual.json"));
    let fams = v["families"].as_array().unwrap();
    assert!(fams[0]["slope"].as_f64().unwrap() >= 7.5);
    assert!(fams[1]["slope"].as_f64().unwrap() >= 3.5);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ghm");
    fs::write(&bad, "state x\nparam a b\ndx = x +* a\n").unwrap();
    let o = ghlpc(&["coeffs", "--model", bad.to_str().unwrap(), "--gh-guess", "x=0,alpha=0:0,omega=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:"));

    let good = dir.path().join("good.ghm");
    fs::write(&good, "state x\nparam a b\ndx = a*x\n").unwrap();
    assert_eq!(ghlpc(&["coeffs", "--model", good.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(ghlpc(&["coeffs", "--builtin", "nope"]).status.code(), Some(2));
    assert_eq!(ghlpc(&["frobnicate", "--builtin", "lorenz84"]).status.code(), Some(2));
    assert_eq!(ghlpc(&["coeffs", "--model", dir.path().join("missing.ghm").to_str().unwrap()]).status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = ghlpc(&["coeffs", "--builtin", "bazykin-khibnik", "--out", blocker.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
