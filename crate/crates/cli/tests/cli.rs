use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellipsf"))
        .args(args)
        .env("ELLIPSF_LOG", "error")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn texts(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|s| s.as_str().unwrap().to_string())
        .collect()
}

const QUINCUNX: &str = "1,1;1,-1";

#[test]
fn analyze_quincunx() {
    let v = json(&["analyze", "--matrix", QUINCUNX]);
    assert_eq!(v["q"], 2);
    assert_eq!(v["Q2"], serde_json::json!([["1", "0"], ["0", "1"]]));
    assert_eq!(v["W_text"], "x^2 + y^2");
    assert_eq!(v["isotropic"]["isotropic"], true);
    assert_eq!(v["coset_reps"], serde_json::json!([["0", "0"], ["1/2", "1/2"]]));
}

#[test]
fn analyze_second_matrix() {
    let v = json(&["analyze", "--matrix", "1,-2;1,0"]);
    assert_eq!(v["Q2"], serde_json::json!([["2", "1/2"], ["1/2", "1"]]));
    assert_eq!(v["invariance_report"]["matrix_identity"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["analyze", "--matrix", "2,0;0,3"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--matrix", "1,x"]).status.code(), Some(5));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(5));
    assert_eq!(run(&["space", "--matrix", QUINCUNX, "--order", "0"]).status.code(), Some(5));
    assert_eq!(run(&["mask", "--matrix", QUINCUNX, "--nonstat", "exp=1"]).status.code(), Some(5));
    assert_eq!(run(&["cascade", "--matrix", QUINCUNX, "--box", "3:1"]).status.code(), Some(5));
    // an initial window at the largest radius leaves nothing to compare against
    assert_eq!(run(&["space", "--matrix", QUINCUNX, "--window", "16"]).status.code(), Some(4));
    assert_eq!(run(&["space", "--matrix", QUINCUNX, "--lmax", "2"]).status.code(), Some(3));
    assert_eq!(run(&["cascade", "--matrix", QUINCUNX, "--nonstat", "X=2i*x1"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn help_lists_exit_codes() {
    let out = run(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("4  kernel did not stabilize"));
}

#[test]
fn masks() {
    let v = json(&["mask", "--matrix", QUINCUNX]);
    assert_eq!(v["mask"]["form"], "1/2 + 1/4*cos(ξ1) + 1/4*cos(ξ2)");
    assert_eq!(v["mask"]["periodic"], true);
    let coeffs = v["mask"]["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 5);
    assert!(coeffs.contains(&serde_json::json!({"k": [0, 0], "re": "1/2", "im": "0"})));
    assert!(coeffs.contains(&serde_json::json!({"k": [2, 0], "re": "1/8", "im": "0"})));

    let v = json(&["mask", "--matrix", QUINCUNX, "--higher", "6"]);
    assert_eq!(
        v["mask"]["form"],
        "15/32 + 1/64*cos(2ξ1) + 1/4*cos(ξ1) + 1/64*cos(2ξ2) + 1/4*cos(ξ2)"
    );

    let v = json(&["mask", "--matrix", QUINCUNX, "--nonstat", "X=2i*x1", "--scale", "0"]);
    assert_eq!(v["mask"]["form"], "1/2 + 1/4*cos(ξ1) - 1/4*i*sin(ξ1) + 1/4*cos(ξ2)");
    assert_eq!(v["stationary"], false);
}

#[test]
fn space_quincunx() {
    let v = json(&["space", "--matrix", QUINCUNX]);
    let basis = texts(&v["basis_text"]);
    for p in ["1", "x", "y", "x^2 - y^2", "x*y", "x^3 - 3*x*y^2", "3*x^2*y - y^3"] {
        assert!(basis.contains(&p.to_string()), "{p} missing from {basis:?}");
    }
    // G is a sum of one-variable terms, which also lets x³y − xy³ through
    assert!(basis.contains(&"x^3*y - x*y^3".to_string()));
    assert_eq!(v["order"], 4);
    assert_eq!(v["scale_invariant"], true);
    assert_eq!(v["route_agreement"]["agree"], true);
}

#[test]
fn space_nonstationary_quincunx() {
    let v = json(&["space", "--matrix", QUINCUNX, "--nonstat", "X=2i*x1"]);
    let basis = texts(&v["basis_text"]);
    for p in ["1", "y", "y^2 + x"] {
        assert!(basis.contains(&p.to_string()), "{p} missing from {basis:?}");
    }
    assert_eq!(v["scale_invariant"], false);
    assert_eq!(texts(&v["affine_subspace_text"]), vec!["1", "y"]);
    assert_eq!(v["route_agreement"]["agree"], true);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["space", "--matrix", "1,-2;1,0"]).stdout;
    let b = run(&["space", "--matrix", "1,-2;1,0"]).stdout;
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("e-"), "floats carry an exponent");
}

#[test]
fn cascade_csv_partition_of_unity() {
    let out = run(&["cascade", "--matrix", QUINCUNX, "--levels", "8", "--box", "-6:6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2,value"));
    // A⁸ = 16·I, so the grid is (ℤ/16)² and x is recovered exactly
    let mut grid = std::collections::HashMap::new();
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        grid.insert(((f[0] * 16.0).round() as i64, (f[1] * 16.0).round() as i64), f[2]);
    }
    assert_eq!(grid.len(), 193 * 193);
    for x0 in [(5, 2), (0, 0), (-7, 11), (13, -3)] {
        let mut s = 0.0;
        for k1 in -4..=4 {
            for k2 in -4..=4 {
                s += grid.get(&(x0.0 - 16 * k1, x0.1 - 16 * k2)).copied().unwrap_or(0.0);
            }
        }
        assert!((s - 1.0).abs() < 1e-6, "partition sum {s} at {x0:?}");
    }
}

#[test]
fn verify_quincunx() {
    let v = json(&["verify", "--matrix", QUINCUNX]);
    assert!(v["annihilation_max"].as_f64().unwrap() < 1e-10);
    assert!(v["partition_of_unity_error"].as_f64().unwrap() < 1e-6);
    for r in v["reproduction_residuals"].as_array().unwrap() {
        assert!(r["residual"].as_f64().unwrap() < 1e-6, "{r}");
    }
    assert_eq!(v["passed"], true);
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("ellipsf-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("analyze.json");
    let out = run(&["analyze", "--matrix", QUINCUNX, "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["q"], 2);
    std::fs::remove_dir_all(&dir).unwrap();
}
