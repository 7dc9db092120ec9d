use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homothetic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn err_json(args: &[&str], code: i32) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(v["schema_version"], "1");
    assert_eq!(v["error"]["exit_code"], code);
    v["error"].clone()
}

#[test]
fn analyze_cobb_douglas() {
    let v = ok_json(&[
        "--no-timestamp",
        "analyze",
        "--expr",
        "x^0.5*y^0.5",
        "--vars",
        "x,y",
    ]);
    assert_eq!(v["schema_version"], "1");
    assert!(v.get("generated_at_unix").is_none());
    assert!((v["degree"]["degree"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["flatness"]["verdict"], "Flat");
    assert!(v["flatness"]["max_residual"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["homotheticity"]["homothetic"], true);
    assert_eq!(v["input"]["seed"], 42);
}

#[test]
fn analyze_not_flat_has_witness() {
    let v = ok_json(&["analyze", "--expr", "x^2*y", "--vars", "x,y"]);
    assert!((v["degree"]["degree"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(v["flatness"]["verdict"], "NotFlat");
    assert_eq!(v["flatness"]["witness"].as_array().unwrap().len(), 2);
    assert!(v["generated_at_unix"].as_u64().is_some());
}

#[test]
fn analyze_with_outer_and_constants() {
    let v = ok_json(&[
        "--const",
        "k=2",
        "analyze",
        "--expr",
        "x^k + y^k",
        "--outer",
        "power:alpha=1,p=0.5,beta=0",
    ]);
    assert_eq!(v["input"]["vars"], serde_json::json!(["x", "y"]));
    assert_eq!(
        v["classification"]["case"]["case"],
        "linear_homogeneous_up_to_constants"
    );
    assert!(
        v["identities"]["composite_hessian"]["max_relerr"]
            .as_f64()
            .unwrap()
            <= 1e-9
    );
}

#[test]
fn syntax_error_position() {
    let e = err_json(&["analyze", "--expr", "x*("], 2);
    assert_eq!(e["kind"], "SyntaxError");
    assert_eq!(e["column"], 3);
    let e = err_json(&["analyze", "--expr", "x*q", "--vars", "x"], 2);
    assert_eq!(e["kind"], "UnknownIdentifier");
}

#[test]
fn domain_error() {
    let e = err_json(&["analyze", "--expr", "ln(x-5)"], 2);
    assert_eq!(e["kind"], "DomainError");
}

#[test]
fn usage_errors_are_json() {
    let e = err_json(&["verify", "--identity", "nonsense"], 2);
    assert_eq!(e["kind"], "UsageError");
    err_json(&["--tol-flat", "1", "--tol-reject", "0.1", "models"], 2);
}

#[test]
fn classify_cases() {
    let v = ok_json(&[
        "classify",
        "--inner",
        "(2*x+3*y)^2",
        "--outer",
        "power:alpha=1,p=3,beta=0",
        "--degree",
        "2",
    ]);
    let c = &v["classification"]["case"];
    assert_eq!(c["case"], "inner_perfect_substitute_power");
    assert!((c["a"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((c["b"].as_f64().unwrap() - 3.0).abs() < 1e-9);

    let v = ok_json(&[
        "classify",
        "--inner",
        "x+sqrt(y*z)",
        "--outer",
        "power:alpha=1,p=2,beta=0",
        "--degree",
        "1",
    ]);
    assert_eq!(v["classification"]["case"]["case"], "profile_flat");
    assert_eq!(
        v["classification"]["profile_text"],
        "(1.0 + sqrt((u2 * u3)))"
    );

    let v = ok_json(&[
        "classify",
        "--inner",
        "x1^2+x2^2+x3^2",
        "--outer",
        "affine:alpha=1,beta=0",
        "--degree",
        "2",
    ]);
    assert_eq!(v["classification"]["case"]["case"], "not_flat");
}

#[test]
fn classify_negative_degree_and_mismatch() {
    let v = ok_json(&[
        "classify",
        "--inner",
        "1/x+1/y",
        "--outer",
        "power:alpha=-1,p=-1,beta=0",
        "--degree",
        "-1",
    ]);
    assert_eq!(
        v["classification"]["case"]["case"],
        "linear_homogeneous_up_to_constants"
    );
    err_json(
        &[
            "classify",
            "--inner",
            "x*y",
            "--outer",
            "affine:alpha=1,beta=0",
            "--degree",
            "3",
        ],
        2,
    );
}

#[test]
fn inconsistent_exit_code() {
    let e = err_json(
        &[
            "--tol-reject",
            "1",
            "classify",
            "--inner",
            "x^2*y",
            "--outer",
            "affine:alpha=1,beta=0",
            "--degree",
            "3",
        ],
        3,
    );
    assert_eq!(e["kind"], "Inconsistent");
    assert_eq!(e["evidence"]["flatness"]["verdict"], "Indeterminate");
}

#[test]
fn verify_factorization() {
    let v = ok_json(&[
        "--no-timestamp",
        "verify",
        "--identity",
        "eq2.8",
        "--trials",
        "100",
        "--seed",
        "42",
    ]);
    assert_eq!(v["input"]["identity"], "factorization");
    assert!(v["max_relerr"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["trials"].as_array().unwrap().len(), 100);
}

#[test]
fn verify_composite_columns() {
    let v = ok_json(&[
        "verify",
        "--identity",
        "composite-hessian",
        "--trials",
        "20",
    ]);
    let t = &v["trials"][0];
    assert!(t["rhs_corrected"].is_number());
    assert!(t["rhs_uncorrected"].is_number());
}

#[test]
fn verify_full_power_fails_with_ratio() {
    let out = run(&[
        "--no-timestamp",
        "verify",
        "--identity",
        "composite-hessian-full-power",
        "--trials",
        "40",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "ToleranceExceeded");
    assert!(err["error"]["evidence"]["inner"].is_string());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let failures = report["failures"].as_array().unwrap();
    assert!(!failures.is_empty());
    for f in failures {
        let ratio = f["ratio_uncorrected_to_lhs"].as_f64().unwrap();
        let fp = f["f_prime"].as_f64().unwrap();
        assert!((ratio - fp).abs() <= 1e-9 * fp.abs(), "{ratio} vs {fp}");
        assert!(f["point"].is_array() && f["outer"].is_string());
    }
}

#[test]
fn verify_other_identities() {
    for id in ["power-ode", "bracket-chain", "eq4.4"] {
        let v = ok_json(&["verify", "--identity", id, "--trials", "30"]);
        assert_eq!(v["passed"], true, "{id}");
    }
}

#[test]
fn grid_model_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cd.csv");
    let out = run(&[
        "--no-timestamp",
        "grid",
        "--model",
        "cobb-douglas:gamma=1,alpha=0.3:0.7",
        "--range",
        "0.5:2",
        "--steps",
        "50",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x1,x2,f,det_hess,gauss_kronecker,mrs_1_2"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2500);
    for r in &rows {
        let k: f64 = r.split(',').nth(4).unwrap().parse().unwrap();
        assert!(k.abs() <= 1e-10);
    }
    let side: Value =
        serde_json::from_str(&std::fs::read_to_string(csv.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(side["rows_written"], 2500);
    assert_eq!(side["rows_skipped"], 0);
}

#[test]
fn grid_expression_to_stdout() {
    let out = run(&["grid", "--expr", "x*y", "--steps", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.split(',').nth(3) == Some("-1.0")));
}

#[test]
fn grid_skips_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("g.csv");
    let side = dir.path().join("meta.json");
    let out = run(&[
        "--json",
        side.to_str().unwrap(),
        "grid",
        "--expr",
        "ln(x-1)+y",
        "--range",
        "0.5:2",
        "--steps",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(v["rows_skipped"], 8);
    assert_eq!(v["rows_written"], 8);
}

#[test]
fn grid_rejects_zero_steps() {
    let e = err_json(&["grid", "--expr", "x*y", "--steps", "0"], 2);
    assert_eq!(e["kind"], "UsageError");
}

#[test]
fn models_grid_and_single() {
    let v = ok_json(&["models"]);
    assert!(v["pairs"].as_array().unwrap().len() >= 40);
    assert_eq!(v["mismatches"], 0);

    let v = ok_json(&["models", "--model", "acms:gamma=1,a=1:1,rho=2,d=1"]);
    assert_eq!(v["model"]["elasticity"], -1.0);
    assert_eq!(v["pairs"][0]["expected"], "Flat");

    let v = ok_json(&[
        "models",
        "--model",
        "cobb-douglas:alpha=2:1",
        "--outer",
        "power:p=0.3333333333333333",
    ]);
    assert_eq!(v["pairs"][0]["numerical"], "Flat");
    assert_eq!(v["pairs"][0]["strict_reading"], "NotFlat");

    let v = ok_json(&["models", "--model", "perfsub:a=2:3", "--outer", "expr:u^3"]);
    assert!(v["analytic"]["error"].is_string());
    assert_eq!(v["numerical"]["verdict"], "Flat");
}

#[test]
fn json_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = run(&[
        "--json",
        path.to_str().unwrap(),
        "analyze",
        "--expr",
        "x1*x2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(v["command"], "analyze");
}

#[test]
fn deterministic_reports() {
    let args = [
        "--no-timestamp",
        "--seed",
        "7",
        "analyze",
        "--expr",
        "x^0.3*y^0.7 + 1",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
