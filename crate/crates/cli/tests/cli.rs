use std::process::{Command, Output};

use serde_json::Value;

fn dyadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = dyadic(&all);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn coeffs(v: &Value) -> Vec<String> {
    v["coeffs"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect()
}

#[test]
fn xseries_oracle_example() {
    let v = json(&["xseries", "--field", "q2", "--form", "x^2", "--rho", "1", "--L", "4", "--oracle"]);
    assert_eq!(v["L"], 4);
    assert_eq!(coeffs(&v), ["1/2", "1/2", "1/2", "1/4", "1/8"]);
}

#[test]
fn closed_form_agrees_with_oracle() {
    for (field, form, rho) in [("q2", "x_1^2+x_2^2+x_3^2", "4"), ("q4", "x^2", "1"), ("q2r", "(1+w^3)*x^2", "w^2")] {
        let base = ["xseries", "--field", field, "--form", form, "--rho", rho, "--L", "5"];
        let closed = json(&base);
        let mut with_oracle = base.to_vec();
        with_oracle.push("--oracle");
        assert_eq!(coeffs(&closed), coeffs(&json(&with_oracle)), "{field} {form} {rho}");
    }
}

#[test]
fn json_is_byte_identical_across_runs() {
    let args = ["--json", "pi", "--field", "q2", "--form", "x_1^2+x_2^2", "--planes", "1"];
    assert_eq!(dyadic(&args).stdout, dyadic(&args).stdout);
    let args = ["--json", "period", "--n", "5", "--alpha", "8", "--pmax", "200"];
    assert_eq!(dyadic(&args).stdout, dyadic(&args).stdout);
}

#[test]
fn classify_reports_case() {
    let v = json(&["classify", "--field", "q2", "--form", "x_1^2+x_2^2+x_3^2"]);
    assert_eq!(v["anisotropic"], true);
    assert_eq!(v["case"], "m3_h");
    assert_eq!(v["invariants"]["m"], 3);
    let v = json(&["classify", "--field", "q2", "--form", "x_1^2-x_2^2"]);
    assert_eq!(v["anisotropic"], false);
    assert!(v["case"].is_null());
}

#[test]
fn symbols_and_defects() {
    assert_eq!(json(&["hilbert", "--a", "-1", "--b", "-1"])["symbol"], -1);
    assert_eq!(json(&["hilbert", "--a", "3", "--b", "5"])["symbol"], 1);
    let v = json(&["defect", "--field", "q2", "--rho", "3"]);
    assert_eq!(v["defect"], serde_json::json!({ "kind": "defect", "d": 1 }));
}

#[test]
fn kernels_agree() {
    let base = ["count", "--form", "x_1^2+x_2^2+x_3^2", "--rho", "3", "--level", "4", "--kernel"];
    let naive = json(&[&base[..], &["naive"]].concat());
    let hist = json(&[&base[..], &["histogram"]].concat());
    assert_eq!(naive["value"], hist["value"]);
    assert_eq!(naive["ell"], 4);
}

#[test]
fn json_is_independent_of_thread_count() {
    let args = ["--json", "xseries", "--form", "x_1^2+x_2^2+x_3^2", "--rho", "3", "--L", "6", "--oracle"];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_dyadic")).args(args).env("RAYON_NUM_THREADS", threads).output().unwrap().stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn period_reports_bound() {
    let v = json(&["period", "--n", "4", "--alpha", "7", "--pmax", "500"]);
    assert_eq!(v["P_max"], 500);
    assert!(v["tail_bound"].as_str().unwrap().contains('e'));
}

#[test]
fn table_failures_exit_one() {
    let ok = dyadic(&["verify", "--tables", "--n", "3..5"]);
    assert_eq!(ok.status.code(), Some(0));
    let failing = dyadic(&["verify", "--tables", "--n", "6"]);
    assert_eq!(failing.status.code(), Some(1));
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["hilbert", "--a", "0", "--b", "1"][..],
        &["classify", "--field", "zp:9", "--form", "x^2"],
        &["xseries", "--form", "x_1", "--rho", "1"],
        &["count", "--form", "x^2", "--rho", "1", "--level", "2", "--kernel", "fast"],
        &["period", "--n", "4", "--alpha", "5"],
        &["no-such-command"],
    ] {
        let out = dyadic(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let out = dyadic(&["hilbert", "--a", "0", "--b", "1"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "usage");
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_dyadic"))
        .args(["count", "--form", "x_1^2+x_2^2", "--rho", "1", "--level", "6", "--kernel", "naive"])
        .env("DYADIC_ENUM_BUDGET", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
