use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn run(args: &[&str]) -> Output {
    run_env(args, &[])
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_choirt"));
    c.args(args).env_remove("CHOIRT_TOL");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn inspect_reproduces_the_ambiguity() {
    let m = data("ambiguous.json");
    let o = run(&["choi", "inspect", path(&m), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("inspect_ambiguous.json"));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passing"], 2);
    assert!(v["verdict"].as_str().unwrap().starts_with("inconclusive"));
    let img = |k: usize| -> Vec<f64> {
        v["readings"][k]["image_of_zero"]["data"].as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect()
    };
    assert_eq!(img(0), vec![0.2, 0.0, 0.0, 0.8]);
    assert_eq!(img(1), vec![0.2, 0.4, 0.4, 0.8]);

    let h = run(&["choi", "inspect", path(&m)]);
    assert_eq!(stdout(&h), golden("inspect_ambiguous.txt"));
}

#[test]
fn inspect_choi_state_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("phi.json");
    std::fs::write(&f, r#"{"rows":4,"cols":4,"data":[[1,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[1,0]]}"#).unwrap();
    let o = run(&["choi", "inspect", path(&f), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passing"], 2);
    assert_eq!(v["readings"][0]["image_of_zero"], v["readings"][1]["image_of_zero"]);
    assert!(v["verdict"].as_str().unwrap().contains("agree"));
}

#[test]
fn parse_errors_exit_2() {
    assert_eq!(code(&run(&["choi", "inspect", path(&data("nonsquare.json"))])), 2);
    assert_eq!(code(&run(&["choi", "inspect", path(&data("ambiguous.json")), "--split", "3:2"])), 2);
    assert_eq!(code(&run(&["choi", "inspect", "/nonexistent/m.json"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("junk.json");
    std::fs::write(&f, "not json").unwrap();
    assert_eq!(code(&run(&["choi", "inspect", path(&f)])), 2);
    assert_eq!(code(&run(&["cdrt", "verify", "--theory", "imaginarity", "--dims", "2,x"])), 2);
    // a Choi JSON that is not a channel
    assert_eq!(code(&run(&["quant", "dmax-channel", "--theory", "imaginarity", "--choi", path(&data("bad_choi.json"))])), 2);
    // clap's own usage errors
    assert_eq!(code(&run(&["quant", "dmax-state"])), 2);
}

#[test]
fn unknown_theory_exits_3() {
    assert_eq!(code(&run(&["cdrt", "verify", "--theory", "nosuch"])), 3);
    let o = run(&["quant", "dmax-state", "--theory", "nosuch", "--state", path(&data("plus_i.json"))]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nosuch"));
}

#[test]
fn solver_failure_exits_4() {
    let o = run(&["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&data("plus_i.json")), "--max-iter", "2"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("max-iterations"));
}

#[test]
fn verify_examples() {
    let args = ["cdrt", "verify", "--theory", "imaginarity", "--dims", "2", "--samples", "20", "--closure-samples", "5", "--seed", "7", "--json"];
    let a = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), golden("verify_imaginarity.json"));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["tol"], 1e-8);
    assert_eq!(v["summary"]["ok"], true);

    let o = run(&["cdrt", "verify", "--theory", "imaginarity", "--dims", "2,3", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let o = run(&["cdrt", "verify", "--theory", "athermal-fixture", "--samples", "20"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("expected-fail matched"));
}

#[test]
fn quantities_match_goldens() {
    let o = run(&["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&data("plus_i.json")), "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), golden("dmax_state_plus_i.json"));
    let o = run(&[
        "quant", "convert-distance", "--theory", "imaginarity", "--rho", path(&data("diag.json")), "--sigma", path(&data("plus_i.json")), "--json",
    ]);
    assert_eq!(stdout(&o), golden("convert_distance.json"));
}

#[test]
fn quantity_examples() {
    let v = |args: &[&str]| -> Value {
        let o = run(args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_str(&stdout(&o)).unwrap()
    };
    let free = v(&["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&data("plus.json")), "--json"]);
    assert!(free["value"].as_f64().unwrap().abs() < 1e-6);
    let m = v(&["quant", "monotone", "--theory", "imaginarity", "--tau", path(&data("plus_i.json")), "--rho", path(&data("diag.json")), "--json"]);
    assert!(m["value"].as_f64().unwrap() >= m["lower_bound"].as_f64().unwrap() - 1e-9);
    assert_eq!(m["bound_satisfied"], true);
    // σ = |+><+| is the image of |+i> under a free (real) channel
    let c = v(&["quant", "convertible", "--theory", "imaginarity", "--rho", path(&data("plus_i.json")), "--sigma", path(&data("plus.json")), "--json"]);
    assert_eq!(c["convertible"], true);
    let c = v(&["quant", "convertible", "--theory", "imaginarity", "--rho", path(&data("diag.json")), "--sigma", path(&data("plus_i.json")), "--json"]);
    assert_eq!(c["convertible"], false);
    let ch = v(&["quant", "dmax-channel", "--theory", "imaginarity", "--choi", path(&data("s_gate.json")), "--json"]);
    assert!((ch["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn certificates_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut written = Vec::new();
    for k in 0..2 {
        let cert = dir.path().join(format!("cert{k}.json"));
        let o = run(&[
            "quant", "convert-distance", "--theory", "imaginarity", "--rho", path(&data("diag.json")), "--sigma", path(&data("plus_i.json")),
            "--json", "--certificate", path(&cert),
        ]);
        assert_eq!(code(&o), 0);
        written.push((stdout(&o), std::fs::read_to_string(&cert).unwrap()));
    }
    assert_eq!(written[0], written[1]);
    let cert: Value = serde_json::from_str(&written[0].1).unwrap();
    assert_eq!(cert["solution"]["status"], "optimal");
    assert!(cert["solution"]["primal"].is_array() && cert["solution"]["dual"].is_array());
    assert_eq!(cert["witness"]["out_dims"], serde_json::json!([2]));
}

#[test]
fn tolerance_env_override() {
    let state = data("plus_i.json");
    let args = ["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&state), "--json"];
    let o = run_env(&args, &[("CHOIRT_TOL", "1e-6")]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["tol"], 1e-6);
    // an explicit flag wins
    let mut with_flag = args.to_vec();
    with_flag.extend(["--tol", "1e-5"]);
    let v: Value = serde_json::from_str(&stdout(&run_env(&with_flag, &[("CHOIRT_TOL", "1e-6")]))).unwrap();
    assert_eq!(v["tol"], 1e-5);
    assert_eq!(code(&run_env(&args, &[("CHOIRT_TOL", "abc")])), 2);
}

#[test]
fn human_mode_rounds_small_values() {
    let o = run(&["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&data("plus.json"))]);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let shown = first.rsplit(": ").next().unwrap().trim_end_matches(" bits");
    let x: f64 = shown.parse().unwrap();
    assert!(x.abs() < 1e-6, "{first}");
    let o = run(&["quant", "dmax-state", "--theory", "imaginarity", "--state", path(&data("plus.json")), "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["value"].is_f64());
}
