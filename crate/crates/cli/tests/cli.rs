use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::{json, Value};

fn rhtool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhtool")).current_dir(dir).args(args).stdin(Stdio::null()).output().expect("spawn rhtool")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

fn scalar(x: f64) -> Value {
    json!({ "rows": 1, "cols": 1, "data": [[x, 0.0]] })
}

fn rank_one_model(theta: f64) -> Value {
    json!({ "n": 1, "m": 1, "R": scalar(0.5), "thetaF": scalar(theta), "t": scalar(1.0), "s": scalar(0.5) })
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), serde_json::to_string_pretty(v).unwrap()).unwrap();
}

#[test]
fn validate_good_and_broken_models() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    write(dir.path(), "broken.json", &rank_one_model(1.5));

    let ok = rhtool(dir.path(), &["validate", "good.json"]);
    assert_eq!(code(&ok), 0);
    let doc = stdout_json(&ok);
    assert_eq!(doc["result"]["kind"], "model");
    for r in doc["result"]["report"]["residuals"].as_array().unwrap() {
        assert!(r["value"].as_f64().unwrap() <= 1e-12, "{r}");
    }

    let bad = rhtool(dir.path(), &["validate", "broken.json"]);
    assert_eq!(code(&bad), 2);
    let doc = stdout_json(&bad);
    assert_eq!(doc["result"]["report"]["ok"], false);
}

#[test]
fn config_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    let o = rhtool(dir.path(), &["--tol", "1e-7", "--seed", "5", "--section", "-0.5", "rh", "good.json"]);
    assert_eq!(code(&o), 0);
    let cfg = &stdout_json(&o)["config"];
    assert_eq!(cfg["command"], "rh");
    assert_eq!(cfg["tol"], 1e-7);
    assert_eq!(cfg["seed"], 5);
    assert_eq!(cfg["section"], -0.5);
    assert_eq!(cfg["mode"], "numeric");
    assert_eq!(cfg["inputs"], json!(["good.json"]));
}

#[test]
fn rh_of_rank_one_model() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    let o = rhtool(dir.path(), &["rh", "good.json"]);
    assert_eq!(code(&o), 0);
    let r = &stdout_json(&o)["result"];
    // e(1/2) = -1, phi(1/2) = -4
    let entry = |k: &str| (r[k]["data"][0][0].as_f64().unwrap(), r[k]["data"][0][1].as_f64().unwrap());
    for (k, want) in [("T_E", -1.0), ("T_F", -1.0), ("C", -4.0), ("V", 0.5)] {
        let (re, im) = entry(k);
        assert!((re - want).abs() < 1e-12 && im.abs() < 1e-12, "{k} = {re} + {im}i");
    }
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    let o = rhtool(dir.path(), &["rh", "good.json", "--out", "data.json"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let doc: Value = serde_json::from_slice(&std::fs::read(dir.path().join("data.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["out"], "data.json");
    let back = rhtool(dir.path(), &["inv-rh", "data.json"]);
    assert_eq!(code(&back), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    std::fs::write(dir.path().join("trunc.json"), "{\"n\": 1,").unwrap();

    assert_eq!(code(&rhtool(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&rhtool(dir.path(), &["validate"])), 1);
    assert_eq!(code(&rhtool(dir.path(), &["validate", "missing.json"])), 1);
    assert_eq!(code(&rhtool(dir.path(), &["--tol", "-1", "validate", "good.json"])), 1);
    assert_eq!(code(&rhtool(dir.path(), &["--tol", "0", "validate", "good.json"])), 1);
    assert_eq!(code(&rhtool(dir.path(), &["--help"])), 0);

    let o = rhtool(dir.path(), &["rh", "trunc.json"]);
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_eq!(err["error"]["kind"], "usage");
    assert!(err["error"]["message"].as_str().unwrap().contains("malformed JSON"));
}

#[test]
fn malformed_entries_point_at_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = rank_one_model(0.5);
    m["thetaF"]["data"][0] = json!([0.5, "x"]);
    write(dir.path(), "bad.json", &m);
    let o = rhtool(dir.path(), &["validate", "bad.json"]);
    assert_eq!(code(&o), 1);
    let msg = stderr_json(&o)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("thetaF"), "{msg}");

    let mut m = rank_one_model(0.5);
    m["t"]["rows"] = json!("one");
    write(dir.path(), "bad2.json", &m);
    let o = rhtool(dir.path(), &["rh", "bad2.json"]);
    assert_eq!(code(&o), 1);
    let msg = stderr_json(&o)["error"]["message"].as_str().unwrap().to_string();
    assert!(msg.contains("t.rows"), "{msg}");
}

#[test]
fn generated_instances_validate() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["gen", "model", "--n", "3", "--m", "2"],
        &["gen", "rh-data", "--n", "2"],
        &["gen", "fd", "--k", "2", "--genus", "1"],
        &["--mode", "exact", "gen", "fd", "--k", "1", "--n", "3"],
        &["gen", "fuchsian", "--k", "3"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let o = rhtool(dir.path(), args);
        assert_eq!(code(&o), 0, "{args:?}");
        let name = format!("x{i}.json");
        std::fs::write(dir.path().join(&name), &o.stdout).unwrap();
        let mode = if args.contains(&"exact") { "exact" } else { "numeric" };
        let v = rhtool(dir.path(), &["--mode", mode, "validate", &name]);
        assert_eq!(code(&v), 0, "validate {args:?}: {}", String::from_utf8_lossy(&v.stdout));
    }
}

#[test]
fn exact_jordan_holder_and_s_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    // exact entries are [re, im] pairs of rational strings
    let mat = |rows: &[[i64; 2]]| {
        let data: Vec<Value> = rows.iter().flatten().map(|x| json!([x.to_string(), "0"])).collect();
        json!({ "rows": rows.len(), "cols": 2, "data": data })
    };
    let id = mat(&[[1, 0], [0, 1]]);
    let empty = json!({ "tauF": { "rows": 0, "cols": 0, "data": [] }, "C": { "rows": 0, "cols": 2, "data": [] }, "V": { "rows": 2, "cols": 0, "data": [] } });
    let fd =
        |a: Value| json!({ "genus": 1, "punctures": 1, "rho": { "a1": a, "b1": id.clone(), "c1": id.clone() }, "local": [empty.clone()] });
    write(dir.path(), "u.json", &fd(mat(&[[1, 1], [0, 1]])));
    write(dir.path(), "triv.json", &fd(id.clone()));

    let jh = rhtool(dir.path(), &["--mode", "exact", "jh", "u.json"]);
    assert_eq!(code(&jh), 0, "{}", String::from_utf8_lossy(&jh.stderr));
    let r = &stdout_json(&jh)["result"];
    assert_eq!(r["factors"].as_array().unwrap().len(), 2);
    assert_eq!(r["classes"].as_array().unwrap().len(), 1);
    assert_eq!(r["classes"][0]["multiplicity"], 2);

    let se = rhtool(dir.path(), &["--mode", "exact", "s-equiv", "u.json", "triv.json"]);
    assert_eq!(code(&se), 0);
    assert_eq!(stdout_json(&se)["result"]["s_equivalent"], true);
}

#[test]
fn fuchsian_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = rhtool(dir.path(), &["gen", "assemble-input", "--seed", "4"]);
    assert_eq!(code(&g), 0);
    std::fs::write(dir.path().join("in.json"), &g.stdout).unwrap();
    let a = rhtool(dir.path(), &["assemble", "in.json"]);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(stdout_json(&a)["result"]["report"]["ok"], true);

    let g = rhtool(dir.path(), &["gen", "fuchsian", "--seed", "4"]);
    std::fs::write(dir.path().join("sys.json"), &g.stdout).unwrap();
    let m = rhtool(dir.path(), &["monodromy", "sys.json"]);
    assert_eq!(code(&m), 0);
    assert!(stdout_json(&m)["result"]["relation_residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn stability_check_reports_weights() {
    let dir = tempfile::tempdir().unwrap();
    let g = rhtool(dir.path(), &["gen", "stability-input", "--n", "3", "--m", "2", "--seed", "2"]);
    assert_eq!(code(&g), 0);
    std::fs::write(dir.path().join("in.json"), &g.stdout).unwrap();
    let o = rhtool(dir.path(), &["stability-check", "in.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = &stdout_json(&o)["result"];
    let compatible = r["compatible"].as_bool().unwrap();
    assert_eq!(compatible, !r["weights"].is_null());
}

#[test]
fn shear_needs_alpha_for_targeted_moves() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "good.json", &rank_one_model(0.5));
    assert_eq!(code(&rhtool(dir.path(), &["shear", "--target", "down", "good.json"])), 1);
    let o = rhtool(dir.path(), &["shear", "--target", "down", "--alpha", "0.5,0", "good.json"]);
    assert_eq!(code(&o), 0);
    let r = &stdout_json(&o)["result"];
    assert!((r["R"]["data"][0][0].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn runs_are_deterministic() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for args in [&["gen", "resonant-model", "--n", "4", "--seed", "9"][..], &["--mode", "exact", "gen", "fd", "--seed", "3"][..]] {
        assert_eq!(rhtool(d1.path(), args).stdout, rhtool(d2.path(), args).stdout);
    }
    let g = rhtool(d1.path(), &["gen", "resonant-model", "--n", "4", "--seed", "9"]);
    std::fs::write(d1.path().join("m.json"), &g.stdout).unwrap();
    let a = rhtool(d1.path(), &["shear", "m.json"]);
    let b = rhtool(d1.path(), &["shear", "m.json"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}
