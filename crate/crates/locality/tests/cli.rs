use std::path::Path;
use std::process::{Command, Output};

fn locality(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locality")).args(args).env_remove("LOCALITY_SEED").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = locality(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a.csv"), dir.path().join("b.csv"), dir.path().join("c.csv"));
    ok(&["generate", "--n", "300", "--seed", "4", "--out", s(&a)]);
    ok(&["generate", "--n", "300", "--seed", "4", "--out", s(&b)]);
    ok(&["generate", "--n", "300", "--seed", "5", "--out", s(&c)]);
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_ne!(bytes, std::fs::read(&c).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert_eq!(text.lines().next(), Some("x0,x1,label"));
    assert_eq!(text.lines().count(), 301);
    assert!(dir.path().join("a.csv.manifest.json").exists());
}

#[test]
fn seed_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    ok(&["generate", "--n", "50", "--seed", "9", "--out", s(&a)]);
    let out = Command::new(env!("CARGO_BIN_EXE_locality"))
        .args(["generate", "--n", "50", "--out", s(&b)])
        .env("LOCALITY_SEED", "9")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn train_explain_fidelity_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("moons.csv");
    let model = dir.path().join("model.json");
    ok(&["generate", "--n", "500", "--seed", "1", "--out", s(&data)]);
    let out = ok(&["train", "--data", s(&data), "--seed", "1", "--trees", "60", "--out", s(&model)]);
    let line = String::from_utf8(out.stdout).unwrap();
    let auc: f64 = line.trim().strip_prefix("test_auc ").unwrap().parse().unwrap();
    assert!(auc >= 0.9, "{line}");

    let out =
        ok(&["explain", "--data", s(&data), "--seed", "1", "--model", s(&model), "--method", "lime", "--index", "0"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["kernel_width"].as_f64().unwrap() - 0.75 * 2f64.sqrt()).abs() < 1e-12);
    assert_eq!(json["coefficients"].as_array().unwrap().len(), 2);
    assert!(json["boundary_point"].is_null());

    let e = dir.path().join("ls.json");
    ok(&[
        "explain",
        "--data",
        s(&data),
        "--seed",
        "1",
        "--model",
        s(&model),
        "--method",
        "ls",
        "--point",
        "0.5,-0.2",
        "--out",
        s(&e),
    ]);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&e).unwrap()).unwrap();
    assert_eq!(json["boundary_point"].as_array().unwrap().len(), 2);
    assert!(json["boundary_distance"].as_f64().unwrap() > 0.0);

    let report = dir.path().join("fid.json");
    let heat = dir.path().join("heat.csv");
    ok(&[
        "fidelity",
        "--data",
        s(&data),
        "--seed",
        "1",
        "--model",
        s(&model),
        "--method",
        "ls",
        "--n-samples",
        "800",
        "--n-eval",
        "300",
        "--r-fid",
        "0.2",
        "--heatmap",
        s(&heat),
        "--out",
        s(&report),
    ]);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["per_instance"].as_array().unwrap().len(), 100);
    assert!(json["mean"].as_f64().unwrap() > 0.5);
    let heat = std::fs::read_to_string(heat).unwrap();
    assert_eq!(heat.lines().next(), Some("x0,x1,index,score"));
    assert_eq!(heat.lines().count(), 101);

    let first = std::fs::read(&report).unwrap();
    ok(&["replay", "--manifest", s(&dir.path().join("fid.json.manifest.json"))]);
    assert_eq!(first, std::fs::read(&report).unwrap());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    assert_eq!(locality(&["generate", "--n", "0", "--out", s(&data)]).status.code(), Some(2));
    ok(&["generate", "--n", "100", "--out", s(&data)]);
    let model = dir.path().join("m.json");
    assert_eq!(locality(&["train", "--data", s(&data), "--trees", "0", "--out", s(&model)]).status.code(), Some(2));
    ok(&["train", "--data", s(&data), "--trees", "5", "--out", s(&model)]);
    let explain = ["explain", "--data", s(&data), "--model", s(&model), "--method", "shap", "--index", "0"];
    assert_eq!(locality(&explain).status.code(), Some(2));
    assert_eq!(locality(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    assert_eq!(locality(&["train", "--data", s(&missing), "--out", "x.json"]).status.code(), Some(3));
    let multi = dir.path().join("multi.csv");
    std::fs::write(&multi, "a,label\n1,x\n2,y\n3,z\n").unwrap();
    assert_eq!(locality(&["train", "--data", s(&multi), "--out", "x.json"]).status.code(), Some(3));
}

#[test]
fn preprocess_keeps_numeric_columns() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    let out = dir.path().join("clean.csv");
    std::fs::write(&raw, "a,name,b,y\n1,foo,2,yes\n3,bar,6,no\n5,baz,10,yes\n").unwrap();
    ok(&["preprocess", "--input", s(&raw), "--target", "y", "--standardize", "--out", s(&out)]);
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("a,b,label"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((first[0] + 1.224744871391589).abs() < 1e-12);
    assert_eq!(first[2], 1.0);
}

#[test]
fn singleton_evaluation_set_has_zero_spread() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("moons.csv");
    let model = dir.path().join("model.json");
    let report = dir.path().join("one.json");
    ok(&["generate", "--n", "400", "--seed", "2", "--out", s(&data)]);
    ok(&["train", "--data", s(&data), "--seed", "2", "--trees", "40", "--out", s(&model)]);
    let mut index = None;
    for i in 0..80 {
        let out = locality(&[
            "fidelity",
            "--data",
            s(&data),
            "--seed",
            "2",
            "--model",
            s(&model),
            "--method",
            "lime",
            "--n-samples",
            "500",
            "--n-eval",
            "200",
            "--r-fid",
            "0.3",
            "--max-eval-instances",
            "1",
            "--eval-seed",
            &i.to_string(),
            "--out",
            s(&report),
        ]);
        if out.status.success() {
            index = Some(i);
            break;
        }
        assert_eq!(out.status.code(), Some(4));
    }
    assert!(index.is_some(), "every single-instance run was skipped");
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(json["per_instance"].as_array().unwrap().len(), 1);
    assert_eq!(json["std"].as_f64(), Some(0.0));
}
