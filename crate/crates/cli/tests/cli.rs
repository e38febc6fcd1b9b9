use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metrofan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(rel: &str) -> String {
    data(rel).to_string_lossy().into_owned()
}

#[test]
fn analyze_generic_row() {
    let v = json(&run(&["analyze", &path("generic5/1.json")]));
    assert_eq!(v["f_vector"], serde_json::json!([20, 90, 140, 70]));
    assert_eq!(v["generic"], true);
    assert_eq!(v["class"], "STRICT");
    assert_eq!(v["stabilizer_order"], 2);
    assert_eq!(v["metric"]["d"][0], "16");
}

#[test]
fn analyze_reports_split_prime_metric() {
    let v = json(&run(&["analyze", &path("examples/split5_rho2.json")]));
    assert_eq!(v["classes"]["totally_split_decomposable"], false);
    assert_eq!(v["classes"]["residual_norm_zero"], false);
}

#[test]
fn analyze_uniform_metric_has_full_stabilizer() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("ones.txt");
    std::fs::write(&file, "1 1 1 1 1 1\n").unwrap();
    let dots = dir.path().join("dot");
    let v = json(&run(&[
        "analyze",
        file.to_str().unwrap(),
        "--facets",
        "--dot",
        dots.to_str().unwrap(),
    ]));
    assert_eq!(v["stabilizer_order"], 24);
    assert_eq!(v["f_vector"], serde_json::json!([12, 24, 14]));
    let graphs = v["facet_graphs"].as_array().unwrap();
    assert_eq!(graphs.len(), 14);
    assert_eq!(std::fs::read_dir(&dots).unwrap().count(), 14);
    let first = std::fs::read_to_string(dots.join("facet_001.dot")).unwrap();
    assert!(first.starts_with("digraph"));
}

#[test]
fn analyze_output_is_byte_identical_across_runs() {
    let a = run(&["analyze", &path("strict5/9.10.json")]);
    let b = run(&["analyze", &path("strict5/9.10.json")]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3, \"d\": [1, 2").unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    let triangle = dir.path().join("triangle.txt");
    std::fs::write(&triangle, "1 1 5\n").unwrap();
    assert_eq!(run(&["analyze", triangle.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(run(&["arrangement", "--n", "6", "--count"]).status.code(), Some(4));
    assert_eq!(run(&["reproduce", "nonsense"]).status.code(), Some(2));
}

#[test]
fn arrangement_counts() {
    let v = json(&run(&["arrangement", "--n", "4", "--count"]));
    assert_eq!(v["hyperplane_count"], 3);
    assert_eq!(v["count"]["chambers"], 6);
    assert_eq!(v["hyperplanes"][0]["label"], "H_(1,3),(2,4)");
    let v = json(&run(&["arrangement", "--n", "5", "--count"]));
    assert_eq!(v["count"]["chambers"], 882);
    assert_eq!(v["count"]["characteristic_polynomial"][0], serde_json::json!([10, 1]));
    let v = json(&run(&["arrangement", "--n", "6"]));
    assert_eq!(v["hyperplane_count"], 105);
    assert_eq!(v["lineality_dim"], 6);
}

#[test]
fn compare_example_pairs() {
    let cmp = |a: &str, b: &str| json(&run(&["compare", &path(a), &path(b)]));
    let v = cmp("examples/split5_rho1.json", "examples/split5_rho2.json");
    assert_eq!(v, serde_json::json!({"same_wasserstein_cone": true, "same_tight_span_type": false, "same_f_vector": true}));
    let v = cmp("examples/tree4_rho1.json", "examples/tree4_rho2.json");
    assert_eq!(v, serde_json::json!({"same_wasserstein_cone": false, "same_tight_span_type": true, "same_f_vector": false}));
    let v = cmp("table2/1.json", "table2/1.json");
    assert_eq!(v, serde_json::json!({"same_wasserstein_cone": true, "same_tight_span_type": true, "same_f_vector": true}));
}

#[test]
fn reproduce_targets_pass() {
    for target in ["table1", "table2", "generic5", "table3-strict5"] {
        let out = run(&["reproduce", target]);
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(out.status.success(), "{target}: {err}");
        assert!(err.contains("PASS"), "{target}: {err}");
    }
    let out = run(&["reproduce", "table2"]);
    let csv = String::from_utf8_lossy(&out.stdout);
    assert_eq!(csv.lines().next(), Some("id,f_vector"));
    assert_eq!(csv.lines().nth(4), Some("4,12 24 14"));
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_metrofan"))
        .args(["arrangement", "--n", "4"])
        .env("METROFAN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_metrofan"))
        .args(["reproduce", "table2"])
        .env("METROFAN_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
}
