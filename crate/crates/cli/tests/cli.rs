use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const REFERENCE: &str = r#"{"measures":[
  {"type":"bernstein-szego","a":{"re":"1/2","im":"0"}},
  {"type":"bernstein-szego","a":{"re":"-1/3","im":"0"}}]}"#;

const DUPLICATED: &str = r#"{"measures":[
  {"type":"bernstein-szego","a":{"re":"1/2"}},
  {"type":"bernstein-szego","a":{"re":"1/2"}}]}"#;

// normal well past |n| = 8 near the diagonal
const TRIG: &str = r#"{"measures":[
  {"type":"trig-density","coeffs":[{"k":1,"c":{"re":"1/4"}},{"k":2,"c":{"re":"1/8","im":"1/8"}},{"k":3,"c":{"re":"-1/10"}}]},
  {"type":"trig-density","coeffs":[{"k":1,"c":{"re":"0","im":"1/5"}},{"k":2,"c":{"re":"1/10"}},{"k":4,"c":{"re":"1/20"}}]}]}"#;

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        for (name, text) in [("ref.json", REFERENCE), ("dup.json", DUPLICATED), ("trig.json", TRIG)] {
            std::fs::write(dir.path().join(name), text).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, system: &str, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_mopuc"))
            .args(args)
            .arg("--system")
            .arg(self.path(system))
            .output()
            .unwrap()
    }

    fn json(&self, system: &str, args: &[&str]) -> (i32, Value) {
        let out = self.run(system, args);
        let code = out.status.code().unwrap();
        assert!(code != 2, "{}", String::from_utf8_lossy(&out.stderr));
        (code, serde_json::from_slice(&out.stdout).unwrap())
    }
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(out.stdout.as_slice());
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn moments_table() {
    let f = Fixture::new();
    let out = f.run("ref.json", &["moments", "--measure", "1", "--range", "-3..3", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["p", "value"]);
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[7], ["3", "1/8+0i"]);
    assert_eq!(rows[1], ["-3", "1/8+0i"]);

    let (_, v) = f.json("ref.json", &["moments", "--measure", "2", "--range", "2..2"]);
    assert_eq!(v["moments"][0]["value"]["re"], "1/9");
}

#[test]
fn missing_file_exits_2_and_names_path() {
    let out = Command::new(env!("CARGO_BIN_EXE_mopuc"))
        .args(["moments", "--system", "/no/such/system.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/system.json"));
}

#[test]
fn invalid_inputs_exit_2() {
    let f = Fixture::new();
    std::fs::write(f.path("bad.json"), r#"{"measures":[{"type":"bernstein-szego","a":{"re":"1"}}]}"#).unwrap();
    std::fs::write(f.path("empty.json"), r#"{"measures":[]}"#).unwrap();
    for (system, args) in [
        ("bad.json", vec!["moments"]),
        ("empty.json", vec!["moments"]),
        ("ref.json", vec!["moments", "--measure", "3"]),
        ("ref.json", vec!["coeffs", "--max", "1,1,1"]),
        ("ref.json", vec!["verify", "--max", "1,1", "--tol", "-1"]),
        ("ref.json", vec!["cd", "--path", "1,1,3"]),
        ("ref.json", vec!["cd", "--path", "round-robin", "--N", "4"]),
    ] {
        let out = f.run(system, &args);
        assert_eq!(out.status.code(), Some(2), "{system} {args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = f.run("empty.json", &["moments"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty system"));
}

#[test]
fn coeffs_box() {
    let f = Fixture::new();
    let out = f.run("ref.json", &["coeffs", "--max", "2,2", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(&rows[0][..5], ["n1", "n2", "status", "alpha", "beta"]);
    assert_eq!(rows.len(), 10);
    let row = |a: &str, b: &str| rows.iter().find(|r| r[0] == a && r[1] == b).unwrap().clone();
    assert_eq!(row("0", "0")[2..7], ["ok", "1+0i", "1+0i", "0+0i", "0+0i"]);
    assert_eq!(row("1", "1")[2..7], ["ok", "-1/6+0i", "-1+0i", "3/10+0i", "8/15+0i"]);
    let singular = row("2", "2");
    assert_eq!(singular[2], "non-normal");
    assert!(singular[3..].iter().all(String::is_empty));

    let (_, v) = f.json("ref.json", &["coeffs", "--max", "1,1"]);
    assert_eq!(v["coeffs"][3]["index"], serde_json::json!([1, 1]));
    assert_eq!(v["coeffs"][3]["alpha"]["re"], "-1/6");
}

#[test]
fn verify_exact_and_float() {
    let f = Fixture::new();
    let (code, v) = f.json("ref.json", &["verify", "--max", "3,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["failed"], 0);
    assert_eq!(v["max_residual"], 0.0);
    assert!(v["passed"].as_u64().unwrap() > 100);

    let (code, v) = f.json("ref.json", &["verify", "--max", "3,3", "--backend", "float"]);
    assert_eq!(code, 0);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);

    let (code, v) = f.json("ref.json", &["verify", "--index", "1,1", "--index", "2,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["failed"], 0);
    // checks reaching (2,2) are skipped: it is singular
    for r in v["reports"].as_array().unwrap() {
        if r["status"] == "precondition-failed" {
            assert!(r["required"].as_array().unwrap().contains(&serde_json::json!([2, 2])));
        }
    }
    let first = &v["reports"][0];
    assert_eq!(first["index"], serde_json::json!([1, 1]));
}

#[test]
fn verify_duplicated_system_skips_without_failing() {
    let f = Fixture::new();
    let (code, v) = f.json("dup.json", &["verify", "--max", "2,2"]);
    assert_eq!(code, 0);
    assert_eq!(v["failed"], 0);
    assert!(v["precondition_failed"].as_u64().unwrap() > 0);
    let non_normal = v["non_normal"].as_array().unwrap();
    assert!(non_normal.contains(&serde_json::json!([1, 1])));
    assert!(v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["status"] == "precondition-failed" && r["index"] == serde_json::json!([1, 1])));
}

#[test]
fn residual_failure_exits_1() {
    // float residuals are tiny but not below 1e-30
    let f = Fixture::new();
    let (code, v) = f.json("trig.json", &["verify", "--max", "2,2", "--backend", "float", "--tol", "1e-30"]);
    assert_eq!(code, 1);
    assert!(v["failed"].as_u64().unwrap() > 0);
}

#[test]
fn cd_paths() {
    let f = Fixture::new();
    let (code, v) = f.json("trig.json", &["cd", "--path", "round-robin", "--N", "6", "--points", "random:8", "--backend", "float"]);
    assert_eq!(code, 0);
    assert_eq!(v["evaluations"].as_array().unwrap().len(), 8);
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["path"]["endpoint"], serde_json::json!([3, 3]));

    let (code, v) = f.json("ref.json", &["cd", "--path", "stepline", "--target", "3,0", "--bivariate"]);
    assert_eq!(code, 0);
    assert_eq!(v["path"]["steps"], serde_json::json!([1, 1, 1]));
    assert_eq!(v["bivariate"]["agree"], true);
    assert_eq!(v["max_residual"], 0.0);

    let (code, v) = f.json("ref.json", &["cd", "--path", "2,1", "--points", "circle"]);
    assert_eq!(code, 0);
    let evals = v["evaluations"].as_array().unwrap();
    assert_eq!(evals.len(), 16);
    for e in evals {
        assert_eq!(e["rhs_total"]["re"], "0");
        assert_eq!(e["rhs_total"]["im"], "0");
    }

    let (code, v) = f.json("ref.json", &["cd", "--path", "admissible", "--N", "5", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
}

#[test]
fn stepline_matches_single_measure() {
    // along the first axis only mu_1 enters; compare against the r = 1 system
    let f = Fixture::new();
    std::fs::write(f.path("one.json"), r#"{"measures":[{"type":"bernstein-szego","a":{"re":"1/2"}}]}"#).unwrap();
    let (_, two) = f.json("ref.json", &["cd", "--path", "stepline", "--target", "3,0", "--points", "random:3"]);
    let (_, one) = f.json("one.json", &["cd", "--path", "stepline", "--target", "3", "--points", "random:3"]);
    for (a, b) in two["evaluations"].as_array().unwrap().iter().zip(one["evaluations"].as_array().unwrap()) {
        assert_eq!(a["lhs"][0], b["lhs"][0]);
        assert_eq!(a["lhs"][1]["re"], "0");
    }
}

#[test]
fn normality_maps() {
    let f = Fixture::new();
    let (_, v) = f.json("dup.json", &["normality-map", "--max", "3,3"]);
    for e in v["normality"].as_array().unwrap() {
        let n: Vec<u64> = e["index"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(e["normal"], n.iter().all(|&x| x == 0) || n.iter().any(|&x| x == 0), "{n:?}");
        if n.iter().all(|&x| x > 0) {
            assert_eq!(e["det_is_zero"], true);
        }
    }

    // two Bernstein-Szego measures: singular exactly when both entries >= 2
    let (_, v) = f.json("ref.json", &["normality-map", "--max", "4,4"]);
    for e in v["normality"].as_array().unwrap() {
        let n: Vec<u64> = e["index"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
        assert_eq!(e["normal"], n.iter().any(|&x| x <= 1), "{n:?}");
    }

    let out = f.run("ref.json", &["normality-map", "--max", "1,1", "--format", "csv", "--backend", "float"]);
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["n1", "n2", "verdict", "det", "abs_det", "det_is_zero", "rcond", "scaled_det"]);
    assert_eq!(rows.len(), 5);
}

#[test]
fn output_is_deterministic_and_can_go_to_file() {
    let f = Fixture::new();
    let args = ["cd", "--path", "random", "--N", "4", "--seed", "7", "--backend", "float"];
    let a = f.run("trig.json", &args);
    let b = f.run("trig.json", &args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let target = f.path("out.json");
    let out = f.run(
        "ref.json",
        &["verify", "--max", "2,2", "--out", target.to_str().unwrap()],
    );
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let first = std::fs::read(&target).unwrap();
    f.run("ref.json", &["verify", "--max", "2,2", "--out", target.to_str().unwrap()]);
    assert_eq!(first, std::fs::read(Path::new(&target)).unwrap());
}
