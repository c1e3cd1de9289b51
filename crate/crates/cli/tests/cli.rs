use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn symword(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symword"))
        .args(args)
        .env("SYMWORD_WORKERS", "2")
        .output()
        .expect("binary runs")
}

/// Runs a command, checks it succeeded and validates the report against its schema.
fn report(args: &[&str]) -> Value {
    let out = symword(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    let schema_path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("schemas/{}.schema.json", args[0]));
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(&json)
        .map(|e| e.to_string())
        .collect();
    assert!(
        errors.is_empty(),
        "{} report fails its schema: {errors:?}",
        args[0]
    );
    json
}

#[test]
fn classify_conjugate_of_constant() {
    let r = report(&[
        "classify",
        "--word",
        "x1^-1 (1 2 3 4 5) x1",
        "--n",
        "5",
        "--r",
        "1",
    ]);
    let c = &r["result"]["classification"];
    assert_eq!(c["jminus"], serde_json::json!([1]));
    assert_eq!(c["regular"], false);
    assert_eq!(r["seed"], 0);
    assert_eq!(r["spec"]["word"], "x1^-1 (1 2 3 4 5) x1");
}

#[test]
fn kr_transposition_class() {
    let r = report(&[
        "kr",
        "--left",
        "class:(1 2)(3)(4)",
        "--right",
        "ncycles",
        "--n",
        "4",
        "--plan",
    ]);
    assert_eq!(
        r["result"]["value"],
        serde_json::json!({"num": 3, "den": 4})
    );
    assert_eq!(
        r["result"]["plan"]["cost"],
        serde_json::json!({"num": 3, "den": 4})
    );
}

#[test]
fn fold_triple() {
    let r = report(&["fold", "--r", "2", "--words", "x1^2,x2^2,x1 x2"]);
    assert_eq!(r["result"]["rank"], 3);
    assert_eq!(r["result"]["freeness"]["contained_in_smaller_rank"], true);
}

#[test]
fn every_command_validates() {
    report(&["exact-dist", "--word", "x1^2", "--n", "3"]);
    report(&[
        "sample-dist",
        "--word",
        "x1 (1 2)",
        "--n",
        "4",
        "--samples",
        "1000",
        "--symmetrize",
    ]);
    report(&["ncycle-coupling", "--class", "(1 2)", "--n", "4", "--check"]);
    report(&[
        "bound-check",
        "--word",
        "x1^2",
        "--n",
        "20",
        "--h",
        "1",
        "--d-max",
        "2",
        "--samples",
        "2000",
    ]);
    report(&[
        "tail",
        "--word",
        "x1^2",
        "--n",
        "30",
        "--thresholds",
        "5,10",
        "--samples",
        "2000",
    ]);
    report(&[
        "anneal",
        "--word",
        "x1^2 (1 2 3) x1^-1",
        "--n",
        "6",
        "--steps",
        "2000",
        "--restarts",
        "2",
    ]);
    report(&["sae", "--words", "x1, x2 x1 x2^-1", "--r", "2", "--n", "3"]);
    report(&[
        "sae",
        "--words",
        "x1, x2",
        "--r",
        "2",
        "--n",
        "5",
        "--mode",
        "sampled",
        "--samples",
        "500",
    ]);
    report(&[
        "sofic",
        "--words",
        "x1^2,x2^2,x1 x2",
        "--r",
        "2",
        "--degrees",
        "10,20",
        "--samples",
        "500",
        "--max-len",
        "2",
    ]);
}

#[test]
fn file_measure_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sq.json");
    let out = symword(&[
        "exact-dist",
        "--word",
        "x1^2",
        "--n",
        "4",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let wrapped: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let dist_path = dir.path().join("dist.json");
    std::fs::write(&dist_path, wrapped["result"].to_string()).unwrap();
    let spec = format!("file:{}", dist_path.display());
    let r = report(&["kr", "--left", &spec, "--right", "word:x1^2", "--n", "4"]);
    assert_eq!(r["result"]["value"]["num"], 0);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let json = dir.path().join(format!("{tag}.json"));
        let csv = dir.path().join(format!("{tag}.csv"));
        let out = symword(&[
            "tail",
            "--word",
            "x1^2 x2",
            "--r",
            "2",
            "--n",
            "25",
            "--thresholds",
            "2,4",
            "--samples",
            "5000",
            "--seed",
            "17",
            "--out",
            json.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (std::fs::read(json).unwrap(), std::fs::read(csv).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!(String::from_utf8(a.1)
        .unwrap()
        .starts_with("f,hits,estimate,ci_low,ci_high\n"));
}

#[test]
fn timing_is_opt_in() {
    let plain = report(&["fold", "--r", "1", "--words", "x1"]);
    assert!(plain.get("wall_time_seconds").is_none());
    let timed = report(&["fold", "--r", "1", "--words", "x1", "--timing"]);
    assert!(timed["wall_time_seconds"].is_number());
}

#[test]
fn guard_violations_fail_loudly() {
    let out = symword(&["sae", "--words", "x1, x2", "--r", "2", "--n", "5"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("budget"), "{err}");
    let out = symword(&[
        "bound-check",
        "--word",
        "x1^-1 (1 2 3) x1",
        "--n",
        "3",
        "--samples",
        "10",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not regular"));
    let out = symword(&["kr", "--left", "gauss", "--right", "uniform", "--n", "3"]);
    assert!(!out.status.success());
}
